"""Write a polynomial symbol as a combination of double brackets.

Basis elements are

    XXP(n, m) = {{x^n, {{x^n, p^m}}}}     leading term x^(2n-2) p^(m-2)
    PXP(n, m) = {{p^m, {{x^n, p^m}}}}     leading term x^(n-2) p^(2m-2)

with the Moyal bracket (or the Poisson bracket for classical targets).  The
Moyal bracket is homogeneous once hbar is given weight 2, so every element is
homogeneous and ``hbar^s * element`` is a legitimate basis vector for targets
that carry explicit hbar powers.

The solver first divides the target by the elements' leading terms (graded by
weighted degree, classical part first, then x-degree).  Whatever survives is
run through a full exact row reduction over Q(sqrt2) with all basis vectors;
terms that still survive are reported as the residual.  Leading terms of both
element families always have an even power of x or of p, so monomials
x^a p^b with a and b both odd never reduce.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from .moyal import P, X, PolynomialXP, Surd, double_bracket
from .schemes import (DEFAULT_T2, ChinBlock, PhaseBlock, SeparableBlock,
                      scheme_by_name)

__all__ = [
    "BracketBasisElement", "DecompositionTerm", "DecompositionResult",
    "build_basis", "decompose", "schedule_from_decomposition",
    "hamiltonian_schedule", "split_separable", "leading_key",
]

KINDS = ("XXP", "PXP")


def leading_key(mono: Tuple[int, int, int]):
    """Order on monomials (x, p, hbar): weighted degree, fewest hbar, x-degree."""
    i, j, k = mono
    return (i + j + 2 * k, -k, i)


def _lead(poly: PolynomialXP):
    if not poly:
        return None
    return max((m for m, _ in poly.items()), key=leading_key)


@dataclass(frozen=True)
class BracketBasisElement:
    n: int
    m: int
    kind: str  # "XXP" or "PXP"
    bracket: str = "moyal"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")

    @property
    def expansion(self) -> PolynomialXP:
        return _expansion(self.n, self.m, self.kind, self.bracket)

    @property
    def expected_lead(self) -> Tuple[int, int]:
        if self.kind == "XXP":
            return (2 * self.n - 2, self.m - 2)
        return (self.n - 2, 2 * self.m - 2)

    @property
    def weight(self) -> int:
        """Weighted degree (hbar counts 2) of the homogeneous expansion."""
        return sum(self.expected_lead)

    def generators(self) -> Tuple[PolynomialXP, PolynomialXP, int]:
        """(A, B, sign) with element = sign * {{A, {{A, B}}}}."""
        xn = X ** self.n
        pm = P ** self.m
        if self.kind == "XXP":
            return xn, pm, 1
        return pm, xn, -1

    def __str__(self):
        return f"{self.kind}({self.n},{self.m})"


@lru_cache(maxsize=None)
def _expansion(n: int, m: int, kind: str, bracket: str) -> PolynomialXP:
    xn, pm = X ** n, P ** m
    outer = xn if kind == "XXP" else pm
    return double_bracket(outer, xn, pm, bracket)


def build_basis(N: int, M: int, kinds=KINDS, bracket: str = "moyal") -> List[BracketBasisElement]:
    """All elements with n <= N+2, m <= M+2 whose expansion is nonzero."""
    if N < 0 or M < 0:
        raise ValueError("N and M must be non-negative")
    out = []
    for kind in kinds:
        for n in range(1, N + 3):
            for m in range(1, M + 3):
                e = BracketBasisElement(n, m, kind, bracket.lower())
                if e.expansion:
                    out.append(e)
    return out


@dataclass(frozen=True)
class DecompositionTerm:
    element: BracketBasisElement
    coeff: Surd
    hbar_power: int = 0

    @property
    def scalar(self) -> PolynomialXP:
        """``coeff * hbar^hbar_power`` as a polynomial."""
        return PolynomialXP.monomial(0, 0, self.hbar_power, self.coeff)

    def value(self) -> PolynomialXP:
        return self.scalar * self.element.expansion

    def __str__(self):
        h = "" if self.hbar_power == 0 else (" hbar" if self.hbar_power == 1 else f" hbar^{self.hbar_power}")
        return f"{self.coeff}{h} * {self.element}"


@dataclass
class DecompositionResult:
    target: PolynomialXP
    terms: List[DecompositionTerm]
    residual: PolynomialXP
    bracket: str = "moyal"
    method: str = "leading-term"
    rank: int = 0
    columns: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.residual

    @property
    def rank_defect(self) -> int:
        return self.columns - self.rank

    def reassemble(self) -> PolynomialXP:
        out = PolynomialXP()
        for t in self.terms:
            out = out + t.value()
        return out

    def coefficient(self, element: BracketBasisElement, hbar_power: int = 0) -> Surd:
        total = Surd()
        for t in self.terms:
            if t.element == element and t.hbar_power == hbar_power:
                total = total + t.coeff
        return total

    def report(self) -> str:
        lines = [f"target: {self.target}", f"bracket: {self.bracket}  method: {self.method}"]
        for t in self.terms:
            lines.append(f"  {t}")
        if self.columns:
            lines.append(f"basis columns: {self.columns}  rank: {self.rank}")
        lines.append(f"residual: {self.residual}")
        lines.extend(self.notes)
        return "\n".join(lines)


def _add_term(terms: Dict, elem, s, c):
    key = (elem, s)
    terms[key] = terms.get(key, Surd()) + c
    if not terms[key]:
        del terms[key]


def _divide(target: PolynomialXP, basis: List[BracketBasisElement], max_s: int):
    """Leading-term division; returns (coefficients, remainder)."""
    # PXP first so it wins ties on the leading monomial
    by_lead: Dict[Tuple[int, int, int], Tuple[BracketBasisElement, int]] = {}
    for e in sorted(basis, key=lambda e: e.kind != "PXP"):
        i, j, k = _lead(e.expansion)
        for s in range(max_s + 1):
            by_lead.setdefault((i, j, k + s), (e, s))
    coeffs: Dict = {}
    residual = target
    remainder = PolynomialXP()
    while residual:
        mono = _lead(residual)
        c = residual.coeff(*mono)
        hit = by_lead.get(mono)
        if hit is None:
            piece = PolynomialXP({mono: c})
            remainder = remainder + piece
            residual = residual - piece
            continue
        e, s = hit
        ec = e.expansion.coeff(*_lead(e.expansion))
        q = c / ec
        _add_term(coeffs, e, s, q)
        residual = residual - PolynomialXP.monomial(0, 0, s, q) * e.expansion
    return coeffs, remainder


def _row_reduce(target: PolynomialXP, basis: List[BracketBasisElement], max_s: int, max_w: int):
    """Exact echelon reduction over every (element, hbar^s) column."""
    pivots: Dict[Tuple[int, int, int], Tuple[PolynomialXP, Dict]] = {}
    columns = 0
    for e in basis:
        for s in range(max_s + 1):
            if e.weight + 2 * s > max_w:
                continue
            columns += 1
            vec = PolynomialXP.monomial(0, 0, s) * e.expansion
            combo = {(e, s): Surd(Fraction(1))}
            vec, combo = _reduce(vec, combo, pivots)
            if vec:
                pivots[_lead(vec)] = (vec, combo)
    rest, combo = _reduce(target, {}, pivots, keep_going=True)
    return combo, rest, len(pivots), columns


def _reduce(vec: PolynomialXP, combo: Dict, pivots, keep_going: bool = False):
    """Cancel pivot monomials of ``vec``; ``combo`` tracks the column mix."""
    combo = dict(combo)
    done = PolynomialXP()
    while vec:
        mono = _lead(vec)
        if mono not in pivots:
            if not keep_going:
                return vec + done, combo
            piece = PolynomialXP({mono: vec.coeff(*mono)})
            done = done + piece
            vec = vec - piece
            continue
        pv, pcombo = pivots[mono]
        q = vec.coeff(*mono) / pv.coeff(*mono)
        vec = vec - PolynomialXP.constant(q) * pv
        # a column being reduced loses q*pivot; a target gains q*pivot in its expansion
        step = q if keep_going else -q
        for key, c in pcombo.items():
            combo[key] = combo.get(key, Surd()) + step * c
            if not combo[key]:
                del combo[key]
    return done, combo


def decompose(target: PolynomialXP, bracket: str = "moyal",
              basis: Optional[List[BracketBasisElement]] = None) -> DecompositionResult:
    bracket = bracket.lower()
    if bracket == "poisson" and target.hbar_degree > 0:
        raise ValueError("Poisson decompositions take hbar-free targets")
    if not target:
        return DecompositionResult(target, [], PolynomialXP(), bracket)
    N, M = target.degrees()
    if basis is None:
        basis = build_basis(N, M, bracket=bracket)
    # Moyal corrections push hbar powers up to half the weighted degree
    max_w = max(leading_key(m)[0] for m, _ in target.items())
    max_s = max_w // 2 if bracket == "moyal" else 0
    coeffs, rest = _divide(target, basis, max_s)
    method = "leading-term"
    rank = columns = 0
    notes = []
    if rest:
        combo, rest2, rank, columns = _row_reduce(rest, basis, max_s, max_w)
        method = "leading-term + row reduction"
        for (e, s), c in combo.items():
            _add_term(coeffs, e, s, c)
        rest = rest2
        if columns > rank:
            notes.append(f"rank defect: {columns - rank} dependent basis columns")
        if rest:
            odd = [m for m, _ in rest.items() if m[0] % 2 and m[1] % 2]
            notes.append(f"unspanned monomials: {len(list(rest.items()))} ({len(odd)} with odd x and odd p degree)")
    terms = [DecompositionTerm(e, c, s) for (e, s), c in
             sorted(coeffs.items(), key=lambda kv: (-kv[0][0].weight - 2 * kv[0][1], kv[0][0].kind, kv[0][0].n, kv[0][0].m, kv[0][1]))]
    return DecompositionResult(target, terms, rest, bracket, method, rank, columns, notes)


# -- schedules -------------------------------------------------------------

def _exact_sqrt(q: Surd) -> Optional[Surd]:
    """sqrt of a positive rational r or 2r square, when it lies in Q(sqrt2)."""
    if not q.is_rational or q.a <= 0:
        return None
    r = q.a
    for scale, b_part in ((1, False), (Fraction(1, 2), True)):
        v = r * scale
        num, den = v.numerator, v.denominator
        sn, sd = int(round(num ** 0.5)), int(round(den ** 0.5))
        if sn * sn == num and sd * sd == den:
            root = Fraction(sn, sd)
            return Surd(Fraction(0), root) if b_part else Surd(root)
    return None


def _block_for(term: DecompositionTerm, hbar: float, scheme) -> object:
    """Chin block realising ``-i dt * term`` with unit block coefficient when possible.

    The inner generator B (degree d) is scaled by sign(c)/(d(d-1)) and the outer
    one by sqrt(|c|/|beta|), so the block coefficient becomes 1.  For the Kerr
    mid term this gives exactly p^2/(2 sqrt2) and x^4/12.
    """
    elem = term.element
    if elem.expansion.is_constant:
        return PhaseBlock(term.value())
    A, B, sign = elem.generators()
    if term.hbar_power == 0:
        c = term.coeff * sign
        d = B.total_degree
        beta = Surd(Fraction(1 if float(c) > 0 else -1, d * (d - 1) if d > 1 else 1))
        alpha = _exact_sqrt(c / beta)
        if alpha is not None:
            return ChinBlock(A * alpha, B * beta, 1.0, scheme)
        return ChinBlock(A, B * beta, float(c / beta), scheme)
    cval = float(term.coeff) * sign * hbar ** term.hbar_power
    return ChinBlock(A, B, cval, scheme)


def schedule_from_decomposition(result: DecompositionResult, hbar: float = 1.0,
                                scheme: str = "u9", t2: float = DEFAULT_T2) -> list:
    """One Chin block per term (phase blocks for constants), in term order."""
    if not result.ok:
        raise ValueError(f"decomposition has nonzero residual {result.residual}")
    sch = scheme_by_name(scheme, t2)
    if sch.name == "strang":
        raise ValueError("double-bracket blocks need a Chin scheme (u9 or u7)")
    blocks = [_block_for(t, hbar, sch) for t in result.terms]
    chins = [b for b in blocks if not isinstance(b, PhaseBlock)]
    phases = [b for b in blocks if isinstance(b, PhaseBlock)]
    if len(phases) > 1:
        total = PolynomialXP()
        for ph in phases:
            total = total + ph.constant
        phases = [PhaseBlock(total)]
    return chins + phases


def split_separable(h: PolynomialXP):
    """(p-only part, mixed part, x-only part, constant)."""
    t, mixed, v, const = {}, {}, {}, {}
    for (i, j, k), c in h.items():
        if i and j:
            mixed[(i, j, k)] = c
        elif j:
            t[(i, j, k)] = c
        elif i:
            v[(i, j, k)] = c
        else:
            const[(i, j, k)] = c
    return tuple(PolynomialXP(d) for d in (t, mixed, v, const))


def hamiltonian_schedule(h: PolynomialXP, hbar: float = 1.0, scheme: str = "u9",
                         t2: float = DEFAULT_T2) -> list:
    """Canonical order: p-only factor, Chin blocks for the mixed part, x-only factor, phase.

    For the Kerr Hamiltonian this reproduces the hand-built Kerr schedule.
    """
    t, mixed, v, const = split_separable(h)
    res = decompose(mixed)
    if not res.ok:
        raise ValueError(f"mixed part not spanned; residual {res.residual}")
    blocks = schedule_from_decomposition(res, hbar, scheme, t2)
    chins = [b for b in blocks if not isinstance(b, PhaseBlock)]
    total = const
    for b in blocks:
        if isinstance(b, PhaseBlock):
            total = total + b.constant
    out = []
    if t:
        out.append(SeparableBlock(t))
    out.extend(chins)
    if v:
        out.append(SeparableBlock(v))
    if total:
        out.append(PhaseBlock(total))
    return out
