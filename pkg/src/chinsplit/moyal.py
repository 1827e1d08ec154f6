"""Exact phase-space algebra on polynomials in (x, p, hbar).

Coefficients live in Q(sqrt2): pairs ``a + b*sqrt2`` of Fractions.  The
imaginary unit never appears in a stored polynomial; odd orders of the star
product are returned separately as the imaginary part.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, sqrt
from typing import Dict, Iterable, Mapping, Tuple, Union

import numpy as np

__all__ = [
    "Surd", "PolynomialXP", "StarProduct", "X", "P", "HBAR", "ONE", "SQRT2",
    "star_product", "moyal_bracket", "poisson_bracket", "double_bracket",
    "anticommutator_symbol", "commutator_symbol", "operator_double_commutator", "alternate_generator_check",
    "kerr_generator_pair", "parse_polynomial", "PolynomialSyntaxError",
]

_SQRT2 = sqrt(2.0)


@dataclass(frozen=True)
class Surd:
    """Element ``a + b*sqrt(2)`` of the field Q(sqrt2)."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    @staticmethod
    def of(value) -> "Surd":
        if isinstance(value, Surd):
            return value
        if isinstance(value, float):
            raise TypeError("floats are not exact; pass a Fraction or int")
        return Surd(Fraction(value), Fraction(0))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __add__(self, other):
        o = Surd.of(other)
        return Surd(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-Surd.of(other))

    def __rsub__(self, other):
        return Surd.of(other) - self

    def __mul__(self, other):
        o = Surd.of(other)
        return Surd(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def inverse(self) -> "Surd":
        den = self.a * self.a - 2 * self.b * self.b
        if den == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt2)")
        return Surd(self.a / den, -self.b / den)

    def __truediv__(self, other):
        return self * Surd.of(other).inverse()

    def __rtruediv__(self, other):
        return Surd.of(other) * self.inverse()

    def __eq__(self, other):
        try:
            o = Surd.of(other)
        except TypeError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __float__(self):
        return float(self.a) + float(self.b) * _SQRT2

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return {1: "sqrt2", -1: "-sqrt2"}.get(self.b, f"{self.b}*sqrt2")
        return f"({self.a} + {self.b}*sqrt2)"

    __repr__ = __str__


Monomial = Tuple[int, int, int]  # (x-degree, p-degree, hbar-degree)


class PolynomialXP:
    """Sparse polynomial in x, p and hbar with exact Q(sqrt2) coefficients.

    Immutable; zero coefficients are never stored, so ``==`` is exact
    structural equality.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean: Dict[Monomial, Surd] = {}
        for mono, c in (terms or {}).items():
            i, j, k = mono
            if min(i, j, k) < 0:
                raise ValueError(f"negative degree in {mono}")
            c = Surd.of(c)
            if c:
                clean[(int(i), int(j), int(k))] = c
        self._terms = clean
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def monomial(cls, i: int = 0, j: int = 0, k: int = 0, coeff=1) -> "PolynomialXP":
        return cls({(i, j, k): coeff})

    @classmethod
    def constant(cls, c) -> "PolynomialXP":
        return cls({(0, 0, 0): c})

    @property
    def terms(self) -> Dict[Monomial, Surd]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __iter__(self):
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def coeff(self, i: int, j: int, k: int = 0) -> Surd:
        return self._terms.get((i, j, k), Surd())

    # arithmetic -------------------------------------------------------
    @staticmethod
    def _lift(other) -> "PolynomialXP":
        if isinstance(other, PolynomialXP):
            return other
        return PolynomialXP.constant(other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, Surd()) + c
        return PolynomialXP(out)

    __radd__ = __add__

    def __neg__(self):
        return PolynomialXP({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, PolynomialXP):
            s = Surd.of(other)
            return PolynomialXP({m: c * s for m, c in self._terms.items()})
        out: Dict[Monomial, Surd] = {}
        for (i1, j1, k1), c1 in self._terms.items():
            for (i2, j2, k2), c2 in other._terms.items():
                key = (i1 + i2, j1 + j2, k1 + k2)
                out[key] = out.get(key, Surd()) + c1 * c2
        return PolynomialXP(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        s = Surd.of(other).inverse()
        return self * s

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, PolynomialXP):
            return self._terms == other._terms
        try:
            return self == PolynomialXP.constant(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # calculus ---------------------------------------------------------
    def diff(self, nx: int = 0, np_: int = 0) -> "PolynomialXP":
        """Partial derivative d^nx/dx^nx d^np/dp^np."""
        out = {}
        for (i, j, k), c in self._terms.items():
            if i < nx or j < np_:
                continue
            f = Fraction(factorial(i), factorial(i - nx)) * Fraction(factorial(j), factorial(j - np_))
            out[(i - nx, j - np_, k)] = c * f
        return PolynomialXP(out)

    def hbar_part(self, k: int) -> "PolynomialXP":
        """Coefficient polynomial of hbar^k (itself hbar-free)."""
        return PolynomialXP({(i, j, 0): c for (i, j, kk), c in self._terms.items() if kk == k})

    def classical(self) -> "PolynomialXP":
        return self.hbar_part(0)

    def degrees(self) -> Tuple[int, int]:
        """Maximal (x, p) degrees over all terms."""
        if not self._terms:
            return (0, 0)
        return (max(m[0] for m in self._terms), max(m[1] for m in self._terms))

    @property
    def total_degree(self) -> int:
        return max((i + j for i, j, _ in self._terms), default=0)

    @property
    def hbar_degree(self) -> int:
        return max((k for _, _, k in self._terms), default=0)

    def leading_monomial(self) -> Tuple[int, int] | None:
        """Highest (x, p) monomial of the hbar^0 part, graded by total degree."""
        cl = [m for m in self._terms if m[2] == 0]
        if not cl:
            return None
        i, j, _ = max(cl, key=lambda m: (m[0] + m[1], m[0]))
        return (i, j)

    @property
    def is_constant(self) -> bool:
        return all(i == 0 and j == 0 for i, j, _ in self._terms)

    def depends_on_x(self) -> bool:
        return any(i for i, _, _ in self._terms)

    def depends_on_p(self) -> bool:
        return any(j for _, j, _ in self._terms)

    def is_exact_rational(self) -> bool:
        return all(c.is_rational for c in self._terms.values())

    # numerics ---------------------------------------------------------
    def __call__(self, x=0.0, p=0.0, hbar=1.0):
        x = np.asarray(x)
        p = np.asarray(p)
        out = np.zeros(np.broadcast(x, p).shape)
        for (i, j, k), c in self._terms.items():
            out = out + float(c) * hbar ** k * x ** i * p ** j
        return out

    def coefficients_1d(self, var: str, hbar: float = 1.0) -> np.ndarray:
        """Power-series coefficients (ascending) of a single-variable polynomial."""
        idx = 0 if var == "x" else 1
        other = 1 - idx
        n = self.degrees()[idx]
        out = np.zeros(n + 1)
        for m, c in self._terms.items():
            if m[other]:
                raise ValueError(f"polynomial depends on {'xp'[other]}, expected {var} only")
            out[m[idx]] += float(c) * hbar ** m[2]
        return out

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (i, j, k), c in sorted(self._terms.items(), key=lambda t: (-(t[0][0] + t[0][1]), -t[0][0], t[0][2])):
            factors = []
            for name, d in (("hbar", k), ("x", i), ("p", j)):
                if d:
                    factors.append(name if d == 1 else f"{name}^{d}")
            cs = str(c)
            if not factors:
                parts.append(cs)
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(cs + "*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"PolynomialXP({self})"


ONE = PolynomialXP.constant(1)
X = PolynomialXP.monomial(1, 0)
P = PolynomialXP.monomial(0, 1)
HBAR = PolynomialXP.monomial(0, 0, 1)
SQRT2 = Surd(Fraction(0), Fraction(1))


@dataclass(frozen=True)
class StarProduct:
    """``f * g = real + i*imag`` with both parts real polynomials."""

    real: PolynomialXP
    imag: PolynomialXP


def _bidiff(f: PolynomialXP, g: PolynomialXP, n: int) -> PolynomialXP:
    # (<-dx ->dp - <-dp ->dx)^n acting on f (left) and g (right)
    out = PolynomialXP()
    for k in range(n + 1):
        left = f.diff(k, n - k)
        if not left:
            continue
        right = g.diff(n - k, k)
        if not right:
            continue
        sign = -1 if (n - k) % 2 else 1
        out = out + left * right * (sign * comb(n, k))
    return out


def _max_order(f: PolynomialXP, g: PolynomialXP) -> int:
    fx, fp = f.degrees()
    gx, gp = g.degrees()
    return min(fx + fp, gx + gp)


def star_product(f: PolynomialXP, g: PolynomialXP) -> StarProduct:
    """Groenewold-Moyal product of two polynomial symbols (finite series)."""
    real = PolynomialXP()
    imag = PolynomialXP()
    for n in range(_max_order(f, g) + 1):
        term = _bidiff(f, g, n)
        if not term:
            continue
        scale = Fraction(1, 2 ** n * factorial(n))
        term = term * HBAR ** n * scale
        if n % 2 == 0:
            real = real + (term if n % 4 == 0 else -term)
        else:
            imag = imag + (term if n % 4 == 1 else -term)
    return StarProduct(real, imag)


def moyal_bracket(f: PolynomialXP, g: PolynomialXP) -> PolynomialXP:
    """(f*g - g*f)/(i hbar); real for real arguments."""
    out = PolynomialXP()
    for n in range(1, _max_order(f, g) + 1, 2):
        term = _bidiff(f, g, n)
        if not term:
            continue
        scale = Fraction(1, 2 ** (n - 1) * factorial(n))
        term = term * HBAR ** (n - 1) * scale
        out = out + (term if n % 4 == 1 else -term)
    return out


def poisson_bracket(f: PolynomialXP, g: PolynomialXP) -> PolynomialXP:
    return f.diff(1, 0) * g.diff(0, 1) - f.diff(0, 1) * g.diff(1, 0)


def double_bracket(outer: PolynomialXP, inner_a: PolynomialXP, inner_b: PolynomialXP,
                   kind: str = "moyal") -> PolynomialXP:
    """bracket(outer, bracket(inner_a, inner_b)) for kind 'moyal' or 'poisson'.

    The operator double commutator is ``(i hbar)**2`` times the Weyl
    correspondent of the Moyal version, i.e. ``-hbar**2 * result``.
    """
    br = _bracket(kind)
    return br(outer, br(inner_a, inner_b))


def _bracket(kind: str):
    kind = kind.lower()
    if kind == "moyal":
        return moyal_bracket
    if kind == "poisson":
        return poisson_bracket
    raise ValueError(f"unknown bracket kind {kind!r}")


def anticommutator_symbol(f: PolynomialXP, g: PolynomialXP) -> PolynomialXP:
    """Weyl symbol of f^ g^ + g^ f^."""
    a = star_product(f, g)
    b = star_product(g, f)
    assert a.imag + b.imag == PolynomialXP()
    return a.real + b.real


def commutator_symbol(f: PolynomialXP, g: PolynomialXP) -> PolynomialXP:
    """Real polynomial c with Weyl symbol of [f^, g^] equal to i*c (= hbar*{{f,g}})."""
    return HBAR * moyal_bracket(f, g)


def operator_double_commutator(a: PolynomialXP, b: PolynomialXP) -> PolynomialXP:
    """Weyl symbol of [a^, [a^, b^]] (real, since (i hbar)^2 = -hbar^2)."""
    return -(HBAR ** 2) * moyal_bracket(a, moyal_bracket(a, b))


def kerr_generator_pair(c_t=1, c_v=1) -> Tuple[PolynomialXP, PolynomialXP]:
    """T = c_t p^2/(2 sqrt2), V = c_v x^4/12."""
    t = P ** 2 * (Surd.of(c_t) * SQRT2 / 4)
    v = X ** 4 * (Surd.of(c_v) / 12)
    return t, v


def alternate_generator_check(swap: bool = True) -> dict:
    """Compare the alternate generator pair with the quadratic/quartic pair.

    Alternate pair: T = p^4/24 + p^2/2, V = x^2/(2 sqrt2).  With ``swap`` the
    realised double commutator is [V,[V,T]] (V in the T slots of the
    composition), otherwise [T,[T,V]].

    Returns a dict with the anticommutator coefficient of each pair, the
    separable (pure x / pure p) remainder of the alternate result, and flags.
    """
    t_ref, v_ref = kerr_generator_pair()
    ref = operator_double_commutator(t_ref, v_ref)

    t_alt = P ** 4 / 24 + P ** 2 / 2
    v_alt = X ** 2 * (SQRT2 / 4)
    alt = operator_double_commutator(v_alt, t_alt) if swap else operator_double_commutator(t_alt, v_alt)

    anti = anticommutator_symbol(P ** 2, X ** 2)  # 2 x^2 p^2 - hbar^2

    def split(sym: PolynomialXP):
        # sym = alpha * {p^2, x^2}_+ + rest, alpha taken from the x^2 p^2 term
        alpha = PolynomialXP({(0, 0, k): c for (i, j, k), c in sym.items() if (i, j) == (2, 2)}) / 2
        rest = sym - alpha * anti
        return alpha, rest

    a_ref, rest_ref = split(ref)
    a_alt, rest_alt = split(alt)
    nonseparable = PolynomialXP({m: c for m, c in rest_alt.items() if m[0] and m[1]})
    return {
        "reference": ref,
        "alternate": alt,
        "reference_anticommutator_coeff": a_ref,
        "alternate_anticommutator_coeff": a_alt,
        "reference_remainder": rest_ref,
        "alternate_remainder": rest_alt,
        "same_anticommutator": a_ref == a_alt,
        "remainder_separable": not nonseparable,
        "identical": ref == alt,
    }


# text syntax ------------------------------------------------------------

class PolynomialSyntaxError(ValueError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>sqrt2|hbar|x|p)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolynomialSyntaxError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        for kind in ("num", "name", "op"):
            if m.group(kind) is not None:
                toks.append((kind, m.group(kind)))
                break
        if pos < len(text) and not text[pos:].strip():
            break
    return toks


def parse_polynomial(text: str) -> PolynomialXP:
    """Parse e.g. ``3/2 * hbar^2 * x^2 p^2 - x^4/12``.

    Grammar::

        poly   := ['+'|'-'] term (('+'|'-') term)*
        term   := factor ((['*'] | '/') factor)*
        factor := atom ['^' INT]
        atom   := NUMBER | 'x' | 'p' | 'hbar' | 'sqrt2' | '(' poly ')'

    NUMBER is an integer or decimal literal (decimals are read exactly, 0.1 is
    1/10).  Juxtaposition means multiplication; division only by numbers.
    """
    toks = _tokenize(text)
    if not toks:
        raise PolynomialSyntaxError("empty polynomial")
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def take():
        nonlocal pos
        pos += 1
        return toks[pos - 1] if pos <= len(toks) else (None, None)

    def poly():
        sign = 1
        if peek() in (("op", "+"), ("op", "-")):
            sign = -1 if take()[1] == "-" else 1
        out = term() * sign
        while peek() in (("op", "+"), ("op", "-")):
            s = -1 if take()[1] == "-" else 1
            out = out + term() * s
        return out

    def term():
        out = factor()
        while True:
            kind, val = peek()
            if (kind, val) == ("op", "*"):
                take()
                out = out * factor()
            elif (kind, val) == ("op", "/"):
                take()
                den = factor()
                if not den.is_constant or den.hbar_degree or not den:
                    raise PolynomialSyntaxError("can only divide by a non-zero number")
                out = out / den.coeff(0, 0)
            elif kind in ("num", "name") or (kind, val) == ("op", "("):
                out = out * factor()
            else:
                return out

    def factor():
        base = atom()
        if peek() == ("op", "^"):
            take()
            kind, val = take() if pos < len(toks) else (None, None)
            if kind != "num" or not val.isdigit():
                raise PolynomialSyntaxError("exponent must be a non-negative integer")
            return base ** int(val)
        return base

    def atom():
        if pos >= len(toks):
            raise PolynomialSyntaxError("unexpected end of input")
        kind, val = take()
        if kind == "num":
            return PolynomialXP.constant(Fraction(val))
        if kind == "name":
            return {"x": X, "p": P, "hbar": HBAR, "sqrt2": PolynomialXP.constant(SQRT2)}[val]
        if val == "(":
            inner = poly()
            if take() != ("op", ")"):
                raise PolynomialSyntaxError("missing ')'")
            return inner
        raise PolynomialSyntaxError(f"unexpected token {val!r}")

    result = poly()
    if pos != len(toks):
        raise PolynomialSyntaxError(f"trailing input at token {toks[pos][1]!r}")
    return result


def random_polynomial(rng, max_x: int, max_p: int, density: float = 0.6,
                      hbar: bool = False) -> PolynomialXP:
    """Random rational polynomial with degrees bounded by (max_x, max_p)."""
    terms = {}
    for i in range(max_x + 1):
        for j in range(max_p + 1):
            if rng.random() < density:
                num = int(rng.integers(-9, 10))
                den = int(rng.integers(1, 7))
                k = int(rng.integers(0, 3)) if hbar else 0
                terms[(i, j, k)] = Fraction(num, den)
    return PolynomialXP(terms)


def symbols_from(iterable: Iterable[Union[str, PolynomialXP]]):
    return [parse_polynomial(s) if isinstance(s, str) else s for s in iterable]
