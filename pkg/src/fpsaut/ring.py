"""Exact commutative coefficient rings.

A ring object owns the arithmetic of its elements.  Elements are plain
Python values chosen so that ``+``, ``-`` and ``*`` already work on them;
``Ring.reduce`` brings a raw result back to canonical form (only the prime
field needs it, since its elements are bare ``int`` residues):

=====================  ===========================  ==================
ring                   element type                 canonical form
=====================  ===========================  ==================
``RationalField``      ``fractions.Fraction``       reduced fraction
``PrimeField(p)``      ``int``                      residue in [0, p)
``DualNumbers(p)``     ``Dual``                     a + b*eps, eps^2=0
``SeriesRing(...)``    ``fpsaut.series.Series``     zero-free terms
=====================  ===========================  ==================

Series code exploits this by accumulating raw sums of products and
reducing once at the end.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import NoCombination, NotAUnit, NotFound, ParseError, RingMismatch


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(p: int) -> bool:
    """Miller-Rabin with the first 13 prime bases.

    Exact for ``p < 3.3e24``; beyond that it is a strong probable-prime test.
    """
    if p < 2:
        return False
    for q in _MR_BASES:
        if p % q == 0:
            return p == q
    d, r = p - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(r - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


class Ring:
    """Common interface; subclasses fill in the element-level primitives."""

    characteristic: int = 0
    is_field: bool = False
    descriptor: str = "?"
    #: canonicalising map applied after raw arithmetic, ``None`` for identity
    reduce = None

    # -- construction -----------------------------------------------------
    @property
    def zero(self):
        return self.from_int(0)

    @property
    def one(self):
        return self.from_int(1)

    def from_int(self, k: int):
        raise NotImplementedError

    def embed_integer(self, k: int):
        return self.from_int(k)

    def check(self, x):
        """Raise ``RingMismatch`` unless ``x`` is a canonical element."""
        raise NotImplementedError

    # -- arithmetic -------------------------------------------------------
    def _canon(self, v):
        return v if self.reduce is None else self.reduce(v)

    def add(self, x, y):
        return self._canon(x + y)

    def sub(self, x, y):
        return self._canon(x - y)

    def mul(self, x, y):
        return self._canon(x * y)

    def neg(self, x):
        return self._canon(-x)

    def pow(self, x, k: int):
        if k < 0:
            return self.pow(self.inv(x), -k)
        result, base = self.one, x
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def eq(self, x, y) -> bool:
        return x == y

    def is_zero(self, x) -> bool:
        return not x

    def is_one(self, x) -> bool:
        return x == self.one

    def is_unit(self, x) -> bool:
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def invert_unit(self, x):
        return self.inv(x)

    def div(self, x, y):
        return self.mul(x, self.inv(y))

    # -- text -------------------------------------------------------------
    def split_sign(self, x):
        """Return ``(negative, magnitude)`` for signed rendering."""
        return False, x

    def format_element(self, x) -> str:
        raise NotImplementedError

    def parse_element(self, text: str):
        from .parsing import parse_constant

        return parse_constant(text, self)

    # -- sampling ---------------------------------------------------------
    def random_element(self, rng):
        raise NotImplementedError

    def sample_pool(self):
        """Small pool of elements used by the random automorphism generator."""
        raise NotImplementedError

    def __repr__(self):
        return f"<ring {self.descriptor}>"

    def __eq__(self, other):
        return isinstance(other, Ring) and other.descriptor == self.descriptor

    def __hash__(self):
        return hash(self.descriptor)


class RationalField(Ring):
    characteristic = 0
    is_field = True
    descriptor = "q"

    def from_int(self, k):
        return Fraction(k)

    def check(self, x):
        if not isinstance(x, Fraction):
            raise RingMismatch(f"{x!r} is not an element of Q")

    def is_unit(self, x):
        return x != 0

    def inv(self, x):
        if x == 0:
            raise NotAUnit("0 is not invertible in Q")
        return 1 / x

    def split_sign(self, x):
        return (x < 0), abs(x)

    def format_element(self, x):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"

    def random_element(self, rng):
        return Fraction(rng.randint(-9, 9), rng.randint(1, 5))

    def sample_pool(self):
        return [Fraction(k) for k in (-2, -1, 0, 1, 2)] + [Fraction(1, 2), Fraction(-1, 3)]


class PrimeField(Ring):
    """Integers modulo a prime; elements are ``int`` residues."""

    is_field = True

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.characteristic = p
        self.descriptor = f"fp:{p}"
        self.reduce = lambda v, p=p: v % p

    def from_int(self, k):
        return k % self.p

    def check(self, x):
        if type(x) is not int or not 0 <= x < self.p:
            raise RingMismatch(f"{x!r} is not a canonical residue mod {self.p}")

    def is_unit(self, x):
        return x % self.p != 0

    def inv(self, x):
        if x % self.p == 0:
            raise NotAUnit(f"0 is not invertible mod {self.p}")
        return pow(x, -1, self.p)

    def format_element(self, x):
        return str(x)

    def random_element(self, rng):
        return rng.randrange(self.p)

    def sample_pool(self):
        return list(range(self.p))


class Dual:
    """``a + b*eps`` over the integers mod ``p`` with ``eps**2 == 0``."""

    __slots__ = ("a", "b", "p")

    def __init__(self, a, b, p):
        self.a = a % p
        self.b = b % p
        self.p = p

    def _other(self, other):
        if type(other) is not Dual or other.p != self.p:
            raise RingMismatch(f"cannot combine {self!r} with {other!r}")
        return other

    def __add__(self, other):
        o = self._other(other)
        return Dual(self.a + o.a, self.b + o.b, self.p)

    def __sub__(self, other):
        o = self._other(other)
        return Dual(self.a - o.a, self.b - o.b, self.p)

    def __mul__(self, other):
        o = self._other(other)
        return Dual(self.a * o.a, self.a * o.b + self.b * o.a, self.p)

    def __neg__(self):
        return Dual(-self.a, -self.b, self.p)

    def __eq__(self, other):
        return type(other) is Dual and (self.a, self.b, self.p) == (other.a, other.b, other.p)

    def __hash__(self):
        return hash((self.a, self.b, self.p))

    def __bool__(self):
        return bool(self.a or self.b)

    def __repr__(self):
        return f"Dual({self.a}, {self.b}, p={self.p})"


class DualNumbers(Ring):
    """The non-field algebra F_p[eps]/(eps^2)."""

    is_field = False

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.characteristic = p
        self.descriptor = f"dual:{p}"

    def from_int(self, k):
        return Dual(k, 0, self.p)

    def element(self, a, b):
        return Dual(a, b, self.p)

    @property
    def eps(self):
        return Dual(0, 1, self.p)

    def check(self, x):
        if type(x) is not Dual or x.p != self.p:
            raise RingMismatch(f"{x!r} is not an element of {self.descriptor}")

    def is_unit(self, x):
        return x.a != 0

    def inv(self, x):
        if x.a == 0:
            raise NotAUnit(f"{self.format_element(x)} is nilpotent")
        ia = pow(x.a, -1, self.p)
        return Dual(ia, -x.b * ia * ia, self.p)

    def format_element(self, x):
        if x.b == 0:
            return str(x.a)
        tail = "eps" if x.b == 1 else f"{x.b}*eps"
        return tail if x.a == 0 else f"{x.a}+{tail}"

    def random_element(self, rng):
        return Dual(rng.randrange(self.p), rng.randrange(self.p), self.p)

    def sample_pool(self):
        return [Dual(a, b, self.p) for a in range(self.p) for b in range(self.p)]


class SeriesRing(Ring):
    """Truncated power series ``base[[Y_1..Y_k]] / (Y)^(prec+1)`` as a coefficient ring.

    Its units are the series with a unit constant term.
    """

    is_field = False

    def __init__(self, base: Ring, nvars: int, prec: int):
        from .series import SeriesContext

        self.base = base
        self.nvars = nvars
        self.prec = prec
        self.context = SeriesContext(base, nvars, prec)
        self.characteristic = base.characteristic
        self.descriptor = f"series({base.descriptor},{nvars},{prec})"

    def from_int(self, k):
        from .series import Series

        return Series.constant(self.context, self.base.from_int(k))

    def check(self, x):
        from .series import Series

        if not isinstance(x, Series) or x.ctx != self.context:
            raise RingMismatch(f"{x!r} is not an element of {self.descriptor}")

    def is_unit(self, x):
        return self.base.is_unit(x.constant_term())

    def inv(self, x):
        from .series import invert_series_unit

        return invert_series_unit(x)

    def format_element(self, x):
        return "(" + x.to_text() + ")"

    def random_element(self, rng):
        from .series import Series

        ctx = self.context
        terms = {}
        for key in rng.sample(ctx.keys_up_to(ctx.prec), min(3, len(ctx.keys_up_to(ctx.prec)))):
            terms[key] = self.base.random_element(rng)
        return Series(ctx, terms)

    def sample_pool(self):
        return [self.from_int(k) for k in range(max(self.characteristic, 2))]


# -- descriptor strings --------------------------------------------------------

_DESC = re.compile(r"^\s*(q|fp:(\d+)|dual:(\d+))\s*$")


def parse_ring(desc: str) -> Ring:
    """Parse ``q``, ``fp:<p>`` or ``dual:<p>``."""
    m = _DESC.match(desc)
    if not m:
        raise ParseError(f"unknown ring descriptor {desc!r}", expected=("q", "fp:<p>", "dual:<p>"))
    try:
        if m.group(1) == "q":
            return RationalField()
        if m.group(2):
            return PrimeField(int(m.group(2)))
        return DualNumbers(int(m.group(3)))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


# -- scalar helpers used by the decompositions -----------------------------------

def multiplicative_order_at_least(ring: Ring, x, k: int) -> bool:
    """True iff ``x**j != 1`` for every ``1 <= j < k``."""
    power = ring.one
    for _ in range(1, k):
        power = ring.mul(power, x)
        if ring.is_one(power):
            return False
    return True


def find_prime_field_element_of_order(ring: Ring, k: int):
    """Smallest embedded integer ``t >= 2`` whose multiplicative order is at least ``k``."""
    p = ring.characteristic
    bound = p if p else max(k, 3)
    for t in range(2, bound):
        x = ring.from_int(t)
        if multiplicative_order_at_least(ring, x, k):
            return x
    raise NotFound(f"no element of order >= {k} in the prime field of {ring.descriptor}")


def bezout_combine(ring: Ring, s, t, a):
    """Return ``(x, y)`` with ``x*s + y*t == a``, using whichever of ``s``, ``t`` is a unit."""
    if ring.is_unit(s):
        return ring.mul(a, ring.inv(s)), ring.zero
    if ring.is_unit(t):
        return ring.zero, ring.mul(a, ring.inv(t))
    raise NoCombination(
        f"neither {ring.format_element(s)} nor {ring.format_element(t)} is a unit in {ring.descriptor}"
    )
