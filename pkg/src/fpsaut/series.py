"""Multivariate power series truncated at a total degree.

Monomials are packed into integers, ``X1^e1 ... Xn^en`` becoming
``sum(e_i << 8*(n-1-i))``, so multiplying monomials is integer addition
and sorting keys in decreasing order is exactly the lexicographic order
with ``X1 > X2 > ... > Xn``.  Exponents stay below 256 because the
precision is capped at 255.
"""

from __future__ import annotations

import sys
from array import array
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Sequence

from .errors import ContextMismatch, NotAugmented, NotAUnit
from .ring import PrimeField, RationalField, Ring

_BITS = 8
_MASK = (1 << _BITS) - 1
MAX_PREC = _MASK


def _lex_exponents(n, m):
    """Exponent tuples of total degree ``m`` in ``n`` variables, lex-descending."""
    if n == 1:
        yield (m,)
        return
    for first in range(m, -1, -1):
        for rest in _lex_exponents(n - 1, m - first):
            yield (first,) + rest


def _pack(exps):
    key = 0
    for e in exps:
        key = (key << _BITS) | e
    return key


@lru_cache(maxsize=None)
def _tables(nvars, prec):
    by_degree = []
    degree = {}
    for m in range(prec + 1):
        keys = tuple(_pack(e) for e in _lex_exponents(nvars, m))
        by_degree.append(keys)
        for k in keys:
            degree[k] = m
    return degree, tuple(by_degree)


@dataclass(frozen=True)
class SeriesContext:
    """Coefficient ring and variable count, truncated at total degree ``prec``."""

    ring: Ring
    nvars: int
    prec: int
    _degree: dict = field(init=False, repr=False, compare=False, hash=False)
    _by_degree: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.nvars < 1:
            raise ValueError("need at least one variable")
        if not 0 <= self.prec <= MAX_PREC:
            raise ValueError(f"precision must lie in [0, {MAX_PREC}]")
        degree, by_degree = _tables(self.nvars, self.prec)
        object.__setattr__(self, "_degree", degree)
        object.__setattr__(self, "_by_degree", by_degree)

    def with_prec(self, prec: int) -> "SeriesContext":
        return SeriesContext(self.ring, self.nvars, prec)

    def key(self, exps: Sequence[int]) -> int:
        if len(exps) != self.nvars:
            raise ValueError(f"expected {self.nvars} exponents, got {len(exps)}")
        return _pack(exps)

    def exponents(self, key: int) -> tuple:
        out = []
        for _ in range(self.nvars):
            out.append(key & _MASK)
            key >>= _BITS
        return tuple(reversed(out))

    def degree(self, key: int) -> int:
        return self._degree[key]

    def var_key(self, i: int) -> int:
        """Key of the variable ``X_{i+1}`` (``i`` is 0-based)."""
        return 1 << (_BITS * (self.nvars - 1 - i))

    def monomials(self, m: int) -> tuple:
        """Keys of the degree-``m`` monomials in lexicographic order."""
        return self._by_degree[m] if m <= self.prec else tuple(
            _pack(e) for e in _lex_exponents(self.nvars, m)
        )

    def num_monomials(self, m: int) -> int:
        return len(self.monomials(m))

    def keys_up_to(self, d: int) -> list:
        return [k for m in range(min(d, self.prec) + 1) for k in self._by_degree[m]]

    def monomial_text(self, key: int) -> str:
        parts = []
        for i, e in enumerate(self.exponents(key)):
            if e == 1:
                parts.append(f"X{i + 1}")
            elif e > 1:
                parts.append(f"X{i + 1}^{e}")
        return "*".join(parts) if parts else "1"


def _check_same(a, b):
    if a is not b and a != b:
        raise ContextMismatch(f"series contexts differ: {a} vs {b}")


def _canonical(ring, acc):
    red = ring.reduce
    if red is None:
        return {k: v for k, v in acc.items() if v}
    out = {}
    for k, v in acc.items():
        v = red(v)
        if v:
            out[k] = v
    return out


def _mul_terms(ctx, a, b):
    """Raw truncated product of two term dictionaries (unreduced)."""
    if not a or not b:
        return {}
    deg = ctx._degree
    D = ctx.prec
    if len(b) == 1 or len(a) == 1:
        if len(a) != 1:
            a, b = b, a
        (ka, ca), = a.items()
        room = D - deg[ka]
        return {ka + kb: ca * cb for kb, cb in b.items() if deg[kb] <= room}
    sa = sorted((deg[k], k) for k in a)
    sb = sorted((deg[k], k) for k in b)
    lowest = sb[0][0]
    acc = {}
    for da, ka in sa:
        room = D - da
        if room < lowest:
            break
        ca = a[ka]
        for db, kb in sb:
            if db > room:
                break
            k = ka + kb
            v = ca * b[kb]
            if k in acc:
                acc[k] = acc[k] + v
            else:
                acc[k] = v
    return acc


class Series:
    """Immutable truncated power series with zero-free sparse storage."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: SeriesContext, terms=None, *, canonical=False):
        self.ctx = ctx
        if terms is None:
            terms = {}
        elif not canonical:
            deg = ctx._degree
            terms = _canonical(ctx.ring, {k: v for k, v in terms.items() if k in deg})
        self.terms = terms

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, ctx):
        return cls(ctx, {}, canonical=True)

    @classmethod
    def constant(cls, ctx, c):
        return cls(ctx, {0: c})

    @classmethod
    def one(cls, ctx):
        return cls.constant(ctx, ctx.ring.one)

    @classmethod
    def variable(cls, ctx, i: int):
        """The variable ``X_{i+1}``."""
        return cls(ctx, {ctx.var_key(i): ctx.ring.one})

    @classmethod
    def monomial(cls, ctx, exps, coeff=None):
        if coeff is None:
            coeff = ctx.ring.one
        return cls(ctx, {ctx.key(exps): coeff})

    @classmethod
    def from_exponents(cls, ctx, mapping):
        """Build from ``{exponent tuple: coefficient}``."""
        terms = {}
        for exps, c in mapping.items():
            k = ctx.key(exps)
            terms[k] = terms[k] + c if k in terms else c
        return cls(ctx, terms)

    # -- queries ----------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash((self.ctx.nvars, self.ctx.prec, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Series({self.to_text()!r}, prec={self.ctx.prec})"

    def coeff_by_key(self, key):
        return self.terms.get(key, self.ctx.ring.zero)

    def coefficient(self, exps):
        return self.coeff_by_key(self.ctx.key(exps))

    def constant_term(self):
        return self.coeff_by_key(0)

    def order(self):
        """Lowest degree carrying a nonzero coefficient (``None`` for zero)."""
        deg = self.ctx._degree
        return min((deg[k] for k in self.terms), default=None)

    def max_degree(self):
        deg = self.ctx._degree
        return max((deg[k] for k in self.terms), default=None)

    def homogeneous(self, m: int) -> "Series":
        deg = self.ctx._degree
        return Series(self.ctx, {k: c for k, c in self.terms.items() if deg[k] == m}, canonical=True)

    def involves(self, i: int) -> bool:
        """Does variable ``X_{i+1}`` occur in some term?"""
        shift = _BITS * (self.ctx.nvars - 1 - i)
        return any((k >> shift) & _MASK for k in self.terms)

    def sorted_terms(self):
        """Terms by increasing degree, lexicographically decreasing within a degree."""
        deg = self.ctx._degree
        return sorted(self.terms.items(), key=lambda kv: (deg[kv[0]], -kv[0]))

    # -- arithmetic -------------------------------------------------------
    def _combine(self, other, sign):
        if not isinstance(other, Series):
            return NotImplemented
        _check_same(self.ctx, other.ctx)
        acc = dict(self.terms)
        for k, v in other.terms.items():
            if k in acc:
                acc[k] = acc[k] + v if sign > 0 else acc[k] - v
            else:
                acc[k] = v if sign > 0 else -v
        return Series(self.ctx, _canonical(self.ctx.ring, acc), canonical=True)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        ring = self.ctx.ring
        return Series(self.ctx, {k: ring.neg(v) for k, v in self.terms.items()}, canonical=True)

    def __mul__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        _check_same(self.ctx, other.ctx)
        raw = _mul_terms(self.ctx, self.terms, other.terms)
        return Series(self.ctx, _canonical(self.ctx.ring, raw), canonical=True)

    def scale(self, c) -> "Series":
        """Multiply every coefficient by the ring element ``c``."""
        if not c:
            return Series.zero(self.ctx)
        return Series(self.ctx, _canonical(self.ctx.ring, {k: c * v for k, v in self.terms.items()}),
                      canonical=True)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers need invert_series_unit")
        result, base = Series.one(self.ctx), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def truncate(self, prec: int) -> "Series":
        """The same series viewed at precision ``prec`` (dropping higher terms)."""
        if prec == self.ctx.prec:
            return self
        ctx = self.ctx.with_prec(prec)
        deg = self.ctx._degree
        return Series(ctx, {k: c for k, c in self.terms.items() if deg[k] <= prec}, canonical=True)

    with_prec = truncate

    # -- composition ------------------------------------------------------
    def substitute(self, images) -> "Series":
        """``self(images[0], ..., images[n-1])`` modulo degree ``prec+1``."""
        return substitute_many((self,), images)[0]

    def __call__(self, *images):
        return self.substitute(images)

    # -- text -------------------------------------------------------------
    def to_text(self) -> str:
        ring = self.ctx.ring
        if not self.terms:
            return "0"
        pieces = []
        for key, c in self.sorted_terms():
            negative, mag = ring.split_sign(c)
            lit = ring.format_element(mag)
            if key == 0:
                body = lit
            else:
                mono = self.ctx.monomial_text(key)
                if lit == "1":
                    body = mono
                elif "+" in lit or "-" in lit:
                    body = f"({lit})*{mono}"
                else:
                    body = f"{lit}*{mono}"
            if not pieces:
                pieces.append(("-" if negative else "") + body)
            else:
                pieces.append(("- " if negative else "+ ") + body)
        return " ".join(pieces)

    __str__ = to_text


def _power_table(ctx, img_terms, reduce, one):
    """Memoised ``key -> terms of prod images[i]^e_i`` (truncated, zero-free).

    Coefficients are combined with ``+`` and ``*`` only; ``reduce`` (or
    ``None``) brings raw sums back to canonical form.
    """
    n = ctx.nvars
    deg = ctx._degree
    D = ctx.prec
    var_keys = [ctx.var_key(i) for i in range(n)]
    # image terms sorted by degree once, so each product can stop early
    img_sorted = [sorted((deg[k], k, c) for k, c in t.items()) for t in img_terms]
    sizes = [len(t) for t in img_terms]
    memo = {0: {0: one}}

    def times_image(prev, v):
        sb = img_sorted[v]
        if not sb:
            return {}
        lowest = sb[0][0]
        acc = {}
        for ka, ca in prev.items():
            room = D - deg[ka]
            if room < lowest:
                continue
            for db, kb, cb in sb:
                if db > room:
                    break
                k = ka + kb
                if k in acc:
                    acc[k] = acc[k] + ca * cb
                else:
                    acc[k] = ca * cb
        return acc

    def canonical(raw):
        if reduce is None:
            return {k: c for k, c in raw.items() if c}
        out = {}
        for k, c in raw.items():
            c = reduce(c)
            if c:
                out[k] = c
        return out

    if n == 1:
        def power(key):
            got = memo.get(key)
            if got is None:
                e = max(memo)
                got = memo[e]
                while e < key:
                    got = canonical(times_image(got, 0))
                    e += 1
                    memo[e] = got
            return got
        return power

    def power(key):
        got = memo.get(key)
        if got is not None:
            return got
        exps = ctx.exponents(key)
        # peel the cheapest image off so dense factors are multiplied rarely
        v = min((i for i in range(n) if exps[i]), key=lambda i: (sizes[i], -i))
        got = canonical(times_image(power(key - var_keys[v]), v))
        memo[key] = got
        return got

    return power


def _kronecker_format(bits):
    """Native array format whose items hold ``bits`` bits, or ``None``."""
    for fmt in ("H", "I", "Q"):
        if 8 * array(fmt).itemsize >= bits:
            return fmt
    return None


def _substitute_univariate_mod(ctx, fs, image, p, fmt):
    """One variable over Z/p: powers by Kronecker substitution (big-integer products).

    A polynomial with coefficients in ``[0, p)`` is packed as
    ``sum c_e 2^(w e)`` with ``w`` the item width of ``fmt``, wide enough for
    every coefficient of a truncated product, so one integer multiplication
    does the work and packing is a byte copy.
    """
    D = ctx.prec
    size = array(fmt).itemsize
    nbytes = size * (D + 1)
    full = (1 << (8 * nbytes)) - 1
    order = sys.byteorder

    def pack(coeffs):
        return int.from_bytes(array(fmt, coeffs).tobytes(), order)

    def unpack_mod(x):
        return [c % p for c in memoryview((x & full).to_bytes(nbytes, order)).cast(fmt)]

    g = [0] * (D + 1)
    for e, c in image.items():
        g[e] = c
    g_packed = pack(g)
    top = max((max(f.terms, default=0) for f in fs), default=0)
    packed = [1]
    for _ in range(top):
        packed.append(pack(unpack_mod(packed[-1] * g_packed)))
    out = []
    for f in fs:
        acc = 0
        for e, c in f.terms.items():
            acc += c * packed[e]
        # each coefficient stays below (D+1) (p-1)^2, so nothing carries
        terms = {e: c for e, c in enumerate(unpack_mod(acc)) if c}
        out.append(Series(ctx, terms, canonical=True))
    return tuple(out)


def _substitute_generic(ctx, fs, img_terms):
    ring = ctx.ring
    power = _power_table(ctx, img_terms, ring.reduce, ring.one)
    out = []
    for f in fs:
        acc = {}
        for key, c in f.terms.items():
            for k2, c2 in power(key).items():
                v = c * c2
                if k2 in acc:
                    acc[k2] = acc[k2] + v
                else:
                    acc[k2] = v
        out.append(Series(ctx, _canonical(ring, acc), canonical=True))
    return tuple(out)


def _substitute_rational(ctx, fs, img_terms):
    """Rational coefficients: the same products on integers over common denominators."""
    dens = [lcm(*(c.denominator for c in t.values())) if t else 1 for t in img_terms]
    int_terms = [{k: c.numerator * (d // c.denominator) for k, c in t.items()}
                 for t, d in zip(img_terms, dens)]
    power = _power_table(ctx, int_terms, None, 1)
    exponents = ctx.exponents
    out = []
    for f in fs:
        # term c*X^key contributes c * power(key) / prod dens[i]^e_i
        scaled = []
        for key, c in f.terms.items():
            den = c.denominator
            for d, e in zip(dens, exponents(key)):
                if e and d != 1:
                    den *= d ** e
            scaled.append((c.numerator, den, power(key)))
        common = lcm(*(den for _, den, _ in scaled)) if scaled else 1
        acc = {}
        for num, den, pw in scaled:
            factor = num * (common // den)
            for k2, c2 in pw.items():
                acc[k2] = acc.get(k2, 0) + factor * c2
        out.append(Series(ctx, {k: Fraction(v, common) for k, v in acc.items() if v},
                          canonical=True))
    return tuple(out)


def substitute_many(fs, images):
    """Substitute one image vector into several series, sharing the power products."""
    if not fs:
        return ()
    ctx = fs[0].ctx
    n = ctx.nvars
    if len(images) != n:
        raise ValueError(f"need {n} images, got {len(images)}")
    for f in fs:
        _check_same(f.ctx, ctx)
    for i, im in enumerate(images):
        _check_same(im.ctx, ctx)
        if 0 in im.terms:
            raise NotAugmented(f"image of X{i + 1} has a nonzero constant term")
    img_terms = [im.terms for im in images]
    ring = ctx.ring
    if isinstance(ring, RationalField):
        return _substitute_rational(ctx, fs, img_terms)
    if n == 1 and isinstance(ring, PrimeField):
        fmt = _kronecker_format(((ctx.prec + 1) * (ring.p - 1) ** 2).bit_length())
        if fmt is not None:
            return _substitute_univariate_mod(ctx, fs, img_terms[0], ring.p, fmt)
    return _substitute_generic(ctx, fs, img_terms)


def substitute(f: Series, images) -> Series:
    return substitute_many((f,), images)[0]


def invert_series_unit(f: Series) -> Series:
    """Multiplicative inverse of a series with unit constant term (truncated geometric series)."""
    ring = f.ctx.ring
    c = f.constant_term()
    if not ring.is_unit(c):
        raise NotAUnit("constant term is not a unit")
    ci = ring.inv(c)
    w = -(f - Series.constant(f.ctx, c)).scale(ci)
    one = Series.one(f.ctx)
    s = one
    for _ in range(f.ctx.prec):
        s = one + w * s
    return s.scale(ci)


# -- homogeneous coefficient matrices --------------------------------------------

@dataclass(frozen=True)
class HomogeneousMatrix:
    """``n x S_m`` coefficient matrix of a degree-``m`` homogeneous map.

    Row ``i`` holds the coefficients of the image of ``X_{i+1}``; columns
    follow ``ctx.monomials(degree)``.
    """

    ctx: SeriesContext
    degree: int
    entries: tuple

    @property
    def shape(self):
        return len(self.entries), len(self.ctx.monomials(self.degree))

    def rows_as_series(self, ctx=None):
        ctx = ctx or self.ctx
        cols = self.ctx.monomials(self.degree)
        return tuple(Series(ctx, dict(zip(cols, row))) for row in self.entries)

    def map(self, fn):
        return HomogeneousMatrix(self.ctx, self.degree,
                                 tuple(tuple(fn(x) for x in row) for row in self.entries))

    def is_zero(self):
        return all(not x for row in self.entries for x in row)


def homogeneous_component(images, m: int) -> HomogeneousMatrix:
    ctx = images[0].ctx
    cols = ctx.monomials(m)
    zero = ctx.ring.zero
    entries = tuple(tuple(f.terms.get(k, zero) for k in cols) for f in images)
    return HomogeneousMatrix(ctx, m, entries)


def from_components(ctx, mats) -> tuple:
    acc = [dict() for _ in range(ctx.nvars)]
    for mat in mats:
        cols = ctx.monomials(mat.degree)
        for i, row in enumerate(mat.entries):
            for k, x in zip(cols, row):
                if x:
                    acc[i][k] = x
    return tuple(Series(ctx, t) for t in acc)


def star(L: HomogeneousMatrix, M: HomogeneousMatrix) -> HomogeneousMatrix:
    """Coefficient matrix of the composite endomorphism ``phi_L o phi_M``.

    Here ``phi_L`` sends ``X_i`` to row ``i`` of ``L`` and composition acts
    on ring elements, so the result sends ``X_i`` to ``M_i(L_1, ..., L_n)``.
    For linear maps this is the matrix product ``M @ L``.
    """
    _check_same(L.ctx, M.ctx)
    d = L.degree * M.degree
    if d > L.ctx.prec:
        raise ValueError(f"star product degree {d} exceeds precision {L.ctx.prec}")
    composite = substitute_many(M.rows_as_series(), L.rows_as_series())
    return homogeneous_component(composite, d)


def univariate_compose_gh(beta_coeffs, gamma_coeffs, m: int, ring: Ring):
    """Degree-``m`` coefficient of ``gamma o beta`` by summing over ordered compositions.

    ``beta_coeffs[r-1]`` is ``b_r`` and ``gamma_coeffs[j-1]`` is ``c_j``; the
    result is ``sum_r b_r * sum_{j_1+...+j_r=m} c_{j_1}...c_{j_r}``.  The
    inner sum is organised by the first part ``j_1`` and memoised.
    """

    def c(j):
        return gamma_coeffs[j - 1] if j <= len(gamma_coeffs) else ring.zero

    @lru_cache(maxsize=None)
    def parts(r, total):
        if r == 0:
            return ring.one if total == 0 else ring.zero
        acc = ring.zero
        for j in range(1, total - r + 2):
            cj = c(j)
            if cj:
                acc = ring.add(acc, ring.mul(cj, parts(r - 1, total - j)))
        return acc

    result = ring.zero
    for r in range(1, min(m, len(beta_coeffs)) + 1):
        br = beta_coeffs[r - 1]
        if br:
            result = ring.add(result, ring.mul(br, parts(r, m)))
    return result
