"""Truncated augmented automorphisms with their group law and commutator certificates.

An endomorphism is stored as the tuple of images of the variables.  It acts
on a series ``f`` by substitution, ``alpha(f) = f(alpha(X1), ..., alpha(Xn))``,
and composition is composition of these ring maps::

    compose(outer, inner)(f) == outer(inner(f))
    compose(outer, inner).images[i] == inner.images[i](outer.images)

With the images written as matrix rows, the linear part of a composite is
``linear_part(inner) @ linear_part(outer)``.

Commutators follow ``[x, y] = x o y o x^-1 o y^-1``.  A certificate lists
pairs ``(beta, gamma)``; it claims that the left-to-right product of the
``[beta, gamma]`` equals the target modulo degree ``D + 1``.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .errors import (BadElementaryData, ContextMismatch, NotAugmented, NotAutomorphism,
                     NotAUnit, ParseError)
from .ring import parse_ring
from .series import HomogeneousMatrix, Series, SeriesContext, homogeneous_component, substitute_many
from . import solver

CONVENTION = "[x,y] = x*y*x^-1*y^-1"


class Endomorphism:
    """Augmented endomorphism of ``R[[X1..Xn]]`` known modulo degree ``D + 1``."""

    __slots__ = ("ctx", "images")

    def __init__(self, ctx: SeriesContext, images):
        images = tuple(images)
        if len(images) != ctx.nvars:
            raise ValueError(f"expected {ctx.nvars} images, got {len(images)}")
        for i, im in enumerate(images):
            if im.ctx != ctx:
                raise ContextMismatch(f"image of X{i + 1} lives in a different context")
            if 0 in im.terms:
                raise NotAugmented(f"image of X{i + 1} has a nonzero constant term")
        self.ctx = ctx
        self.images = images

    @property
    def nvars(self):
        return self.ctx.nvars

    def linear_part(self) -> list:
        """The ``n x n`` matrix whose row ``i`` is the linear part of the image of ``X_{i+1}``."""
        ctx = self.ctx
        zero = ctx.ring.zero
        keys = [ctx.var_key(j) for j in range(ctx.nvars)]
        return [[im.terms.get(k, zero) for k in keys] for im in self.images]

    def component(self, m: int) -> HomogeneousMatrix:
        return homogeneous_component(self.images, m)

    def is_identity(self) -> bool:
        return all(im.terms == {self.ctx.var_key(i): self.ctx.ring.one}
                   for i, im in enumerate(self.images))

    def in_GI(self) -> bool:
        ring = self.ctx.ring
        lin = self.linear_part()
        n = self.ctx.nvars
        return all(lin[i][j] == (ring.one if i == j else ring.zero)
                   for i in range(n) for j in range(n))

    def apply(self, f: Series) -> Series:
        return substitute_many((f,), self.images)[0]

    __call__ = apply

    def truncate(self, prec: int):
        ctx = self.ctx.with_prec(prec)
        return type(self)(ctx, [im.truncate(prec) for im in self.images])

    def to_text(self) -> str:
        return "\n".join(f"X{i + 1} -> {im.to_text()}" for i, im in enumerate(self.images))

    __str__ = to_text

    def __repr__(self):
        return f"{type(self).__name__}({'; '.join(self.to_text().splitlines())})"

    def __eq__(self, other):
        if not isinstance(other, Endomorphism):
            return NotImplemented
        return self.ctx == other.ctx and self.images == other.images

    def __hash__(self):
        return hash(self.images)


class Automorphism(Endomorphism):
    """Endomorphism whose linear part is invertible over the coefficient ring."""

    __slots__ = ()

    def __init__(self, ctx, images):
        super().__init__(ctx, images)
        det = solver.determinant(ctx.ring, self.linear_part())
        if not ctx.ring.is_unit(det):
            raise NotAutomorphism(
                f"linear part has determinant {ctx.ring.format_element(det)}, not a unit")


def format_automorphism(alpha: Endomorphism) -> str:
    return alpha.to_text()


def identity(ctx: SeriesContext) -> Automorphism:
    return Automorphism(ctx, [Series.variable(ctx, i) for i in range(ctx.nvars)])


def _same_ctx(maps):
    ctx = maps[0].ctx
    for a in maps[1:]:
        if a.ctx != ctx:
            raise ContextMismatch(f"cannot combine maps over {ctx} and {a.ctx}")
    return ctx


def compose(*maps: Endomorphism) -> Endomorphism:
    """``maps[0] o maps[1] o ...`` as ring maps; two arguments are ``(outer, inner)``."""
    if not maps:
        raise ValueError("compose needs at least one map")
    ctx = _same_ctx(maps)
    images = maps[0].images
    for inner in maps[1:]:
        images = substitute_many(inner.images, images)
    cls = Automorphism if all(isinstance(a, Automorphism) for a in maps) else Endomorphism
    return cls(ctx, images)


def invert(alpha: Automorphism) -> Automorphism:
    """Two-sided inverse, solved one degree at a time."""
    ctx = alpha.ctx
    ring = ctx.ring
    n = ctx.nvars
    try:
        linv = solver.invert_matrix(ring, alpha.linear_part())
    except NotAUnit:
        raise NotAutomorphism("linear part is not invertible") from None
    var_keys = [ctx.var_key(j) for j in range(n)]

    def apply_linv(vectors, c):
        return [Series(c, {k: v for k, v in _lin_combo(ring, linv[j], vectors).items()})
                for j in range(n)]

    # g = L^-1 (X - N(g)), where N is the nonlinear part of alpha; one more
    # degree is correct after every pass, so work at growing precision.
    first = ctx.with_prec(1)
    g = apply_linv([Series.variable(first, i) for i in range(n)], first)
    for d in range(2, ctx.prec + 1):
        c = ctx.with_prec(d)
        g = [s.truncate(d) for s in g]
        nonlinear = [Series(c, {k: v for k, v in im.terms.items() if k not in var_keys and
                                ctx.degree(k) <= d}, canonical=True) for im in alpha.images]
        ng = substitute_many(nonlinear, g)
        rhs = [Series.variable(c, i) - ng[i] for i in range(n)]
        g = apply_linv(rhs, c)
    return Automorphism(ctx, [s.truncate(ctx.prec) for s in g])


def _lin_combo(ring, coeffs, vectors):
    acc = {}
    for a, v in zip(coeffs, vectors):
        if not a:
            continue
        for k, x in v.terms.items():
            acc[k] = ring.add(acc[k], ring.mul(a, x)) if k in acc else ring.mul(a, x)
    return acc


def commutator(x: Automorphism, y: Automorphism) -> Automorphism:
    """``[x, y] = x o y o x^-1 o y^-1``."""
    return compose(x, y, invert(x), invert(y))


def conjugate(alpha: Automorphism, tau: Automorphism) -> Automorphism:
    """``tau o alpha o tau^-1``."""
    return compose(tau, alpha, invert(tau))


def elementary(ctx: SeriesContext, i: int, g: Series) -> Automorphism:
    """``X_{i+1} -> X_{i+1} + g`` with the other variables fixed (``i`` is 0-based).

    ``g`` may not involve ``X_{i+1}`` and must have no terms of degree below 2.
    """
    if not 0 <= i < ctx.nvars:
        raise BadElementaryData(f"variable index {i} out of range")
    if g.ctx != ctx:
        raise ContextMismatch("g lives in a different context")
    if g.involves(i):
        raise BadElementaryData(f"g involves X{i + 1}")
    if g and g.order() < 2:
        raise BadElementaryData("g has terms of degree below 2")
    images = [Series.variable(ctx, j) for j in range(ctx.nvars)]
    images[i] = images[i] + g
    return Automorphism(ctx, images)


def permutation_auto(ctx: SeriesContext, sigma) -> Automorphism:
    """``X_{i+1} -> X_{sigma[i]+1}``; ``sigma`` is a 0-based permutation."""
    sigma = list(sigma)
    if sorted(sigma) != list(range(ctx.nvars)):
        raise ValueError(f"{sigma} is not a permutation of 0..{ctx.nvars - 1}")
    return Automorphism(ctx, [Series.variable(ctx, s) for s in sigma])


def transposition(ctx: SeriesContext, i: int, j: int) -> Automorphism:
    sigma = list(range(ctx.nvars))
    sigma[i], sigma[j] = sigma[j], sigma[i]
    return permutation_auto(ctx, sigma)


def random_gi(ctx: SeriesContext, seed=None, rng: random.Random | None = None,
              pool=None) -> Automorphism:
    """Seeded random element with identity linear part.

    Every coefficient of degree 2..D is drawn uniformly from ``pool``
    (default: the ring's sample pool).
    """
    rng = rng or random.Random(seed)
    ring = ctx.ring
    pool = list(pool if pool is not None else ring.sample_pool())
    images = []
    for i in range(ctx.nvars):
        terms = {ctx.var_key(i): ring.one}
        for m in range(2, ctx.prec + 1):
            for k in ctx.monomials(m):
                terms[k] = rng.choice(pool)
        images.append(Series(ctx, terms))
    return Automorphism(ctx, images)


# -- certificates ------------------------------------------------------------------

def target_hash(alpha: Endomorphism) -> str:
    c = alpha.ctx
    blob = f"{c.ring.descriptor}\n{c.nvars}\n{c.prec}\n{alpha.to_text()}\n"
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class CommutatorCertificate:
    """Pairs ``(beta, gamma)`` whose commutators multiply, left to right, to a target."""

    ctx: SeriesContext
    pairs: tuple
    target_sha256: str = "-"
    convention: str = CONVENTION

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        for beta, gamma in self.pairs:
            if beta.ctx != self.ctx or gamma.ctx != self.ctx:
                raise ContextMismatch("certificate pair lives in a different context")

    def __len__(self):
        return len(self.pairs)

    def conjugated(self, tau: Automorphism) -> "CommutatorCertificate":
        """Certificate for ``tau o target o tau^-1``."""
        pairs = [(conjugate(b, tau), conjugate(g, tau)) for b, g in self.pairs]
        return CommutatorCertificate(self.ctx, pairs)

    def with_target(self, alpha: Endomorphism) -> "CommutatorCertificate":
        return CommutatorCertificate(self.ctx, self.pairs, target_hash(alpha), self.convention)

    def to_text(self) -> str:
        c = self.ctx
        out = ["fpsaut-certificate 1",
               f"ring: {c.ring.descriptor}",
               f"nvars: {c.nvars}",
               f"prec: {c.prec}",
               f"convention: {self.convention}",
               f"target-sha256: {self.target_sha256}",
               f"pairs: {len(self.pairs)}"]
        for k, (beta, gamma) in enumerate(self.pairs, start=1):
            out += [f"begin pair {k}", "beta:", beta.to_text(), "gamma:", gamma.to_text(),
                    f"end pair {k}"]
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CommutatorCertificate":
        return _CertificateReader(text).read()


class _CertificateReader:
    def __init__(self, text):
        self.lines = text.splitlines()
        self.i = 0

    def fail(self, message, expected=()):
        raise ParseError(message, min(self.i + 1, max(len(self.lines), 1)), 1, expected)

    def next_line(self):
        while self.i < len(self.lines):
            line = self.lines[self.i].split("#", 1)[0].strip()
            if line:
                return line
            self.i += 1
        return None

    def expect(self, prefix):
        line = self.next_line()
        if line is None or not line.startswith(prefix):
            self.fail(f"expected {prefix!r}", (prefix,))
        self.i += 1
        return line[len(prefix):].strip()

    def header_int(self, key):
        value = self.expect(key + ":")
        if not value.isdigit():
            self.fail(f"{key} must be a nonnegative integer", ("integer",))
        return int(value)

    def images(self, ctx):
        from .parsing import parse_series

        images = [None] * ctx.nvars
        for _ in range(ctx.nvars):
            line = self.next_line()
            raw = self.lines[self.i] if line is not None else ""
            head, sep, body = raw.partition("->")
            head = head.strip()
            if not sep or not head.startswith("X") or not head[1:].isdigit():
                self.fail("expected 'X<i> -> <series>'", ("X<i> ->",))
            idx = int(head[1:]) - 1
            if not 0 <= idx < ctx.nvars or images[idx] is not None:
                self.fail(f"unexpected or repeated variable {head}")
            image = parse_series(body.split("#", 1)[0], ctx, self.i + 1,
                                 col_offset=raw.index("->") + 2)
            if 0 in image.terms:
                raise NotAugmented(f"line {self.i + 1}: image of {head} has a nonzero constant term")
            images[idx] = image
            self.i += 1
        return Automorphism(ctx, images)

    def read(self):
        magic = self.next_line()
        if magic != "fpsaut-certificate 1":
            self.fail("missing header 'fpsaut-certificate 1'", ("fpsaut-certificate 1",))
        self.i += 1
        ring = parse_ring(self.expect("ring:"))
        n = self.header_int("nvars")
        D = self.header_int("prec")
        try:
            ctx = SeriesContext(ring, n, D)
        except ValueError as exc:
            self.fail(str(exc))
        convention = self.expect("convention:")
        if convention != CONVENTION:
            self.fail(f"unsupported commutator convention {convention!r}", (CONVENTION,))
        digest = self.expect("target-sha256:")
        count = self.header_int("pairs")
        pairs = []
        for k in range(1, count + 1):
            self.expect(f"begin pair {k}")
            self.expect("beta:")
            beta = self.images(ctx)
            self.expect("gamma:")
            gamma = self.images(ctx)
            self.expect(f"end pair {k}")
            pairs.append((beta, gamma))
        if self.next_line() is not None:
            self.fail("trailing content after the last pair")
        return CommutatorCertificate(ctx, pairs, digest, convention)


@dataclass(frozen=True)
class Discrepancy:
    degree: int
    component: int
    monomial: str
    expected: str
    got: str

    def __str__(self):
        return (f"degree {self.degree}, component X{self.component}, monomial {self.monomial}: "
                f"expected {self.expected}, got {self.got}")


@dataclass(frozen=True)
class Verification:
    ok: bool
    discrepancy: Discrepancy | None = None

    def __bool__(self):
        return self.ok


def certificate_product(cert: CommutatorCertificate) -> Automorphism:
    result = identity(cert.ctx)
    for beta, gamma in cert.pairs:
        result = compose(result, commutator(beta, gamma))
    return result


def first_discrepancy(expected: Endomorphism, got: Endomorphism) -> Discrepancy | None:
    ctx = expected.ctx
    ring = ctx.ring
    for m in range(1, ctx.prec + 1):
        for i, (e, g) in enumerate(zip(expected.images, got.images)):
            for k in ctx.monomials(m):
                a, b = e.coeff_by_key(k), g.coeff_by_key(k)
                if a != b:
                    return Discrepancy(m, i + 1, ctx.monomial_text(k),
                                       ring.format_element(a), ring.format_element(b))
    return None


def verify_certificate(cert: CommutatorCertificate, target: Endomorphism) -> Verification:
    """Recompute the commutator product with ``compose``/``invert`` only and compare."""
    if cert.ctx != target.ctx:
        raise ContextMismatch(f"certificate context {cert.ctx} differs from target {target.ctx}")
    product = certificate_product(cert)
    if product.images == target.images:
        return Verification(True)
    return Verification(False, first_discrepancy(target, product))
