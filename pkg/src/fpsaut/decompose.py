"""Constructive commutator decompositions of automorphisms with identity linear part.

Families:

* ``decompose_char0``: one commutator whenever scalars ``b``, ``c`` with the
  required unit conditions exist (default ``b=2``, ``c=3`` over Q).
* ``decompose_univariate_charp``: two commutators for one variable over a
  ring of characteristic ``p >= 5``.
* ``decompose_multivariate_charp``: triangular factorisation into moves of
  single variables.  Each move splits into small pieces, the hardest being a
  univariate map over the ring of series in the remaining variables.

Every degree step solves a small affine system obtained by probing the real
composition residual, then re-checks the residual.  Public entry points
verify the finished certificate and raise ``InternalContradiction`` instead
of returning a bad one.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import solver
from .autgroup import (Automorphism, CommutatorCertificate, commutator, compose, conjugate,
                       elementary, identity, invert, transposition, verify_certificate)
from .errors import (BadElementaryData, BadUnits, InternalContradiction, NotInGI,
                     UnsupportedCharacteristic, UnsupportedRing)
from .ring import SeriesRing, find_prime_field_element_of_order
from .series import (HomogeneousMatrix, Series, SeriesContext, homogeneous_component,
                     invert_series_unit)


def _require_gi(alpha):
    if not alpha.in_GI():
        raise NotInGI("the automorphism does not have identity linear part")


def _require_charp(ring):
    p = ring.characteristic
    if p in (2, 3):
        raise UnsupportedCharacteristic(f"characteristic {p} is not supported (need p >= 5)")
    if p == 0:
        raise UnsupportedCharacteristic("this algorithm needs a ring of positive characteristic")


def _certificate(ctx, pairs, target, check=True):
    cert = CommutatorCertificate(ctx, pairs).with_target(target)
    if check:
        result = verify_certificate(cert, target)
        if not result:
            raise InternalContradiction(f"certificate failed verification: {result.discrepancy}")
    return cert


def _images_diff(a, b):
    return [x - y for x, y in zip(a.images, b.images)]


def _scaled_identity(ctx, s):
    return Automorphism(ctx, [Series.variable(ctx, i).scale(s) for i in range(ctx.nvars)])


def _add_component(alpha, mat: HomogeneousMatrix):
    extra = mat.rows_as_series(alpha.ctx)
    return Automorphism(alpha.ctx, [x + y for x, y in zip(alpha.images, extra)])


# -- characteristic-0 style single commutator ----------------------------------------

@dataclass(frozen=True)
class Char0Params:
    """Linear parts ``b*Id`` and ``c*Id`` of the commutator pair."""

    b: object
    c: object

    @classmethod
    def default(cls, ring):
        return cls(ring.from_int(2), ring.from_int(3))

    def unit_pair(self, ring, m):
        """The scalars multiplying the degree-``m`` parts of ``gamma`` and ``beta``."""
        s = ring.sub(ring.pow(self.b, m), self.b)
        t = ring.sub(self.c, ring.pow(self.c, m))
        return s, t

    def check(self, ring, top):
        """Raise ``BadUnits`` at the first degree ``m <= top`` with no usable unit."""
        if not (ring.is_unit(self.b) and ring.is_unit(self.c)):
            raise BadUnits("b and c must be units", degree=1)
        for m in range(2, top + 1):
            s, t = self.unit_pair(ring, m)
            if not (ring.is_unit(s) or ring.is_unit(t)):
                raise BadUnits(
                    f"degree {m}: neither b^{m}-b = {ring.format_element(s)} nor "
                    f"c-c^{m} = {ring.format_element(t)} is a unit", degree=m)


def _pair_residual(alpha, beta, gamma):
    """Images of ``beta o gamma - alpha o gamma o beta``; zero iff ``[beta, gamma] = alpha``."""
    return _images_diff(compose(beta, gamma), compose(alpha, gamma, beta))


def _probe_unit_pair(ring, params, m):
    """Coefficients of the top parts of ``gamma`` and ``beta`` in the degree-``m`` residual.

    Probed on the one-variable model with ``alpha = id`` and nothing in
    between: only linear parts meet top-degree parts there.
    """
    ctx1 = SeriesContext(ring, 1, m)
    x = Series.variable(ctx1, 0)
    ident = identity(ctx1)
    key = ctx1.monomials(m)[0]

    def residual(v):
        gamma = Automorphism(ctx1, [x.scale(params.c) + Series(ctx1, {key: v[0]})])
        beta = Automorphism(ctx1, [x.scale(params.b) + Series(ctx1, {key: v[1]})])
        return [_pair_residual(ident, beta, gamma)[0].coeff_by_key(key)]

    system = solver.probe_affine(residual, 2, ring)
    return system.matrix[0]


def _char0_pair(alpha, params, top):
    ctx = alpha.ctx
    ring = ctx.ring
    params.check(ring, top)
    beta_full = _scaled_identity(ctx, params.b)
    gamma_full = _scaled_identity(ctx, params.c)
    for m in range(2, top + 1):
        a, b, g = alpha.truncate(m), beta_full.truncate(m), gamma_full.truncate(m)
        M = homogeneous_component(_pair_residual(a, b, g), m)
        if M.is_zero():
            continue
        s, t = _probe_unit_pair(ring, params, m)
        C, B = solver.bezout_solve_componentwise(ring, s, t, M.map(ring.neg))
        C = HomogeneousMatrix(ctx, m, C.entries)
        B = HomogeneousMatrix(ctx, m, B.entries)
        gamma_full = _add_component(gamma_full, C)
        beta_full = _add_component(beta_full, B)
        check = _pair_residual(a, beta_full.truncate(m), gamma_full.truncate(m))
        if any(check):
            raise InternalContradiction(f"degree {m} equation still fails after solving")
    return beta_full, gamma_full


def approx_commutator(alpha: Automorphism, params: Char0Params, m: int):
    """``(beta, gamma)`` with ``[beta, gamma]`` equal to ``alpha`` through degree ``m``."""
    _require_gi(alpha)
    return _char0_pair(alpha, params, min(m, alpha.ctx.prec))


def decompose_char0(alpha: Automorphism, params: Char0Params | None = None) -> CommutatorCertificate:
    """One pair ``(beta, gamma)`` with ``[beta, gamma] = alpha``."""
    _require_gi(alpha)
    params = params or Char0Params.default(alpha.ctx.ring)
    beta, gamma = _char0_pair(alpha, params, alpha.ctx.prec)
    return _certificate(alpha.ctx, [(beta, gamma)], alpha)


# -- one variable, characteristic p >= 5 ------------------------------------------------

SEED_PHI = (2, 4)  # X + 2 X^2 + 4 X^3


def _univariate(ctx, coeffs):
    """``sum coeffs[k] X^k`` for ``k >= 1`` (``coeffs[0]`` ignored)."""
    key = ctx.var_key(0)
    return Series(ctx, {key * k: c for k, c in enumerate(coeffs) if k and k <= ctx.prec})


def seed_phi(ctx):
    ring = ctx.ring
    coeffs = [ring.zero, ring.one] + [ring.from_int(v) for v in SEED_PHI]
    return Automorphism(ctx, [_univariate(ctx, coeffs)])


def _charp_residual(psi, bc, cc, top):
    """Images of ``beta o gamma o psi - gamma o beta`` at precision ``top``."""
    ctx = psi.ctx.with_prec(top)
    beta = Automorphism(ctx, [_univariate(ctx, bc)])
    gamma = Automorphism(ctx, [_univariate(ctx, cc)])
    return _images_diff(compose(beta, gamma, psi.truncate(top)), compose(gamma, beta))[0]


def _seed_coefficients(ring, D):
    b = [ring.zero] * (D + 2)
    c = [ring.zero] * (D + 2)
    b[1] = c[1] = ring.from_int(-1)
    b[2] = ring.one
    return b, c


def charp_step_system(psi: Automorphism, b, c, m: int):
    """The probed system for the even step ``m`` and a setter applying its solution.

    ``b`` and ``c`` are the working coefficient lists (index = degree).  When
    ``m`` is not 2 mod p the unknowns are ``(c_m, b_m)``; otherwise they are
    ``(c_m - b_m, c_{m-1}, b_{m-1})`` with ``b_m`` pinned to 0.
    """
    ring = psi.ctx.ring
    p = ring.characteristic
    D = psi.ctx.prec
    degrees = [d for d in (m, m + 1) if d <= D]
    top = degrees[-1]
    key = psi.ctx.var_key(0)
    special = m % p == 2

    def assign(bb, cc, x):
        if special:
            cc[m], bb[m], cc[m - 1], bb[m - 1] = x[0], ring.zero, x[1], x[2]
        else:
            cc[m], bb[m] = x[0], x[1]

    def residual(x):
        bb, cc = list(b), list(c)
        assign(bb, cc, x)
        r = _charp_residual(psi, bb, cc, top)
        return [r.coeff_by_key(key * d) for d in degrees]

    system = solver.probe_affine(residual, 3 if special else 2, ring)
    return system, (lambda x: assign(b, c, x)), top


def _charp_pairs(alpha):
    ctx = alpha.ctx
    ring = ctx.ring
    D = ctx.prec
    key = ctx.var_key(0)
    t = find_prime_field_element_of_order(ring, 4)
    phi = seed_phi(ctx)
    beta0, gamma0 = _char0_pair(compose(alpha, invert(phi)), Char0Params(t, t), min(3, D))
    psi = compose(invert(commutator(beta0, gamma0)), alpha)
    for d, want in zip((2, 3), SEED_PHI):
        if d <= D and psi.images[0].coeff_by_key(key * d) != ring.from_int(want):
            raise InternalContradiction(f"seed stage left degree-{d} coefficient off target")
    b, c = _seed_coefficients(ring, D)
    for m in range(4, D + 1, 2):
        system, apply, top = charp_step_system(psi, b, c, m)
        apply(solver.solve_exact(system))
        if _charp_residual(psi, b, c, top):
            raise InternalContradiction(f"step {m} left an equation of degree <= {top} unsolved")
    beta = Automorphism(ctx, [_univariate(ctx, b)])
    gamma = Automorphism(ctx, [_univariate(ctx, c)])
    # beta o gamma o psi = gamma o beta  means  psi = [gamma^-1, beta^-1]
    return [(beta0, gamma0), (invert(gamma), invert(beta))]


def decompose_univariate_charp(alpha: Automorphism) -> CommutatorCertificate:
    """At most two pairs for ``alpha`` in one variable over characteristic ``p >= 5``."""
    _require_charp(alpha.ctx.ring)
    if alpha.ctx.nvars != 1:
        raise ValueError("decompose_univariate_charp needs exactly one variable")
    _require_gi(alpha)
    return _certificate(alpha.ctx, _charp_pairs(alpha), alpha)


# -- several variables ----------------------------------------------------------------------

def _moved_variable(alpha):
    """Indices of the variables whose image differs from the variable itself."""
    ctx = alpha.ctx
    return [i for i, im in enumerate(alpha.images) if im != Series.variable(ctx, i)]


def _elementary_pairs(ctx, i, g):
    if not g:
        return []
    if i != 0:
        tau = transposition(ctx, 0, i)
        g0 = g.substitute(tau.images)
        return [(conjugate(b, tau), conjugate(c, tau)) for b, c in _elementary_pairs(ctx, 0, g0)]
    x = [Series.variable(ctx, j) for j in range(ctx.nvars)]
    beta = Automorphism(ctx, [x[0] + x[1]] + x[1:])
    gamma = Automorphism(ctx, [x[0], x[1] + g] + x[2:])
    # beta o eps o gamma = gamma o beta  gives  eps = [beta^-1, gamma]
    return [(invert(beta), gamma)]


def decompose_elementary(eps: Automorphism) -> CommutatorCertificate:
    """One pair for ``X_i -> X_i + g`` (``g`` free of ``X_i``, in the square of the ideal)."""
    ctx = eps.ctx
    if ctx.nvars < 2:
        raise BadElementaryData("elementary moves need at least two variables")
    moved = _moved_variable(eps)
    if len(moved) > 1:
        raise BadElementaryData("more than one variable is moved")
    if not moved:
        return _certificate(ctx, [], eps)
    i = moved[0]
    g = eps.images[i] - Series.variable(ctx, i)
    elementary(ctx, i, g)  # validates g
    return _certificate(ctx, _elementary_pairs(ctx, i, g), eps)


def unit_scaling(ctx, f: Series) -> Automorphism:
    """``X1 -> X1 (1 + f)`` with the other variables fixed."""
    x = [Series.variable(ctx, j) for j in range(ctx.nvars)]
    return Automorphism(ctx, [x[0] * (Series.one(ctx) + f)] + x[1:])


def _split_x1(h):
    """``h = sum_e X1^e * parts[e]`` with no ``parts[e]`` involving ``X1``."""
    ctx = h.ctx
    shift = 8 * (ctx.nvars - 1)
    parts = [dict() for _ in range(ctx.prec + 1)]
    for k, c in h.terms.items():
        e = k >> shift
        parts[e][k - (e << shift)] = c
    return [Series(ctx, p, canonical=True) for p in parts]


def _step1_pairs(ctx, f, j):
    """``X1 -> X1 (1+f)`` as ``[gamma, beta]``, pivoting on ``X_j``; needs ``1 + xi_j`` a unit."""
    x = [Series.variable(ctx, k) for k in range(ctx.nvars)]
    beta_images = list(x)
    beta_images[0] = x[0] + x[0] * x[j]
    gamma_images = list(x)
    gamma_images[j] = x[j] + f + x[j] * f
    # alpha o beta o gamma = gamma o beta
    return [(Automorphism(ctx, gamma_images), Automorphism(ctx, beta_images))]


def _step4_pairs(ctx, f, j):
    """Variant of the above for ``xi_j = -1``: needs ``1 - xi_j = 2`` a unit."""
    x = [Series.variable(ctx, k) for k in range(ctx.nvars)]
    one = Series.one(ctx)
    beta_images = list(x)
    beta_images[0] = x[0] - x[0] * x[j]
    gamma_images = list(x)
    gamma_images[j] = x[j] + (x[j] - one) * f
    return [(Automorphism(ctx, gamma_images), Automorphism(ctx, beta_images))]


def _step2_pairs(ctx, xi, j):
    """``X1 -> X1 (1 + xi X_j)`` as ``[alpha^-1, gamma]`` with ``gamma: X_j -> 2 X_j + xi X_j^2``."""
    x = [Series.variable(ctx, k) for k in range(ctx.nvars)]
    alpha = unit_scaling(ctx, x[j].scale(xi))
    gamma_images = list(x)
    gamma_images[j] = x[j].scale(ctx.ring.from_int(2)) + (x[j] * x[j]).scale(xi)
    # alpha o alpha o gamma = gamma o alpha
    return [(invert(alpha), Automorphism(ctx, gamma_images))]


def _unit_scaling_pairs(ctx, f):
    ring = ctx.ring
    n = ctx.nvars
    if not ring.is_unit(ring.from_int(2)):
        raise UnsupportedRing(f"2 is not a unit in {ring.descriptor}")
    if not f:
        return []
    xi = [f.coeff_by_key(ctx.var_key(j)) for j in range(n)]
    if ring.is_field:
        j = next((k for k in range(1, n) if xi[k]), 1)
        if ring.is_unit(ring.add(ring.one, xi[j])):
            return _step1_pairs(ctx, f, j)
        return _step4_pairs(ctx, f, j)
    one = Series.one(ctx)
    linear = one
    pairs_lin = []
    for j in range(1, n):
        if xi[j]:
            linear = linear * (one + Series.variable(ctx, j).scale(xi[j]))
            pairs_lin += _step2_pairs(ctx, xi[j], j)
    theta = (one + f) * invert_series_unit(linear)
    rest = theta - one
    pairs = _step1_pairs(ctx, rest, 1) if rest else []
    return pairs + pairs_lin


def _scaling_factor(alpha):
    """``f`` with ``alpha: X1 -> X1 (1+f)``, or ``None`` if ``alpha`` is not of that shape."""
    ctx = alpha.ctx
    if _moved_variable(alpha) not in ([], [0]):
        return None
    parts = _split_x1(alpha.images[0])
    if parts[0] or any(parts[2:]):
        return None
    f = parts[1] - Series.one(ctx)
    if f.constant_term():
        return None
    return f


def decompose_unit_scaling(alpha: Automorphism) -> CommutatorCertificate:
    """Pairs for ``X1 -> X1 (1+f)``, ``f`` in the other variables without constant term.

    One pair over a field; over other rings at most ``n`` pairs.
    """
    ctx = alpha.ctx
    if ctx.nvars < 2:
        raise ValueError("unit scaling needs at least two variables")
    f = _scaling_factor(alpha)
    if f is None:
        raise ValueError("automorphism is not of the form X1 -> X1 (1 + f(X2..Xn))")
    return _certificate(ctx, _unit_scaling_pairs(ctx, f), alpha)


def _coefficient_ring(ctx):
    """``R' = R[[X2..Xn]]`` truncated at the same total degree."""
    return SeriesRing(ctx.ring, ctx.nvars - 1, ctx.prec)


def _lift(uni_map, ctx):
    """Map ``X -> sum c_e(Y) X^e`` over ``R'`` to ``X1 -> sum c_e X1^e`` fixing ``X2..Xn``."""
    shift = 8 * (ctx.nvars - 1)
    deg = ctx._degree
    terms = {}
    for ke, coeff in uni_map.images[0].terms.items():
        e = ke  # one variable: the key is the exponent
        for ky, c in coeff.terms.items():
            k = (e << shift) + ky
            if k in deg:
                terms[k] = c
    x = [Series.variable(ctx, j) for j in range(ctx.nvars)]
    return Automorphism(ctx, [Series(ctx, terms, canonical=True)] + x[1:])


def _single_variable_pairs(alpha):
    ctx = alpha.ctx
    if _moved_variable(alpha) not in ([], [0]):
        raise ValueError("only X1 may be moved")
    h = alpha.images[0] - Series.variable(ctx, 0)
    if h and h.order() < 2:
        raise NotInGI("the image of X1 must be X1 plus terms of degree >= 2")
    parts = _split_x1(h)
    g, f1 = parts[0], parts[1]
    pairs = []
    one = Series.one(ctx)
    inv_unit = invert_series_unit(one + f1)
    higher = {j: parts[j] * inv_unit for j in range(2, len(parts)) if parts[j]}
    if higher:
        rp = _coefficient_ring(ctx)
        uctx = SeriesContext(rp, 1, ctx.prec)
        yctx = rp.context
        coeffs = {1: rp.one}
        for j, theta in higher.items():
            # drop the X1 slot: keys of theta have zero X1 exponent
            coeffs[j] = Series(yctx, dict(theta.terms), canonical=True)
        uni = Automorphism(uctx, [Series(uctx, {uctx.var_key(0) * j: c for j, c in coeffs.items()})])
        pairs += [(_lift(b, ctx), _lift(c, ctx)) for b, c in _charp_pairs(uni)]
    if f1:
        pairs += _unit_scaling_pairs(ctx, f1)
    if g:
        pairs += _elementary_pairs(ctx, 0, g)
    return pairs


def decompose_single_variable(alpha: Automorphism) -> CommutatorCertificate:
    """Pairs for ``X1 -> X1 + h`` with the other variables fixed.

    At most ``n + 3`` pairs, and at most 4 over a field.
    """
    _require_charp(alpha.ctx.ring)
    if alpha.ctx.nvars < 2:
        raise ValueError("use decompose_univariate_charp for one variable")
    return _certificate(alpha.ctx, _single_variable_pairs(alpha), alpha)


def factor_triangular(alpha: Automorphism) -> list:
    """Factors ``alpha_1, ..., alpha_n`` with ``alpha = alpha_1 o ... o alpha_n``.

    Factor ``k`` moves only ``X_k``, sending it to ``alpha(X_k)`` pulled back
    through the inverse of the product of the earlier factors.
    """
    ctx = alpha.ctx
    n = ctx.nvars
    factors = []
    prefix = identity(ctx)
    for k in range(n):
        back = invert(prefix)
        images = [Series.variable(ctx, j) for j in range(n)]
        images[k] = alpha.images[k].substitute(back.images)
        factor = Automorphism(ctx, images)
        factors.append(factor)
        prefix = compose(prefix, factor)
    if prefix != alpha:
        raise InternalContradiction("triangular factors do not multiply back to the input")
    return factors


def decompose_multivariate_charp(alpha: Automorphism) -> CommutatorCertificate:
    """At most ``n(n+3)`` pairs (``4n`` over a field) for ``n >= 2`` variables."""
    ctx = alpha.ctx
    _require_charp(ctx.ring)
    _require_gi(alpha)
    if ctx.nvars < 2:
        raise ValueError("use decompose_univariate_charp for one variable")
    pairs = []
    for k, factor in enumerate(factor_triangular(alpha)):
        if factor.is_identity():
            continue
        if k == 0:
            pairs += _single_variable_pairs(factor)
            continue
        tau = transposition(ctx, 0, k)
        moved = conjugate(factor, tau)
        pairs += [(conjugate(b, tau), conjugate(c, tau)) for b, c in _single_variable_pairs(moved)]
    return _certificate(ctx, pairs, alpha)


ALGORITHMS = ("auto", "char0", "charp1", "charpn")


def choose_algorithm(alpha) -> str:
    ring = alpha.ctx.ring
    if ring.characteristic == 0:
        return "char0"
    return "charp1" if alpha.ctx.nvars == 1 else "charpn"


def decompose(alpha: Automorphism, algorithm: str = "auto") -> CommutatorCertificate:
    """Decompose ``alpha`` with the named algorithm (``auto`` picks by ring and ``n``)."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    _require_gi(alpha)
    if algorithm == "auto":
        algorithm = choose_algorithm(alpha)
    if algorithm == "char0":
        return decompose_char0(alpha)
    if algorithm == "charp1":
        return decompose_univariate_charp(alpha)
    return decompose_multivariate_charp(alpha)
