import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

import oracles
from fpsaut.errors import ContextMismatch, NotAugmented, NotAUnit
from fpsaut.parsing import parse_series
from fpsaut.ring import DualNumbers, PrimeField, RationalField
from fpsaut.series import (HomogeneousMatrix, _substitute_generic, Series, SeriesContext, from_components,
                           homogeneous_component, invert_series_unit, star, substitute,
                           substitute_many, univariate_compose_gh)

Q = RationalField()
F5, F7 = PrimeField(5), PrimeField(7)
D5 = DualNumbers(5)
RINGS = [Q, F7, D5]


def S(text, ctx):
    return parse_series(text, ctx)


def test_monomial_counts_and_lex_order():
    for n in range(1, 5):
        for m in range(0, 6):
            ctx = SeriesContext(Q, n, 6)
            assert ctx.num_monomials(m) == comb(m + n - 1, n - 1)
    ctx = SeriesContext(Q, 3, 3)
    got = [ctx.exponents(k) for k in ctx.monomials(2)]
    assert got == sorted(got, reverse=True)
    assert got[0] == (2, 0, 0) and got[-1] == (0, 0, 2)


def test_arith_examples():
    ctx = SeriesContext(Q, 2, 3)
    assert S("(X1+X2)*(X1-X2)", ctx) == S("X1^2 - X2^2", ctx)
    c1 = SeriesContext(Q, 1, 3)
    assert S("X1+X1^2+X1^3", c1).truncate(2) == S("X1+X1^2", SeriesContext(Q, 1, 2))
    c2 = SeriesContext(Q, 1, 2)
    assert S("(X1+X1^2)*X1^2", c2) == Series.zero(c2)
    with pytest.raises(ContextMismatch):
        Series.variable(ctx, 0) + Series.variable(c1, 0)


def test_canonical_storage():
    ctx = SeriesContext(F5, 2, 3)
    f = S("X1 + 5*X2 + 3*X1^2 + 2*X1^2", ctx)
    assert f.terms == {ctx.var_key(0): 1}
    assert all(v for v in f.terms.values())


def test_substitute_examples():
    ctx = SeriesContext(Q, 1, 4)
    f = S("X1 + X1^2", ctx)
    assert substitute(f, [f]) == S("X1 + 2*X1^2 + 2*X1^3 + X1^4", ctx)
    ctx2 = SeriesContext(Q, 2, 2)
    x1, x2 = Series.variable(ctx2, 0), Series.variable(ctx2, 1)
    assert substitute(x1 * x2, [x2, x1]) == x1 * x2
    g = S("3*X1^2 - X1*X2 + 1/2", ctx2)
    assert substitute(g, [x1, x2]) == g
    with pytest.raises(NotAugmented):
        substitute(g, [x1 + Series.one(ctx2), x2])


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.descriptor)
def test_substitute_matches_sympy(ring):
    rng = random.Random(3)
    ctx = SeriesContext(ring, 2, 3 if ring is D5 else 4)
    for _ in range(25):
        f = oracles.random_series(ctx, rng)
        ims = [oracles.random_series(ctx, rng, min_degree=1) for _ in range(2)]
        assert substitute(f, ims) == oracles.substitute(f, ims)


@pytest.mark.parametrize("ring", [Q, F5, F7, PrimeField(2**61 - 1)], ids=lambda r: r.descriptor)
def test_univariate_substitution_matches_sympy(ring):
    # one variable takes the packed-integer route over small primes; the
    # Mersenne prime is too wide for it and falls back to the general loop
    rng = random.Random(13)
    for D in (1, 4, 8):
        ctx = SeriesContext(ring, 1, D)
        for _ in range(4):
            f = oracles.random_series(ctx, rng, density=0.6)
            g = oracles.random_series(ctx, rng, density=0.6, min_degree=1)
            got = substitute(f, [g])
            assert got == oracles.substitute(f, [g])
            assert all(got.terms.values())


def test_fast_paths_agree_with_general_loop():
    rng = random.Random(14)
    for ring, n in ((Q, 1), (Q, 3), (F5, 1), (F7, 1)):
        ctx = SeriesContext(ring, n, 7)
        for _ in range(10):
            fs = tuple(oracles.random_series(ctx, rng) for _ in range(2))
            ims = [oracles.random_series(ctx, rng, min_degree=1) for _ in range(n)]
            general = _substitute_generic(ctx, fs, [im.terms for im in ims])
            assert substitute_many(fs, ims) == general


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.descriptor)
def test_substitution_is_a_homomorphism(ring):
    rng = random.Random(11)
    ctx = SeriesContext(ring, 2, 4)
    for _ in range(200):
        f, g = oracles.random_series(ctx, rng), oracles.random_series(ctx, rng)
        ims = [oracles.random_series(ctx, rng, min_degree=1) for _ in range(2)]
        sf, sg = substitute(f, ims), substitute(g, ims)
        assert substitute(f * g, ims) == sf * sg
        assert substitute(f + g, ims) == sf + sg
        assert substitute_many((f, g), ims) == (sf, sg)


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.descriptor)
def test_substitution_associative(ring):
    rng = random.Random(12)
    ctx = SeriesContext(ring, 2, 4)
    for _ in range(60):
        f = oracles.random_series(ctx, rng)
        im1 = [oracles.random_series(ctx, rng, min_degree=1) for _ in range(2)]
        im2 = [oracles.random_series(ctx, rng, min_degree=1) for _ in range(2)]
        nested = substitute(substitute(f, im1), im2)
        assert nested == substitute(f, [substitute(g, im2) for g in im1])


def test_gh_examples():
    one = Fraction(1)
    assert univariate_compose_gh([one, one], [one, one], 3, Q) == 2
    assert univariate_compose_gh([one, one], [one, one], 4, Q) == 1
    b = [Fraction(k) for k in (3, -1, 2, 5)]
    for m in range(1, 5):
        assert univariate_compose_gh(b, [one], m, Q) == b[m - 1]


@pytest.mark.parametrize("ring", [Q, F7], ids=lambda r: r.descriptor)
def test_gh_matches_literal_enumeration(ring):
    rng = random.Random(4)
    for _ in range(20):
        b = [ring.random_element(rng) for _ in range(8)]
        c = [ring.random_element(rng) for _ in range(8)]
        for m in range(1, 9):
            assert univariate_compose_gh(b, c, m, ring) == oracles.gh_bruteforce(ring, b, c, m)


def test_components_round_trip():
    ctx = SeriesContext(Q, 2, 3)
    tup = (S("X1 + X2^2", ctx), S("X2", ctx))
    M = homogeneous_component(tup, 2)
    assert M.entries == ((0, 0, 1), (0, 0, 0))
    a, b, c, d = (Fraction(k) for k in (2, -1, 3, 5))
    lin = (S("2*X1 - X2", ctx), S("3*X1 + 5*X2", ctx))
    assert homogeneous_component(lin, 1).entries == ((a, b), (c, d))
    rng = random.Random(8)
    for _ in range(20):
        tup = tuple(oracles.random_series(ctx, rng, min_degree=1) for _ in range(2))
        mats = [homogeneous_component(tup, m) for m in range(1, 4)]
        assert from_components(ctx, mats) == tup


def _lin_mat(ctx, rows):
    return HomogeneousMatrix(ctx, 1, tuple(tuple(r) for r in rows))


def _random_hmat(ctx, m, rng):
    return HomogeneousMatrix(ctx, m, tuple(
        tuple(ctx.ring.random_element(rng) for _ in ctx.monomials(m)) for _ in range(ctx.nvars)))


def test_star_univariate_orientation():
    # phi_L o phi_M sends X to M(L(X)) = v (u X^l)^m
    ctx = SeriesContext(Q, 1, 12)
    u, v = Fraction(3), Fraction(-2, 5)
    for l, m in [(1, 1), (2, 3), (3, 2), (4, 1), (1, 5)]:
        L = HomogeneousMatrix(ctx, l, ((u,),))
        M = HomogeneousMatrix(ctx, m, ((v,),))
        assert star(L, M) == HomogeneousMatrix(ctx, l * m, ((v * u ** m,),))


def test_star_degree_overflow():
    ctx = SeriesContext(Q, 1, 3)
    L = HomogeneousMatrix(ctx, 2, ((Fraction(1),),))
    with pytest.raises(ValueError):
        star(L, L)


@pytest.mark.parametrize("ring", [Q, F7, D5], ids=lambda r: r.descriptor)
def test_star_linear_is_matrix_product_and_associative(ring):
    rng = random.Random(9)
    ctx = SeriesContext(ring, 2, 8)
    ident = _lin_mat(ctx, [[ring.one, ring.zero], [ring.zero, ring.one]])
    for _ in range(50):
        A, B = _random_hmat(ctx, 1, rng), _random_hmat(ctx, 1, rng)
        prod = [[ring.add(ring.mul(B.entries[i][0], A.entries[0][j]),
                          ring.mul(B.entries[i][1], A.entries[1][j])) for j in range(2)]
                for i in range(2)]
        assert star(A, B).entries == tuple(tuple(r) for r in prod)
        L = _random_hmat(ctx, 2, rng)
        assert star(L, ident) == L
        M, N = _random_hmat(ctx, 2, rng), _random_hmat(ctx, 1 + rng.randrange(2), rng)
        assert star(star(L, M), N) == star(L, star(M, N))


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.descriptor)
def test_low_degrees_ignore_high_parts(ring):
    rng = random.Random(21)
    ctx = SeriesContext(ring, 2, 5)
    for _ in range(30):
        g = [oracles.random_series(ctx, rng, min_degree=1) for _ in range(2)]
        b = [oracles.random_series(ctx, rng, min_degree=1) for _ in range(2)]
        k = rng.randrange(1, 5)
        cut = lambda fs: [f.truncate(k).truncate(5) for f in fs]
        full = substitute_many(b, g)
        chopped = substitute_many(cut(b), cut(g))
        assert [f.truncate(k) for f in full] == [f.truncate(k) for f in chopped]


def _with_degree(fs, m, mat):
    return [f - f.homogeneous(m) + r for f, r in zip(fs, mat.rows_as_series(fs[0].ctx))]


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.descriptor)
def test_top_degree_enters_only_through_linear_parts(ring):
    rng = random.Random(22)
    ctx = SeriesContext(ring, 2, 4)
    m = 3
    for _ in range(30):
        gamma = [oracles.random_series(ctx, rng, min_degree=1) for _ in range(2)]
        beta = [oracles.random_series(ctx, rng, min_degree=1) for _ in range(2)]

        def expression(g, b):
            composite = substitute_many(b, g)  # gamma followed by beta
            top = homogeneous_component(composite, m)
            t1 = star(homogeneous_component(g, m), homogeneous_component(b, 1))
            t2 = star(homogeneous_component(g, 1), homogeneous_component(b, m))
            return tuple(tuple(ring.sub(ring.sub(x, y), z) for x, y, z in zip(r0, r1, r2))
                         for r0, r1, r2 in zip(top.entries, t1.entries, t2.entries))

        base = expression(gamma, beta)
        g2 = _with_degree(gamma, m, _random_hmat(ctx, m, rng))
        b2 = _with_degree(beta, m, _random_hmat(ctx, m, rng))
        assert expression(g2, b2) == base


def test_invert_series_unit_examples():
    c1 = SeriesContext(Q, 1, 3)
    assert invert_series_unit(S("1+X1", c1)) == S("1 - X1 + X1^2 - X1^3", c1)
    assert invert_series_unit(Series.constant(c1, Fraction(4))) == Series.constant(c1, Fraction(1, 4))
    c2 = SeriesContext(Q, 2, 2)
    assert invert_series_unit(S("1+X1+X2", c2)) == S("1 - X1 - X2 + X1^2 + 2*X1*X2 + X2^2", c2)
    with pytest.raises(NotAUnit):
        invert_series_unit(S("X1", c2))
    cd = SeriesContext(D5, 2, 3)
    with pytest.raises(NotAUnit):
        invert_series_unit(S("eps + X1", cd))


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.descriptor)
def test_invert_series_unit_property(ring):
    rng = random.Random(31)
    ctx = SeriesContext(ring, 2, 4)
    one = Series.one(ctx)
    for _ in range(50):
        f = oracles.random_series(ctx, rng, min_degree=1) + Series.constant(ctx, ring.one)
        assert f * invert_series_unit(f) == one


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(-20, 20)), max_size=10))
def test_ring_laws_for_series(terms):
    ctx = SeriesContext(Q, 2, 5)
    f = Series.from_exponents(ctx, {(a, b): Fraction(c) for a, b, c in terms})
    g = Series.from_exponents(ctx, {(b, a): Fraction(c + 1) for a, b, c in terms})
    assert f * g == g * f
    assert (f + g) * f == f * f + g * f
    assert f - f == Series.zero(ctx)
    assert all(ctx.degree(k) <= 5 for k in (f * g).terms)
