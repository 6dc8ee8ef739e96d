"""Small exact linear algebra over the coefficient rings.

Every decomposition step reduces to an affine system in a handful of
unknowns.  Rather than deriving its coefficients symbolically, the residual
map is *probed*: evaluated at zero and at each unit vector.  That is exact as
long as the map really is affine, which ``probe_affine`` double-checks at
one extra pseudo-random point.

Elimination picks, column by column in fixed order, the first row whose
entry is a unit.  For the local rings shipped here (fields, dual numbers,
truncated series) that finds a pivot whenever one exists.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import Inconsistent, NonUnitPivot, NotAffine, NotAUnit
from .ring import Ring, bezout_combine
from .series import HomogeneousMatrix

_PROBE_SEED = 0x5EED


@dataclass(frozen=True)
class AffineSystem:
    """``matrix @ x + constant == 0`` with ``e`` equations in ``u`` unknowns."""

    ring: Ring
    matrix: tuple
    constant: tuple

    @property
    def unknowns(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    @property
    def equations(self) -> int:
        return len(self.constant)

    def evaluate(self, x) -> tuple:
        R = self.ring
        out = []
        for row, c in zip(self.matrix, self.constant):
            acc = c
            for a, xi in zip(row, x):
                acc = R.add(acc, R.mul(a, xi))
            out.append(acc)
        return tuple(out)

    def is_solution(self, x) -> bool:
        return all(not v for v in self.evaluate(x))


def probe_affine(residual: Callable[[list], Sequence], unknowns: int, ring: Ring,
                 rng: random.Random | None = None, check: bool = True) -> AffineSystem:
    """Extract the affine system reproducing ``residual`` on ``unknowns`` inputs."""
    zero = [ring.zero] * unknowns
    const = tuple(residual(zero))
    columns = []
    for j in range(unknowns):
        e = list(zero)
        e[j] = ring.one
        v = residual(e)
        columns.append([ring.sub(a, b) for a, b in zip(v, const)])
    matrix = tuple(tuple(col[i] for col in columns) for i in range(len(const)))
    system = AffineSystem(ring, matrix, const)
    if check and unknowns:
        rng = rng or random.Random(_PROBE_SEED)
        point = [ring.random_element(rng) for _ in range(unknowns)]
        got = tuple(residual(point))
        if got != system.evaluate(point):
            raise NotAffine("residual is not affine in the probed unknowns")
    return system


def _eliminate(ring, rows, ncols):
    """Reduced row echelon form in place over the first ``ncols`` columns."""
    pivots = []
    r = 0
    for col in range(ncols):
        if r == len(rows):
            break
        piv = next((i for i in range(r, len(rows)) if ring.is_unit(rows[i][col])), None)
        if piv is None:
            if any(rows[i][col] for i in range(r, len(rows))):
                raise NonUnitPivot(f"column {col} has nonzero entries but no unit pivot")
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = ring.inv(rows[r][col])
        rows[r] = [ring.mul(inv, x) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [ring.sub(x, ring.mul(f, y)) for x, y in zip(rows[i], rows[r])]
        pivots.append((r, col))
        r += 1
    return pivots


def solve_exact(system: AffineSystem) -> list:
    """A solution of the system; unknowns without a pivot are set to zero."""
    R = system.ring
    u = system.unknowns
    rows = [list(row) + [R.neg(c)] for row, c in zip(system.matrix, system.constant)]
    pivots = _eliminate(R, rows, u)
    for i in range(len(pivots), len(rows)):
        if rows[i][u]:
            raise Inconsistent("the probed system has no solution")
    x = [R.zero] * u
    for r, col in pivots:
        x[col] = rows[r][u]
    if not system.is_solution(x):
        raise Inconsistent("back-substitution check failed")
    return x


def rank(ring: Ring, matrix) -> int:
    rows = [list(r) for r in matrix]
    return len(_eliminate(ring, rows, len(rows[0]) if rows else 0))


def determinant(ring: Ring, matrix) -> object:
    """Determinant by the Leibniz formula (matrices here are tiny)."""
    n = len(matrix)
    total = ring.zero
    for perm in itertools.permutations(range(n)):
        term = ring.one
        for i, j in enumerate(perm):
            term = ring.mul(term, matrix[i][j])
            if not term:
                break
        if not term:
            continue
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        total = ring.sub(total, term) if inversions % 2 else ring.add(total, term)
    return total


def invert_matrix(ring: Ring, matrix) -> list:
    n = len(matrix)
    rows = [list(r) + [ring.one if i == j else ring.zero for j in range(n)]
            for i, r in enumerate(matrix)]
    try:
        pivots = _eliminate(ring, rows, n)
    except NonUnitPivot:
        pivots = []
    if len(pivots) != n:
        raise NotAUnit("matrix is not invertible")
    return [row[n:] for row in rows]


def matmul(ring: Ring, A, B) -> list:
    return [[_dot(ring, row, [B[k][j] for k in range(len(B))]) for j in range(len(B[0]))]
            for row in A]


def _dot(ring, xs, ys):
    acc = ring.zero
    for x, y in zip(xs, ys):
        if x and y:
            acc = ring.add(acc, ring.mul(x, y))
    return acc


def identity_matrix(ring: Ring, n: int) -> list:
    return [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]


def bezout_solve_componentwise(ring: Ring, s, t, A: HomogeneousMatrix):
    """Matrices ``(C, B)`` with ``C*s + B*t == A`` entrywise."""
    x, y = bezout_combine(ring, s, t, ring.one)
    C = A.map(lambda a: ring.mul(a, x))
    B = A.map(lambda a: ring.mul(a, y))
    return C, B
