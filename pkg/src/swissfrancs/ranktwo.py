"""The rank-two parametrization P = J + b a^T and its calculus.

Every positive matrix with equal row and column sums n and rank(P - J)
at most 1 can be written entrywise as p_ij = 1 + b_i * a_j with zero-sum
vectors a and b. The map is invariant under (a, b) -> (c a, b / c) for
c > 0, so points carry a gauge freedom that canonicalize() pins down by
sorting, equalizing the leading pair and fixing the sign convention.

The first-order conditions of the weighted log-likelihood, with weight
ratio rho = s / t, come in two equivalent shapes: the plain gradient form
and the reciprocal form in which every row sums to n + rho - 1. The
reciprocal form is a polynomial identity in the pairwise products
a_i * b_j, which is what enables exact rational verification elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (Convention, ConvergenceError, FeasibilityError, Number,
                   ProbMatrix, RankTwoError, WeightTable)

ZERO_SUM_TOL = 1e-12
FEASIBILITY_MARGIN = 1e-14
MARGIN_TOL = 1e-9


@dataclass(frozen=True)
class RankTwoPoint:
    """Vectors (a, b) of length n encoding the matrix 1 + b_i a_j.

    Both vectors must sum to zero (relative tolerance 1e-12). Interior
    feasibility, min(1 + a_i b_j) > 0, is not required at construction;
    operations that need it check and raise FeasibilityError.
    """

    n: int
    a: tuple
    b: tuple

    def __post_init__(self):
        if self.n < 1 or len(self.a) != self.n or len(self.b) != self.n:
            raise ValueError("a and b must both have length n")
        for name, vec in (("a", self.a), ("b", self.b)):
            norm = math.sqrt(sum(float(x) * float(x) for x in vec))
            if abs(sum(float(x) for x in vec)) > ZERO_SUM_TOL * max(1.0, norm):
                raise ValueError(f"{name} must sum to zero")

    @classmethod
    def of(cls, a: Sequence[float], b: Sequence[float]) -> "RankTwoPoint":
        return cls(n=len(a), a=tuple(float(x) for x in a), b=tuple(float(x) for x in b))

    @classmethod
    def symmetric(cls, a: Sequence[float]) -> "RankTwoPoint":
        return cls.of(a, a)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array(self.a, dtype=float), np.array(self.b, dtype=float))

    def entry_table(self) -> np.ndarray:
        """The n x n table 1 + b_i a_j."""
        a, b = self.arrays()
        return 1.0 + np.outer(b, a)

    def min_entry(self) -> float:
        return float(self.entry_table().min())

    def is_feasible(self, margin: float = FEASIBILITY_MARGIN) -> bool:
        return self.min_entry() > margin

    def is_zero(self, tol: float = 1e-14) -> bool:
        return max(abs(x) for x in self.a) < tol and max(abs(x) for x in self.b) < tol

    def to_json_dict(self) -> dict:
        return {"n": self.n, "a": list(self.a), "b": list(self.b)}

    @classmethod
    def from_json_dict(cls, data: dict) -> "RankTwoPoint":
        return cls.of(data["a"], data["b"])


def _require_feasible(pt: RankTwoPoint) -> None:
    m = pt.min_entry()
    if m <= FEASIBILITY_MARGIN:
        raise FeasibilityError(f"point is not interior: min entry {m!r}")


def to_matrix(pt: RankTwoPoint) -> ProbMatrix:
    """Build the SUM_NSQ matrix with entries 1 + b_i a_j.

    Row and column sums equal n identically because a and b sum to zero.
    """
    _require_feasible(pt)
    table = pt.entry_table()
    return ProbMatrix.of(table.tolist(), Convention.SUM_NSQ)


def from_matrix(P: ProbMatrix) -> RankTwoPoint:
    """Recover (a, b) from a positive SUM_NSQ matrix with margins n and
    rank(P - J) <= 1.

    The result reproduces P entrywise through to_matrix, so the gauge is
    fixed without reordering coordinates: the two vectors are balanced in
    norm and the sign pair is chosen so the largest coordinate of a is
    positive. Apply canonicalize on top for the sorted canonical form.
    """
    if P.convention is not Convention.SUM_NSQ:
        raise ValueError("from_matrix expects the SUM_NSQ convention")
    arr = P.as_array()
    n = P.n
    if arr.min() <= 0:
        raise FeasibilityError("matrix must be strictly positive")
    rows = arr.sum(axis=1)
    cols = arr.sum(axis=0)
    if max(np.abs(rows - n).max(), np.abs(cols - n).max()) > MARGIN_TOL:
        raise RankTwoError("row and column sums must all equal n")
    D = arr - 1.0
    u, sing, vt = np.linalg.svd(D)
    if sing[0] <= 1e-13 * n:
        return RankTwoPoint.of([0.0] * n, [0.0] * n)
    if sing[1] > 1e-8 * sing[0]:
        raise RankTwoError(
            f"not rank-two representable: second singular value {sing[1]:.3e} "
            f"exceeds 1e-8 of the first ({sing[0]:.3e})")
    b = u[:, 0] * sing[0]
    a = vt[0, :]
    a = a - a.mean()
    b = b - b.mean()
    scale = math.sqrt(np.linalg.norm(b) / np.linalg.norm(a))
    a, b = a * scale, b / scale
    head = int(np.argmax(np.abs(a)))
    if a[head] < 0:
        a, b = -a, -b
    return RankTwoPoint.of(a, b)


def stationarity_residual(pt: RankTwoPoint, rho: float) -> np.ndarray:
    """Gradient form of the first-order conditions at weight ratio rho.

    Component i is the derivative of the scaled log-likelihood in a_i,
    component n + j the derivative in b_j; the vector is zero exactly at
    stationary points with zero-sum a and b.
    """
    if rho <= 0:
        raise ValueError("weight ratio must be positive")
    _require_feasible(pt)
    a, b = pt.arrays()
    T = 1.0 + np.outer(b, a)            # T[i, j] = 1 + b_i a_j
    diag = np.diag(T)
    grad_a = (b[:, None] / T).sum(axis=0) + (rho - 1.0) * b / diag
    grad_b = (a[None, :] / T).sum(axis=1) + (rho - 1.0) * a / diag
    return np.concatenate([grad_a, grad_b])


def reciprocal_residual(pt: RankTwoPoint, rho: float) -> np.ndarray:
    """Reciprocal form of the first-order conditions.

    Component i is sum_j 1/(1 + a_i b_j) + (rho - 1)/(1 + a_i b_i) minus
    the stationary value n + rho - 1; columns follow symmetrically. The
    identity recip_i = -a_i * grad_i ties it to stationarity_residual.
    """
    if rho <= 0:
        raise ValueError("weight ratio must be positive")
    _require_feasible(pt)
    a, b = pt.arrays()
    n = pt.n
    T = 1.0 + np.outer(b, a)
    diag = np.diag(T)
    target = n + rho - 1.0
    rows = (1.0 / T).sum(axis=0) + (rho - 1.0) / diag - target
    cols = (1.0 / T).sum(axis=1) + (rho - 1.0) / diag - target
    return np.concatenate([rows, cols])


def reciprocal_residual_exact(products: Sequence[Sequence[Number]],
                              rho: Number) -> list:
    """Exact reciprocal residual from the rational product table.

    products[i][j] must hold a_i * b_j as exact rationals; the result is
    the 2n-vector of residuals as Fractions, exactly zero at stationary
    points.
    """
    n = len(products)
    rho = Fraction(rho)
    target = n + rho - 1
    out = []
    for i in range(n):
        total = sum(Fraction(1, 1) / (1 + Fraction(products[i][j])) for j in range(n))
        out.append(total + (rho - 1) / (1 + Fraction(products[i][i])) - target)
    for j in range(n):
        total = sum(Fraction(1, 1) / (1 + Fraction(products[i][j])) for i in range(n))
        out.append(total + (rho - 1) / (1 + Fraction(products[j][j])) - target)
    return out


def canonicalize(pt: RankTwoPoint) -> RankTwoPoint:
    """Gauge-fix a point: sort, equalize the leading pair, fix signs.

    The output has a sorted descending (b carried along by the same
    permutation), a_1 = b_1 = sqrt(a_1 b_1), and for n >= 3 the sign
    convention a_2 >= 0 enforced by the flip-and-reverse map. All pairwise
    products a_i b_j, and hence the matrix entries, are preserved up to
    the simultaneous permutation. Feasibility is not required.
    """
    if pt.is_zero():
        raise RankTwoError("cannot canonicalize the zero point")
    a, b = pt.arrays()
    order = sorted(range(pt.n), key=lambda i: (-a[i], -b[i], i))
    a, b = a[order], b[order]
    if pt.n >= 3 and a[1] < 0:
        a = -a[::-1]
        b = -b[::-1]
    head = a[0] * b[0]
    if head <= 0:
        raise RankTwoError("order hypothesis violated: leading product "
                           f"a_1 b_1 = {head!r} is not positive")
    scale = math.sqrt(b[0] / a[0])
    a = a * scale
    b = b / scale
    # pin the head pair to the exact geometric mean; the rescales agree
    # with it only up to rounding
    mid = math.sqrt(head)
    a[0] = mid
    b[0] = mid
    a = a - a.sum() / pt.n
    b = b - b.sum() / pt.n
    return RankTwoPoint.of(a, b)


def swap_delta(pt: RankTwoPoint, i: int, j: int, W: WeightTable) -> float:
    """Likelihood change L(P) - L(P_swapped) when b_i and b_j trade places.

    Only the four entries at rows/columns i and j change their exponent
    role, so the difference factors through them; the sign matches
    sign((a_i - a_j)(b_i - b_j)) whenever s > t.
    """
    pair = W.symmetric_pair()
    if pair is None:
        raise ValueError("swap_delta requires symmetric weights")
    s, t = float(pair[0]), float(pair[1])
    _require_feasible(pt)
    if i == j:
        return 0.0
    a, b = pt.arrays()
    T = 1.0 + np.outer(b, a)
    n = pt.n
    # product over cells unaffected by the swap, at their weights
    log_rest = 0.0
    for r in range(n):
        for c in range(n):
            if r in (i, j) and c in (i, j):
                continue
            w = s if r == c else t
            log_rest += w * math.log(T[r, c])
    AB = T[i, i] * T[j, j]
    CD = T[i, j] * T[j, i]
    if min(T[i, i], T[j, j], T[i, j], T[j, i]) <= 0:
        raise FeasibilityError("swap produced a nonpositive entry")
    bracket = AB ** s * CD ** t - CD ** s * AB ** t
    return math.exp(log_rest) * bracket


def normalize_margins(P: ProbMatrix) -> ProbMatrix:
    """Alternately rescale rows then columns to margins n.

    Diagonal scaling preserves rank, and for symmetric weights each half
    sweep cannot decrease the likelihood. Returns the input unchanged when
    the margins already sit within 1e-12 of n.
    """
    if P.convention is not Convention.SUM_NSQ:
        raise ValueError("normalize_margins expects the SUM_NSQ convention")
    arr = P.as_array()
    if arr.min() <= 0:
        raise FeasibilityError("matrix must be strictly positive")
    n = P.n
    tol = 1e-12

    def margin_error(m: np.ndarray) -> float:
        return max(np.abs(m.sum(axis=1) - n).max(), np.abs(m.sum(axis=0) - n).max())

    if margin_error(arr) <= tol:
        return P
    for _ in range(10_000):
        arr = arr * (n / arr.sum(axis=1))[:, None]
        arr = arr * (n / arr.sum(axis=0))[None, :]
        if margin_error(arr) <= tol:
            return ProbMatrix.of(arr.tolist(), Convention.SUM_NSQ)
    raise ConvergenceError(
        f"margin normalization did not converge: error {margin_error(arr):.3e}")
