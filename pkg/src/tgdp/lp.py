"""Covering LPs for noise allocation and their packing duals.

The core objects are the fractional-cover LP

    min sum_u y_u   s.t.  sum_{u in N[v]} y_u >= 1  for all v,   0 <= y <= 1

its robust variant (constraints over every neighbor subset T of size <= t_v,
solved by cutting planes with a top-t separation oracle), and the packing dual

    max sum_v w_v   s.t.  sum_{v in N[u]} w_v <= 1  for all u,   w >= 0.

Solving strategy: all instances are solved by an in-repo revised simplex on
the **dual (packing) form**, whose slack basis is immediately feasible, so no
phase-1 is ever needed.  The covering primal y is recovered as the simplex
multipliers; strong duality is checked on every solve, and on instances with
at most 64 constraints the final basis is re-verified in exact rational
arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .graph import TrustGraph, clamp_thresholds

FEAS_TOL = 1e-9
GAP_TOL = 1e-7
RATIONAL_VERIFY_MAX_ROWS = 64


class LpError(Exception):
    pass


class InfeasibleError(LpError):
    pass


class UnboundedError(LpError):
    pass


class UnsupportedLpError(LpError):
    """The carrier holds an LP shape this library does not solve."""


class SolverDefectError(LpError):
    """Internal invariant broke (iteration cap, failed certificate)."""


# ---------------------------------------------------------------------------
# LP carrier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearConstraint:
    coeffs: tuple[tuple[int, float], ...]  # (variable, coefficient), var-sorted
    sense: str                             # ">=", "<=", "=="
    rhs: float


@dataclass(frozen=True)
class LinearProgram:
    n_vars: int
    objective: tuple[float, ...]
    constraints: tuple[LinearConstraint, ...]
    bounds: tuple[tuple[float, float], ...]
    maximize: bool = False

    def __post_init__(self):
        if len(self.objective) != self.n_vars or len(self.bounds) != self.n_vars:
            raise ValueError("objective/bounds length mismatch")
        for lo, hi in self.bounds:
            if lo > hi:
                raise ValueError(f"bound lo={lo} > hi={hi}")
        for con in self.constraints:
            for var, _ in con.coeffs:
                if not (0 <= var < self.n_vars):
                    raise ValueError(f"constraint references variable {var}")
            if con.sense not in (">=", "<=", "=="):
                raise ValueError(f"bad sense {con.sense!r}")


@dataclass(frozen=True)
class LpSolution:
    x: tuple[float, ...]
    objective: float
    duals: tuple[float, ...]


# ---------------------------------------------------------------------------
# Revised simplex:  max c.x  s.t.  A x <= b,  x >= 0,  with b >= 0
# ---------------------------------------------------------------------------

class _RevisedSimplex:
    """Primal revised simplex with a slack starting basis.

    Dantzig pricing by default; switches to Bland's rule during degenerate
    streaks to guarantee termination, and back once progress resumes.
    The basis inverse is maintained by product-form updates and refactored
    periodically (and once at optimality, so reported numbers come from a
    fresh factorization).
    """

    PIVOT_TOL = 1e-10
    DEGENERATE_STEP = 1e-12
    REFACTOR_EVERY = 1024

    def __init__(self, A: sp.csc_matrix, b: np.ndarray, c: np.ndarray,
                 tol: float = FEAS_TOL):
        self.m, self.N = A.shape
        if np.any(b < 0):
            raise ValueError("slack start requires b >= 0")
        self.A = A.tocsc()
        self.b = np.asarray(b, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.tol = tol

    def _column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        if j < self.N:
            lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
            return self.A.indices[lo:hi], self.A.data[lo:hi]
        return np.array([j - self.N]), np.array([1.0])

    def solve(self) -> tuple[np.ndarray, float, np.ndarray, np.ndarray]:
        m, N = self.m, self.N
        if m == 0:
            if np.any(self.c > self.tol):
                raise UnboundedError("no constraints and a positive objective")
            return np.zeros(N), 0.0, np.zeros(0), np.zeros(0, dtype=np.int64)

        AT = self.A.T.tocsr()
        c_full = np.concatenate([self.c, np.zeros(m)])
        basis = np.arange(N, N + m, dtype=np.int64)
        in_basis = np.zeros(N + m, dtype=bool)
        in_basis[basis] = True
        B_inv = np.eye(m)
        x_B = self.b.copy()

        bland = False
        degen_streak = 0
        max_iter = 20_000 + 80 * (m + N)
        since_refactor = 0

        for _ in range(max_iter):
            pi = c_full[basis] @ B_inv
            reduced = np.concatenate([self.c - AT @ pi, -pi])
            reduced[in_basis] = 0.0
            if bland:
                entering_candidates = np.nonzero(reduced > self.tol)[0]
                if entering_candidates.size == 0:
                    break
                j = int(entering_candidates[0])
            else:
                j = int(np.argmax(reduced))
                if reduced[j] <= self.tol:
                    break

            idx, dat = self._column(j)
            u = B_inv[:, idx] @ dat
            pos = np.nonzero(u > self.PIVOT_TOL)[0]
            if pos.size == 0:
                raise UnboundedError("objective unbounded above")
            ratios = x_B[pos] / u[pos]
            theta = ratios.min()
            ties = pos[ratios <= theta + 1e-12]
            # leaving: smallest basic variable index among ties (Bland)
            r = int(ties[np.argmin(basis[ties])])

            if theta <= self.DEGENERATE_STEP:
                degen_streak += 1
                if degen_streak > max(64, m):
                    bland = True
            else:
                degen_streak = 0
                bland = False

            piv = u[r]
            x_B -= theta * u
            x_B[r] = theta
            np.maximum(x_B, 0.0, out=x_B)
            B_inv[r, :] /= piv
            others = np.arange(m) != r
            B_inv[others, :] -= np.outer(u[others], B_inv[r, :])
            in_basis[basis[r]] = False
            in_basis[j] = True
            basis[r] = j

            since_refactor += 1
            if since_refactor >= self.REFACTOR_EVERY:
                B_inv, x_B = self._refactor(basis)
                since_refactor = 0
        else:
            raise SolverDefectError("simplex iteration cap exceeded")

        B_inv, x_B = self._refactor(basis)
        pi = c_full[basis] @ B_inv
        x = np.zeros(N + m)
        x[basis] = x_B
        obj = float(self.c @ x[:N])
        return x[:N], obj, pi, basis

    def _refactor(self, basis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        B = np.zeros((self.m, self.m))
        for col, j in enumerate(basis):
            idx, dat = self._column(int(j))
            B[idx, col] = dat
        B_inv = np.linalg.inv(B)
        x_B = B_inv @ self.b
        return B_inv, x_B


# ---------------------------------------------------------------------------
# Exact rational re-verification of a final basis (small instances)
# ---------------------------------------------------------------------------

def _fraction_solve(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination over Fractions; raises on singular matrix."""
    m = len(mat)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for col in range(m):
        piv = next((r for r in range(col, m) if aug[r][col] != 0), None)
        if piv is None:
            raise SolverDefectError("singular basis in rational verification")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Fraction(1, 1) / aug[col][col]
        aug[col] = [a * inv for a in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][m] for r in range(m)]


def _rational_verify(rows: list[tuple[int, ...]], n: int, basis: np.ndarray,
                     float_obj: float) -> None:
    """Re-check optimality of the packing-form basis in exact arithmetic.

    Certifies: basic solution nonnegative, all reduced costs nonpositive,
    multipliers nonnegative, and exact objective within 1e-9 of the float one.
    """
    m = n
    N = len(rows)
    cols: list[list[int]] = []
    costs: list[Fraction] = []
    for j in basis:
        j = int(j)
        if j < N:
            cols.append(list(rows[j]))
            costs.append(Fraction(1))
        else:
            cols.append([j - N])
            costs.append(Fraction(0))
    B = [[Fraction(0)] * m for _ in range(m)]
    for colno, support in enumerate(cols):
        for s in support:
            B[s][colno] = Fraction(1)
    one = [Fraction(1)] * m
    x_B = _fraction_solve(B, one)
    Bt = [[B[r][c] for r in range(m)] for c in range(m)]
    pi = _fraction_solve(Bt, costs)
    if any(v < 0 for v in x_B):
        raise SolverDefectError("rational check: basic solution negative")
    if any(p < 0 for p in pi):
        raise SolverDefectError("rational check: dual multiplier negative")
    for row in rows:
        if Fraction(1) - sum(pi[s] for s in row) > 0:
            raise SolverDefectError("rational check: positive reduced cost")
    exact_obj = sum(c * x for c, x in zip(costs, x_B))
    if abs(float(exact_obj) - float_obj) > 1e-9 * max(1.0, abs(float_obj)):
        raise SolverDefectError(
            f"rational objective {float(exact_obj)} != float {float_obj}")


# ---------------------------------------------------------------------------
# Covering-rows core solve
# ---------------------------------------------------------------------------

def _rows_matrix(rows: Sequence[tuple[int, ...]], n: int) -> sp.csc_matrix:
    """n x len(rows) 0/1 matrix; column j is the support of covering row j."""
    indptr = [0]
    indices: list[int] = []
    for row in rows:
        indices.extend(row)
        indptr.append(len(indices))
    data = np.ones(len(indices))
    return sp.csc_matrix((data, np.array(indices), np.array(indptr)),
                         shape=(n, len(rows)))


def _solve_cover_rows(rows: Sequence[tuple[int, ...]], n: int,
                      ) -> tuple[np.ndarray, np.ndarray, float]:
    """Solve min 1.y s.t. y(row) >= 1 for all rows, 0 <= y <= 1.

    Returns (y, w, objective) where w are the optimal dual (packing) weights,
    one per row.  Solved through the dual max-form; see module docstring.
    """
    if n == 0:
        return np.zeros(0), np.zeros(len(rows)), 0.0
    for row in rows:
        if len(row) == 0:
            raise InfeasibleError("empty covering row cannot reach 1")
    A = _rows_matrix(rows, n)
    try:
        w, obj, y, basis = _RevisedSimplex(A, np.ones(n), np.ones(len(rows))).solve()
    except UnboundedError as exc:  # dual unbounded <=> primal infeasible
        raise InfeasibleError(str(exc)) from exc

    y = np.clip(y, 0.0, 1.0)
    cover_slack = np.array([y[list(row)].sum() for row in rows])
    if cover_slack.min() < 1.0 - FEAS_TOL:
        raise SolverDefectError(
            f"cover constraint violated by {1.0 - cover_slack.min():.3e}")
    packing_slack = A @ w
    if packing_slack.max() > 1.0 + FEAS_TOL:
        raise SolverDefectError("dual packing constraint violated")
    gap = abs(float(w.sum()) - float(y.sum()))
    if gap > GAP_TOL * max(1.0, abs(obj)):
        raise SolverDefectError(f"duality gap {gap:.3e}")
    if n <= RATIONAL_VERIFY_MAX_ROWS:
        _rational_verify(list(rows), n, basis, obj)
    return y, w, obj


# ---------------------------------------------------------------------------
# Public covering-LP API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FractionalCover:
    """Per-vertex noise weights solving the (robust) covering LP."""

    y: tuple[float, ...]
    objective: float
    robust_thresholds: tuple[int, ...] | None = None
    tolerance: float = FEAS_TOL
    approximate: bool = False

    def to_json_dict(self) -> dict:
        d = {"y": list(self.y), "objective": self.objective,
             "robust_t": list(self.robust_thresholds) if self.robust_thresholds else None,
             "tol": self.tolerance}
        if self.approximate:
            d["approximate"] = True
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "FractionalCover":
        return cls(y=tuple(d["y"]), objective=d["objective"],
                   robust_thresholds=tuple(d["robust_t"]) if d.get("robust_t") else None,
                   tolerance=d.get("tol", FEAS_TOL),
                   approximate=d.get("approximate", False))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "FractionalCover":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class DualPacking:
    """Optimal dual weights: w_v for the plain LP, w_{v,T} for the robust one."""

    n: int
    entries: tuple[tuple[tuple[int, tuple[int, ...]], float], ...]
    objective: float
    robust: bool

    def vertex_weights(self) -> tuple[float, ...]:
        w = [0.0] * self.n
        for (v, _T), weight in self.entries:
            w[v] += weight
        return tuple(w)


def base_cover_rows(g: TrustGraph) -> list[tuple[int, ...]]:
    return [g.closed_neighborhood(v) for v in range(g.n)]


def build_cover_lp(g: TrustGraph) -> LinearProgram:
    """The LP relaxation of minimum dominating set on g."""
    cons = tuple(
        LinearConstraint(tuple((u, 1.0) for u in g.closed_neighborhood(v)), ">=", 1.0)
        for v in range(g.n))
    return LinearProgram(
        n_vars=g.n, objective=(1.0,) * g.n, constraints=cons,
        bounds=((0.0, 1.0),) * g.n, maximize=False)


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve a covering-form or packing-form LP from this library.

    Covering form: minimize, all constraints ">=" with positive coefficients
    and rhs, variables in [0, hi] where hi can never bind.  Packing form: the
    maximization mirror.  Anything else (including "==" rows) is out of scope
    and raises UnsupportedLpError.
    """
    n = lp.n_vars
    senses = {c.sense for c in lp.constraints}
    for lo, _hi in lp.bounds:
        if lo != 0.0:
            raise UnsupportedLpError("variable lower bounds must be 0")

    if not lp.maximize and senses <= {">="}:
        _check_covering_shape(lp)
        A = _constraint_matrix_transposed(lp)  # n x m
        b = np.array([c for c in lp.objective])
        c_vec = np.array([con.rhs for con in lp.constraints])
        try:
            w, obj, y, _basis = _RevisedSimplex(A, b, c_vec).solve()
        except UnboundedError as exc:
            raise InfeasibleError("covering LP infeasible") from exc
        y = np.maximum(y, 0.0)
        primal_obj = float(np.dot(lp.objective, y))
        if abs(primal_obj - obj) > GAP_TOL * max(1.0, abs(obj)):
            raise SolverDefectError("duality gap on generic covering solve")
        return LpSolution(tuple(y.tolist()), primal_obj, tuple(w.tolist()))

    if lp.maximize and senses <= {"<="}:
        _check_packing_shape(lp)
        m = len(lp.constraints)
        indptr, indices, data = [0], [], []
        for con in lp.constraints:
            for var, coef in con.coeffs:
                indices.append(var)
                data.append(coef)
            indptr.append(len(indices))
        A = sp.csc_matrix((np.array(data), np.array(indices), np.array(indptr)),
                          shape=(n, len(lp.constraints))).T.tocsc()
        assert A.shape == (m, n)
        b = np.array([con.rhs for con in lp.constraints])
        x, obj, pi, _basis = _RevisedSimplex(A, b, np.array(lp.objective)).solve()
        return LpSolution(tuple(x.tolist()), obj, tuple(pi.tolist()))

    raise UnsupportedLpError(
        "only the covering/packing LP shapes built by this library are supported")


def _constraint_matrix_transposed(lp: LinearProgram) -> sp.csc_matrix:
    indptr, indices, data = [0], [], []
    for con in lp.constraints:
        for var, coef in con.coeffs:
            indices.append(var)
            data.append(coef)
        indptr.append(len(indices))
    return sp.csc_matrix((np.array(data), np.array(indices), np.array(indptr)),
                         shape=(lp.n_vars, len(lp.constraints)))


def _check_covering_shape(lp: LinearProgram) -> None:
    rows_of_var: dict[int, list[LinearConstraint]] = {}
    for con in lp.constraints:
        if con.rhs <= 0:
            raise UnsupportedLpError("covering rows need positive rhs")
        for var, coef in con.coeffs:
            if coef <= 0:
                raise UnsupportedLpError("covering rows need positive coefficients")
            rows_of_var.setdefault(var, []).append(con)
    for var, (_lo, hi) in enumerate(lp.bounds):
        if math.isinf(hi):
            continue
        for con in rows_of_var.get(var, []):
            coef = dict(con.coeffs)[var]
            if coef * hi < con.rhs:
                raise UnsupportedLpError(
                    f"upper bound on variable {var} could bind; unsupported")
    if any(c <= 0 for c in lp.objective):
        raise UnsupportedLpError("covering objective must be positive")


def _check_packing_shape(lp: LinearProgram) -> None:
    implied = [math.isinf(hi) for _lo, hi in lp.bounds]
    for con in lp.constraints:
        if con.rhs < 0:
            raise UnsupportedLpError("packing rows need nonnegative rhs")
        for var, coef in con.coeffs:
            if coef < 0:
                raise UnsupportedLpError("packing rows need nonnegative coefficients")
            if coef > 0 and con.rhs / coef <= lp.bounds[var][1]:
                implied[var] = True
    if not all(implied):
        raise UnsupportedLpError("unimplied variable upper bound; unsupported")


def solve_cover(g: TrustGraph) -> FractionalCover:
    """Optimal fractional cover of Eq-style covering LP over closed neighborhoods."""
    rows = base_cover_rows(g)
    y, _w, obj = _solve_cover_rows(rows, g.n)
    return FractionalCover(tuple(y.tolist()), float(y.sum()) if g.n else 0.0)


def solve_packing_dual(g: TrustGraph) -> DualPacking:
    """Optimal fractional packing: max sum w, w(N[u]) <= 1, w in [0,1]."""
    rows = base_cover_rows(g)
    y, w, obj = _solve_cover_rows(rows, g.n)
    entries = tuple(((v, ()), float(w[v])) for v in range(g.n))
    dual = DualPacking(g.n, entries, float(w.sum()) if g.n else 0.0, robust=False)
    if abs(dual.objective - float(y.sum())) > 1e-6 * max(1.0, dual.objective):
        raise SolverDefectError("packing dual does not match cover objective")
    return dual


# ---------------------------------------------------------------------------
# Robust LP via cutting planes
# ---------------------------------------------------------------------------

def worst_exclusion(g: TrustGraph, y: Sequence[float], v: int, t_v: int,
                    ) -> tuple[int, ...]:
    """The adversary's best exclusion set: the t_v largest-y neighbors of v.

    Ties broken toward lower vertex id, for determinism.
    """
    if t_v <= 0:
        return ()
    nbrs = sorted(g.neighbors(v), key=lambda u: (-y[u], u))
    return tuple(sorted(nbrs[:t_v]))


def separation_violations(g: TrustGraph, y: Sequence[float],
                          t: Sequence[int], tol: float = FEAS_TOL,
                          ) -> list[tuple[int, tuple[int, ...], tuple[int, ...]]]:
    """All (v, T, support) whose robust constraint the current y violates."""
    out = []
    for v in range(g.n):
        T = worst_exclusion(g, y, v, t[v])
        support = tuple(u for u in g.closed_neighborhood(v) if u not in set(T))
        if sum(y[u] for u in support) < 1.0 - tol:
            out.append((v, T, support))
    return out


@dataclass(frozen=True)
class RobustSolveResult:
    cover: FractionalCover
    dual: DualPacking
    rows: tuple[tuple[int, ...], ...]
    labels: tuple[tuple[int, tuple[int, ...]], ...]
    rounds: int


def _addable_constraint_cap(g: TrustGraph, t: Sequence[int]) -> int:
    cap = 0
    for v in range(g.n):
        cap += sum(math.comb(g.degree(v), k) for k in range(t[v] + 1))
        if cap > 1_000_000:
            return 1_000_000
    return cap


def robust_cutting_plane(g: TrustGraph, t: Sequence[int]) -> RobustSolveResult:
    """Cutting-plane solve of the robust covering LP.

    Seeds with the plain covering rows (valid for T = empty set), then
    alternates solving and separating on the worst exclusion sets until no
    constraint is violated; at that point the solution is optimal for the
    full exponential family and the duals of the generated rows are optimal
    for the full dual.
    """
    t_eff = clamp_thresholds(g, t)
    rows: list[tuple[int, ...]] = []
    labels: list[tuple[int, tuple[int, ...]]] = []
    seen: set[tuple[int, ...]] = set()
    for v in range(g.n):
        support = g.closed_neighborhood(v)
        if support not in seen:
            seen.add(support)
            rows.append(support)
            labels.append((v, ()))

    cap = _addable_constraint_cap(g, t_eff)
    rounds = 0
    while True:
        rounds += 1
        if rounds > cap + 1:
            raise SolverDefectError("cutting-plane round cap exceeded")
        y, w, obj = _solve_cover_rows(rows, g.n)
        violations = separation_violations(g, y, t_eff)
        new = 0
        for v, T, support in violations:
            if support not in seen:
                seen.add(support)
                rows.append(support)
                labels.append((v, T))
                new += 1
        if not violations:
            break
        if new == 0:
            raise SolverDefectError(
                "separation oracle found violations but no new constraints")

    cover = FractionalCover(tuple(y.tolist()), float(y.sum()) if g.n else 0.0,
                            robust_thresholds=t_eff)
    entries = tuple((labels[j], float(w[j])) for j in range(len(rows)))
    dual = DualPacking(g.n, entries, float(w.sum()) if g.n else 0.0, robust=True)
    if abs(dual.objective - cover.objective) > 1e-6 * max(1.0, cover.objective):
        raise SolverDefectError("robust dual does not match robust cover objective")
    return RobustSolveResult(cover, dual, tuple(rows), tuple(labels), rounds)


def solve_robust_cover(g: TrustGraph, t: Sequence[int]) -> FractionalCover:
    return robust_cutting_plane(g, t).cover


def robust_dual_multipliers(g: TrustGraph, t: Sequence[int]) -> DualPacking:
    return robust_cutting_plane(g, t).dual


def cover_infeasibility(g: TrustGraph, y: Sequence[float],
                        t: Sequence[int] | None = None) -> tuple[float, int]:
    """(worst neighborhood mass, argmin vertex) under the worst exclusion sets."""
    worst, worst_v = math.inf, -1
    t_eff = clamp_thresholds(g, t) if t is not None else (0,) * g.n
    for v in range(g.n):
        T = set(worst_exclusion(g, y, v, t_eff[v]))
        mass = sum(y[u] for u in g.closed_neighborhood(v) if u not in T)
        if mass < worst:
            worst, worst_v = mass, v
    return worst, worst_v


# ---------------------------------------------------------------------------
# Multiplicative-weights approximate cover (opt-in, for very large graphs)
# ---------------------------------------------------------------------------

def approx_cover(g: TrustGraph, eps: float = 1e-3) -> FractionalCover:
    """Feasible fractional cover with objective <= (1+eps) * OPT.

    Greedy column selection against exponentially decaying row weights; the
    returned cover is exactly feasible by construction.  Work scales like
    OPT * log(n) / eps^2, so small eps is expensive; intended for graphs too
    large for the exact simplex.
    """
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    n = g.n
    if n == 0:
        return FractionalCover((), 0.0, approximate=True)
    eps_i = eps / 3.0
    K = max(1, math.ceil(math.log(max(n, 2)) / eps_i ** 2))
    beta = math.exp(-eps_i)

    A = _rows_matrix(base_cover_rows(g), n).T.tocsr()  # row r -> support N[r]
    weights = np.ones(n)
    coverage = np.zeros(n, dtype=np.int64)
    counts = np.zeros(n, dtype=np.int64)
    uncovered = n

    while uncovered > 0:
        # fresh scores every pick: weight reachable from each column u
        scores = weights @ A
        u = int(np.argmax(scores))
        counts[u] += 1
        for r in g.closed_neighborhood(u):
            if coverage[r] >= K:
                continue
            coverage[r] += 1
            if coverage[r] >= K:
                uncovered -= 1
                weights[r] = 0.0
            else:
                weights[r] *= beta

    y = tuple(float(min(1.0, cnt / K)) for cnt in counts)
    return FractionalCover(y, float(sum(y)), tolerance=0.0, approximate=True)
