"""Linear-programming relaxation of the placement problem and a dense simplex.

The solver is a two-phase, bounded-variable revised simplex. Every row is
``a_i . x <= b_i``; a slack is added per row, and an artificial column for
each row whose slack would start negative. Pricing is Dantzig's rule; once
the run of consecutive degenerate pivots exceeds ``2 * (rows + cols)``, the
solver switches to Bland's rule for the rest of the solve.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .problem import ProblemInstance

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
_PIVOT_TOL = 1e-11
_REFACTOR_EVERY = 50


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``min c.x  s.t.  A x <= b,  lo <= x <= hi`` with finite bounds.

    ``implied_bounds`` marks variables whose box is already implied by the
    rows; they are skipped when counting constraints the way the model is
    usually stated.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    names: tuple[str, ...] = ()
    row_names: tuple[str, ...] = ()
    implied_bounds: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float)
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        n = c.size
        if A.size == 0:
            A = A.reshape(0, n)
        if A.shape != (b.size, n) or lo.shape != (n,) or hi.shape != (n,):
            raise ValueError("inconsistent LP dimensions")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("all variable bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        for name, arr in (("c", c), ("A", A), ("b", b), ("lo", lo), ("hi", hi)):
            object.__setattr__(self, name, arr)
        implied = (np.zeros(n, dtype=bool) if self.implied_bounds is None
                   else np.asarray(self.implied_bounds, dtype=bool))
        object.__setattr__(self, "implied_bounds", implied)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.b.size

    def n_constraints(self, count_bounds: bool = True) -> int:
        """Rows plus (optionally) two bound constraints per explicitly boxed variable."""
        extra = 2 * int(np.sum(~self.implied_bounds)) if count_bounds else 0
        return self.n_rows + extra


@dataclass
class LpResult:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = float("nan")
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    dual_objective: float = float("nan")
    basis: tuple[int, ...] = ()
    iterations: int = 0
    bland_switch: bool = False

    @property
    def duality_gap(self) -> float:
        return self.objective - self.dual_objective


@dataclass
class LpSolution:
    x_dagger: np.ndarray
    z_dagger: np.ndarray
    g_dagger: float
    status: LpStatus
    raw: LpResult | None = field(default=None, repr=False)


def build_lpr(instance: ProblemInstance) -> LinearProgram:
    """Variables ``[x_0..x_{N-1}, z_0..z_{N-1}]`` with ``z_n`` standing in for ``x_n L_n``."""
    n = instance.n
    lmin = instance.l_min.astype(float)
    lmax = instance.l_max.astype(float)
    eye = np.eye(n)
    A = np.vstack([
        np.hstack([np.diag(lmin), -eye]),           # L_min x - z <= 0
        np.hstack([-np.diag(lmax), eye]),           # z - L_max x <= 0
        np.concatenate([np.ones(n), np.zeros(n)]),  # sum x <= M
        np.concatenate([np.zeros(n), np.ones(n)]),  # sum z <= L_tot
        np.concatenate([instance.fixed_cost, instance.cost_rate]),
    ])
    b = np.concatenate([np.zeros(2 * n), [instance.max_irs,
                                          instance.max_total_elements,
                                          instance.max_total_cost]])
    c = np.concatenate([np.zeros(n), instance.beta])
    lo = np.zeros(2 * n)
    hi = np.concatenate([np.ones(n), lmax])
    names = tuple(f"x{i}" for i in range(n)) + tuple(f"z{i}" for i in range(n))
    row_names = (tuple(f"link_min{i}" for i in range(n))
                 + tuple(f"link_max{i}" for i in range(n))
                 + ("cardinality", "total_elements", "total_cost"))
    implied = np.concatenate([np.zeros(n, dtype=bool), np.ones(n, dtype=bool)])
    return LinearProgram(c, A, b, lo, hi, names, row_names, implied)


class _Simplex:
    """Working state for one solve; not reused across calls."""

    def __init__(self, lp: LinearProgram):
        m, n = lp.A.shape
        self.m, self.n_struct = m, n
        x_struct = lp.lo.copy()
        resid = lp.b - lp.A @ x_struct
        need_art = np.flatnonzero(resid < 0)
        k = need_art.size
        art = np.zeros((m, k))
        art[need_art, np.arange(k)] = -1.0
        self.A = np.hstack([lp.A, np.eye(m), art])
        self.b = lp.b
        self.lo = np.concatenate([lp.lo, np.zeros(m), np.zeros(k)])
        self.hi = np.concatenate([lp.hi, np.full(m, np.inf), np.full(k, np.inf)])
        self.n_total = n + m + k
        self.art_cols = np.arange(n + m, n + m + k)
        self.x = np.concatenate([x_struct, np.maximum(resid, 0.0), -resid[need_art]])
        basis = np.arange(n, n + m)
        basis[need_art] = self.art_cols
        self.basis = basis
        # nonbasic status: True = at upper bound
        self.at_upper = np.zeros(self.n_total, dtype=bool)
        self.is_basic = np.zeros(self.n_total, dtype=bool)
        self.is_basic[basis] = True
        self.refactor()
        self.iterations = 0
        self.bland = False
        self.degenerate_run = 0
        self.degenerate_limit = 2 * (m + n)

    def refactor(self):
        B = self.A[:, self.basis]
        self.Binv = np.linalg.inv(B) if self.m else np.zeros((0, 0))
        nonbasic = ~self.is_basic
        xb = self.Binv @ (self.b - self.A[:, nonbasic] @ self.x[nonbasic])
        self.x[self.basis] = xb
        self.pivots_since_refactor = 0

    def run(self, cost: np.ndarray, max_iter: int) -> LpStatus:
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError(f"simplex iteration limit {max_iter} reached")
            y = cost[self.basis] @ self.Binv
            d = cost - y @ self.A
            nonbasic = ~self.is_basic
            movable = self.hi > self.lo
            inc = nonbasic & movable & ~self.at_upper & (d < -OPT_TOL)
            dec = nonbasic & movable & self.at_upper & (d > OPT_TOL)
            cand = np.flatnonzero(inc | dec)
            if cand.size == 0:
                return LpStatus.OPTIMAL
            if self.bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if inc[j] else -1.0
            alpha = self.Binv @ self.A[:, j]
            step = direction * alpha            # basic vars move by -t * step
            xb = self.x[self.basis]
            lob = self.lo[self.basis]
            hib = self.hi[self.basis]
            ratios = np.full(self.m, np.inf)
            down = step > _PIVOT_TOL
            up = step < -_PIVOT_TOL
            ratios[down] = (xb[down] - lob[down]) / step[down]
            ratios[up] = (hib[up] - xb[up]) / -step[up]
            ratios = np.maximum(ratios, 0.0)
            t_flip = self.hi[j] - self.lo[j]
            t_row = ratios.min() if self.m else np.inf
            if not np.isfinite(min(t_row, t_flip)):
                return LpStatus.UNBOUNDED
            self.iterations += 1
            if t_flip <= t_row:
                t = t_flip
                self.x[j] = self.hi[j] if direction > 0 else self.lo[j]
                self.at_upper[j] = direction > 0
                self.x[self.basis] = xb - t * step
            else:
                t = t_row
                ties = np.flatnonzero(ratios <= t_row + 1e-12)
                if self.bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(alpha[ties]))])
                leaving = int(self.basis[r])
                new_x = xb - t * step
                self.x[self.basis] = new_x
                self.x[j] = self.x[j] + direction * t
                # leaving var sits on whichever bound it reached
                hit_upper = step[r] < 0
                self.x[leaving] = self.hi[leaving] if hit_upper else self.lo[leaving]
                self.at_upper[leaving] = bool(hit_upper)
                self.is_basic[leaving] = False
                self.is_basic[j] = True
                self.at_upper[j] = False
                self.basis[r] = j
                self._update_inverse(r, alpha)
            if t <= FEAS_TOL:
                self.degenerate_run += 1
                if self.degenerate_run > self.degenerate_limit:
                    self.bland = True
            else:
                self.degenerate_run = 0

    def _update_inverse(self, r: int, alpha: np.ndarray):
        self.pivots_since_refactor += 1
        if self.pivots_since_refactor >= _REFACTOR_EVERY:
            self.refactor()
            return
        piv = alpha[r]
        row_r = self.Binv[r] / piv
        self.Binv -= np.outer(alpha, row_r)
        self.Binv[r] = row_r


def solve(lp: LinearProgram, max_iter: int | None = None) -> LpResult:
    """Solve ``lp`` to a vertex optimum with a deterministic pivot sequence."""
    if max_iter is None:
        max_iter = 50 * (lp.n_rows + lp.n_vars) + 1000
    sx = _Simplex(lp)
    n, m = lp.n_vars, lp.n_rows
    if sx.art_cols.size:
        phase1 = np.zeros(sx.n_total)
        phase1[sx.art_cols] = 1.0
        status = sx.run(phase1, max_iter)
        assert status is LpStatus.OPTIMAL, "phase one cannot be unbounded"
        if sx.x[sx.art_cols].sum() > FEAS_TOL * (1 + np.abs(lp.b).sum()):
            return LpResult(LpStatus.INFEASIBLE, iterations=sx.iterations)
        # pin artificials at zero; any still basic will be pivoted out as needed
        sx.hi[sx.art_cols] = 0.0
        sx.x[sx.art_cols] = 0.0
        sx.refactor()
    cost = np.concatenate([lp.c, np.zeros(m + sx.art_cols.size)])
    status = sx.run(cost, max_iter)
    if status is LpStatus.UNBOUNDED:
        return LpResult(status, iterations=sx.iterations)
    sx.refactor()
    x = sx.x[:n].copy()
    y = cost[sx.basis] @ sx.Binv
    d = cost - y @ sx.A
    lo, hi = sx.lo, sx.hi
    # dual objective b.y + sum_j lo_j d_j^+ + hi_j d_j^-; infinite uppers only see d^+
    d_pos = np.maximum(d, 0.0)
    d_neg = np.minimum(d, 0.0)
    finite_hi = np.isfinite(hi)
    dual_obj = float(lp.b @ y + lo @ d_pos + hi[finite_hi] @ d_neg[finite_hi])
    if np.any(d_neg[~finite_hi] < -OPT_TOL):
        dual_obj = -np.inf
    return LpResult(
        LpStatus.OPTIMAL,
        x=x,
        objective=float(lp.c @ x),
        duals=y,
        reduced_costs=d[:n],
        dual_objective=dual_obj,
        basis=tuple(int(v) for v in sx.basis),
        iterations=sx.iterations,
        bland_switch=sx.bland,
    )


def lp_solution(instance: ProblemInstance, res: LpResult) -> LpSolution:
    n = instance.n
    if res.status is not LpStatus.OPTIMAL:
        return LpSolution(np.full(n, np.nan), np.full(n, np.nan), float("nan"), res.status, res)
    x = res.x[:n].copy()
    z = res.x[n:].copy()
    # snap solver noise onto the box so downstream sorts/tests see clean values
    x[np.abs(x) <= FEAS_TOL] = 0.0
    x[np.abs(x - 1.0) <= FEAS_TOL] = 1.0
    z[x == 0.0] = 0.0
    g = float(instance.beta @ z)
    return LpSolution(x, z, g, res.status, res)


def lower_bound(instance: ProblemInstance) -> tuple[LpSolution, float]:
    sol = lp_solution(instance, solve(build_lpr(instance)))
    if sol.status is LpStatus.UNBOUNDED:
        raise AssertionError("relaxation with boxed variables reported unbounded")
    return sol, sol.g_dagger


def active_constraint_count(lp: LinearProgram, x: np.ndarray, tol: float = 1e-7) -> int:
    rows = int(np.sum(np.abs(lp.A @ x - lp.b) <= tol))
    bounds = int(np.sum((np.abs(x - lp.lo) <= tol) | (np.abs(x - lp.hi) <= tol)))
    return rows + bounds


def dump_lp(lp: LinearProgram) -> str:
    """Plain-text table: one header line, then ``name coeffs... sense rhs`` per row."""
    out = io.StringIO()
    names = lp.names or tuple(f"v{i}" for i in range(lp.n_vars))
    row_names = lp.row_names or tuple(f"r{i}" for i in range(lp.n_rows))
    fmt = lambda v: "{:.17g}".format(v + 0.0)  # no "-0"
    out.write("\t".join(["row", *names, "sense", "rhs"]) + "\n")
    out.write("\t".join(["objective", *map(fmt, lp.c), "min", ""]) + "\n")
    for name, row, rhs in zip(row_names, lp.A, lp.b):
        out.write("\t".join([name, *map(fmt, row), "<=", fmt(rhs)]) + "\n")
    out.write("\t".join(["lower", *map(fmt, lp.lo), "", ""]) + "\n")
    out.write("\t".join(["upper", *map(fmt, lp.hi), "", ""]) + "\n")
    return out.getvalue()
