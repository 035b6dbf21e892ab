"""Dense linear-programming solver: bounded-variable primal simplex.

Solves ``minimize c @ x + offset`` subject to dense linear constraints and
per-variable bounds, where upper bounds may be infinite. The intended scale
is a few hundred variables and constraints, so everything is kept dense and
vectorized with numpy.

Implementation notes:

* revised simplex with an explicitly maintained basis inverse, rank-one
  (product form) updates and periodic refactorization;
* nonbasic variables may rest at either bound ("upper-bounded simplex"),
  which keeps simple bounds out of the constraint rows;
* phase 1 uses artificial variables only on rows that lack a natural slack
  basis column; leftover artificials are pinned to zero rather than pivoted
  out, so redundant rows need no special casing;
* pricing is most-negative-reduced-cost, with a permanent-until-progress
  switch to Bland's smallest-index rule after a run of degenerate steps,
  which guarantees termination on degenerate inputs;
* all choices (entering, leaving, tie-breaks) are deterministic, so equal
  inputs produce bit-identical outcomes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LE",
    "EQ",
    "GE",
    "LinearProgram",
    "LpStatus",
    "LpOutcome",
    "SolverFailure",
    "solve",
]

LE = "<="
EQ = "=="
GE = ">="
_RELATIONS = (LE, EQ, GE)

_NB_LOWER, _NB_UPPER, _BASIC = 0, 1, 2
_FIXED_RANGE = 1e-12  # below this, a variable's range counts as empty
_PIVOT_TOL = 1e-9
_DEGEN_TOL = 1e-10
_BLAND_TRIGGER = 30  # consecutive degenerate pivots before Bland's rule kicks in
_REFACTOR_EVERY = 96


class SolverFailure(RuntimeError):
    """The solver gave up (iteration limit or numerical trouble).

    Deliberately distinct from an Infeasible outcome: infeasibility is an
    answer, this is the absence of one.
    """


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpOutcome:
    """Result of one solve.

    ``x``, ``objective`` and ``duals`` are populated only when ``status`` is
    OPTIMAL. ``duals[r]`` is the multiplier of constraint ``r`` as written
    (a value ``y`` such that relaxing the right-hand side by one unit changes
    the optimum by about ``-y``).
    """

    status: LpStatus
    x: np.ndarray | None = None
    objective: float | None = None
    duals: np.ndarray | None = None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class LinearProgram:
    """A minimize-linear-cost problem over bounded variables.

    Variables default to the range ``[0, +inf)``. Constraints are dense
    rows ``coeffs @ x <relation> rhs`` with relation one of ``<=``, ``==``,
    ``>=``. ``objective_offset`` is a constant added to every reported
    objective value, letting callers keep families of related programs on a
    comparable cost scale.
    """

    num_vars: int
    objective_coeffs: np.ndarray
    objective_offset: float = 0.0
    constraints: list[tuple[np.ndarray, str, float]] = field(default_factory=list)
    var_bounds: np.ndarray | None = None

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be >= 1")
        self.objective_coeffs = np.asarray(self.objective_coeffs, dtype=float)
        if self.objective_coeffs.shape != (self.num_vars,):
            raise ValueError(
                f"objective_coeffs must have length {self.num_vars}, "
                f"got shape {self.objective_coeffs.shape}"
            )
        if self.var_bounds is None:
            bounds = np.zeros((self.num_vars, 2))
            bounds[:, 1] = np.inf
            self.var_bounds = bounds
        else:
            self.var_bounds = np.asarray(self.var_bounds, dtype=float)
            if self.var_bounds.shape != (self.num_vars, 2):
                raise ValueError("var_bounds must have shape (num_vars, 2)")
        fixed = []
        for coeffs, relation, rhs in self.constraints:
            fixed.append(self._check_row(coeffs, relation, rhs))
        self.constraints = fixed

    def _check_row(self, coeffs, relation, rhs) -> tuple[np.ndarray, str, float]:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.num_vars,):
            raise ValueError(
                f"constraint row must have length {self.num_vars}, got {coeffs.shape}"
            )
        if relation == "=":
            relation = EQ
        if relation not in _RELATIONS:
            raise ValueError(f"unknown relation {relation!r}")
        return (coeffs, relation, float(rhs))

    def add_constraint(self, coeffs, relation: str, rhs: float) -> None:
        self.constraints.append(self._check_row(coeffs, relation, rhs))

    def set_bounds(self, index: int, lower: float, upper: float) -> None:
        if lower > upper:
            raise ValueError(f"variable {index}: lower bound {lower} > upper {upper}")
        self.var_bounds[index, 0] = lower
        self.var_bounds[index, 1] = upper

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def validate(self) -> None:
        lo, hi = self.var_bounds[:, 0], self.var_bounds[:, 1]
        if not np.isfinite(lo).all():
            raise ValueError("lower bounds must be finite")
        if (lo > hi).any():
            raise ValueError("every variable needs lower <= upper")

    def to_debug_listing(self) -> str:
        """Render an MPS-style listing (fixed row/column order) for external
        cross-checking with other LP tools."""
        lines = ["NAME LOTSPEED_LP", "ROWS", " N  COST"]
        tag = {LE: "L", EQ: "E", GE: "G"}
        for r, (_, relation, _) in enumerate(self.constraints):
            lines.append(f" {tag[relation]}  R{r:04d}")
        lines.append("COLUMNS")
        for j in range(self.num_vars):
            c = self.objective_coeffs[j]
            if c != 0.0:
                lines.append(f"    X{j:04d}  COST  {c:.12g}")
            for r, (coeffs, _, _) in enumerate(self.constraints):
                if coeffs[j] != 0.0:
                    lines.append(f"    X{j:04d}  R{r:04d}  {coeffs[j]:.12g}")
        lines.append("RHS")
        for r, (_, _, rhs) in enumerate(self.constraints):
            if rhs != 0.0:
                lines.append(f"    RHS  R{r:04d}  {rhs:.12g}")
        lines.append("BOUNDS")
        for j in range(self.num_vars):
            lo, hi = self.var_bounds[j]
            if lo == hi:
                lines.append(f" FX BND  X{j:04d}  {lo:.12g}")
                continue
            if lo != 0.0:
                lines.append(f" LO BND  X{j:04d}  {lo:.12g}")
            if np.isfinite(hi):
                lines.append(f" UP BND  X{j:04d}  {hi:.12g}")
        lines.append("ENDATA")
        return "\n".join(lines) + "\n"


def solve(lp: LinearProgram, max_iterations: int | None = None) -> LpOutcome:
    """Solve a LinearProgram to a vertex optimum.

    Returns an LpOutcome whose status exactly classifies infeasible and
    unbounded inputs. Raises SolverFailure if the iteration budget runs out
    or the final basis fails the numerical self-check; malformed input
    raises ValueError.
    """
    lp.validate()
    state = _Simplex(lp, max_iterations)
    return state.run()


class _Simplex:
    def __init__(self, lp: LinearProgram, max_iterations: int | None):
        self.lp = lp
        n = lp.num_vars
        m = len(lp.constraints)
        self.n_struct = n
        self.m = m

        self.lower = lp.var_bounds[:, 0].copy()
        rng = lp.var_bounds[:, 1] - self.lower  # variable range in shifted space

        A = np.zeros((m, n))
        b = np.zeros(m)
        relations = []
        for r, (coeffs, relation, rhs) in enumerate(lp.constraints):
            A[r] = coeffs
            b[r] = rhs
            relations.append(relation)
        # shift variables so every lower bound becomes zero
        b -= A @ self.lower

        # row equilibration keeps pivot tolerances meaningful across rows
        self.row_scale = np.maximum(1.0, np.abs(A).max(axis=1, initial=0.0))
        A /= self.row_scale[:, None]
        b /= self.row_scale

        # slack / surplus columns
        slack_col = np.full(m, -1, dtype=int)
        slack_sign = np.zeros(m)
        n_slack = sum(1 for rel in relations if rel != EQ)
        k = n
        for r, rel in enumerate(relations):
            if rel == EQ:
                continue
            slack_col[r] = k
            slack_sign[r] = 1.0 if rel == LE else -1.0
            k += 1

        # orient every row so the right-hand side is nonnegative
        self.row_sign = np.where(b < 0, -1.0, 1.0)
        A *= self.row_sign[:, None]
        b *= self.row_sign

        # artificial columns for rows without a usable slack basis column
        needs_art = [
            r
            for r in range(m)
            if slack_col[r] < 0 or slack_sign[r] * self.row_sign[r] < 0
        ]
        n_art = len(needs_art)
        total = n + n_slack + n_art

        self.A = np.zeros((m, total))
        self.A[:, :n] = A
        for r in range(m):
            if slack_col[r] >= 0:
                self.A[r, slack_col[r]] = slack_sign[r] * self.row_sign[r]
        self.art_cols = np.arange(n + n_slack, total)
        for idx, r in enumerate(needs_art):
            self.A[r, n + n_slack + idx] = 1.0

        self.b = b
        self.ub = np.concatenate([rng, np.full(n_slack + n_art, np.inf)])
        self.cost = np.concatenate([lp.objective_coeffs, np.zeros(n_slack + n_art)])
        self.total = total

        self.status = np.full(total, _NB_LOWER, dtype=np.int8)
        self.basis = np.empty(m, dtype=int)
        for r in range(m):
            if slack_col[r] >= 0 and slack_sign[r] * self.row_sign[r] > 0:
                self.basis[r] = slack_col[r]
        for idx, r in enumerate(needs_art):
            self.basis[r] = n + n_slack + idx
        self.status[self.basis] = _BASIC

        self.B_inv = np.eye(m)
        self.xB = b.copy()
        self.enterable = self.ub > _FIXED_RANGE
        self.iterations = 0
        if max_iterations is None:
            max_iterations = 100 * (m + total) + 5000
        self.max_iterations = max_iterations

    # -- bookkeeping ---------------------------------------------------------

    def _recompute_basics(self) -> None:
        up = np.flatnonzero(self.status == _NB_UPPER)
        rhs = self.b.copy()
        if up.size:
            rhs -= self.A[:, up] @ self.ub[up]
        self.xB = self.B_inv @ rhs

    def _refactorize(self) -> None:
        if self.m == 0:
            return
        B = self.A[:, self.basis]
        try:
            self.B_inv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(f"basis matrix became singular: {exc}") from exc
        self._recompute_basics()

    def _full_solution(self) -> np.ndarray:
        x = np.zeros(self.total)
        up = self.status == _NB_UPPER
        x[up] = self.ub[up]
        x[self.basis] = self.xB
        return x

    # -- core loop -----------------------------------------------------------

    def _iterate(self, cost: np.ndarray, phase: int) -> str:
        """Run simplex pivots until this phase's optimum; returns 'optimal'
        or 'unbounded'."""
        bland = False
        degen_run = 0
        since_refactor = 0
        dual_tol = 1e-9 * (1.0 + np.abs(cost).max(initial=0.0))

        while True:
            if self.iterations >= self.max_iterations:
                raise SolverFailure(
                    f"iteration limit {self.max_iterations} exceeded in phase {phase}"
                )
            self.iterations += 1

            y = cost[self.basis] @ self.B_inv if self.m else np.zeros(0)
            d = cost - y @ self.A
            want_in = self.enterable & (
                ((self.status == _NB_LOWER) & (d < -dual_tol))
                | ((self.status == _NB_UPPER) & (d > dual_tol))
            )
            candidates = np.flatnonzero(want_in)
            if candidates.size == 0:
                return "optimal"
            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(np.abs(d[candidates]))])

            at_lower = self.status[j] == _NB_LOWER
            w = self.B_inv @ self.A[:, j] if self.m else np.zeros(0)
            rate = -w if at_lower else w  # change of basic values per unit step

            # ratio test: step until a basic variable hits one of its bounds
            # or the entering variable reaches its opposite bound
            theta_best = self.ub[j]  # bound flip distance (may be inf)
            leave_row = -1
            hit_upper = False
            dn = np.flatnonzero(rate < -_PIVOT_TOL)
            if dn.size:
                theta_dn = np.maximum(self.xB[dn], 0.0) / -rate[dn]
            up_ub = self.ub[self.basis]
            upm = np.flatnonzero((rate > _PIVOT_TOL) & np.isfinite(up_ub))
            if upm.size:
                theta_up = np.maximum(up_ub[upm] - self.xB[upm], 0.0) / rate[upm]

            best_block = np.inf
            block_row = -1
            block_upper = False
            if dn.size:
                k = int(np.argmin(theta_dn))
                best_block = theta_dn[k]
                block_row = int(dn[k])
            if upm.size:
                k = int(np.argmin(theta_up))
                if theta_up[k] < best_block - 1e-15:
                    best_block = theta_up[k]
                    block_row = int(upm[k])
                    block_upper = True
            if block_row >= 0 and bland:
                # smallest variable index among all blocking rows at the
                # minimal step, per Bland's anti-cycling rule
                tie = 1e-12 + best_block * 1e-9
                best_var = None
                for rows, flags in ((dn, False), (upm, True)):
                    if rows.size == 0:
                        continue
                    thetas = theta_dn if not flags else theta_up
                    for pos, row in enumerate(rows):
                        if thetas[pos] <= best_block + tie:
                            var = self.basis[row]
                            if best_var is None or var < best_var:
                                best_var = var
                                block_row = int(row)
                                block_upper = flags
                                best_block = min(best_block, thetas[pos])

            if best_block < theta_best:
                theta = best_block
                leave_row = block_row
                hit_upper = block_upper
            else:
                theta = theta_best

            if not np.isfinite(theta):
                if phase == 1:
                    raise SolverFailure("phase-1 objective unbounded (internal error)")
                return "unbounded"

            theta = max(theta, 0.0)
            if self.m:
                self.xB += theta * rate

            if leave_row < 0:
                # bound flip: the entering variable crosses to its other bound
                self.status[j] = _NB_UPPER if at_lower else _NB_LOWER
            else:
                leaving = int(self.basis[leave_row])
                self.status[leaving] = _NB_UPPER if hit_upper else _NB_LOWER
                self.basis[leave_row] = j
                self.status[j] = _BASIC
                self.xB[leave_row] = theta if at_lower else self.ub[j] - theta
                # product-form update of the basis inverse; the ratio test
                # guarantees |w[leave_row]| > _PIVOT_TOL
                pivot_row = self.B_inv[leave_row] / w[leave_row]
                self.B_inv -= np.outer(w, pivot_row)
                self.B_inv[leave_row] = pivot_row
                since_refactor += 1
                if since_refactor >= _REFACTOR_EVERY:
                    self._refactorize()
                    since_refactor = 0

            if theta <= _DEGEN_TOL:
                degen_run += 1
                if degen_run >= _BLAND_TRIGGER:
                    bland = True
            else:
                degen_run = 0
                bland = False

    def run(self) -> LpOutcome:
        art = self.art_cols
        if art.size:
            phase1_cost = np.zeros(self.total)
            phase1_cost[art] = 1.0
            self._iterate(phase1_cost, phase=1)
            infeas = float(self._full_solution()[art].sum())
            if infeas > 1e-7 * (1.0 + np.abs(self.b).max(initial=0.0)):
                return LpOutcome(LpStatus.INFEASIBLE, iterations=self.iterations)
            # pin artificials at zero; stragglers in the basis are harmless
            self.ub[art] = 0.0
            self.enterable[art] = False

        outcome = self._iterate(self.cost, phase=2)
        if outcome == "unbounded":
            return LpOutcome(LpStatus.UNBOUNDED, iterations=self.iterations)

        self._refactorize()  # fresh inverse for an accurate final solution
        x_all = self._full_solution()
        worst = float(
            np.maximum(-x_all, x_all - np.where(np.isfinite(self.ub), self.ub, np.inf))
            .max(initial=0.0)
        )
        if worst > 1e-6:
            raise SolverFailure(f"final basis violates bounds by {worst:.3g}")
        x_all = np.clip(x_all, 0.0, np.where(np.isfinite(self.ub), self.ub, np.inf))

        x = self.lower + x_all[: self.n_struct]
        objective = float(self.lp.objective_coeffs @ x) + self.lp.objective_offset

        duals = None
        if self.m:
            y = self.cost[self.basis] @ self.B_inv
            duals = y * self.row_sign / self.row_scale
        else:
            duals = np.zeros(0)

        self._self_check(x)
        return LpOutcome(
            LpStatus.OPTIMAL,
            x=x,
            objective=objective,
            duals=duals,
            iterations=self.iterations,
        )

    def _self_check(self, x: np.ndarray) -> None:
        worst = 0.0
        for coeffs, relation, rhs in self.lp.constraints:
            lhs = float(coeffs @ x)
            if relation == LE:
                worst = max(worst, lhs - rhs)
            elif relation == GE:
                worst = max(worst, rhs - lhs)
            else:
                worst = max(worst, abs(lhs - rhs))
        scale = 1.0 + max(
            (abs(rhs) for _, _, rhs in self.lp.constraints), default=0.0
        )
        if worst > 1e-7 * scale:
            raise SolverFailure(
                f"optimal basis fails residual self-check by {worst:.3g}"
            )
