"""Exact rational linear programming.

A two-phase primal simplex on a dense tableau of Fractions with Bland's
smallest-index rule, plus an independent certificate checker.

Dual convention: ``LPOutcome.dual[i]`` is the shadow price of constraint ``i``,
i.e. the rate of change of the optimal value per unit increase of its
right-hand side. With reduced costs ``z = c - A^T y`` and lower bounds ``L``:

* minimize: ``y_i >= 0`` on ``>=`` rows, ``y_i <= 0`` on ``<=`` rows,
  ``z_j >= 0`` on bounded variables;
* maximize: the same with every sign flipped;
* ``z_j = 0`` on free variables, equality rows have free ``y_i``;
* dual objective ``b.y + sum_j L_j z_j`` over bounded ``j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import DimensionMismatch
from .metric import as_rational

__all__ = [
    "Constraint",
    "LPOutcome",
    "LinearProgram",
    "LPCertificateReport",
    "dual_program",
    "lp_to_dict",
    "solve_lp",
    "verify_lp_certificate",
]

LE, EQ, GE = "<=", "=", ">="
_FLIP = {LE: GE, GE: LE, EQ: EQ}

ZERO = Fraction(0)


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    relation: str
    rhs: Fraction

    def __post_init__(self):
        if self.relation not in (LE, EQ, GE):
            raise ValueError(f"unknown relation {self.relation!r}")


@dataclass
class LinearProgram:
    sense: str
    objective: list[Fraction]
    constraints: list[Constraint]
    # None entries are free variables; omitted means every variable >= 0.
    lower_bounds: Optional[list[Optional[Fraction]]] = None

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        self.objective = [as_rational(c) for c in self.objective]
        n = len(self.objective)
        for k, con in enumerate(self.constraints):
            if len(con.coeffs) != n:
                raise DimensionMismatch(
                    f"constraint {k} has {len(con.coeffs)} coefficients, expected {n}")
        if self.lower_bounds is None:
            self.lower_bounds = [ZERO] * n
        elif len(self.lower_bounds) != n:
            raise DimensionMismatch("lower_bounds length differs from variable count")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @staticmethod
    def build(sense, objective, rows, lower_bounds=None) -> "LinearProgram":
        """Convenience constructor from ``(coeffs, relation, rhs)`` triples."""
        cons = [Constraint(tuple(as_rational(a) for a in coeffs), rel, as_rational(rhs))
                for coeffs, rel, rhs in rows]
        if lower_bounds is not None:
            lower_bounds = [None if lb is None else as_rational(lb) for lb in lower_bounds]
        return LinearProgram(sense, list(objective), cons, lower_bounds)


@dataclass
class LPOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    primal: list[Fraction] = field(default_factory=list)
    dual: list[Fraction] = field(default_factory=list)
    objective: Optional[Fraction] = None


# ---------------------------------------------------------------------------
# simplex core: minimize c.x  s.t. rows, x >= 0


class _Tableau:
    def __init__(self, rows, costs):
        # rows: list of (coeff list, relation, rhs) with x >= 0
        m = len(rows)
        n = len(costs)
        self.m, self.n_struct = m, n
        self.row_sign = [1] * m
        norm = []
        for i, (a, rel, b) in enumerate(rows):
            if b < 0:
                a = [-v for v in a]
                b = -b
                rel = _FLIP[rel]
                self.row_sign[i] = -1
            norm.append((list(a), rel, b))

        n_slack = sum(1 for _, rel, _ in norm if rel != EQ)
        n_art = sum(1 for _, rel, _ in norm if rel != LE)
        width = n + n_slack + n_art
        self.width = width
        self.art_start = n + n_slack
        self.costs = list(costs) + [ZERO] * (n_slack + n_art)
        self.T: list[list[Fraction]] = []
        self.rhs: list[Fraction] = []
        self.basis: list[int] = []
        # column holding the unit vector e_i at the start, used to read duals
        self.unit_col: list[int] = []
        s = n
        art = self.art_start
        for a, rel, b in norm:
            row = a + [ZERO] * (n_slack + n_art)
            if rel == LE:
                row[s] = Fraction(1)
                self.basis.append(s)
                self.unit_col.append(s)
                s += 1
            else:
                if rel == GE:
                    row[s] = Fraction(-1)
                    s += 1
                row[art] = Fraction(1)
                self.basis.append(art)
                self.unit_col.append(art)
                art += 1
            self.T.append(row)
            self.rhs.append(b)
        self.active = [True] * m

    def _pivot(self, r: int, c: int) -> None:
        T = self.T
        prow = T[r]
        p = prow[c]
        if p != 1:
            inv = 1 / p
            prow = [v * inv for v in prow]
            T[r] = prow
            self.rhs[r] *= inv
        nz = [j for j, v in enumerate(prow) if v]
        br = self.rhs[r]
        for k in range(self.m):
            if k == r or not self.active[k]:
                continue
            row = T[k]
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                self.rhs[k] -= f * br
        self.basis[r] = c

    def _reduced_costs(self, costs) -> list[Fraction]:
        red = list(costs)
        for i in range(self.m):
            if not self.active[i]:
                continue
            cb = costs[self.basis[i]]
            if cb:
                row = self.T[i]
                for j, v in enumerate(row):
                    if v:
                        red[j] -= cb * v
        return red

    def _run(self, costs, allowed) -> str:
        """Bland's rule until optimal or unbounded for the given costs."""
        red = self._reduced_costs(costs)
        while True:
            enter = -1
            for j in range(self.width):
                if allowed[j] and red[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            best = None
            leave = -1
            for i in range(self.m):
                if not self.active[i]:
                    continue
                a = self.T[i][enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (best is None or ratio < best
                            or (ratio == best and self.basis[i] < self.basis[leave])):
                        best, leave = ratio, i
            if leave < 0:
                return "unbounded"
            f = red[enter]
            self._pivot(leave, enter)
            prow = self.T[leave]
            for j, v in enumerate(prow):
                if v:
                    red[j] -= f * v

    def solve(self):
        width = self.width
        has_art = self.art_start < width
        if has_art:
            phase1 = [ZERO] * self.art_start + [Fraction(1)] * (width - self.art_start)
            allowed = [True] * width
            self._run(phase1, allowed)
            infeas = sum((self.rhs[i] for i in range(self.m)
                          if self.basis[i] >= self.art_start), ZERO)
            if infeas > 0:
                return "infeasible", None, None
            # drive zero-level artificials out of the basis; drop redundant rows
            for i in range(self.m):
                if self.basis[i] >= self.art_start:
                    row = self.T[i]
                    for j in range(self.art_start):
                        if row[j]:
                            self._pivot(i, j)
                            break
                    else:
                        self.active[i] = False
        allowed = [j < self.art_start for j in range(width)]
        status = self._run(self.costs, allowed)
        if status == "unbounded":
            return "unbounded", None, None
        x = [ZERO] * self.n_struct
        for i in range(self.m):
            if self.active[i] and self.basis[i] < self.n_struct:
                x[self.basis[i]] = self.rhs[i]
        red = self._reduced_costs(self.costs)
        y = []
        for i in range(self.m):
            if self.active[i]:
                y.append(self.row_sign[i] * (self.costs[self.unit_col[i]] - red[self.unit_col[i]]))
            else:
                y.append(ZERO)
        return "optimal", x, y


# ---------------------------------------------------------------------------
# reductions between general LPs and the core


def _as_min(lp: LinearProgram):
    """Return (costs, rows, lower bounds, sign) for the minimization form."""
    sign = 1 if lp.sense == "min" else -1
    c = [sign * v for v in lp.objective]
    rows = [(list(con.coeffs), con.relation, con.rhs) for con in lp.constraints]
    return c, rows, list(lp.lower_bounds), sign


def _solve_direct(lp: LinearProgram) -> LPOutcome:
    c, rows, lbs, sign = _as_min(lp)
    # column map: var j -> (col, coef) list; free vars split into x+ - x-
    cols: list[list[tuple[int, int]]] = []
    ncol = 0
    for lb in lbs:
        if lb is None:
            cols.append([(ncol, 1), (ncol + 1, -1)])
            ncol += 2
        else:
            cols.append([(ncol, 1)])
            ncol += 1
    costs = [ZERO] * ncol
    for j, pieces in enumerate(cols):
        for col, s in pieces:
            costs[col] = s * c[j]
    core_rows = []
    for a, rel, b in rows:
        row = [ZERO] * ncol
        shift = ZERO
        for j, v in enumerate(a):
            if not v:
                continue
            for col, s in cols[j]:
                row[col] = s * v
            if lbs[j] is not None:
                shift += v * lbs[j]
        core_rows.append((row, rel, b - shift))
    status, xs, y = _Tableau(core_rows, costs).solve()
    if status != "optimal":
        return LPOutcome(status)
    x = []
    for j, pieces in enumerate(cols):
        v = sum((s * xs[col] for col, s in pieces), ZERO)
        x.append(v + (lbs[j] if lbs[j] is not None else ZERO))
    obj = sum((cj * xj for cj, xj in zip(lp.objective, x)), ZERO)
    return LPOutcome("optimal", x, [sign * v for v in y], obj)


def dual_program(lp: LinearProgram) -> tuple[LinearProgram, list[int], Fraction]:
    """Explicit LP dual of the minimization form of ``lp``.

    Returns ``(dual, row_signs, offset)``: the dual is a maximization whose
    variable ``i`` equals ``row_signs[i] * y_i`` (the shadow price of row ``i``
    of the minimization form) and whose optimum plus ``offset`` equals the
    optimum of the minimization form.
    """
    c, rows, lbs, _ = _as_min(lp)
    n = lp.n_vars
    offset = sum((lb * cj for lb, cj in zip(lbs, c) if lb is not None), ZERO)
    row_signs = []
    dual_obj = []
    dual_lbs: list[Optional[Fraction]] = []
    for a, rel, b in rows:
        s = -1 if rel == LE else 1
        row_signs.append(s)
        shifted = b - sum((v * lb for v, lb in zip(a, lbs) if lb is not None and v), ZERO)
        dual_obj.append(s * shifted)
        dual_lbs.append(None if rel == EQ else ZERO)
    cons = []
    for j in range(n):
        coeffs = tuple(s * rows[i][0][j] for i, s in enumerate(row_signs))
        cons.append(Constraint(coeffs, EQ if lbs[j] is None else LE, c[j]))
    return LinearProgram("max", dual_obj, cons, dual_lbs), row_signs, offset


def _solve_via_dual(lp: LinearProgram) -> Optional[LPOutcome]:
    dual, row_signs, offset = dual_program(lp)
    out = _solve_direct(dual)
    if out.status == "unbounded":
        return LPOutcome("infeasible")
    if out.status != "optimal":
        # dual infeasible: primal is infeasible or unbounded, decide directly
        return None
    _, _, lbs, sign = _as_min(lp)
    x = [u + (lb if lb is not None else ZERO) for u, lb in zip(out.dual, lbs)]
    y_min = [s * v for s, v in zip(row_signs, out.primal)]
    obj = sum((cj * xj for cj, xj in zip(lp.objective, x)), ZERO)
    assert sign * obj == out.objective + offset
    return LPOutcome("optimal", x, [sign * v for v in y_min], obj)


def solve_lp(lp: LinearProgram, *, dualize: Optional[bool] = None) -> LPOutcome:
    """Solve ``lp`` exactly.

    The optimal primal is a basic solution (a vertex of the feasible region),
    and the dual vector is a matching optimal dual. When ``dualize`` is left as
    ``None``, programs with more constraints than variables are solved through
    their explicit dual, which keeps the tableau small; the returned primal is
    then the basic solution complementary to the dual's optimal basis.
    """
    if dualize is None:
        dualize = len(lp.constraints) > lp.n_vars
    if dualize:
        out = _solve_via_dual(lp)
        if out is not None:
            return out
    return _solve_direct(lp)


# ---------------------------------------------------------------------------
# certificate check, written against the definitions and not the solver


@dataclass
class LPCertificateReport:
    ok: bool
    violations: list[str]

    def __bool__(self) -> bool:
        return self.ok


def verify_lp_certificate(lp: LinearProgram, out: LPOutcome) -> LPCertificateReport:
    if out.status != "optimal":
        raise ValueError("only optimal outcomes carry a certificate")
    n, m = lp.n_vars, len(lp.constraints)
    if len(out.primal) != n or len(out.dual) != m:
        raise DimensionMismatch(
            f"outcome has {len(out.primal)} primal / {len(out.dual)} dual entries, "
            f"program has {n} variables / {m} constraints")
    bad: list[str] = []
    x, y = out.primal, out.dual
    lbs = lp.lower_bounds
    sgn = 1 if lp.sense == "min" else -1

    for j, (xj, lb) in enumerate(zip(x, lbs)):
        if lb is not None and xj < lb:
            bad.append(f"primal: variable {j} = {xj} below its bound {lb}")
    for i, con in enumerate(lp.constraints):
        lhs = sum((a * v for a, v in zip(con.coeffs, x) if a), ZERO)
        if ((con.relation == LE and lhs > con.rhs) or (con.relation == GE and lhs < con.rhs)
                or (con.relation == EQ and lhs != con.rhs)):
            bad.append(f"primal: row {i} has lhs {lhs} {con.relation} {con.rhs} violated")

    for i, con in enumerate(lp.constraints):
        yi = sgn * y[i]
        if (con.relation == GE and yi < 0) or (con.relation == LE and yi > 0):
            bad.append(f"dual: multiplier of row {i} = {y[i]} has the wrong sign")
    z = list(lp.objective)
    for i, con in enumerate(lp.constraints):
        if y[i]:
            for j, a in enumerate(con.coeffs):
                if a:
                    z[j] -= a * y[i]
    for j, (zj, lb) in enumerate(zip(z, lbs)):
        if lb is None and zj != 0:
            bad.append(f"dual: free variable {j} has reduced cost {zj} != 0")
        elif lb is not None and sgn * zj < 0:
            bad.append(f"dual: column {j} has reduced cost {zj} of the wrong sign")

    primal_obj = sum((c * v for c, v in zip(lp.objective, x)), ZERO)
    dual_obj = sum((con.rhs * yi for con, yi in zip(lp.constraints, y)), ZERO)
    dual_obj += sum((lb * zj for lb, zj in zip(lbs, z) if lb is not None), ZERO)
    if out.objective is not None and primal_obj != out.objective:
        bad.append(f"objective: reported {out.objective} but c.x = {primal_obj}")
    if primal_obj != dual_obj:
        bad.append(f"gap: primal {primal_obj} != dual {dual_obj}")
    return LPCertificateReport(not bad, bad)


def lp_to_dict(lp: LinearProgram) -> dict:
    """JSON form used by the CLI's LP dump: rationals as strings, free bounds null."""
    return {
        "sense": lp.sense,
        "objective": [str(c) for c in lp.objective],
        "constraints": [
            {"coeffs": [str(a) for a in con.coeffs], "relation": con.relation,
             "rhs": str(con.rhs)}
            for con in lp.constraints
        ],
        "lower_bounds": [None if lb is None else str(lb) for lb in lp.lower_bounds],
    }


def lp_dumps(lp: LinearProgram) -> str:
    return json.dumps(lp_to_dict(lp), indent=2)
