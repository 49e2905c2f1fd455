"""Transportation problems, plans and the transportation cost norm."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from .errors import MissingValue, NotZeroSum, SpaceSyntaxError, UnknownLabel
from .lp import EQ, Constraint, LinearProgram, solve_lp
from .metric import FiniteMetricSpace, as_rational

__all__ = [
    "LipschitzFunction",
    "Molecule",
    "TCNormResult",
    "TransportationPlan",
    "TransportationProblem",
    "pairing",
    "plan_cost",
    "problem_from_dict",
    "problem_to_dict",
    "tc_norm",
    "transport_lp",
]

ZERO = Fraction(0)


class TransportationProblem:
    """A finitely supported zero-sum function on the points of a space.

    Zero masses are dropped, so two problems compare equal exactly when they
    are the same function.
    """

    __slots__ = ("masses",)

    def __init__(self, masses: Mapping[str, object] = (), *, check: bool = True):
        clean: dict[str, Fraction] = {}
        for p, v in dict(masses).items():
            q = as_rational(v)
            if q:
                clean[p] = q
        if check and sum(clean.values(), ZERO) != 0:
            raise NotZeroSum(f"masses sum to {sum(clean.values(), ZERO)}, not 0")
        self.masses = clean

    @classmethod
    def dipole(cls, source: str, sink: str, mass=1) -> "TransportationProblem":
        """``mass * (1_source - 1_sink)``."""
        if source == sink:
            return cls()
        return cls({source: mass, sink: -as_rational(mass)})

    def __getitem__(self, p: str) -> Fraction:
        return self.masses.get(p, ZERO)

    def __add__(self, other: "TransportationProblem") -> "TransportationProblem":
        out = dict(self.masses)
        for p, v in other.masses.items():
            out[p] = out.get(p, ZERO) + v
        return TransportationProblem(out, check=False)

    def __neg__(self) -> "TransportationProblem":
        return TransportationProblem({p: -v for p, v in self.masses.items()}, check=False)

    def __sub__(self, other: "TransportationProblem") -> "TransportationProblem":
        return self + (-other)

    def scale(self, c) -> "TransportationProblem":
        c = as_rational(c)
        return TransportationProblem({p: c * v for p, v in self.masses.items()}, check=False)

    __rmul__ = scale

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TransportationProblem) and self.masses == other.masses

    def __hash__(self):
        return hash(frozenset(self.masses.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{p}: {v}" for p, v in self.masses.items())
        return f"TransportationProblem({{{body}}})"

    @property
    def support(self) -> list[str]:
        return list(self.masses)

    def check_points(self, space: FiniteMetricSpace) -> None:
        for p in self.masses:
            if p not in space:
                raise UnknownLabel(f"problem mentions unknown point {p!r}")


@dataclass(frozen=True)
class TransportationPlan:
    moves: tuple[tuple[str, str, Fraction], ...] = ()

    def net(self) -> TransportationProblem:
        out: dict[str, Fraction] = {}
        for src, dst, a in self.moves:
            out[src] = out.get(src, ZERO) + a
            out[dst] = out.get(dst, ZERO) - a
        return TransportationProblem(out)


@dataclass(frozen=True)
class Molecule:
    """The norm-one problem ``(1_positive - 1_negative) / d(positive, negative)``.

    For a matched pair ``(x_i, y_i)`` the positive end is ``y_i``, so that a
    functional growing by ``d(x_i, y_i)`` from ``x_i`` to ``y_i`` pairs to +1.
    """

    positive: str
    negative: str
    scale: Fraction

    @classmethod
    def of_pair(cls, space: FiniteMetricSpace, x: str, y: str) -> "Molecule":
        if x == y:
            raise ValueError("a molecule needs two distinct points")
        return cls(positive=y, negative=x, scale=1 / space.d(x, y))

    def as_problem(self) -> TransportationProblem:
        return TransportationProblem({self.positive: self.scale, self.negative: -self.scale})


@dataclass(frozen=True)
class LipschitzFunction:
    """A rational-valued function stored as a value table."""

    values: Mapping[str, Fraction]

    def __call__(self, p: str) -> Fraction:
        try:
            return self.values[p]
        except KeyError:
            raise MissingValue(f"no value at {p!r}") from None

    def lipschitz_witness(self, space: FiniteMetricSpace,
                          points: Optional[Iterable[str]] = None) -> Optional[tuple[str, str]]:
        """First pair ``(u, v)`` with ``|t(u) - t(v)| > d(u, v)``, or None."""
        pts = list(space.points if points is None else points)
        vals = [self(p) for p in pts]
        idx = [space.index(p) for p in pts]
        for a in range(len(pts)):
            row = space.dist[idx[a]]
            for b in range(a + 1, len(pts)):
                if abs(vals[a] - vals[b]) > row[idx[b]]:
                    return pts[a], pts[b]
        return None


def plan_cost(space: FiniteMetricSpace, plan: TransportationPlan) -> Fraction:
    return sum((a * space.d(src, dst) for src, dst, a in plan.moves), ZERO)


def pairing(t: Union[LipschitzFunction, Mapping[str, Fraction]],
            f: TransportationProblem) -> Fraction:
    """``sum_x t(x) f(x)``; constants in ``t`` cancel because ``f`` sums to zero."""
    get = t if callable(t) else (lambda p: _lookup(t, p))
    return sum((get(p) * v for p, v in f.masses.items()), ZERO)


def _lookup(t: Mapping[str, Fraction], p: str) -> Fraction:
    try:
        return t[p]
    except KeyError:
        raise MissingValue(f"no value at {p!r}") from None


@dataclass(frozen=True)
class TCNormResult:
    value: Fraction
    plan: TransportationPlan
    # values on the support of the problem; 1-Lipschitz there and
    # pairing(potentials, f) == value
    potentials: dict[str, Fraction] = field(default_factory=dict)


def transport_lp(space: FiniteMetricSpace, f: TransportationProblem):
    """The bipartite transportation LP from the positive to the negative support.

    Returns ``(lp, sources, sinks)``; variable ``a * len(sinks) + b`` is the
    mass moved from ``sources[a]`` to ``sinks[b]``.
    """
    sources = [p for p in space.points if f[p] > 0]
    sinks = [p for p in space.points if f[p] < 0]
    ns, nt = len(sources), len(sinks)
    cost = [space.d(p, q) for p in sources for q in sinks]
    rows = []
    for a, p in enumerate(sources):
        coeffs = [ZERO] * (ns * nt)
        for b in range(nt):
            coeffs[a * nt + b] = Fraction(1)
        rows.append(Constraint(tuple(coeffs), EQ, f[p]))
    for b, q in enumerate(sinks):
        coeffs = [ZERO] * (ns * nt)
        for a in range(ns):
            coeffs[a * nt + b] = Fraction(1)
        rows.append(Constraint(tuple(coeffs), EQ, -f[q]))
    return LinearProgram("min", cost, rows), sources, sinks


def tc_norm(space: FiniteMetricSpace, f: TransportationProblem) -> TCNormResult:
    """Exact transportation cost norm with an optimal plan and dual potentials."""
    f.check_points(space)
    if sum(f.masses.values(), ZERO) != 0:
        raise NotZeroSum("problem does not sum to zero")
    if not f.masses:
        return TCNormResult(ZERO, TransportationPlan(), {})
    lp, sources, sinks = transport_lp(space, f)
    out = solve_lp(lp)
    if out.status != "optimal":  # pragma: no cover - balanced transport LPs are feasible
        raise RuntimeError(f"transport LP unexpectedly {out.status}")
    nt = len(sinks)
    moves = tuple((p, q, out.primal[a * nt + b])
                  for a, p in enumerate(sources) for b, q in enumerate(sinks)
                  if out.primal[a * nt + b])
    # LP duals give u(p) + v(q) <= d(p, q); phi = u on sources, -v on sinks.
    # A c-transform over the sinks then makes phi 1-Lipschitz on the support
    # without changing its pairing with f.
    phi = {p: out.dual[a] for a, p in enumerate(sources)}
    phi.update({q: -out.dual[len(sources) + b] for b, q in enumerate(sinks)})
    pot = {x: min(phi[q] + space.d(x, q) for q in sinks) for x in sources + sinks}
    value = out.objective
    assert pairing(pot, f) == value
    return TCNormResult(value, TransportationPlan(moves), pot)


def problem_to_dict(f: TransportationProblem) -> dict:
    return {"masses": {p: str(v) for p, v in f.masses.items()}}


def problem_from_dict(obj) -> TransportationProblem:
    if not isinstance(obj, dict) or not isinstance(obj.get("masses"), dict):
        raise SpaceSyntaxError('expected an object with a "masses" map')
    return TransportationProblem(obj["masses"])


def problem_dumps(f: TransportationProblem) -> str:
    return json.dumps(problem_to_dict(f), indent=2)
