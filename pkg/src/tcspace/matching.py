"""Minimum-weight perfect matchings and their odd-cut duals.

Edge weights are the metric distances of a :class:`FiniteMetricSpace`
restricted to an even vertex set. The matching LP and its dual enumerate every
odd cut explicitly, so instances are capped at 12 vertices.

Odd cuts are keyed by a canonical side: the side with at most ``n`` vertices
(``2n`` vertices in total), and when both sides have exactly ``n`` vertices,
the side holding the first vertex of the instance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    DuplicatePoint,
    InvalidInstance,
    SpaceSyntaxError,
    TooLarge,
    UncrossingFailed,
    UnknownLabel,
)
from .lp import EQ, GE, LE, Constraint, LinearProgram, solve_lp
from .metric import FiniteMetricSpace, as_rational

__all__ = [
    "LaminarDual",
    "Matching",
    "MatchingInstance",
    "PrefixResult",
    "RawOddCutDual",
    "brute_force_min_matching",
    "check_prefix_matching_criterion",
    "dual_from_dict",
    "dual_to_dict",
    "matching_lp",
    "odd_cut_dual_lp",
    "odd_cuts",
    "pairs_from_dict",
    "pairs_to_dict",
    "solve_dual_lp",
    "solve_matching_lp",
    "uncross_to_laminar",
    "verify_dual_certificate",
]

MAX_VERTICES = 12
ZERO = Fraction(0)

VertexSet = frozenset


@dataclass(frozen=True)
class MatchingInstance:
    space: FiniteMetricSpace
    vertices: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if len(set(self.vertices)) != len(self.vertices):
            raise DuplicatePoint("matching instance lists a vertex twice")
        for v in self.vertices:
            if v not in self.space:
                raise UnknownLabel(f"vertex {v!r} is not a point of the space")
        if len(self.vertices) < 2 or len(self.vertices) % 2:
            raise InvalidInstance(
                f"need an even number (>= 2) of vertices, got {len(self.vertices)}")

    @classmethod
    def from_pairs(cls, space, pairs: Sequence[tuple[str, str]]) -> "MatchingInstance":
        return cls(space, tuple(p for pair in pairs for p in pair))

    @property
    def n(self) -> int:
        return len(self.vertices) // 2

    def w(self, u: str, v: str) -> Fraction:
        return self.space.d(u, v)

    def edges(self) -> list[tuple[str, str]]:
        return list(combinations(self.vertices, 2))

    def canonical(self, side: Iterable[str]) -> VertexSet:
        """Canonical representative of the cut with the given side."""
        s = frozenset(side)
        other = frozenset(self.vertices) - s
        if len(s) < len(other):
            return s
        if len(s) > len(other):
            return other
        return s if self.vertices[0] in s else other

    def sort_key(self, s: VertexSet):
        pos = {v: i for i, v in enumerate(self.vertices)}
        return (len(s), sorted(pos[v] for v in s))

    def ordered(self, s: VertexSet) -> list[str]:
        return [v for v in self.vertices if v in s]


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[str, str], ...]

    def weight(self, space: FiniteMetricSpace) -> Fraction:
        return sum((space.d(u, v) for u, v in self.pairs), ZERO)

    def is_perfect_on(self, vertices: Iterable[str]) -> bool:
        covered = [p for pair in self.pairs for p in pair]
        return len(covered) == len(set(covered)) and set(covered) == set(vertices)

    def edge_set(self) -> set[frozenset]:
        return {frozenset(p) for p in self.pairs}


@dataclass
class RawOddCutDual:
    """Nonzero odd-cut weights keyed by canonical side."""

    weights: dict[VertexSet, Fraction]

    @property
    def objective(self) -> Fraction:
        return sum(self.weights.values(), ZERO)


@dataclass
class LaminarDual:
    family: tuple[VertexSet, ...]
    weights: dict[VertexSet, Fraction]

    def y(self, s: VertexSet) -> Fraction:
        return self.weights.get(s, ZERO)

    @property
    def objective(self) -> Fraction:
        return sum((self.weights.get(s, ZERO) for s in self.family), ZERO)

    def with_weight(self, s: VertexSet, value) -> "LaminarDual":
        w = dict(self.weights)
        w[s] = as_rational(value)
        return LaminarDual(self.family, w)


def _check_size(inst: MatchingInstance) -> None:
    if len(inst.vertices) > MAX_VERTICES:
        raise TooLarge(f"{len(inst.vertices)} vertices exceeds the cap of {MAX_VERTICES}")


# ---------------------------------------------------------------------------
# brute force


def _matchings(vs: tuple[str, ...]) -> Iterator[list[tuple[str, str]]]:
    if not vs:
        yield []
        return
    first = vs[0]
    for k in range(1, len(vs)):
        rest = vs[1:k] + vs[k + 1:]
        for tail in _matchings(rest):
            yield [(first, vs[k])] + tail


def brute_force_min_matching(inst: MatchingInstance) -> tuple[Matching, Fraction]:
    """Enumerate all perfect matchings; the first minimum in enumeration order wins.

    Enumeration pairs the earliest unmatched vertex with each later vertex in
    instance order, so ties go to the lexicographically smallest pair list.
    """
    _check_size(inst)
    d = inst.space.d
    best, best_w = None, None
    for m in _matchings(inst.vertices):
        w = sum((d(u, v) for u, v in m), ZERO)
        if best_w is None or w < best_w:
            best, best_w = m, w
    return Matching(tuple(best)), best_w


# ---------------------------------------------------------------------------
# the two linear programs


def odd_cuts(inst: MatchingInstance) -> list[VertexSet]:
    """Canonical sides of all odd cuts, singletons first."""
    n = inst.n
    out = []
    for size in range(1, n + 1, 2):
        for combo in combinations(inst.vertices, size):
            s = frozenset(combo)
            if size == n and inst.vertices[0] not in s:
                continue
            out.append(s)
    return out


def _crosses(s: VertexSet, u: str, v: str) -> bool:
    return (u in s) != (v in s)


def matching_lp(inst: MatchingInstance) -> tuple[LinearProgram, list[tuple[str, str]], list[VertexSet]]:
    """(LP1): minimize w.x with x(trivial cut) = 1, x(other odd cut) >= 1, x >= 0."""
    _check_size(inst)
    edges = inst.edges()
    cuts = odd_cuts(inst)
    rows = []
    one = Fraction(1)
    for s in cuts:
        coeffs = tuple(one if _crosses(s, u, v) else ZERO for u, v in edges)
        rows.append(Constraint(coeffs, EQ if len(s) == 1 else GE, one))
    cost = [inst.w(u, v) for u, v in edges]
    return LinearProgram("min", cost, rows), edges, cuts


def odd_cut_dual_lp(inst: MatchingInstance) -> tuple[LinearProgram, list[tuple[str, str]], list[VertexSet]]:
    """(LP2) with every y_C >= 0: maximize sum y subject to edge capacities."""
    _check_size(inst)
    edges = inst.edges()
    cuts = odd_cuts(inst)
    one = Fraction(1)
    rows = []
    for u, v in edges:
        coeffs = tuple(one if _crosses(s, u, v) else ZERO for s in cuts)
        rows.append(Constraint(coeffs, LE, inst.w(u, v)))
    return LinearProgram("max", [one] * len(cuts), rows), edges, cuts


def solve_matching_lp(inst: MatchingInstance, *, with_outcome: bool = False):
    """Solve (LP1) and decode its integral optimal vertex into a matching."""
    lp, edges, _ = matching_lp(inst)
    out = solve_lp(lp)
    if out.status != "optimal":  # pragma: no cover - LP1 of a complete graph is feasible
        raise RuntimeError(f"matching LP unexpectedly {out.status}")
    pairs = []
    for (u, v), x in zip(edges, out.primal):
        if x.denominator != 1 or x not in (0, 1):
            raise RuntimeError(f"non-integral LP1 vertex: x({u}{v}) = {x}")
        if x == 1:
            pairs.append((u, v))
    m = Matching(tuple(pairs))
    if not m.is_perfect_on(inst.vertices):  # pragma: no cover
        raise RuntimeError("LP1 vertex is not a perfect matching")
    result = (m, out.objective)
    return result + (out, lp) if with_outcome else result


def solve_dual_lp(inst: MatchingInstance, *, with_outcome: bool = False):
    """Solve (LP2) with nonnegative weights on every odd cut."""
    lp, _, cuts = odd_cut_dual_lp(inst)
    out = solve_lp(lp)
    if out.status != "optimal":  # pragma: no cover
        raise RuntimeError(f"odd-cut dual LP unexpectedly {out.status}")
    raw = RawOddCutDual({s: y for s, y in zip(cuts, out.primal) if y})
    return (raw, out, lp) if with_outcome else raw


# ---------------------------------------------------------------------------
# uncrossing


def _cross(a: VertexSet, b: VertexSet) -> bool:
    return bool(a & b) and not a <= b and not b <= a


def _potential(inst: MatchingInstance, weights: dict[VertexSet, Fraction]) -> Fraction:
    total = len(inst.vertices)
    return sum((y * len(s) * (total - len(s)) for s, y in weights.items()), ZERO)


def uncross_to_laminar(inst: MatchingInstance, matching: Matching, raw: RawOddCutDual,
                       *, max_steps: int = 100_000) -> LaminarDual:
    """Turn an optimal odd-cut dual into a laminar one with the same total.

    Two crossing positive sets ``D, T`` give up ``eps = min(y_D, y_T)`` to
    ``D & T, D | T`` when those are odd, and to ``D - T, T - D`` otherwise.
    Both moves keep every edge load from increasing and strictly decrease
    ``sum_C y_C |C| (|V| - |C|)``, which is the same for a set and its
    complement.
    """
    weights: dict[VertexSet, Fraction] = {}
    for s, y in raw.weights.items():
        if y < 0:
            raise UncrossingFailed(f"negative weight {y} on {sorted(s)}")
        if y:
            c = inst.canonical(s)
            weights[c] = weights.get(c, ZERO) + y
    key = inst.sort_key
    pot = _potential(inst, weights)
    for _ in range(max_steps):
        big = sorted((s for s in weights if len(s) > 1), key=key)
        pair = next(((a, b) for i, a in enumerate(big) for b in big[i + 1:] if _cross(a, b)), None)
        if pair is None:
            break
        a, b = pair
        inter = a & b
        new = (inter, a | b) if len(inter) % 2 else (a - b, b - a)
        eps = min(weights[a], weights[b])
        for s in (a, b):
            weights[s] -= eps
            if not weights[s]:
                del weights[s]
        for s in new:
            c = inst.canonical(s)
            weights[c] = weights.get(c, ZERO) + eps
        new_pot = _potential(inst, weights)
        if new_pot >= pot:
            raise UncrossingFailed("uncrossing potential failed to decrease")
        pot = new_pot
    else:
        raise UncrossingFailed(f"no laminar family after {max_steps} steps")

    singles = [frozenset([v]) for v in inst.vertices]
    members = set(singles) | {s for s, y in weights.items() if y > 0}
    family = tuple(sorted(members, key=key))
    out = LaminarDual(family, {s: weights.get(s, ZERO) for s in family})
    report = verify_dual_certificate(inst, matching, out)
    if not report.ok:
        raise UncrossingFailed("uncrossed dual fails its certificate: "
                               + "; ".join(v["detail"] for v in report.violations))
    return out


# ---------------------------------------------------------------------------
# certificate


@dataclass
class DualCertificateReport:
    ok: bool
    violations: list[dict] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def checks_failed(self) -> set[str]:
        return {v["check"] for v in self.violations}


def verify_dual_certificate(inst: MatchingInstance, matching: Matching,
                            dual: LaminarDual, *,
                            check_cardinality: bool = True) -> DualCertificateReport:
    """Check that ``dual`` is an optimal laminar dual certifying ``matching``.

    Check names: ``matching``, ``D2`` (edge feasibility), ``objective``,
    ``tight`` (matched edges), ``odd-cut`` (one matched edge across each
    positive non-singleton), ``P-1``, ``P-2``, ``P-3``, ``cardinality``,
    ``nonnegative``, ``membership``. ``check_cardinality=False`` drops only
    the size normalisation (members of at most ``n`` vertices, at most one of
    exactly ``n``), which the t-function construction does not rely on.
    """
    bad: list[dict] = []

    def fail(check, detail, witness=None):
        bad.append({"check": check, "detail": detail, "witness": witness})

    vset = frozenset(inst.vertices)
    n = inst.n
    if not matching.is_perfect_on(inst.vertices):
        fail("matching", "pairs do not form a perfect matching of the instance")

    fam = list(dict.fromkeys(dual.family))
    for s in fam:
        if not s or not s <= vset:
            fail("membership", f"member {sorted(s)} is not a nonempty subset of the vertices",
                 sorted(s))
        elif len(s) % 2 == 0:
            fail("membership", f"member {inst.ordered(s)} has even size", inst.ordered(s))
    for s in dual.weights:
        if s not in fam and dual.weights[s]:
            fail("membership", f"weight on non-member {sorted(s)}", sorted(s))
    for s in fam:
        y = dual.y(s)
        if y < 0:
            fail("nonnegative", f"y{inst.ordered(s)} = {y} < 0", inst.ordered(s))
    for v in inst.vertices:
        if frozenset([v]) not in fam:
            fail("P-2", f"singleton {{{v}}} missing", [v])
    for i, a in enumerate(fam):
        for b in fam[i + 1:]:
            if _cross(a, b):
                fail("P-1", f"{inst.ordered(a)} and {inst.ordered(b)} cross",
                     [inst.ordered(a), inst.ordered(b)])
    for s in fam:
        if len(s) > 1 and dual.y(s) <= 0:
            fail("P-3", f"non-singleton {inst.ordered(s)} has weight {dual.y(s)}",
                 inst.ordered(s))
    # for n = 1 both singletons have size n; the rule concerns larger members
    size_n = [s for s in fam if len(s) == n > 1] if check_cardinality else []
    for s in fam if check_cardinality else ():
        if len(s) > n:
            fail("cardinality", f"{inst.ordered(s)} has more than {n} vertices",
                 inst.ordered(s))
    if len(size_n) > 1:
        fail("cardinality", f"{len(size_n)} members have exactly {n} vertices",
             [inst.ordered(s) for s in size_n])

    def load(u, v):
        return sum((dual.y(s) for s in fam if _crosses(s, u, v)), ZERO)

    for u, v in inst.edges():
        ld = load(u, v)
        if ld > inst.w(u, v):
            fail("D2", f"edge {u}{v}: load {ld} > weight {inst.w(u, v)}", [u, v])
    total = dual.objective
    mw = matching.weight(inst.space)
    if total != mw:
        fail("objective", f"sum of weights {total} != matching weight {mw}")
    for u, v in matching.pairs:
        ld = load(u, v)
        if ld != inst.w(u, v):
            fail("tight", f"matched edge {u}{v}: load {ld} != weight {inst.w(u, v)}", [u, v])
    for s in fam:
        if len(s) > 1 and dual.y(s) > 0:
            k = sum(1 for u, v in matching.pairs if _crosses(s, u, v))
            if k != 1:
                fail("odd-cut", f"{k} matched edges cross {inst.ordered(s)}", inst.ordered(s))
    return DualCertificateReport(not bad, bad)


# ---------------------------------------------------------------------------
# prefix criterion


@dataclass(frozen=True)
class PrefixResult:
    passed: bool
    failing_prefix: Optional[int] = None
    prefix_weight: Optional[Fraction] = None
    optimum: Optional[Fraction] = None


def check_prefix_matching_criterion(space: FiniteMetricSpace,
                                    pairs: Sequence[tuple[str, str]],
                                    n: Optional[int] = None) -> PrefixResult:
    """Test that every initial segment of ``pairs`` is a minimum perfect matching."""
    n = len(pairs) if n is None else n
    if n > len(pairs):
        raise InvalidInstance(f"asked for {n} pairs but only {len(pairs)} given")
    pts = [p for pair in pairs[:n] for p in pair]
    if len(set(pts)) != len(pts):
        raise DuplicatePoint("pairs repeat a point")
    for k in range(1, n + 1):
        prefix = list(pairs[:k])
        inst = MatchingInstance.from_pairs(space, prefix)
        if k == 1:
            continue
        weight = Matching(tuple(prefix)).weight(space)
        _, opt = brute_force_min_matching(inst)
        if weight > opt:
            return PrefixResult(False, k, weight, opt)
    return PrefixResult(True)


# ---------------------------------------------------------------------------
# JSON


def _key(inst_order: Sequence[str], s: VertexSet) -> str:
    return ",".join(v for v in inst_order if v in s)


def dual_to_dict(inst: MatchingInstance, dual: LaminarDual) -> dict:
    """``{"family": [[...]], "weights": {"a1,a2,a3": "9/2"}, "objective": ...}``.

    Weight keys are the member's labels in instance order joined by commas.
    """
    return {
        "family": [inst.ordered(s) for s in dual.family],
        "weights": {_key(inst.vertices, s): str(dual.y(s)) for s in dual.family},
        "objective": str(dual.objective),
    }


def dual_from_dict(inst: MatchingInstance, obj) -> LaminarDual:
    if not isinstance(obj, dict) or not isinstance(obj.get("family"), list):
        raise SpaceSyntaxError('expected a dual object with a "family" list')
    raw_w = obj.get("weights", {})
    if not isinstance(raw_w, dict):
        raise SpaceSyntaxError('"weights" must be an object')
    family = []
    weights = {}
    for member in obj["family"]:
        if not isinstance(member, list):
            raise SpaceSyntaxError("family members must be arrays of labels")
        for v in member:
            if v not in inst.vertices:
                raise UnknownLabel(f"dual member mentions {v!r}, not a matched vertex")
        s = frozenset(member)
        family.append(s)
        weights[s] = as_rational(raw_w.get(_key(inst.vertices, s), 0))
    return LaminarDual(tuple(family), weights)


def dual_dumps(inst: MatchingInstance, dual: LaminarDual) -> str:
    return json.dumps(dual_to_dict(inst, dual), indent=2)


def pairs_to_dict(pairs: Sequence[tuple[str, str]]) -> dict:
    return {"pairs": [list(p) for p in pairs]}


def pairs_from_dict(obj) -> list[tuple[str, str]]:
    """Read ``{"pairs": [["a1", "a2"], ...]}``; labels are checked later, against a space."""
    if not isinstance(obj, dict) or not isinstance(obj.get("pairs"), list):
        raise SpaceSyntaxError('expected an object with a "pairs" list')
    out = []
    for p in obj["pairs"]:
        if not (isinstance(p, list) and len(p) == 2 and all(isinstance(v, str) for v in p)):
            raise SpaceSyntaxError(f"each pair must be two labels, got {p!r}")
        out.append((p[0], p[1]))
    return out
