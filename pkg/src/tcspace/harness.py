"""Random instances, brute-force oracles and the end-to-end property suite."""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from math import isqrt
from typing import Optional

from .errors import InvalidSpec, TCSpaceError, TooLarge
from .matching import (
    Matching,
    MatchingInstance,
    brute_force_min_matching,
    check_prefix_matching_criterion,
    dual_to_dict,
    verify_dual_certificate,
)
from .metric import FiniteMetricSpace, space_to_dict, validate_metric
from .projection import CHECKS, build_projection, certify_projection
from .transport import TransportationProblem

__all__ = [
    "GeneratorSpec",
    "TrialReport",
    "gen_greedy_pair_sequence",
    "gen_random_pair_sequence",
    "gen_random_metric",
    "oracle_tc_norm_integer",
    "run_property_suite",
]

KINDS = ("euclidean-rounded", "tree-metric", "graph-shortest-path", "clustered")
ZERO = Fraction(0)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    size: int
    seed: int = 0
    denominator_bound: int = 4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown generator kind {self.kind!r}; pick one of {KINDS}")
        if self.size < 2:
            raise InvalidSpec("size must be at least 2")
        if self.denominator_bound < 1:
            raise InvalidSpec("denominator_bound must be >= 1")


def _rat(rng: random.Random, lo: int, hi: int, bound: int) -> Fraction:
    den = rng.randint(1, bound)
    return Fraction(rng.randint(lo * den, hi * den), den)


def _closure(m: int, w: list[list[Optional[Fraction]]]) -> list[list[Fraction]]:
    """Shortest-path metric of a positively weighted connected graph."""
    d = [row[:] for row in w]
    for k in range(m):
        dk = d[k]
        for i in range(m):
            dik = d[i][k]
            if dik is None:
                continue
            di = d[i]
            for j in range(m):
                if dk[j] is not None and (di[j] is None or dik + dk[j] < di[j]):
                    di[j] = dik + dk[j]
    return d


def _ceil_sqrt_rational(sq: Fraction, q: int) -> Fraction:
    """Smallest multiple of ``1/q`` that is >= sqrt(sq)."""
    # need least k with k^2 >= sq * q^2
    target = sq * q * q
    k = isqrt(target.numerator // target.denominator)
    while Fraction(k * k) < target:
        k += 1
    while k > 0 and Fraction((k - 1) ** 2) >= target:
        k -= 1
    return Fraction(k, q)


def gen_random_metric(spec: GeneratorSpec) -> FiniteMetricSpace:
    """A validated random space, fully determined by ``spec``."""
    rng = random.Random(f"tcspace:{spec.kind}:{spec.size}:{spec.seed}:{spec.denominator_bound}")
    m, q = spec.size, spec.denominator_bound
    labels = [f"p{i}" for i in range(m)]

    if spec.kind == "euclidean-rounded":
        coords: set[tuple[Fraction, Fraction]] = set()
        while len(coords) < m:
            coords.add((_rat(rng, 0, 10, q), _rat(rng, 0, 10, q)))
        pts = sorted(coords)
        rng.shuffle(pts)
        # rounding up keeps the triangle inequality since ceil is subadditive
        table = [[_ceil_sqrt_rational((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2, q)
                  for b in pts] for a in pts]

    elif spec.kind == "tree-metric":
        parent_w = [(None, None)] + [(rng.randrange(i), _rat(rng, 1, 10, q)) for i in range(1, m)]
        table = [[ZERO] * m for _ in range(m)]
        for i in range(1, m):
            p, wt = parent_w[i]
            for j in range(i):
                table[i][j] = table[j][i] = table[p][j] + wt if j != p else wt
        # j < i and p < i, so table[p][j] is already final

    elif spec.kind == "graph-shortest-path":
        w: list[list[Optional[Fraction]]] = [[None] * m for _ in range(m)]
        for i in range(m):
            w[i][i] = ZERO
        for i in range(1, m):
            j = rng.randrange(i)
            w[i][j] = w[j][i] = _rat(rng, 1, 10, q)
        for i, j in combinations(range(m), 2):
            if w[i][j] is None and rng.random() < 0.3:
                w[i][j] = w[j][i] = _rat(rng, 1, 10, q)
        table = _closure(m, w)

    else:  # clustered
        k = max(2, m // 3)
        cluster = [i % k for i in range(m)]
        rng.shuffle(cluster)
        w = [[ZERO if i == j else
              (_rat(rng, 1, 2, q) if cluster[i] == cluster[j] else _rat(rng, 10, 14, q))
              for j in range(m)] for i in range(m)]
        for i in range(m):
            for j in range(i):
                w[i][j] = w[j][i]
        table = _closure(m, w)

    return validate_metric(labels, table)


def gen_greedy_pair_sequence(space: FiniteMetricSpace, n: int, *,
                             node_cap: int = 10_000) -> Optional[list[tuple[str, str]]]:
    """Extend a pair sequence closest-pair-first, backtracking on failure.

    Every accepted prefix is a minimum perfect matching on its points. Returns
    None if no sequence of length ``n`` turns up within ``node_cap`` nodes.
    """
    if 2 * n > len(space):
        return None
    pts = space.points
    by_dist = sorted(combinations(range(len(pts)), 2),
                     key=lambda ij: (space.dist[ij[0]][ij[1]], ij))
    nodes = 0
    chosen: list[tuple[str, str]] = []
    used: set[int] = set()

    def extend() -> bool:
        nonlocal nodes
        if len(chosen) == n:
            return True
        for i, j in by_dist:
            if i in used or j in used:
                continue
            nodes += 1
            if nodes > node_cap:
                return False
            chosen.append((pts[i], pts[j]))
            inst = MatchingInstance.from_pairs(space, chosen)
            if Matching(tuple(chosen)).weight(space) == brute_force_min_matching(inst)[1]:
                used.update((i, j))
                if extend():
                    return True
                used.difference_update((i, j))
            chosen.pop()
            if nodes > node_cap:
                return False
        return False

    return list(chosen) if extend() else None


def gen_random_pair_sequence(space: FiniteMetricSpace, n: int, *, seed: int = 0,
                             tries: int = 200) -> Optional[list[tuple[str, str]]]:
    """Draw disjoint pairs uniformly until a sequence passes the prefix criterion.

    Unlike the greedy search this often yields sequences whose later pairs
    are long, which is what makes non-singleton dual members appear.
    """
    if 2 * n > len(space):
        return None
    rng = random.Random(f"pairs:{seed}")
    pts = list(space.points)
    for _ in range(tries):
        sel = rng.sample(pts, 2 * n)
        pairs = [(sel[2 * i], sel[2 * i + 1]) for i in range(n)]
        if check_prefix_matching_criterion(space, pairs).passed:
            return pairs
    return None


def oracle_tc_norm_integer(space: FiniteMetricSpace, f: TransportationProblem,
                           *, max_grains: int = 8) -> Fraction:
    """Transport cost by splitting integer masses into unit grains.

    The cheapest assignment of source grains to sink grains is found by a
    dynamic program over subsets of sink grains; no LP is involved.
    """
    src, dst = [], []
    for p, v in f.masses.items():
        if v.denominator != 1:
            raise ValueError(f"mass at {p!r} is not an integer")
        (src if v > 0 else dst).extend([p] * abs(int(v)))
    if len(src) != len(dst):
        raise ValueError("problem does not sum to zero")
    if len(src) > max_grains:
        raise TooLarge(f"{len(src)} grains exceed the cap of {max_grains}")
    k = len(src)
    cost = [[space.d(a, b) for b in dst] for a in src]
    best: dict[int, Fraction] = {0: ZERO}
    for mask in range(1 << k):
        if mask not in best:
            continue
        a = bin(mask).count("1")
        if a == k:
            continue
        base = best[mask]
        for b in range(k):
            if not mask >> b & 1:
                nm = mask | 1 << b
                c = base + cost[a][b]
                if nm not in best or c < best[nm]:
                    best[nm] = c
    return best[(1 << k) - 1]


# ---------------------------------------------------------------------------
# property suite


@dataclass
class TrialReport:
    spec: dict
    trials: int
    completed: int = 0
    skipped: int = 0
    passes: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    counterexample: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


SUITE_PROPERTIES = ("prefix_criterion", "dual_certificate") + CHECKS


def run_property_suite(spec: GeneratorSpec, trials: int, *, n_pairs: Optional[int] = None,
                       fault: Optional[str] = None, battery: int = 20,
                       samples: int = 5) -> TrialReport:
    """Generate, pick pairs, build the projection and certify it, per trial.

    Trial ``t`` uses seed ``spec.seed * 1_000_003 + t`` so single trials can
    be replayed. ``fault="perturb-dual"`` raises the weight of the first
    singleton by 1 before building, which every honest certificate must catch.
    """
    if fault not in (None, "perturb-dual"):
        raise InvalidSpec(f"unknown fault mode {fault!r}")
    report = TrialReport(
        spec={**asdict(spec), "n_pairs": n_pairs, "fault": fault,
              "battery": battery, "samples": samples},
        trials=trials,
        passes={p: 0 for p in SUITE_PROPERTIES},
        failures={p: 0 for p in SUITE_PROPERTIES + ("exception",)},
    )
    for t in range(trials):
        sub = GeneratorSpec(spec.kind, spec.size, spec.seed * 1_000_003 + t,
                            spec.denominator_bound)
        space = gen_random_metric(sub)
        rng = random.Random(f"pairs:{sub.seed}")
        n = n_pairs if n_pairs is not None else rng.randint(1, max(1, min(4, spec.size // 2)))
        pairs = gen_greedy_pair_sequence(space, n)
        if pairs is None:
            report.skipped += 1
            continue
        failed: list[str] = []
        detail: dict = {}
        dual = None
        try:
            crit = check_prefix_matching_criterion(space, pairs)
            failed += [] if crit.passed else ["prefix_criterion"]
            P = build_projection(space, pairs)
            dual = P.structure.dual
            inst = P.structure.instance
            if fault == "perturb-dual":
                x1 = frozenset([pairs[0][0]])
                dual = dual.with_weight(x1, dual.y(x1) + 1)
                P = build_projection(space, pairs, dual, check_dual=False)
            dcert = verify_dual_certificate(inst, Matching(tuple(pairs)), dual)
            if not dcert.ok:
                failed.append("dual_certificate")
                detail["dual_certificate"] = dcert.violations
            cert = certify_projection(P, battery=battery, samples=samples, seed=sub.seed)
            for name, res in cert.checks.items():
                if not res["passed"]:
                    failed.append(name)
                    detail[name] = res["witness"]
        except TCSpaceError as exc:
            failed.append("exception")
            detail["exception"] = f"{type(exc).__name__}: {exc}"
        report.completed += 1
        if "exception" in failed:
            report.failures["exception"] += 1
        else:
            for p in SUITE_PROPERTIES:
                if p in failed:
                    report.failures[p] += 1
                else:
                    report.passes[p] += 1
        if failed and report.counterexample is None:
            report.counterexample = {
                "trial": t,
                "seed": sub.seed,
                "space": space_to_dict(space),
                "pairs": [list(p) for p in pairs],
                "dual": None if dual is None else dual_to_dict(
                    MatchingInstance.from_pairs(space, pairs), dual),
                "failed": failed,
                "detail": _plain(detail),
            }
    return report


def _plain(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj
