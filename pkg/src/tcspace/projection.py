"""Norm-one projections onto the span of matched-pair molecules.

Given pairs ``(x_1, y_1), ..., (x_n, y_n)`` forming a minimum-weight perfect
matching on their own points, and a laminar optimal odd-cut dual for it, this
module builds 1-Lipschitz functions ``t_1, ..., t_n`` on the whole space with
``<t_i, m_j> = delta_ij`` for the molecules ``m_j = (1_{y_j} - 1_{x_j}) / d_j``,
and the projection ``P(f) = sum_i <t_i, f> m_i``.

Notation used throughout, for a member ``H`` of the laminar family:

* ``inner(v, H)``: total weight of members ``D`` with ``v in D`` strictly inside ``H``;
* ``gap(H, x) = min_{v in H} max(d(x, v) - inner(v, H), 0)``;
* ``r(lam, theta, H, x) = lam + theta * gap(H, x)``;
* ``s(lam, theta, H, x) = lam + theta * min(gap(H, x), y_H)``;
* ``U_H``: points within ``inner(v, H) + y_H`` of some ``v in H``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    CaseUnresolvable,
    InvalidInstance,
    NotAMember,
    NotAMinimumMatching,
    NotZeroSum,
    WellDefinednessViolation,
)
from .matching import (
    LaminarDual,
    Matching,
    MatchingInstance,
    brute_force_min_matching,
    dual_to_dict,
    solve_dual_lp,
    uncross_to_laminar,
    verify_dual_certificate,
)
from .metric import FiniteMetricSpace, as_rational
from .transport import (
    LipschitzFunction,
    Molecule,
    TransportationProblem,
    pairing,
    tc_norm,
)

__all__ = [
    "DFDecomposition",
    "DualStructure",
    "ProjectionCertificate",
    "ProjectionOperator",
    "SpanElement",
    "apply_projection",
    "build_chains",
    "build_projection",
    "certify_projection",
    "df_bookkeeping",
    "eval_r",
    "eval_s",
    "eval_t",
    "eval_t_DF",
    "eval_t_via_s",
    "guard_conflict",
    "pair_decomposition",
    "projection_to_dict",
    "realize",
    "uf_membership",
    "ball_radius",
]

ZERO = Fraction(0)
Member = frozenset


class DualStructure:
    """A matched pair sequence together with a laminar dual and its chains.

    Construction only requires the family to contain the singletons of the
    matched points and to be laminar; whether the dual is optimal is left to
    :func:`verify_dual_certificate` so that deliberately broken duals can be
    fed to the certificate machinery.
    """

    def __init__(self, space: FiniteMetricSpace, pairs: Sequence[tuple[str, str]],
                 dual: LaminarDual):
        self.space = space
        self.pairs = [tuple(p) for p in pairs]
        self.instance = MatchingInstance.from_pairs(space, self.pairs)
        self.dual = dual
        inst = self.instance
        self.family: list[Member] = sorted(dict.fromkeys(dual.family), key=inst.sort_key)
        fam = set(self.family)
        for v in inst.vertices:
            if frozenset([v]) not in fam:
                raise InvalidInstance(f"dual family lacks the singleton {{{v}}}")
        for i, a in enumerate(self.family):
            if not a <= frozenset(inst.vertices):
                raise InvalidInstance(f"member {sorted(a)} leaves the matched points")
            for b in self.family[i + 1:]:
                if a & b and not a <= b and not b <= a:
                    raise InvalidInstance(f"members {sorted(a)} and {sorted(b)} cross")
        self.y = {h: dual.y(h) for h in self.family}
        self._inner = {
            h: {v: sum((self.y[D] for D in self.family if v in D and D < h), ZERO) for v in h}
            for h in self.family
        }
        self._gap: dict[tuple[Member, str], Fraction] = {}
        self.d_chain: list[list[Member]] = []
        self.f_chain: list[list[Member]] = []
        for i in range(len(self.pairs)):
            dc, fc = _scan_chains(self.family, *self.pairs[i])
            self.d_chain.append(dc)
            self.f_chain.append(fc)
        self.thresholds = [sum((self.y[D] for D in dc), ZERO) for dc in self.d_chain]

    @property
    def n(self) -> int:
        return len(self.pairs)

    def member(self, h) -> Member:
        h = frozenset(h)
        if h not in self.y:
            raise NotAMember(f"{sorted(h)} is not in the laminar family")
        return h

    def inner(self, v: str, h: Member) -> Fraction:
        return self._inner[h][v]

    def gap(self, h: Member, x: str) -> Fraction:
        key = (h, x)
        g = self._gap.get(key)
        if g is None:
            d = self.space.d
            g = min(max(d(x, v) - self._inner[h][v], ZERO) for v in h)
            self._gap[key] = g
        return g

    def certificate(self, *, check_cardinality: bool = True):
        matching = Matching(tuple(self.pairs))
        return verify_dual_certificate(self.instance, matching, self.dual,
                                       check_cardinality=check_cardinality)


def _scan_chains(family: list[Member], x: str, y: str) -> tuple[list[Member], list[Member]]:
    dc = sorted((h for h in family if x in h and y not in h), key=len)
    fc = sorted((h for h in family if y in h and x not in h), key=len)
    for chain in (dc, fc):
        for a, b in zip(chain, chain[1:]):
            if not a < b:  # pragma: no cover - guaranteed by laminarity
                raise InvalidInstance("chain is not strictly increasing")
    return dc, fc


def build_chains(ds: DualStructure, i: int) -> tuple[list[Member], list[Member]]:
    """Members containing ``x_i`` but not ``y_i`` (and vice versa), smallest first.

    Every such member contains ``x_i`` so laminarity makes them a chain, and
    taking all of them makes it maximal.
    """
    return list(ds.d_chain[i]), list(ds.f_chain[i])


# ---------------------------------------------------------------------------
# U_F sets and the r, s building blocks


def ball_radius(ds: DualStructure, v: str, F) -> Fraction:
    F = ds.member(F)
    if v not in F:
        raise NotAMember(f"{v!r} is not in {sorted(F)}")
    return sum((ds.y[D] for D in ds.family if v in D and D <= F), ZERO)


def uf_membership(ds: DualStructure, F, x: str) -> bool:
    F = ds.member(F)
    return any(ds.space.d(x, v) <= ball_radius(ds, v, F) for v in F)


def eval_r(ds: DualStructure, lam, theta: int, H, x: str) -> Fraction:
    H = ds.member(H)
    return as_rational(lam) + theta * ds.gap(H, x)


def eval_s(ds: DualStructure, lam, theta: int, H, x: str) -> Fraction:
    H = ds.member(H)
    return as_rational(lam) + theta * min(ds.gap(H, x), ds.y[H])


# ---------------------------------------------------------------------------
# t functions


def _l_and_h(ds: DualStructure, i: int, x: str) -> tuple[Fraction, Fraction, Fraction]:
    T = ds.thresholds[i]
    lam = ZERO
    lo = None
    for D in ds.d_chain[i]:
        v = lam + ds.gap(D, x)
        lo = v if lo is None else min(lo, v)
        lam += ds.y[D]
    hi = None
    lam = T
    for F in reversed(ds.f_chain[i]):
        lam += ds.y[F]
        v = lam - ds.gap(F, x)
        hi = v if hi is None else max(hi, v)
    return lo, hi, T


def guard_conflict(ds: DualStructure, i: int, x: str) -> bool:
    """True when both the ``l < T`` and ``h > T`` guards hold at ``x``."""
    lo, hi, T = _l_and_h(ds, i, x)
    return lo < T and hi > T


def eval_t(ds: DualStructure, i: int, x: str, *, strict: bool = True) -> Fraction:
    """``l`` below the threshold, else ``h`` above it, else the threshold.

    When both guards hold the definition is ambiguous; ``strict`` raises,
    otherwise ``l`` wins and the conflict is left for the certificate.
    """
    lo, hi, T = _l_and_h(ds, i, x)
    if lo < T:
        if strict and hi > T:
            raise WellDefinednessViolation(
                f"t_{i + 1} at {x!r}: l = {lo} < {T} < {hi} = h")
        return lo
    if hi > T:
        return hi
    return T


def eval_t_via_s(ds: DualStructure, i: int, x: str) -> Fraction:
    total = ZERO
    for D in ds.d_chain[i]:
        total += min(ds.gap(D, x), ds.y[D])
    for F in ds.f_chain[i]:
        total += ds.y[F] - min(ds.gap(F, x), ds.y[F])
    return total


def t_table(ds: DualStructure, i: int, *, strict: bool = True) -> LipschitzFunction:
    return LipschitzFunction({x: eval_t(ds, i, x, strict=strict) for x in ds.space.points})


# ---------------------------------------------------------------------------
# diagnostic functions t_{D,F} for a pair of points


@dataclass(frozen=True)
class DFDecomposition:
    """Which case a point pair falls in, and the resulting s-sum.

    ``w`` and ``z`` are already swapped into the orientation where ``D``
    belongs to ``w``. ``summands`` are ``(lam, theta, H)`` triples.
    """

    case: str
    w: str
    z: str
    swapped: bool
    D: Optional[Member]
    F: Optional[Member]
    summands: tuple[tuple[Fraction, int, Member], ...]


def _smallest_u(ds: DualStructure, x: str) -> Optional[Member]:
    for h in ds.family:  # sorted by size, then position
        if ds.gap(h, x) <= ds.y[h]:
            return h
    return None


def _classify(ds, D, F):
    if D is None and F is None:
        return "e", False
    if F is None:
        return "d", False
    if D is None:
        return "d", True
    if D == F:
        return "c", False
    if D < F:
        return "b", False
    if F < D:
        return "b", True
    if not D & F:
        return "a", False
    raise CaseUnresolvable(f"{sorted(D)} and {sorted(F)} cross")


def _saturated_chain(ds: DualStructure, base: Member, point: str) -> list[Member]:
    """Members ``J ⊇ base`` whose s-term is already at its outer value at ``point``.

    This is ``point`` outside ``U_J`` except that the boundary sphere counts as
    outside too; with zero-weight singletons points do land on it. Along the
    chain above ``base`` the condition holds on a prefix.
    """
    return [h for h in ds.family if base <= h and ds.gap(h, point) >= ds.y[h]]


def pair_decomposition(ds: DualStructure, w: str, z: str) -> DFDecomposition:
    D, F = _smallest_u(ds, w), _smallest_u(ds, z)
    case, swapped = _classify(ds, D, F)
    if swapped:
        w, z, D, F = z, w, F, D
    if case == "e":
        summands = ()
    elif case == "c":
        if eval_s(ds, 0, 1, D, z) < eval_s(ds, 0, 1, D, w):
            w, z, swapped = z, w, not swapped
        summands = ((ZERO, 1, D),)
    elif case == "b":
        summands = tuple((ZERO, 1, h) for h in ds.family if D <= h <= F)
    else:
        dc = _saturated_chain(ds, D, z)
        fc = _saturated_chain(ds, F, w) if case == "a" else []
        summands = tuple((ZERO, 1, h) for h in dc) + tuple((ds.y[h], -1, h) for h in fc)
    return DFDecomposition(case, w, z, swapped, D, F, summands)


def eval_t_DF(ds: DualStructure, D, F, x: str, *, w: str, z: str) -> Fraction:
    """Value at ``x`` of the s-sum attached to the pair ``(w, z)``.

    ``D`` and ``F`` must be the smallest members whose U-sets hold ``w`` and
    ``z`` (``None`` where there is none); a mismatch is reported as
    :class:`CaseUnresolvable`.
    """
    dec = pair_decomposition(ds, w, z)
    want = (None if D is None else frozenset(D), None if F is None else frozenset(F))
    got = (dec.F, dec.D) if dec.swapped else (dec.D, dec.F)
    if want != got:
        raise CaseUnresolvable(f"given members do not match the pair ({w}, {z})")
    return sum((eval_s(ds, lam, th, h, x) for lam, th, h in dec.summands), ZERO)


def _t_terms(ds: DualStructure, i: int) -> list[tuple[Fraction, int, Member]]:
    return ([(ZERO, 1, h) for h in ds.d_chain[i]]
            + [(ds.y[h], -1, h) for h in ds.f_chain[i]])


def df_bookkeeping(ds: DualStructure, w: str, z: str) -> dict:
    """Check the accounting behind the inequality ``sum_i |t_i(z) - t_i(w)| <= d(w, z)``.

    Returns a dict of named booleans plus the decomposition:

    * ``located``: every summand's member sits in exactly one pair's chains;
    * ``monotone``: every summand is at least as large at ``z`` as at ``w``;
    * ``others_constant``: every s-term of every ``t_i`` whose member is not a
      summand takes equal values at ``w`` and ``z``;
    * ``lipschitz``: the s-sum is 1-Lipschitz on the whole space;
    * ``bound``: ``sum_i |t_i(z) - t_i(w)| <= t_DF(z) - t_DF(w) <= d(w, z)``.
    """
    dec = pair_decomposition(ds, w, z)
    w, z = dec.w, dec.z
    members = {h for _, _, h in dec.summands}
    owners = {h: [i for i in range(ds.n) if h in ds.d_chain[i] or h in ds.f_chain[i]]
              for h in members}
    located = all(len(v) == 1 for v in owners.values())

    def s_val(term, x):
        lam, th, h = term
        return lam + th * min(ds.gap(h, x), ds.y[h])

    monotone = all(s_val(t, z) >= s_val(t, w) for t in dec.summands)
    others_constant = all(
        s_val(t, z) == s_val(t, w)
        for i in range(ds.n) for t in _t_terms(ds, i) if t[2] not in members)
    table = LipschitzFunction({x: sum((s_val(t, x) for t in dec.summands), ZERO)
                               for x in ds.space.points})
    lipschitz = table.lipschitz_witness(ds.space) is None
    spread = sum((abs(eval_t(ds, i, z) - eval_t(ds, i, w)) for i in range(ds.n)), ZERO)
    rise = table(z) - table(w)
    bound = spread <= rise <= ds.space.d(w, z) if w != z else spread == 0
    return {
        "case": dec.case,
        "decomposition": dec,
        "located": located,
        "monotone": monotone,
        "others_constant": others_constant,
        "lipschitz": lipschitz,
        "bound": bound,
        "spread": spread,
        "rise": rise,
    }


# ---------------------------------------------------------------------------
# the operator


@dataclass
class SpanElement:
    """Coefficients over the molecules; the TC norm is the l1 norm of these."""

    coefficients: list[Fraction]

    def l1(self) -> Fraction:
        return sum((abs(a) for a in self.coefficients), ZERO)


@dataclass
class ProjectionOperator:
    space: FiniteMetricSpace
    pairs: list[tuple[str, str]]
    molecules: list[Molecule]
    functionals: list[LipschitzFunction]
    thresholds: list[Fraction]
    structure: DualStructure = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.pairs)

    def dipole_coefficients(self, el: SpanElement) -> list[Fraction]:
        """Coefficients of ``el`` over the unnormalised ``1_{y_i} - 1_{x_i}``."""
        return [a * m.scale for a, m in zip(el.coefficients, self.molecules)]


def build_projection(space: FiniteMetricSpace, pairs: Sequence[tuple[str, str]],
                     dual: Optional[LaminarDual] = None, *,
                     check_dual: bool = True) -> ProjectionOperator:
    """Run the whole pipeline: matching check, odd-cut dual, uncrossing, t-functions.

    A ``dual`` passed in is used as is (pinned) after a certificate check that
    skips only the cardinality normalisation; ``check_dual=False`` skips the
    check entirely so faulty duals can reach :func:`certify_projection`; the
    t-functions are then evaluated leniently.
    """
    pairs = [tuple(p) for p in pairs]
    inst = MatchingInstance.from_pairs(space, pairs)
    matching = Matching(tuple(pairs))
    _, optimum = brute_force_min_matching(inst)
    if matching.weight(space) != optimum:
        raise NotAMinimumMatching(len(pairs), matching.weight(space), optimum)
    if dual is None:
        raw = solve_dual_lp(inst)
        dual = uncross_to_laminar(inst, matching, raw)
    elif check_dual:
        report = verify_dual_certificate(inst, matching, dual, check_cardinality=False)
        if not report.ok:
            raise InvalidInstance("pinned dual fails its certificate: "
                                  + "; ".join(v["detail"] for v in report.violations))
    ds = DualStructure(space, pairs, dual)
    functionals = [t_table(ds, i, strict=check_dual) for i in range(ds.n)]
    molecules = [Molecule.of_pair(space, x, y) for x, y in pairs]
    return ProjectionOperator(space, pairs, molecules, functionals, list(ds.thresholds), ds)


def apply_projection(P: ProjectionOperator, f: TransportationProblem) -> SpanElement:
    f.check_points(P.space)
    if sum(f.masses.values(), ZERO) != 0:
        raise NotZeroSum("problem does not sum to zero")
    return SpanElement([pairing(t, f) for t in P.functionals])


def realize(P: ProjectionOperator, el: SpanElement) -> TransportationProblem:
    out = TransportationProblem()
    for a, m in zip(el.coefficients, P.molecules):
        out = out + m.as_problem().scale(a)
    return out


# ---------------------------------------------------------------------------
# certificate


CHECKS = ("lipschitz", "biorthogonal", "key_inequality", "l1_isometry",
          "norm_bound", "s_identity", "well_defined", "sharpness")


@dataclass
class ProjectionCertificate:
    checks: dict[str, dict]

    @property
    def ok(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def __bool__(self) -> bool:
        return self.ok

    def failed(self) -> list[str]:
        return [k for k, c in self.checks.items() if not c["passed"]]

    def to_dict(self) -> dict:
        return {"all_passed": self.ok,
                "checks": {k: _jsonable(v) for k, v in self.checks.items()}}


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _result(witness=None, **extra) -> dict:
    out = {"passed": witness is None, "witness": witness}
    out.update(extra)
    return out


def certify_projection(P: ProjectionOperator, *, battery: int = 20, samples: int = 5,
                       seed: int = 0) -> ProjectionCertificate:
    """Re-check every property of the operator exactly; never raises on failure.

    ``battery`` random coefficient vectors exercise the l1 isometry of the
    molecules, and ``samples`` random problems (on top of every two-point
    problem ``1_w - 1_z``) exercise ``||P f|| <= ||f||``.
    """
    space, ds = P.space, P.structure
    pts = space.points
    rng = random.Random(seed)
    checks: dict[str, dict] = {}

    # (i) each t_i is 1-Lipschitz on the whole space
    witness = None
    for i, t in enumerate(P.functionals):
        bad = t.lipschitz_witness(space)
        if bad:
            witness = {"i": i + 1, "pair": list(bad)}
            break
    checks["lipschitz"] = _result(witness)

    # (ii) biorthogonality
    witness = None
    for i, t in enumerate(P.functionals):
        for j, m in enumerate(P.molecules):
            v = pairing(t, m.as_problem())
            if v != (1 if i == j else 0):
                witness = {"i": i + 1, "j": j + 1, "value": v}
                break
        if witness:
            break
    checks["biorthogonal"] = _result(witness)

    # (iii) sum_i |t_i(z) - t_i(w)| <= d(z, w)
    witness = None
    tight = []
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            w, z = pts[a], pts[b]
            spread = sum((abs(t(z) - t(w)) for t in P.functionals), ZERO)
            dist = space.dist[a][b]
            if spread > dist:
                witness = {"pair": [w, z], "spread": spread, "distance": dist}
                break
            if spread == dist:
                tight.append([w, z])
        if witness:
            break
    checks["key_inequality"] = _result(witness, tight_pairs=len(tight))

    # (iv) l1 isometry of the molecules
    witness = None
    vectors = [[Fraction(int(i == j)) for j in range(P.n)] for i in range(P.n)]
    for _ in range(battery):
        vectors.append([Fraction(rng.randint(-12, 12), rng.randint(1, 6)) for _ in range(P.n)])
    for a in vectors:
        el = SpanElement(a)
        norm = tc_norm(space, realize(P, el)).value
        if norm != el.l1():
            witness = {"coefficients": a, "tc_norm": norm, "l1": el.l1()}
            break
    checks["l1_isometry"] = _result(witness, vectors=len(vectors))

    # (v) ||P f|| <= ||f|| on every dipole and some random problems
    witness = None
    problems = [TransportationProblem.dipole(pts[a], pts[b])
                for a in range(len(pts)) for b in range(a + 1, len(pts))]
    for _ in range(samples):
        problems.append(_random_problem(rng, pts))
    for f in problems:
        el = apply_projection(P, f)
        pf = tc_norm(space, realize(P, el)).value
        nf = tc_norm(space, f).value
        if pf > nf:
            witness = {"problem": {p: v for p, v in f.masses.items()}, "norm_Pf": pf,
                       "norm_f": nf}
            break
    checks["norm_bound"] = _result(witness, problems=len(problems))

    # (vi) the two formulas for t_i agree everywhere
    witness = None
    for i in range(P.n):
        for x in pts:
            t = P.functionals[i](x)
            if t != eval_t_via_s(ds, i, x):
                witness = {"i": i + 1, "point": x, "t": t,
                           "s_sum": eval_t_via_s(ds, i, x)}
                break
        if witness:
            break
    checks["s_identity"] = _result(witness)

    # (vii) no point satisfies both guards
    conflicts = [(i + 1, x) for i in range(P.n) for x in pts if guard_conflict(ds, i, x)]
    checks["well_defined"] = _result(
        {"conflicts": [list(c) for c in conflicts]} if conflicts else None,
        evaluations=P.n * len(pts))

    # operator norm is attained: ||P m_i|| = ||m_i|| = 1
    witness = None
    for i, m in enumerate(P.molecules):
        f = m.as_problem()
        nf = tc_norm(space, f).value
        pf = tc_norm(space, realize(P, apply_projection(P, f))).value
        if not nf == pf == 1:
            witness = {"i": i + 1, "norm_m": nf, "norm_Pm": pf}
            break
    checks["sharpness"] = _result(witness)

    return ProjectionCertificate(checks)


def _random_problem(rng: random.Random, pts: Sequence[str]) -> TransportationProblem:
    k = rng.randint(2, min(len(pts), 6))
    chosen = rng.sample(list(pts), k)
    masses = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in chosen[:-1]]
    masses.append(-sum(masses, ZERO))
    return TransportationProblem(dict(zip(chosen, masses)))


def projection_to_dict(P: ProjectionOperator) -> dict:
    return {
        "pairs": [list(p) for p in P.pairs],
        "thresholds": [str(t) for t in P.thresholds],
        "t": {str(i + 1): {x: str(v) for x, v in t.values.items()}
              for i, t in enumerate(P.functionals)},
        "dual": dual_to_dict(P.structure.instance, P.structure.dual),
    }


def projection_dumps(P: ProjectionOperator) -> str:
    return json.dumps(projection_to_dict(P), indent=2)
