"""Slow, independent reference computations used to derive test expectations.

Nothing here imports the projection or transport modules; distances are read
straight from the space's table.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations
from math import lcm


def all_perfect_matchings(vertices):
    vs = list(vertices)
    if not vs:
        yield []
        return
    a = vs[0]
    for k in range(1, len(vs)):
        rest = vs[1:k] + vs[k + 1:]
        for m in all_perfect_matchings(rest):
            yield [(a, vs[k])] + m


def min_matching_weight(space, vertices) -> Fraction:
    return min(sum((space.d(u, v) for u, v in m), Fraction(0))
               for m in all_perfect_matchings(vertices))


def dual_is_optimal(space, vertices, weights: dict) -> bool:
    """Feasible for the odd-cut dual and total equal to the brute-force optimum.

    Weak duality makes such a dual optimal without solving any LP.
    """
    vs = list(vertices)
    for s, y in weights.items():
        if y < 0 or len(s) % 2 == 0:
            return False
    for i, u in enumerate(vs):
        for v in vs[i + 1:]:
            load = sum((y for s, y in weights.items() if (u in s) != (v in s)), Fraction(0))
            if load > space.d(u, v):
                return False
    return sum(weights.values(), Fraction(0)) == min_matching_weight(space, vs)


def grain_cost(space, masses: dict) -> Fraction:
    """Transport cost by scaling to integers and trying every grain assignment."""
    den = lcm(*(Fraction(v).denominator for v in masses.values())) if masses else 1
    src, dst = [], []
    for p, v in masses.items():
        k = Fraction(v) * den
        assert k.denominator == 1
        (src if k > 0 else dst).extend([p] * abs(int(k)))
    assert len(src) == len(dst) <= 8
    best = min((sum((space.d(a, b) for a, b in zip(src, perm)), Fraction(0))
                for perm in permutations(dst)), default=Fraction(0))
    return best / den


def t_direct(space, pairs, weights: dict, i: int) -> dict:
    """``t_i`` on every point, computed from its definition by U-radii.

    ``weights`` maps each family member (frozenset) to its dual weight.
    """
    fam = list(weights)
    x, y = pairs[i]

    def inner_radius(v, H):
        return sum((weights[D] for D in fam if v in D and D < H), Fraction(0))

    def r(lam, theta, H, p):
        return lam + theta * min(max(space.d(p, v) - inner_radius(v, H), 0) for v in H)

    D = sorted((S for S in fam if x in S and y not in S), key=len)
    F = sorted((S for S in fam if y in S and x not in S), key=len)
    T = sum((weights[S] for S in D), Fraction(0))
    out = {}
    for p in space.points:
        ls, acc = [], Fraction(0)
        for S in D:
            ls.append(r(acc, 1, S, p))
            acc += weights[S]
        hs = []
        for k in range(len(F)):
            lam = T + sum((weights[S] for S in F[k:]), Fraction(0))
            hs.append(r(lam, -1, F[k], p))
        lo, hi = min(ls), max(hs)
        if lo < T:
            assert not hi > T, "both guards hold"
            out[p] = lo
        elif hi > T:
            out[p] = hi
        else:
            out[p] = T
    return out


def _solve_square(a, b):
    """Gauss-Jordan over Fractions; None when singular."""
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def lp_vertex_optimum(sense, c, rows, n):
    """Best objective over all basic feasible points of ``rows`` with ``x >= 0``.

    ``rows`` are ``(coeffs, relation, rhs)``. Returns None if no vertex is
    feasible. Only meaningful for bounded programs.
    """
    hyper = [(list(a), b) for a, _, b in rows] + [
        ([Fraction(int(i == j)) for j in range(n)], Fraction(0)) for i in range(n)]
    best = None
    for idx in combinations(range(len(hyper)), n):
        x = _solve_square([hyper[i][0] for i in idx], [hyper[i][1] for i in idx])
        if x is None or any(v < 0 for v in x):
            continue
        ok = True
        for a, rel, b in rows:
            lhs = sum((Fraction(p) * q for p, q in zip(a, x)), Fraction(0))
            if (rel == "<=" and lhs > b) or (rel == ">=" and lhs < b) or (rel == "=" and lhs != b):
                ok = False
                break
        if not ok:
            continue
        val = sum((Fraction(p) * q for p, q in zip(c, x)), Fraction(0))
        if best is None or (val < best if sense == "min" else val > best):
            best = val
    return best
