"""Finite metric spaces with exact rational distances.

All distances are :class:`fractions.Fraction`. Decimal strings are read as
exact fractions, so ``"0.5"`` becomes ``Fraction(1, 2)``; binary floats are
refused outright.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .errors import (
    DuplicateLabel,
    NegativeOrZeroOffDiagonal,
    NonSymmetric,
    NonZeroDiagonal,
    RationalSyntaxError,
    SpaceSyntaxError,
    TriangleViolation,
    UnknownLabel,
)

__all__ = [
    "FiniteMetricSpace",
    "as_rational",
    "format_rational",
    "induced_subspace",
    "parse_space",
    "serialize_space",
    "space_to_dict",
    "space_from_dict",
    "validate_metric",
]


def as_rational(value: Any) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` / decimal string to a Fraction."""
    if isinstance(value, bool):
        raise RationalSyntaxError(f"booleans are not rationals: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise RationalSyntaxError("empty rational")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise RationalSyntaxError(f"malformed rational {value!r}") from exc
    if isinstance(value, float):
        raise RationalSyntaxError(
            f"floating-point value {value!r}; write it as a string such as "
            f"\"{value!r}\" to read it as an exact decimal")
    raise RationalSyntaxError(f"cannot read {value!r} as a rational")


def format_rational(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labelled points plus a validated rational distance matrix.

    Build instances through :func:`validate_metric` (or :func:`parse_space`);
    the constructor itself does not check the axioms.
    """

    points: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabel(f"unknown point {label!r}") from None

    def d(self, u: str, v: str) -> Fraction:
        return self.dist[self.index(u)][self.index(v)]


def validate_metric(points: Sequence[str], table: Sequence[Sequence[Any]]) -> FiniteMetricSpace:
    """Check the metric axioms exactly and return the validated space.

    Raises the first violation found, scanning in point order: labels, shape,
    diagonal, symmetry, positivity, then triangles ``d(u,w) <= d(u,v) + d(v,w)``.
    """
    labels = tuple(points)
    seen: set[str] = set()
    for p in labels:
        if not isinstance(p, str) or not p:
            raise SpaceSyntaxError(f"point labels must be nonempty strings, got {p!r}")
        if p in seen:
            raise DuplicateLabel(f"duplicate label {p!r}")
        seen.add(p)
    m = len(labels)
    if m == 0:
        raise SpaceSyntaxError("a metric space needs at least one point")
    if len(table) != m or any(len(row) != m for row in table):
        raise SpaceSyntaxError(f"distance table must be {m}x{m}")
    dist = [[as_rational(x) for x in row] for row in table]

    for i in range(m):
        if dist[i][i] != 0:
            raise NonZeroDiagonal(f"d({labels[i]},{labels[i]}) = {dist[i][i]}", (labels[i],))
    for i in range(m):
        for j in range(i + 1, m):
            if dist[i][j] != dist[j][i]:
                raise NonSymmetric(
                    f"d({labels[i]},{labels[j]}) = {dist[i][j]} but "
                    f"d({labels[j]},{labels[i]}) = {dist[j][i]}", (labels[i], labels[j]))
            if dist[i][j] <= 0:
                raise NegativeOrZeroOffDiagonal(
                    f"d({labels[i]},{labels[j]}) = {dist[i][j]} is not positive",
                    (labels[i], labels[j]))
    for i in range(m):
        row_i = dist[i]
        for k in range(m):
            bound = row_i[k]
            for j in range(m):
                if row_i[j] + dist[j][k] < bound:
                    raise TriangleViolation(
                        f"d({labels[i]},{labels[k]}) = {bound} exceeds "
                        f"d({labels[i]},{labels[j]}) + d({labels[j]},{labels[k]}) = "
                        f"{row_i[j] + dist[j][k]}", (labels[i], labels[j], labels[k]))
    return FiniteMetricSpace(labels, tuple(tuple(row) for row in dist))


def induced_subspace(space: FiniteMetricSpace, subset: Iterable[str]) -> FiniteMetricSpace:
    """Restrict ``space`` to ``subset``, keeping the space's point order."""
    wanted = list(subset)
    if not wanted:
        raise SpaceSyntaxError("subset must be nonempty")
    idx = sorted({space.index(p) for p in wanted})
    if len(idx) != len(wanted):
        raise DuplicateLabel("subset lists a point twice")
    return FiniteMetricSpace(
        tuple(space.points[i] for i in idx),
        tuple(tuple(space.dist[i][j] for j in idx) for i in idx),
    )


def space_to_dict(space: FiniteMetricSpace) -> dict:
    return {
        "points": list(space.points),
        "distances": [[format_rational(x) for x in row] for row in space.dist],
    }


def space_from_dict(obj: Any) -> FiniteMetricSpace:
    if not isinstance(obj, dict) or "points" not in obj or "distances" not in obj:
        raise SpaceSyntaxError('expected an object with "points" and "distances"')
    points, table = obj["points"], obj["distances"]
    if not isinstance(points, list) or not isinstance(table, list):
        raise SpaceSyntaxError('"points" and "distances" must be arrays')
    if not all(isinstance(row, list) for row in table):
        raise SpaceSyntaxError('"distances" must be an array of arrays')
    return validate_metric(points, table)


def serialize_space(space: FiniteMetricSpace) -> str:
    return json.dumps(space_to_dict(space), indent=2) + "\n"


def parse_space(text: str) -> FiniteMetricSpace:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpaceSyntaxError(f"invalid JSON: {exc}") from exc
    return space_from_dict(obj)
