"""Prototype time series and the opposition, skewness and counter-dialectics indices.

Indices passed to the functions here are 1-based positions in the
chronological series, matching the usual ``p_1 .. p_n`` notation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DegenerateMoveError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Prototype:
    painter_id: str
    p: np.ndarray
    chronological_rank: int


@dataclass(frozen=True)
class MoveMeasures:
    source: str
    target: str
    average: np.ndarray
    opposite: np.ndarray
    opposition: np.ndarray
    displacement: np.ndarray
    W: float
    s: float


@dataclass(frozen=True)
class TripleMeasures:
    i: str
    j: str
    k: str
    d: float


class TimeSeries:
    """Prototypes ordered by strictly increasing chronological rank."""

    def __init__(self, states: Sequence[Prototype]):
        states = sorted(states, key=lambda s: s.chronological_rank)
        ranks = [s.chronological_rank for s in states]
        if len(set(ranks)) != len(ranks):
            raise ValueError("chronological ranks must be distinct")
        self.states = list(states)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i: int) -> np.ndarray:
        """1-based state vector."""
        if not 1 <= i <= len(self.states):
            raise IndexError(f"state index {i} outside 1..{len(self.states)}")
        return self.states[i - 1].p

    @property
    def painters(self) -> list[str]:
        return [s.painter_id for s in self.states]

    @property
    def matrix(self) -> np.ndarray:
        return np.array([s.p for s in self.states])

    @classmethod
    def from_points(cls, points, names=None) -> "TimeSeries":
        points = np.asarray(points, dtype=np.float64)
        names = names or [f"s{i + 1}" for i in range(len(points))]
        return cls([Prototype(n, p, r) for r, (n, p) in enumerate(zip(names, points))])


def build_prototypes(values: np.ndarray, labels: Sequence[str], ordering: dict[str, int]) -> TimeSeries:
    """Per-painter centroids, ordered by ``ordering`` (painter -> rank)."""
    x = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    unknown = sorted(set(ordering) - set(labels.tolist()))
    if unknown:
        raise ValueError(f"painters without paintings: {unknown}")
    missing = sorted(set(labels.tolist()) - set(ordering))
    if missing:
        raise ValueError(f"painters missing from the ordering: {missing}")
    protos = [Prototype(name, x[labels == name].mean(axis=0), rank) for name, rank in ordering.items()]
    return TimeSeries(protos)


def average_state(series: TimeSeries, i: int) -> np.ndarray:
    """Mean of the first ``i`` states."""
    if not 1 <= i <= len(series):
        raise IndexError(f"state index {i} outside 1..{len(series)}")
    return series.matrix[:i].mean(axis=0)


def _check_move(series: TimeSeries, i: int, j: int | None) -> int:
    j = i + 1 if j is None else j
    if j != i + 1:
        raise ValueError("only consecutive moves (j = i + 1) are supported")
    if not 1 <= i < len(series):
        raise IndexError(f"move {i}->{j} outside series of length {len(series)}")
    return j


def move_measures(series: TimeSeries, i: int, j: int | None = None) -> MoveMeasures:
    """Average/opposite states, opposition vector, displacement, W and s for the move i -> i+1.

    The first move has a zero opposition vector; it is reported as W = 1, s = 0.
    """
    j = _check_move(series, i, j)
    pi, pj = series[i], series[j]
    a = average_state(series, i)
    r = pi + 2.0 * (a - pi)
    D = r - pi
    M = pj - pi
    src, dst = series.states[i - 1].painter_id, series.states[j - 1].painter_id
    if i == 1:
        return MoveMeasures(src, dst, a, r, D, M, 1.0, 0.0)
    dd = float(np.dot(D, D))
    if dd == 0.0:
        raise DegenerateMoveError(f"degenerate opposition direction at move {i}->{j}")
    W = float(np.dot(M, D)) / dd
    return MoveMeasures(src, dst, a, r, D, M, W, _skewness(pi, pj, a))


def _skewness(pi: np.ndarray, pj: np.ndarray, a: np.ndarray) -> float:
    u = a - pi
    uu = float(np.dot(u, u))
    if uu == 0.0:
        raise DegenerateMoveError("zero distance between state and running average")
    v = pi - pj
    num = float(np.dot(v, v)) * uu - float(np.dot(v, u)) ** 2
    return float(np.sqrt(max(num, 0.0) / uu))


def opposition_index(series: TimeSeries, i: int, j: int | None = None) -> MoveMeasures:
    return move_measures(series, i, j)


def skewness_index(series: TimeSeries, i: int, j: int | None = None) -> float:
    j = _check_move(series, i, j)
    if i == 1:
        return 0.0
    return _skewness(series[i], series[j], average_state(series, i))


def counter_dialectics(series: TimeSeries, i: int, j: int | None = None, k: int | None = None) -> TripleMeasures:
    """Distance from state k to the perpendicular bisector hyperplane of states i and j."""
    j = i + 1 if j is None else j
    k = j + 1 if k is None else k
    if (j, k) != (i + 1, i + 2):
        raise ValueError("only consecutive triples are supported")
    if not 1 <= i or k > len(series):
        raise IndexError(f"triple {i},{j},{k} outside series of length {len(series)}")
    pi, pj, pk = series[i], series[j], series[k]
    diff = pj - pi
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        raise DegenerateMoveError(f"undefined bisector: states {i} and {j} coincide")
    d = abs(float(np.dot(diff, pk)) + 0.5 * float(np.dot(pi - pj, pi + pj))) / norm
    names = [series.states[n - 1].painter_id for n in (i, j, k)]
    return TripleMeasures(*names, d)


def all_moves(series: TimeSeries) -> list[MoveMeasures]:
    return [move_measures(series, i) for i in range(1, len(series))]


def all_triples(series: TimeSeries) -> list[TripleMeasures]:
    return [counter_dialectics(series, i) for i in range(1, len(series) - 1)]
