"""Uniform fuzzy measure and the four fuzzy aggregation functionals.

All functionals act on an ordered vector ``[v0, v1, ..., vk]`` where ``v0 = 0``
is a sentinel and ``v1 <= ... <= vk``; the measure vector holds
``mu(E_(i))`` for ``i = 1..k``.  Only ``v1..vk`` are weighted, ``v0`` enters
the Choquet increments alone.

A1  Sugeno:    max_i min(x_(i), mu_i)
A2  CF12:      sum_i x_(i) * mu_i
A3  Hamacher:  sum_i x_(i) mu_i / (x_(i) + mu_i - x_(i) mu_i),  0/0 := 0
A4  Choquet:   sum_i (x_(i) - x_(i-1)) * mu_i
"""
from __future__ import annotations

import enum

import numpy as np

__all__ = [
    "AggregatorKind",
    "mu_uniform",
    "p_swap",
    "hamacher",
    "aggregate",
    "fuzzy_aggregate",
    "aggregate_rows",
]


class AggregatorKind(enum.IntEnum):
    A1_SUGENO = 1
    A2_CF12 = 2
    A3_HAMACHER = 3
    A4_CHOQUET = 4

    @classmethod
    def parse(cls, value) -> "AggregatorKind":
        """Accept an enum member, an int 1-4, or names like ``"a2"``/``"flat_A2"``."""
        if isinstance(value, cls):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        key = str(value).strip().lower()
        if key.startswith("flat_"):
            key = key[5:]
        aliases = {
            "a1": cls.A1_SUGENO, "sugeno": cls.A1_SUGENO,
            "a2": cls.A2_CF12, "cf12": cls.A2_CF12,
            "a3": cls.A3_HAMACHER, "hamacher": cls.A3_HAMACHER,
            "a4": cls.A4_CHOQUET, "choquet": cls.A4_CHOQUET,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown aggregator {value!r}; expected one of a1, a2, a3, a4") from None

    @property
    def label(self) -> str:
        return f"a{int(self)}"


def mu_uniform(k: int) -> np.ndarray:
    """Measure vector ``[mu_uni(E_(1)), ..., mu_uni(E_(k))]`` with ``|E_(i)| = k - i + 1``."""
    if k < 1:
        raise ValueError(f"arity must be >= 1, got {k}")
    return np.arange(k, 0, -1, dtype=np.float64) / k


def p_swap(s1, s2):
    """Order the two middle SAT corners: returns ``(v2, v3)`` with ``v2 <= v3``."""
    if s1 < s2:
        return s1, s2
    return s2, s1


def hamacher(x, y):
    """Hamacher product (lambda = 0) with ``F(0, 0) = 0``.

    The denominator ``x + y - xy`` is evaluated as ``x(1 - y) + y``, which is
    exact for ``y = 1`` even when ``x`` is a large table value.
    """
    den = x * (1.0 - y) + y
    if den == 0.0:
        return 0.0
    return x * y / den


def aggregate(kind, ov, m) -> float:
    """Apply functional ``kind`` to ordered vector ``ov`` (with leading 0) and measures ``m``."""
    kind = AggregatorKind.parse(kind)
    ov = np.asarray(ov, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    if ov.ndim != 1 or m.ndim != 1 or len(ov) != len(m) + 1:
        raise ValueError(f"arity mismatch: ordered vector of length {len(ov)} needs "
                         f"{len(ov) - 1} measure values, got {len(m)}")
    if ov[0] != 0.0:
        raise ValueError("ordered vector must start with the sentinel v0 = 0")
    if (ov < 0).any() or (m < 0).any():
        raise ValueError("aggregation inputs must be nonnegative")
    x = ov[1:]
    if (np.diff(x) < 0).any():
        raise ValueError("ordered vector must be nondecreasing after v0")

    if kind is AggregatorKind.A1_SUGENO:
        return float(max(min(xi, mi) for xi, mi in zip(x, m)))
    if kind is AggregatorKind.A2_CF12:
        return float(sum(xi * mi for xi, mi in zip(x, m)))
    if kind is AggregatorKind.A3_HAMACHER:
        return float(sum(hamacher(xi, mi) for xi, mi in zip(x, m)))
    return float(sum((ov[i] - ov[i - 1]) * m[i - 1] for i in range(1, len(ov))))


def fuzzy_aggregate(kind, x) -> float:
    """Evaluate ``A_kind(x)`` for an unordered nonnegative vector under the uniform measure."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    return aggregate(kind, np.concatenate(([0.0], x)), mu_uniform(len(x)))


def aggregate_rows(kind, X, m=None) -> np.ndarray:
    """Row-wise ``A_kind`` of an ``(N, k)`` array, sorting each row first.

    ``m`` defaults to ``mu_uniform(k)``.  Equivalent to calling
    :func:`fuzzy_aggregate` on every row, without the Python loop.
    """
    kind = AggregatorKind.parse(kind)
    X = np.sort(np.asarray(X, dtype=np.float64), axis=1)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("X must be a 2-D array with at least one column")
    m = mu_uniform(X.shape[1]) if m is None else np.asarray(m, dtype=np.float64)
    if m.shape != (X.shape[1],):
        raise ValueError(f"need {X.shape[1]} measure values, got {m.shape}")
    if (X < 0).any() or (m < 0).any():
        raise ValueError("aggregation inputs must be nonnegative")
    if kind is AggregatorKind.A1_SUGENO:
        return np.minimum(X, m).max(axis=1)
    if kind is AggregatorKind.A2_CF12:
        return (X * m).sum(axis=1)
    if kind is AggregatorKind.A3_HAMACHER:
        den = X * (1.0 - m) + m
        with np.errstate(invalid="ignore", divide="ignore"):
            h = np.where(den == 0.0, 0.0, X * m / np.where(den == 0.0, 1.0, den))
        return h.sum(axis=1)
    inc = np.diff(X, axis=1, prepend=0.0)
    return (inc * m).sum(axis=1)
