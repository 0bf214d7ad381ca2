"""Goodness-of-fit statistics and experiment reports.

Only statistics are computed here, never p-values; thresholds live in the
experiment configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Mapping

import numpy as np


@dataclass
class Sample:
    """Real-valued observations plus free-form metadata (n, p or t, address, seeds)."""

    values: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()

    def __len__(self):
        return self.values.size

    def median(self) -> float:
        return float(np.median(_nonempty(self.values)))

    def mean_se(self) -> tuple[float, float]:
        v = _nonempty(self.values)
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan
        return float(v.mean()), se


def _values(sample) -> np.ndarray:
    return sample.values if isinstance(sample, Sample) else np.asarray(sample, dtype=np.float64).ravel()


def _nonempty(values: np.ndarray) -> np.ndarray:
    if values.size == 0:
        raise ValueError("empty sample")
    return values


def ks_statistic(sample, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """``sup_x |F_N(x) - F(x)|``, checked on both sides of every sample point."""
    x = np.sort(_nonempty(_values(sample)))
    n = x.size
    f = np.asarray(cdf(x), dtype=np.float64)
    above = np.arange(1, n + 1) / n - f
    below = f - np.arange(n) / n
    return float(max(above.max(), below.max(), 0.0))


def ks_two_sample(a, b) -> float:
    """``sup_x |F_a(x) - F_b(x)|``."""
    a = np.sort(_nonempty(_values(a)))
    b = np.sort(_nonempty(_values(b)))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(fa - fb).max())


def chi_square(counts, probs) -> float:
    """Pearson statistic ``sum (O - E)^2 / E`` with ``E = N probs``."""
    counts = np.asarray(counts, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    if counts.shape != probs.shape:
        raise ValueError("counts and probs must have the same shape")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    if abs(probs.sum() - 1.0) > 1e-12:
        raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
    expected = counts.sum() * probs
    if np.any(expected <= 0):
        raise ValueError("zero expected cell")
    return float(np.sum((counts - expected) ** 2 / expected))


def chi_square_quantile(q: float, dof: int) -> float:
    from scipy.stats import chi2

    return float(chi2.ppf(q, dof))


def total_variation(p: Mapping, q: Mapping) -> float:
    """``(1/2) sum |p(x) - q(x)|`` over the union of supports."""
    keys = set(p) | set(q)
    return 0.5 * float(sum(abs(float(p.get(k, 0)) - float(q.get(k, 0))) for k in keys))


def empirical_law(rows) -> dict[tuple, float]:
    """Frequencies of the distinct rows of a 2-d integer array."""
    rows = np.asarray(rows)
    if rows.ndim == 1:
        rows = rows[:, None]
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    total = counts.sum()
    return {tuple(int(x) for x in r): c / total for r, c in zip(uniq, counts)}


def frechet_cdf(x):
    """``exp(-1/x)`` for ``x > 0`` and 0 otherwise: law of the largest atom."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def exponential_cdf(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, -np.expm1(-np.maximum(x, 0.0)), 0.0)


def is_monotone_decreasing(values) -> bool:
    values = list(values)
    return all(b < a for a, b in zip(values, values[1:]))


@dataclass
class Check:
    """One statistic compared against a declared threshold."""

    name: str
    value: float
    threshold: float | list[float]
    relation: str
    passed: bool

    @classmethod
    def at_most(cls, name: str, value: float, threshold: float) -> "Check":
        return cls(name, value, threshold, "<=", bool(value <= threshold))

    @classmethod
    def below(cls, name: str, value: float, threshold: float) -> "Check":
        return cls(name, value, threshold, "<", bool(value < threshold))

    @classmethod
    def within(cls, name: str, value: float, lo: float, hi: float) -> "Check":
        return cls(name, value, [lo, hi], "in", bool(lo <= value <= hi))

    @classmethod
    def holds(cls, name: str, flag: bool) -> "Check":
        return cls(name, float(bool(flag)), 1.0, "==", bool(flag))


@dataclass
class ExperimentReport:
    name: str
    parameters: dict[str, Any]
    rows: list[dict[str, Any]] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    seeds: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        if not self.rows:
            return ""
        columns = list(self.rows[0])
        lines = [",".join(columns)]
        for row in self.rows:
            lines.append(",".join(_cell(row.get(c)) for c in columns))
        return "\n".join(lines) + "\n"

    def summary_lines(self) -> list[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'} {self.name}: {c.name} = {c.value:.6g} ({c.relation} {c.threshold})"
            for c in self.checks
        ]


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return "" if x is None else str(x)
