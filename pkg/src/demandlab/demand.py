"""Demand curves and quality-augmented demand surfaces.

A consumer with values (vk, vm) facing price p and quality level xq
buys iff vk + xq - vm * p >= 0 (ties buy).  At xq = 0 this is the ratio
rule r >= p, so plain demand is one minus the ratio CDF; the quality
channel tilts the rule and traces out the law of vk - p * vm instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MonotonicityViolation
from .populations import Population, ratio_marginal

MONOTONE_TOL = 1e-12


def purchase_decision(vk, vm, xq, p):
    """1 if the consumer buys at price p and quality xq, else 0."""
    vk = np.asarray(vk, dtype=float)
    vm = np.asarray(vm, dtype=float)
    if np.any(vm <= 0.0):
        raise ValueError("money value must be positive")
    out = (vk + np.asarray(xq, dtype=float)
           - vm * np.asarray(p, dtype=float) >= 0.0).astype(int)
    return out if out.ndim else int(out)


@dataclass(frozen=True, eq=False)
class DemandCurve:
    """Tabulated demand: sorted positive prices and values in [0, 1]."""

    prices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.prices, dtype=float)
        d = np.asarray(self.values, dtype=float)
        if p.ndim != 1 or p.shape != d.shape or p.size < 2:
            raise ValueError("need matching 1-d price/value arrays")
        if np.any(p <= 0.0) or np.any(np.diff(p) <= 0.0):
            raise ValueError("prices must be positive, strictly increasing")
        if np.any(d < -MONOTONE_TOL) or np.any(d > 1.0 + MONOTONE_TOL):
            raise ValueError("demand values must lie in [0, 1]")
        rise = np.max(np.diff(d), initial=0.0)
        if rise > MONOTONE_TOL:
            raise MonotonicityViolation(
                f"demand increases by {rise:.3g} along the price grid")
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "values", np.clip(d, 0.0, 1.0))

    def to_csv(self) -> str:
        lines = ["p,D"]
        lines += [f"{p:.17g},{d:.17g}"
                  for p, d in zip(self.prices, self.values)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class RatioCdfTable:
    """Ratio CDF read off a demand curve: G(r) = 1 - D(r)."""

    r: np.ndarray
    G: np.ndarray

    def to_csv(self) -> str:
        lines = ["r,G"]
        lines += [f"{a:.17g},{b:.17g}" for a, b in zip(self.r, self.G)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class QualityDemandSurface:
    """Matrix of quality-augmented demand over (quality, price) grids.

    ``values[i, j]`` is the buying mass at quality ``quality_grid[i]``
    and price ``price_grid[j]``.  ``tail_mass`` records how much of the
    worst column's probability escapes the quality span (top entry away
    from 1 plus bottom entry away from 0); a finite grid can never cover
    all of the real line, so the truncation loss is surfaced here rather
    than hidden.
    """

    quality_grid: np.ndarray
    price_grid: np.ndarray
    values: np.ndarray
    tail_mass: float = field(init=False)

    def __post_init__(self):
        xq = np.asarray(self.quality_grid, dtype=float)
        p = np.asarray(self.price_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if xq.ndim != 1 or p.ndim != 1 or v.shape != (xq.size, p.size):
            raise ValueError("surface values must be (n_quality, n_price)")
        if np.any(np.diff(xq) <= 0.0) or np.any(np.diff(p) <= 0.0):
            raise ValueError("grids must be strictly increasing")
        if np.any(p < 0.0):
            raise ValueError("prices must be >= 0")
        if v.shape[0] > 1:
            drop = np.max(-np.diff(v, axis=0), initial=0.0)
            if drop > 1e-9:
                raise MonotonicityViolation(
                    f"surface decreases by {drop:.3g} along quality")
        if v.shape[1] > 1:
            rise = np.max(np.diff(v, axis=1), initial=0.0)
            if rise > 1e-9:
                raise MonotonicityViolation(
                    f"surface increases by {rise:.3g} along price")
        v = np.clip(v, 0.0, 1.0)
        tail = float(np.max(v[0, :] + (1.0 - v[-1, :])))
        object.__setattr__(self, "quality_grid", xq)
        object.__setattr__(self, "price_grid", p)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "tail_mass", tail)

    def column(self, p: float) -> np.ndarray:
        j = self.column_index(p)
        return self.values[:, j]

    def column_index(self, p: float) -> int:
        hits = np.nonzero(np.isclose(self.price_grid, p,
                                     rtol=1e-12, atol=1e-300))[0]
        if hits.size != 1:
            raise ValueError(f"price {p!r} is not a unique surface column")
        return int(hits[0])

    def to_csv(self) -> str:
        lines = ["xQ,p,DQ"]
        for i, xq in enumerate(self.quality_grid):
            for j, p in enumerate(self.price_grid):
                lines.append(f"{xq:.17g},{p:.17g},{self.values[i, j]:.17g}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {"quality_grid": [float(x) for x in self.quality_grid],
                "price_grid": [float(x) for x in self.price_grid],
                "values_row_major": [float(x) for x in self.values.ravel()],
                "tail_mass": self.tail_mass}


def default_price_grid(pop: Population, n: int = 257) -> np.ndarray:
    """Chebyshev-spaced price grid padded slightly past the ratio support.

    The padding puts grid points on both choke regions (demand exactly 1
    and exactly 0); when the support starts at 0 the lower end is floored
    at a tiny positive price since demand is defined for p > 0 only.
    """
    sup = pop.support
    lo = sup.r_lo * (1.0 - 1e-3)
    hi = sup.r_hi * (1.0 + 1e-3)
    if lo <= 0.0:
        lo = hi * 1e-9
    k = np.arange(n)
    x = -np.cos(np.pi * k / (n - 1))
    return lo + 0.5 * (hi - lo) * (x + 1.0)


def demand(pop: Population, p) -> float:
    """Buying mass at price p: P(vk / vm >= p) = 1 - G(p) + atom at p."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0.0):
        raise ValueError("price must be positive")
    out = pop._demand_profile(np.atleast_1d(p_arr).astype(float))
    return out.reshape(p_arr.shape) if p_arr.ndim else float(out[0])


def demand_curve(pop: Population, price_grid=None) -> DemandCurve:
    """Demand tabulated on the grid (default: padded Chebyshev grid)."""
    if price_grid is None:
        price_grid = default_price_grid(pop)
    price_grid = np.asarray(price_grid, dtype=float)
    if np.any(price_grid <= 0.0):
        raise ValueError("price must be positive")
    return DemandCurve(price_grid, pop._demand_profile(price_grid))


def invert_demand(curve: DemandCurve) -> RatioCdfTable:
    """Ratio CDF implied by a demand curve, G(r) = 1 - D(r)."""
    rise = np.max(np.diff(curve.values), initial=0.0)
    if rise > MONOTONE_TOL:
        raise MonotonicityViolation(
            f"demand increases by {rise:.3g}; cannot invert")
    return RatioCdfTable(curve.prices.copy(), 1.0 - curve.values)


def quality_demand(pop: Population, xq: float, p: float) -> float:
    """Buying mass at quality xq and price p: P(vk + xq - vm p >= 0)."""
    if p < 0.0:
        raise ValueError("price must be >= 0")
    out = float(pop._quality_profile(float(p), np.array([float(xq)]))[0])
    return min(max(out, 0.0), 1.0)


def quality_demand_mc(pop: Population, xq: float, p: float,
                      n: int = 10 ** 6, seed: int = 0):
    """Monte Carlo estimate of quality_demand with its standard error."""
    from .populations import sample
    draws = sample(pop, n, seed)
    buy = draws[:, 0] + xq - draws[:, 1] * p >= 0.0
    est = float(np.mean(buy))
    se = float(np.sqrt(max(est * (1.0 - est), 1e-12) / n))
    return est, se


def quality_demand_surface(pop: Population, quality_grid,
                           price_grid) -> QualityDemandSurface:
    """Quality-augmented demand on the grid product, column by column."""
    xq = np.asarray(quality_grid, dtype=float)
    prices = np.asarray(price_grid, dtype=float)
    if np.any(prices < 0.0):
        raise ValueError("price must be >= 0")
    cols = [np.asarray(pop._quality_profile(float(p), xq)) for p in prices]
    return QualityDemandSurface(xq, prices, np.column_stack(cols))
