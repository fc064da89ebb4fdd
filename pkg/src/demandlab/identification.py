"""Recovery of cross-moments from a quality-augmented demand surface.

At a fixed price p, varying the quality level sweeps out the law of the
slice variable W_p = vk - p * vm: the surface column gives
F(w) = 1 - D_Q(-w, p).  Moments of finitely many slices then pin down
the cross-moments of (vk, vm) through the binomial identity

    E[W_p**n] = sum_k C(n, k) (-p)**k E[vk**(n-k) vm**k],

a Vandermonde-structured linear system across prices, solved per total
order with a recorded condition estimate.  Bounded support keeps the
moment problem determinate, so the recovered table characterizes the
joint law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import populations as pops
from .demand import QualityDemandSurface, quality_demand_surface
from .errors import IllConditioned, InsufficientPrices, TailMassExceeded
from .moments import MomentTable
from .populations import Population

CONDITION_LIMIT = 1e10


def chebyshev_prices(lo: float, hi: float, n: int) -> np.ndarray:
    """First-kind Chebyshev nodes on [lo, hi], ascending.

    Clustered toward the interval ends, which keeps the per-order price
    systems well conditioned compared with equispaced nodes.
    """
    if not 0.0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    if n < 1:
        raise ValueError("need at least one node")
    k = np.arange(n)
    x = np.cos(np.pi * (2.0 * k + 1.0) / (2.0 * n))
    return np.sort(0.5 * (lo + hi) + 0.5 * (hi - lo) * x)


def pava(y) -> np.ndarray:
    """Pool-adjacent-violators projection onto non-decreasing sequences."""
    y = np.asarray(y, dtype=float)
    vals: list[float] = []
    counts: list[int] = []
    for v in y:
        vals.append(float(v))
        counts.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            total = vals[-1] * counts[-1] + vals[-2] * counts[-2]
            cnt = counts[-1] + counts[-2]
            vals.pop()
            counts.pop()
            vals[-1] = total / cnt
            counts[-1] = cnt
    return np.repeat(vals, counts)


@dataclass(frozen=True, eq=False)
class SliceDistribution:
    """Tabulated CDF of W_p = vk - p * vm read off one surface column."""

    p: float
    w_grid: np.ndarray
    cdf: np.ndarray
    tail_mass: float
    repair: float


@dataclass(frozen=True)
class IdentificationConfig:
    """Price window, orders, and quality-grid policy for recovery.

    ``quality_span`` of None derives a symmetric span wide enough to
    capture every slice's support from the population bounds; an explicit
    (lo, hi) pair overrides it.
    """

    price_lo: float
    price_hi: float
    n_prices: int = 9
    max_order: int = 4
    n_quality: int = 4096
    quality_span: tuple | None = None
    tail_bound: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.price_lo < self.price_hi:
            raise ValueError("price window needs 0 < lo < hi")
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")
        if self.n_prices < self.max_order + 1:
            raise InsufficientPrices(
                f"{self.n_prices} prices cannot pin down order "
                f"{self.max_order}; need at least {self.max_order + 1}")
        if self.n_quality < 16:
            raise ValueError("quality grid too small")
        if self.tail_bound <= 0.0:
            raise ValueError("tail bound must be positive")
        if self.quality_span is not None:
            lo, hi = self.quality_span
            if not lo < hi:
                raise ValueError("quality span needs lo < hi")
            object.__setattr__(self, "quality_span",
                               (float(lo), float(hi)))


def default_quality_grid(pop: Population, prices, n: int) -> np.ndarray:
    """Uniform quality grid covering every slice's support symmetrically.

    W_p lives in [-p * vm_hi, vk_upper]; a symmetric span of the larger
    envelope keeps both tails of every column pinned at 0 and 1.
    """
    p_max = float(np.max(prices))
    half = max(pop.vk_upper, p_max * pop.support.vm_hi) * (1.0 + 1e-3)
    return np.linspace(-half, half, n)


def slice_from_surface(surface: QualityDemandSurface, p: float,
                       tail_bound: float = 1e-6) -> SliceDistribution:
    """Slice CDF at price p: F(w) = 1 - D_Q(-w, p) on w = -xQ reversed.

    Quadrature wiggle is projected away isotonic-ly (magnitude recorded);
    if the span misses more than ``tail_bound`` of probability at either
    end, the slice is unusable and TailMassExceeded is raised.
    """
    column = surface.column(p)
    w = -surface.quality_grid[::-1]
    raw = 1.0 - column[::-1]
    cdf = np.clip(pava(raw), 0.0, 1.0)
    repair = float(np.max(np.abs(cdf - raw)))
    tail = float(cdf[0] + (1.0 - cdf[-1]))
    if tail > tail_bound:
        raise TailMassExceeded(
            f"slice at p={p:g} misses {tail:.3g} of mass beyond the "
            f"quality span (bound {tail_bound:g})")
    return SliceDistribution(float(p), w, cdf, tail, repair)


def _integrate_uniform(y: np.ndarray, h: float) -> float:
    """Composite Newton-Cotes on a uniform grid (Boole + 3/8 remainder)."""
    k = y.size - 1
    tail = (4 - k % 4) * 3 % 12
    if k < tail or k < 4:
        return float(np.trapezoid(y, dx=h))
    out = 0.0
    body = y[:k - tail + 1]
    if body.size > 1:
        out += (2.0 * h / 45.0) * (7.0 * (body[0] + body[-1])
                                   + 14.0 * body[4:-1:4].sum()
                                   + 32.0 * body[1::4].sum()
                                   + 32.0 * body[3::4].sum()
                                   + 12.0 * body[2::4].sum())
    for start in range(k - tail, k, 3):
        seg = y[start:start + 4]
        out += (3.0 * h / 8.0) * (seg[0] + 3.0 * seg[1] + 3.0 * seg[2]
                                  + seg[3])
    return float(out)


def slice_moments(sdist: SliceDistribution, n: int) -> np.ndarray:
    """Raw moments E[W_p**m] for m = 1..n from the tabulated CDF.

    Integration by parts turns the Stieltjes integral into
    b**m - m * int w**(m-1) F(w) dw once the span captures the support
    (mass escaping the ends is assigned to the end points, a tail-bound
    size effect).  Uniform grids get a high-order Newton-Cotes rule;
    irregular grids fall back to the exact integral of the
    piecewise-linear interpolant.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    w = sdist.w_grid
    f = sdist.cdf
    steps = np.diff(w)
    h = steps[0]
    uniform = np.max(np.abs(steps - h)) <= 1e-9 * abs(h)
    out = np.empty(n)
    a, b = w[0], w[-1]
    for m in range(1, n + 1):
        if uniform:
            integral = _integrate_uniform(w ** (m - 1) * f, h)
            out[m - 1] = b ** m - m * integral
        else:
            df = np.diff(f)
            cell = (w[1:] ** (m + 1) - w[:-1] ** (m + 1)) / ((m + 1) * steps)
            out[m - 1] = (a ** m * f[0] + float(np.sum(df * cell))
                          + b ** m * (1.0 - f[-1]))
    return out


def recover_from_slice_moments(prices, moment_rows,
                               max_order: int) -> MomentTable:
    """Solve the per-order price systems for the cross-moment table.

    ``moment_rows[i, m-1]`` holds E[W_{p_i}**m].  Each total order n
    gives an (n_prices x (n+1)) system solved by least squares; its
    condition number is stored as the diagnostic of every order-n entry
    and guarded against ``CONDITION_LIMIT``.
    """
    prices = np.asarray(prices, dtype=float)
    rows = np.asarray(moment_rows, dtype=float)
    if rows.shape != (prices.size, max_order):
        raise ValueError("moment rows must be (n_prices, max_order)")
    distinct = np.unique(prices).size
    if distinct < max_order + 1:
        raise InsufficientPrices(
            f"only {distinct} distinct prices for order {max_order}; "
            f"need at least {max_order + 1}")
    entries = {(0, 0): 1.0}
    errors = {(0, 0): 0.0}
    for n in range(1, max_order + 1):
        design = np.empty((prices.size, n + 1))
        for k in range(n + 1):
            design[:, k] = math.comb(n, k) * (-prices) ** k
        cond = float(np.linalg.cond(design))
        if cond > CONDITION_LIMIT:
            raise IllConditioned(
                f"order-{n} price system has condition {cond:.3g}; "
                "widen the price window", order=n, condition=cond)
        sol, *_ = np.linalg.lstsq(design, rows[:, n - 1], rcond=None)
        for k in range(n + 1):
            entries[(n - k, k)] = float(sol[k])
            errors[(n - k, k)] = cond
    return MomentTable(max_order, entries, errors)


def recover_cross_moments(slices, max_order: int) -> MomentTable:
    """Cross-moment table from ready-made slice distributions."""
    slices = list(slices)
    if not slices:
        raise InsufficientPrices("no slices supplied")
    prices = np.array([s.p for s in slices])
    rows = np.vstack([slice_moments(s, max_order) for s in slices])
    return recover_from_slice_moments(prices, rows, max_order)


@dataclass(frozen=True, eq=False)
class RecoveryReport:
    """End-to-end recovery outcome with per-entry diagnostics."""

    recovered: MomentTable
    reference: MomentTable
    entry_rel_errors: dict
    max_rel_error: float
    recovered_mean_vm: float
    tail_mass: float
    repair: float
    prices: tuple
    config: IdentificationConfig

    def to_json_dict(self) -> dict:
        return {
            "max_rel_error": self.max_rel_error,
            "recovered_mean_vm": self.recovered_mean_vm,
            "tail_mass": self.tail_mass,
            "isotonic_repair": self.repair,
            "prices": list(self.prices),
            "entry_rel_errors": {f"{j},{k}": v for (j, k), v in
                                 sorted(self.entry_rel_errors.items())},
            "recovered": self.recovered.to_json_dict(),
            "reference": self.reference.to_json_dict(),
            "config": {
                "price_lo": self.config.price_lo,
                "price_hi": self.config.price_hi,
                "n_prices": self.config.n_prices,
                "max_order": self.config.max_order,
                "n_quality": self.config.n_quality,
                "quality_span": (list(self.config.quality_span)
                                 if self.config.quality_span else None),
                "tail_bound": self.config.tail_bound,
            },
        }


def build_surface(pop: Population,
                  config: IdentificationConfig) -> QualityDemandSurface:
    """Quality-demand surface over the configured grids."""
    prices = chebyshev_prices(config.price_lo, config.price_hi,
                              config.n_prices)
    if config.quality_span is None:
        xq = default_quality_grid(pop, prices, config.n_quality)
    else:
        xq = np.linspace(config.quality_span[0], config.quality_span[1],
                         config.n_quality)
    return quality_demand_surface(pop, xq, prices)


def verify_recovery(pop: Population,
                    config: IdentificationConfig) -> RecoveryReport:
    """Surface -> slices -> moment table, compared against the truth.

    Relative errors use the analytic table as the denominator (floored
    at 1e-12 for entries near zero); the recovered money-value mean is
    surfaced separately since downstream classification narratives
    consume exactly that number.
    """
    surface = build_surface(pop, config)
    slices = [slice_from_surface(surface, p, config.tail_bound)
              for p in surface.price_grid]
    rows = np.vstack([slice_moments(s, config.max_order) for s in slices])
    recovered = recover_from_slice_moments(surface.price_grid, rows,
                                           config.max_order)
    reference = pops.moments(pop, config.max_order)
    rel = {}
    worst = 0.0
    for key in recovered.keys():
        if key == (0, 0):
            continue
        denom = max(abs(reference[key]), 1e-12)
        rel[key] = abs(recovered[key] - reference[key]) / denom
        worst = max(worst, rel[key])
    return RecoveryReport(
        recovered, reference, rel, float(worst),
        recovered_mean_vm=recovered[(0, 1)],
        tail_mass=float(max(s.tail_mass for s in slices)),
        repair=float(max(s.repair for s in slices)),
        prices=tuple(float(p) for p in surface.price_grid),
        config=config)
