"""Joint distributions of good value and money value.

A population describes a pair (vk, vm): the consumer's value for one
unit of the good and the consumer's value for one unit of money, with
vm > 0.  The ratio r = vk / vm is the reservation price.  Five forms are
supported:

* ``PointMassPopulation`` -- a single consumer type.
* ``ProductPopulation`` -- the ratio r and vm independent, with given
  marginals.  The good value is vk = r * vm.
* ``IndependentPopulation`` -- vk and vm independent with given
  marginals.
* ``RatioConditionalPopulation`` -- an explicit ratio marginal g(r)
  together with a conditional law for vm given r: a normal with mean
  m(r) = h(r) / g(r), truncated symmetrically at m(r) +/- eps(r).  The
  symmetric truncation keeps the conditional mean exactly equal to
  m(r), which is what makes the low/high constructions work.
* ``MixturePopulation`` -- a finite convex combination of the above.

Instances are immutable and safe to share across threads; derived
quantities are cached on first use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import ndtr, ndtri

from . import quadrature
from .errors import BoundViolation, DegenerateRatio, NoDensity
from .marginals import MarginalSpec, PwLinearTable
from .moments import MomentTable

TABLE_GRID_DEFAULT = 2048
_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Support:
    """Bounding box of a population: ratio range and money-value cap."""

    r_lo: float
    r_hi: float
    vm_hi: float

    def __post_init__(self):
        if not (0.0 <= self.r_lo < self.r_hi < np.inf):
            raise ValueError("need 0 <= r_lo < r_hi < inf")
        if not (0.0 < self.vm_hi < np.inf):
            raise ValueError("need 0 < vm_hi < inf")


@dataclass(frozen=True, eq=False)
class RatioMarginalSpec:
    """Marginal law of the reservation-price ratio r = vk / vm.

    ``kind`` is one of ``uniform``, ``triangular`` (symmetric),
    ``tabulated`` (piecewise-linear density) or ``degenerate`` (single
    atom).  ``atoms`` carries (position, mass) pairs and is nonempty
    only for degenerate specs and for tabulations reported from
    mixtures that contain point masses; such specs describe outputs and
    cannot seed new populations.
    """

    kind: str
    support: Support
    table: PwLinearTable | None = field(default=None, repr=False)
    atoms: tuple = ()

    def __post_init__(self):
        if self.kind not in ("uniform", "triangular", "tabulated",
                             "degenerate"):
            raise ValueError(f"unknown ratio marginal kind {self.kind!r}")
        if self.kind == "tabulated" and self.table is None:
            raise ValueError("tabulated ratio marginal needs a table")
        if self.kind == "degenerate" and len(self.atoms) != 1:
            raise ValueError("degenerate ratio marginal needs exactly "
                             "one atom")
        if any(m <= 0.0 for _, m in self.atoms):
            raise ValueError("atom masses must be positive")
        if sum(m for _, m in self.atoms) > 1.0 + 1e-12:
            raise ValueError("atom mass exceeds 1")

    # -- constructors -------------------------------------------------

    @classmethod
    def uniform(cls, r_lo: float, r_hi: float, vm_hi: float = 1.0):
        return cls("uniform", Support(r_lo, r_hi, vm_hi))

    @classmethod
    def triangular(cls, r_lo: float, r_hi: float, vm_hi: float = 1.0):
        return cls("triangular", Support(r_lo, r_hi, vm_hi))

    @classmethod
    def tabulated(cls, r, g, vm_hi: float = 1.0, *, atoms=()):
        cont = 1.0 - sum(m for _, m in atoms)
        table = PwLinearTable.density(r, g, total=cont)
        return cls("tabulated",
                   Support(float(table.x[0]), float(table.x[-1]), vm_hi),
                   table=table, atoms=tuple(atoms))

    @classmethod
    def degenerate(cls, r0: float, vm_hi: float = 1.0):
        r0 = float(r0)
        pad = max(abs(r0), 1.0) * 1e-9
        return cls("degenerate", Support(max(r0 - pad, 0.0), r0 + pad, vm_hi),
                   atoms=((r0, 1.0),))

    # -- basic queries ------------------------------------------------

    @property
    def has_density(self) -> bool:
        return self.kind != "degenerate" and not self.atoms

    @property
    def continuous_mass(self) -> float:
        return 1.0 - sum(m for _, m in self.atoms)

    @property
    def r_lo(self) -> float:
        return self.support.r_lo

    @property
    def r_hi(self) -> float:
        return self.support.r_hi

    @cached_property
    def _as_table(self) -> PwLinearTable:
        """Piecewise-linear view of the continuous density part."""
        a, b = self.r_lo, self.r_hi
        if self.kind == "uniform":
            h = 1.0 / (b - a)
            return PwLinearTable(np.array([a, b]), np.array([h, h]))
        if self.kind == "triangular":
            peak = 2.0 / (b - a)
            return PwLinearTable(np.array([a, 0.5 * (a + b), b]),
                                 np.array([0.0, peak, 0.0]))
        if self.kind == "tabulated":
            return self.table
        raise DegenerateRatio("degenerate ratio marginal has no density")

    def pdf(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "uniform":
            inside = (r >= self.r_lo) & (r <= self.r_hi)
            out = np.where(inside, 1.0 / (self.r_hi - self.r_lo), 0.0)
        elif self.kind == "triangular":
            a, b = self.r_lo, self.r_hi
            length = b - a
            up = 4.0 * (r - a) / length ** 2
            down = 4.0 * (b - r) / length ** 2
            out = np.clip(np.minimum(up, down), 0.0, None)
        elif self.kind == "tabulated":
            out = self.table.value_at(r)
        else:
            out = np.zeros_like(r)
        return out if out.ndim else float(out)

    def cdf(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "uniform":
            out = np.clip((r - self.r_lo) / (self.r_hi - self.r_lo),
                          0.0, 1.0)
        elif self.kind == "triangular":
            a, b = self.r_lo, self.r_hi
            length = b - a
            mid = 0.5 * (a + b)
            rc = np.clip(r, a, b)
            lower = 2.0 * ((rc - a) / length) ** 2
            upper = 1.0 - 2.0 * ((b - rc) / length) ** 2
            out = np.where(rc <= mid, lower, upper)
        elif self.kind == "tabulated":
            out = np.asarray(self.table.cdf(r))
        else:
            out = np.zeros_like(r)
        for pos, mass in self.atoms:
            out = out + mass * (r >= pos)
        return out if out.ndim else float(out)

    def ppf(self, q):
        if not self.has_density:
            raise DegenerateRatio(
                "quantile function needs a purely continuous ratio marginal")
        q = np.asarray(q, dtype=float)
        if self.kind == "uniform":
            out = self.r_lo + (self.r_hi - self.r_lo) * q
        elif self.kind == "triangular":
            a, b = self.r_lo, self.r_hi
            length = b - a
            lower = a + length * np.sqrt(np.clip(q, 0.0, 1.0) / 2.0)
            upper = b - length * np.sqrt(np.clip(1.0 - q, 0.0, 1.0) / 2.0)
            out = np.where(q <= 0.5, lower, upper)
        else:
            out = np.asarray(self.table.ppf(q))
        return out if out.ndim else float(out)

    def moment(self, j: int) -> float:
        if j == 0:
            return 1.0
        if self.kind == "uniform":
            a, b = self.r_lo, self.r_hi
            cont = (b ** (j + 1) - a ** (j + 1)) / ((j + 1) * (b - a))
        elif self.kind == "degenerate":
            cont = 0.0
        else:
            cont = self._as_table.moment(j)
        return cont + sum(m * pos ** j for pos, m in self.atoms)

    @property
    def g_lo(self) -> float:
        """Density value at the lower ratio endpoint."""
        return float(self.pdf(self.r_lo))

    def tabulate(self, n: int = TABLE_GRID_DEFAULT):
        """Uniform-grid tabulation (r, g, G) of the marginal."""
        r = np.linspace(self.r_lo, self.r_hi, n)
        return r, np.asarray(self.pdf(r)), np.asarray(self.cdf(r))

    def to_csv(self, n: int = TABLE_GRID_DEFAULT) -> str:
        r, g, big_g = self.tabulate(n)
        lines = ["r,g,G"]
        lines += [f"{a:.17g},{b:.17g},{c:.17g}"
                  for a, b, c in zip(r, g, big_g)]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "vm_hi": self.support.vm_hi}
        if self.kind == "degenerate":
            out["atom"] = self.atoms[0][0]
            return out
        out["r_lo"] = self.r_lo
        out["r_hi"] = self.r_hi
        if self.kind == "tabulated":
            out["table"] = [[float(a), float(b)]
                            for a, b in zip(self.table.x, self.table.y)]
        if self.atoms:
            out["atoms"] = [[float(a), float(b)] for a, b in self.atoms]
        return out


@dataclass(frozen=True, eq=False)
class ConditionalSpec:
    """Conditional law of vm given the ratio, via its target mean curve.

    ``family`` selects the mean-times-density curve h(r):

    * ``low``  -- h(r) = (r - r_lo) + delta, which pushes the boundary
      conditional mean *below* twice the population mean;
    * ``high`` -- h(r) = 1 / sqrt(r - r_lo + delta), which pushes it
      *above*;
    * ``custom`` -- h tabulated on the ratio support.

    The conditional itself is a normal with pre-truncation mean
    m(r) = h(r) / g(r), standard deviation ``sigma_multiplier * eps(r)``
    and symmetric truncation at m(r) +/- eps(r).  ``epsilon_kind``
    chooses eps(r): ``half_mean`` takes m(r) / 2; ``fixed`` takes a
    constant, which must stay inside (0, min m).
    """

    family: str
    delta: float | None = None
    h_table: PwLinearTable | None = field(default=None, repr=False)
    epsilon_kind: str = "half_mean"
    epsilon_value: float | None = None
    sigma_multiplier: float = 0.5

    def __post_init__(self):
        if self.family not in ("low", "high", "custom"):
            raise ValueError(f"unknown conditional family {self.family!r}")
        if self.family in ("low", "high"):
            if self.delta is None or self.delta <= 0:
                raise ValueError(f"{self.family} family needs delta > 0")
        elif self.h_table is None:
            raise ValueError("custom family needs an h table")
        if self.epsilon_kind not in ("half_mean", "fixed"):
            raise ValueError(f"unknown epsilon rule {self.epsilon_kind!r}")
        if self.epsilon_kind == "fixed" and (self.epsilon_value is None
                                             or self.epsilon_value <= 0):
            raise ValueError("fixed epsilon rule needs a positive value")
        if not 0.0 < self.sigma_multiplier < np.inf:
            raise ValueError("sigma multiplier must be positive and finite")

    def h(self, r, r_lo: float):
        r = np.asarray(r, dtype=float)
        if self.family == "low":
            out = (r - r_lo) + self.delta
        elif self.family == "high":
            out = 1.0 / np.sqrt(np.maximum(r - r_lo + self.delta, 1e-300))
        else:
            out = self.h_table.value_at(r)
        return out if out.ndim else float(out)

    def h_integral(self, r_lo: float, a: float, b: float) -> float:
        """Exact integral of h over [a, b]."""
        if self.family == "low":
            prim = lambda r: 0.5 * (r - r_lo) ** 2 + self.delta * (r - r_lo)
            return prim(b) - prim(a)
        if self.family == "high":
            prim = lambda r: 2.0 * math.sqrt(r - r_lo + self.delta)
            return prim(b) - prim(a)
        return self.h_table.integral_between(a, b)

    def to_dict(self) -> dict:
        out: dict = {"family": self.family,
                     "epsilon_rule": {"kind": self.epsilon_kind},
                     "sigma_multiplier": self.sigma_multiplier}
        if self.family == "custom":
            out["h_table"] = [[float(a), float(b)] for a, b in
                              zip(self.h_table.x, self.h_table.y)]
        else:
            out["delta"] = self.delta
        if self.epsilon_kind == "fixed":
            out["epsilon_rule"]["value"] = self.epsilon_value
        return out


@lru_cache(maxsize=None)
def _trunc_std_even_moments(a0: float, n_max: int) -> tuple:
    """Raw moments of a standard normal truncated to [-a0, a0].

    Odd moments vanish; even ones follow the two-sided recursion
    t_n = (n - 1) t_{n-2} - 2 a0^(n-1) phi(a0) / (2 Phi(a0) - 1).
    """
    phi = math.exp(-0.5 * a0 * a0) / _SQRT2PI
    z = 2.0 * ndtr(a0) - 1.0
    t = [0.0] * (n_max + 1)
    t[0] = 1.0
    for n in range(2, n_max + 1, 2):
        t[n] = (n - 1) * t[n - 2] - 2.0 * a0 ** (n - 1) * phi / z
    return tuple(t)


class Population:
    """Common interface of all population forms (see module docstring)."""

    form: str = "abstract"

    # Subclasses implement: support, vk_upper, admits_density, _density,
    # _sample, _ratio_marginal, _moment, _mean_vm, _band_vm_moments,
    # _quality_profile, to_dict.

    @property
    def support(self) -> Support:
        raise NotImplementedError

    @property
    def vk_upper(self) -> float:
        raise NotImplementedError

    @property
    def admits_density(self) -> bool:
        raise NotImplementedError

    def _demand_profile(self, prices: np.ndarray) -> np.ndarray:
        """Buying mass at each price, the complement of the ratio law.

        Forms whose ratio marginal is only available as a tabulation
        override this with an exact route; the default reads the
        marginal directly, crediting any atom sitting on a price.
        """
        spec = self._ratio_marginal()
        out = 1.0 - np.asarray(spec.cdf(prices), dtype=float)
        for pos, mass in spec.atoms:
            out = out + mass * (prices == pos)
        return np.clip(out, 0.0, 1.0)

    def __repr__(self):  # keep large tables out of reprs
        return f"<{type(self).__name__} on {self.support}>"


@dataclass(frozen=True, eq=False)
class PointMassPopulation(Population):
    """Every consumer has the same (vk, vm)."""

    vk: float
    vm: float
    form = "point_mass"

    def __post_init__(self):
        if not (self.vk >= 0.0 and np.isfinite(self.vk)):
            raise ValueError("good value must be finite and >= 0")
        if not (self.vm > 0.0 and np.isfinite(self.vm)):
            raise ValueError("money value must be finite and > 0")

    @cached_property
    def support(self) -> Support:
        spec = self._ratio_marginal()
        return Support(spec.support.r_lo, spec.support.r_hi, self.vm)

    @property
    def vk_upper(self) -> float:
        return self.vk

    @property
    def admits_density(self) -> bool:
        return False

    def _density(self, vk, vm):
        raise NoDensity("point-mass population has no density")

    def _sample(self, n, rng):
        return np.column_stack((np.full(n, self.vk), np.full(n, self.vm)))

    def _ratio_marginal(self) -> RatioMarginalSpec:
        return RatioMarginalSpec.degenerate(self.vk / self.vm, self.vm)

    def _moment(self, j, k):
        return self.vk ** j * self.vm ** k, 0.0

    def _mean_vm(self):
        return self.vm, 0.0

    def _band_vm_moments(self, ra, rb):
        inside = ra <= self.vk / self.vm <= rb
        return (1.0 if inside else 0.0), (self.vm if inside else 0.0)

    def _quality_profile(self, p, xq):
        xq = np.asarray(xq, dtype=float)
        return (self.vk + xq - self.vm * p >= 0.0).astype(float)

    def to_dict(self) -> dict:
        return {"form": "point_mass", "vk": self.vk, "vm": self.vm}


def _require_seed_ratio(ratio: RatioMarginalSpec):
    if ratio.atoms or ratio.kind == "degenerate":
        raise DegenerateRatio("ratio specs carrying atoms describe outputs "
                              "and cannot seed a population")


@dataclass(frozen=True, eq=False)
class ProductPopulation(Population):
    """Ratio and money value independent: vk = r * vm with r ~ ratio."""

    ratio: RatioMarginalSpec
    vm: MarginalSpec
    form = "product"

    def __post_init__(self):
        _require_seed_ratio(self.ratio)
        if self.vm.is_degenerate and self.vm.value <= 0.0:
            raise DegenerateRatio("money value has an atom at a "
                                  "non-positive point")
        if self.vm.lo < 0.0:
            raise ValueError("money value support must be >= 0")

    @cached_property
    def support(self) -> Support:
        return Support(self.ratio.r_lo, self.ratio.r_hi, self.vm.hi)

    @property
    def vk_upper(self) -> float:
        return self.ratio.r_hi * self.vm.hi

    @property
    def admits_density(self) -> bool:
        return not self.vm.is_degenerate

    def _density(self, vk, vm):
        if self.vm.is_degenerate:
            raise NoDensity("degenerate money-value marginal")
        vk = np.asarray(vk, dtype=float)
        vm = np.asarray(vm, dtype=float)
        pos = vm > 0.0
        vms = np.where(pos, vm, 1.0)
        out = np.where(
            pos, self.ratio.pdf(vk / vms) * self.vm.pdf(vm) / vms, 0.0)
        return out if out.ndim else float(out)

    def _sample(self, n, rng):
        r = np.asarray(self.ratio.ppf(rng.random(n)))
        vm = self.vm.sample(n, rng)
        return np.column_stack((r * vm, vm))

    def _ratio_marginal(self) -> RatioMarginalSpec:
        return self.ratio

    def _moment(self, j, k):
        return self.ratio.moment(j) * self.vm.moment(j + k), 0.0

    def _mean_vm(self):
        return self.vm.mean, 0.0

    def _band_vm_moments(self, ra, rb):
        mass = float(self.ratio.cdf(rb) - self.ratio.cdf(ra))
        return mass, mass * self.vm.mean

    def _quality_profile(self, p, xq):
        xq = np.asarray(xq, dtype=float)
        n = xq.size
        r_lo, r_hi = self.ratio.r_lo, self.ratio.r_hi
        edges = [self.vm.lo, self.vm.hi]
        cols = [np.full((n, 1), float(np.clip(p, r_lo, r_hi)))]
        for edge in edges:
            if edge > 0.0:
                cols.append((p - xq / edge)[:, None])
        # kinks of the ratio density itself (e.g. a triangular peak);
        # densely tabulated specs are treated as smooth instead
        inner = np.asarray(self.ratio._as_table.x[1:-1], dtype=float)
        if 0 < inner.size <= 8:
            cols.append(np.broadcast_to(inner, (n, inner.size)))
        breaks = np.concatenate(cols, axis=1)
        nodes, wts = quadrature.segmented_gl(r_lo, r_hi, breaks,
                                             order=16, panels=3)
        c = nodes - p
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(c != 0.0, -xq[:, None] / np.where(c != 0.0, c, 1.0),
                         0.0)
        f_at_t = np.asarray(self.vm.cdf(t))
        s = np.where(c > 0.0, 1.0 - f_at_t,
                     np.where(c < 0.0, f_at_t,
                              (xq[:, None] >= 0.0).astype(float)))
        g = self.ratio.pdf(nodes)
        return np.einsum("ij,ij,ij->i", wts, g, s)

    def to_dict(self) -> dict:
        return {"form": "product", "ratio": self.ratio.to_dict(),
                "vm": self.vm.to_dict()}


@dataclass(frozen=True, eq=False)
class IndependentPopulation(Population):
    """Good value and money value independent with given marginals."""

    vk: MarginalSpec
    vm: MarginalSpec
    form = "independent"

    def __post_init__(self):
        if self.vk.lo < 0.0 or self.vk.hi <= 0.0:
            raise ValueError("good-value support must be >= 0 with some "
                             "positive mass")
        if self.vm.lo <= 0.0:
            raise DegenerateRatio("money-value support must be bounded away "
                                  "from zero for a bounded ratio")

    @cached_property
    def support(self) -> Support:
        return Support(self.vk.lo / self.vm.hi, self.vk.hi / self.vm.lo,
                       self.vm.hi)

    @property
    def vk_upper(self) -> float:
        return self.vk.hi

    @property
    def admits_density(self) -> bool:
        return not (self.vk.is_degenerate or self.vm.is_degenerate)

    def _density(self, vk, vm):
        if not self.admits_density:
            raise NoDensity("degenerate marginal component")
        vk = np.asarray(vk, dtype=float)
        vm = np.asarray(vm, dtype=float)
        out = self.vk.pdf(vk) * self.vm.pdf(vm)
        return out if np.ndim(out) else float(out)

    def _sample(self, n, rng):
        good = self.vk.sample(n, rng)
        money = self.vm.sample(n, rng)
        return np.column_stack((good, money))

    @cached_property
    def _ratio_table_spec(self) -> RatioMarginalSpec:
        """Tabulated ratio marginal g(r) = int u f_vk(r u) f_vm(u) du."""
        if self.vk.is_degenerate and self.vm.is_degenerate:
            return RatioMarginalSpec.degenerate(
                self.vk.value / self.vm.value, self.vm.hi)
        r = np.linspace(self.support.r_lo, self.support.r_hi,
                        TABLE_GRID_DEFAULT)
        if self.vm.is_degenerate:
            u0 = self.vm.value
            g = u0 * np.asarray(self.vk.pdf(r * u0))
            g = g / np.trapezoid(g, r)
            return RatioMarginalSpec.tabulated(r, g, self.vm.hi)
        if self.vk.is_degenerate:
            v0 = self.vk.value
            g = v0 / r ** 2 * np.asarray(self.vm.pdf(v0 / r))
            g = g / np.trapezoid(g, r)
            return RatioMarginalSpec.tabulated(r, g, self.vm.hi)
        rr = r[:, None]
        with np.errstate(divide="ignore"):
            breaks = np.concatenate(
                (np.where(rr > 0, self.vk.lo / np.where(rr > 0, rr, 1.0),
                          np.inf),
                 np.where(rr > 0, self.vk.hi / np.where(rr > 0, rr, 1.0),
                          np.inf)), axis=1)
        nodes, wts = quadrature.segmented_gl(self.vm.lo, self.vm.hi, breaks,
                                             order=12, panels=2)
        g = np.einsum("ij,ij->i", wts,
                      nodes * self.vm.pdf(nodes) * self.vk.pdf(r[:, None]
                                                               * nodes))
        g = np.clip(g, 0.0, None)
        g /= np.trapezoid(g, r)
        return RatioMarginalSpec.tabulated(r, g, self.vm.hi)

    def _ratio_marginal(self) -> RatioMarginalSpec:
        return self._ratio_table_spec

    def _moment(self, j, k):
        return self.vk.moment(j) * self.vm.moment(k), 0.0

    def _mean_vm(self):
        return self.vm.mean, 0.0

    def _band_vm_moments(self, ra, rb):
        if self.vm.is_degenerate:
            u0 = self.vm.value
            mass = float(self.vk.cdf(rb * u0) - self.vk.cdf(ra * u0))
            return mass, mass * u0
        cuts = []
        for edge in (self.vk.lo, self.vk.hi):
            for r_end in (ra, rb):
                if r_end > 0:
                    cuts.append(edge / r_end)

        def kernel(extra_power):
            def f(u):
                inner = (np.asarray(self.vk.cdf(rb * u))
                         - np.asarray(self.vk.cdf(ra * u)))
                return u ** extra_power * self.vm.pdf(u) * inner
            return f

        mass = quadrature.integrate(kernel(0), self.vm.lo, self.vm.hi,
                                    tol=1e-13, breakpoints=cuts)
        vm_int = quadrature.integrate(kernel(1), self.vm.lo, self.vm.hi,
                                      tol=1e-13, breakpoints=cuts)
        return mass, vm_int

    def _quality_profile(self, p, xq):
        xq = np.asarray(xq, dtype=float)
        if p == 0.0:
            return 1.0 - np.asarray(self.vk.cdf(-xq), dtype=float)
        if self.vm.is_degenerate:
            return 1.0 - np.asarray(
                self.vk.cdf(p * self.vm.value - xq), dtype=float)
        if self.vk.is_degenerate:
            return np.asarray(self.vm.cdf((self.vk.value + xq) / p),
                              dtype=float)
        breaks = np.column_stack(((self.vk.lo + xq) / p,
                                  (self.vk.hi + xq) / p))
        nodes, wts = quadrature.segmented_gl(self.vm.lo, self.vm.hi, breaks,
                                             order=16, panels=3)
        sk = 1.0 - np.asarray(self.vk.cdf(p * nodes - xq[:, None]))
        return np.einsum("ij,ij,ij->i", wts, self.vm.pdf(nodes), sk)

    def _demand_profile(self, prices):
        # exact route; the tabulated ratio marginal is an export layer
        zero = np.zeros(1)
        vals = [float(self._quality_profile(float(p), zero)[0])
                for p in prices]
        return np.clip(np.asarray(vals), 0.0, 1.0)

    def to_dict(self) -> dict:
        return {"form": "independent", "vk": self.vk.to_dict(),
                "vm": self.vm.to_dict()}


@dataclass(frozen=True, eq=False)
class RatioConditionalPopulation(Population):
    """Explicit ratio marginal with a truncated-normal conditional for vm.

    The conditional mean of vm given r equals h(r) / g(r) exactly, by
    symmetry of the truncation.  See :class:`ConditionalSpec`.
    """

    ratio: RatioMarginalSpec
    cond: ConditionalSpec
    form = "ratio_conditional"

    def __post_init__(self):
        _require_seed_ratio(self.ratio)
        if not self.ratio.has_density:
            raise DegenerateRatio("conditional construction needs a ratio "
                                  "density")
        scan, g = self._scan_grid()
        if g.min() <= 0.0:
            raise ValueError("ratio density must be positive on the whole "
                             "support for the conditional construction")
        if self.cond.family == "custom":
            tbl = self.cond.h_table
            if tbl.x[0] > self.ratio.r_lo or tbl.x[-1] < self.ratio.r_hi:
                raise ValueError("custom h table must cover the ratio "
                                 "support")
        m = self._m(scan)
        if np.any(m <= 0.0) or not np.all(np.isfinite(m)):
            raise ValueError("conditional mean curve must be positive and "
                             "finite")
        if self.cond.epsilon_kind == "fixed":
            if self.cond.epsilon_value >= m.min():
                raise ValueError(
                    f"fixed epsilon {self.cond.epsilon_value:g} must stay "
                    f"below the minimum conditional mean {m.min():g}")

    def _scan_grid(self):
        """Dense scan grid including every knot of g (and of custom h)."""
        knots = [self.ratio._as_table.x]
        if self.cond.family == "custom":
            knots.append(self.cond.h_table.x)
        knots.append(np.linspace(self.ratio.r_lo, self.ratio.r_hi, 1025))
        scan = np.unique(np.concatenate(knots))
        scan = scan[(scan >= self.ratio.r_lo) & (scan <= self.ratio.r_hi)]
        return scan, np.asarray(self.ratio.pdf(scan))

    # -- conditional building blocks ----------------------------------

    def _h(self, r):
        return self.cond.h(r, self.ratio.r_lo)

    def _m(self, r):
        return self._h(r) / self.ratio.pdf(r)

    def _eps(self, r):
        if self.cond.epsilon_kind == "half_mean":
            return 0.5 * self._m(r)
        return np.full_like(np.asarray(r, dtype=float),
                            self.cond.epsilon_value)

    @property
    def _a0(self) -> float:
        # Truncation half-width in pre-truncation standard deviations.
        return 1.0 / self.cond.sigma_multiplier

    @cached_property
    def _z_mass(self) -> float:
        return float(2.0 * ndtr(self._a0) - 1.0)

    @cached_property
    def _vm_band(self):
        scan, _ = self._scan_grid()
        m = self._m(scan)
        e = self._eps(scan)
        return float(np.min(m - e)), float(np.max(m + e))

    @cached_property
    def support(self) -> Support:
        hi = self._vm_band[1]
        return Support(self.ratio.r_lo, self.ratio.r_hi, hi * (1.0 + 1e-12))

    @property
    def vk_upper(self) -> float:
        return self.ratio.r_hi * self.support.vm_hi

    @property
    def admits_density(self) -> bool:
        return True

    def _density(self, vk, vm):
        vk = np.asarray(vk, dtype=float)
        vm = np.asarray(vm, dtype=float)
        pos = vm > 0.0
        vms = np.where(pos, vm, 1.0)
        r = vk / vms
        inside = pos & (r >= self.ratio.r_lo) & (r <= self.ratio.r_hi)
        rs = np.where(inside, r, 0.5 * (self.ratio.r_lo + self.ratio.r_hi))
        g = np.asarray(self.ratio.pdf(rs))
        m = self._m(rs)
        eps = self._eps(rs)
        sig = self.cond.sigma_multiplier * eps
        z = (vm - m) / sig
        in_band = np.abs(vm - m) <= eps
        q = np.exp(-0.5 * z * z) / (sig * _SQRT2PI * self._z_mass)
        out = np.where(inside & in_band, g * q / vms, 0.0)
        return out if out.ndim else float(out)

    def _sample(self, n, rng):
        r = np.asarray(self.ratio.ppf(rng.random(n)))
        a0 = self._a0
        u = rng.random(n)
        t = ndtri(ndtr(-a0) + u * self._z_mass)
        m = self._m(r)
        sig = self.cond.sigma_multiplier * self._eps(r)
        vm = m + sig * t
        return np.column_stack((r * vm, vm))

    def _ratio_marginal(self) -> RatioMarginalSpec:
        return self.ratio

    @cached_property
    def _even_moments(self):
        return _trunc_std_even_moments(self._a0, 16)

    def _cond_vm_moment(self, r, n: int):
        """E[vm**n | r], vectorized over r."""
        m = self._m(r)
        sig = self.cond.sigma_multiplier * self._eps(r)
        out = np.zeros_like(np.asarray(r, dtype=float))
        for i in range(0, n + 1, 2):
            out = out + (math.comb(n, i) * m ** (n - i) * sig ** i
                         * self._even_moments[i])
        return out

    def _moment(self, j, k):
        tol = 1e-11
        n = j + k

        def f(r):
            return self.ratio.pdf(r) * r ** j * self._cond_vm_moment(r, n)

        knots = self.ratio._as_table.x
        value = quadrature.integrate(f, self.ratio.r_lo, self.ratio.r_hi,
                                     tol=tol, breakpoints=knots[1:-1])
        return value, tol

    def _mean_vm(self):
        return (self.cond.h_integral(self.ratio.r_lo, self.ratio.r_lo,
                                     self.ratio.r_hi), 0.0)

    def _band_vm_moments(self, ra, rb):
        mass = float(self.ratio.cdf(rb) - self.ratio.cdf(ra))
        vm_int = self.cond.h_integral(self.ratio.r_lo, ra, rb)
        return mass, vm_int

    def boundary_mean_analytic(self) -> float:
        """Conditional mean of vm exactly at the lower ratio endpoint."""
        r_lo = self.ratio.r_lo
        return float(self.cond.h(r_lo, r_lo)) / self.ratio.g_lo

    def _quality_profile(self, p, xq):
        xq = np.asarray(xq, dtype=float)
        n = xq.size
        r_lo, r_hi = self.ratio.r_lo, self.ratio.r_hi
        col = xq[:, None]

        def edge_cross(sign):
            def psi(rmat):
                m = self._m(rmat)
                return (m + sign * self._eps(rmat)) * (rmat - p) + col
            return psi

        roots_hi = quadrature.solve_crossings(edge_cross(+1.0), r_lo, r_hi, n)
        roots_lo = quadrature.solve_crossings(edge_cross(-1.0), r_lo, r_hi, n)
        fixed = np.full((n, 1), float(np.clip(p, r_lo, r_hi)))
        breaks = np.concatenate((roots_hi, roots_lo, fixed), axis=1)
        nodes, wts = quadrature.segmented_gl(r_lo, r_hi, breaks,
                                             order=16, panels=2)
        a0 = self._a0
        m = self._m(nodes)
        sig = self.cond.sigma_multiplier * self._eps(nodes)
        c = nodes - p
        with np.errstate(divide="ignore", invalid="ignore"):
            t = -xq[:, None] / np.where(c != 0.0, c, 1.0)
            z = np.clip((t - m) / sig, -a0, a0)
        phi = ndtr(z)
        hi_cap = ndtr(a0)
        s = np.where(c > 0.0, (hi_cap - phi) / self._z_mass,
                     np.where(c < 0.0, (phi - (1.0 - hi_cap)) / self._z_mass,
                              (xq[:, None] >= 0.0).astype(float)))
        g = np.asarray(self.ratio.pdf(nodes))
        return np.einsum("ij,ij,ij->i", wts, g, s)

    def to_dict(self) -> dict:
        out = {"form": "ratio_conditional", "ratio": self.ratio.to_dict()}
        out.update(self.cond.to_dict())
        return out


@dataclass(frozen=True, eq=False)
class MixturePopulation(Population):
    """Finite convex combination of populations."""

    components: tuple
    form = "mixture"

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        comps = []
        total = 0.0
        for weight, pop in self.components:
            if weight <= 0.0:
                raise ValueError("mixture weights must be positive")
            if not isinstance(pop, Population):
                raise TypeError("mixture components must be populations")
            comps.append((float(weight), pop))
            total += weight
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"mixture weights sum to {total:.12g}, not 1")
        comps = [(w / total, pop) for w, pop in comps]
        object.__setattr__(self, "components", tuple(comps))

    @cached_property
    def support(self) -> Support:
        subs = [pop.support for _, pop in self.components]
        return Support(min(s.r_lo for s in subs), max(s.r_hi for s in subs),
                       max(s.vm_hi for s in subs))

    @property
    def vk_upper(self) -> float:
        return max(pop.vk_upper for _, pop in self.components)

    @property
    def admits_density(self) -> bool:
        return all(pop.admits_density for _, pop in self.components)

    def _density(self, vk, vm):
        if not self.admits_density:
            raise NoDensity("a mixture component has no density")
        out = 0.0
        for w, pop in self.components:
            out = out + w * np.asarray(pop._density(vk, vm))
        return out if np.ndim(out) else float(out)

    def _sample(self, n, rng):
        weights = np.array([w for w, _ in self.components])
        idx = rng.choice(len(self.components), size=n, p=weights)
        out = np.empty((n, 2))
        for i, (_, pop) in enumerate(self.components):
            mask = idx == i
            cnt = int(mask.sum())
            if cnt:
                out[mask] = pop._sample(cnt, rng)
        return out

    @cached_property
    def _mixture_ratio_spec(self) -> RatioMarginalSpec:
        specs = [(w, pop._ratio_marginal()) for w, pop in self.components]
        atoms: list = []
        for w, spec in specs:
            atoms.extend((pos, w * mass) for pos, mass in spec.atoms)
        cont = 1.0 - sum(m for _, m in atoms)
        sup = self.support
        if cont <= 1e-12:
            if len(atoms) == 1:
                return RatioMarginalSpec.degenerate(atoms[0][0], sup.vm_hi)
            zero = np.zeros(2)
            table = PwLinearTable(np.array([sup.r_lo, sup.r_hi]), zero, 0.0)
            return RatioMarginalSpec("tabulated", sup, table=table,
                                     atoms=tuple(atoms))
        r = np.linspace(sup.r_lo, sup.r_hi, TABLE_GRID_DEFAULT)
        g = np.zeros_like(r)
        for w, spec in specs:
            if spec.kind != "degenerate":
                g = g + w * np.asarray(spec.pdf(r))
        raw = np.trapezoid(g, r)
        g = g * (cont / raw)
        return RatioMarginalSpec.tabulated(r, g, sup.vm_hi,
                                           atoms=tuple(atoms))

    def _ratio_marginal(self) -> RatioMarginalSpec:
        return self._mixture_ratio_spec

    def _moment(self, j, k):
        value = 0.0
        diag = 0.0
        for w, pop in self.components:
            v, d = pop._moment(j, k)
            value += w * v
            diag += w * d
        return value, diag

    def _mean_vm(self):
        value = 0.0
        diag = 0.0
        for w, pop in self.components:
            v, d = pop._mean_vm()
            value += w * v
            diag += w * d
        return value, diag

    def _band_vm_moments(self, ra, rb):
        mass = 0.0
        vm_int = 0.0
        for w, pop in self.components:
            m, v = pop._band_vm_moments(ra, rb)
            mass += w * m
            vm_int += w * v
        return mass, vm_int

    def _quality_profile(self, p, xq):
        out = 0.0
        for w, pop in self.components:
            out = out + w * pop._quality_profile(p, xq)
        return out

    def _demand_profile(self, prices):
        # exact component blend; the tabulated marginal smears component
        # edges over one grid cell and is kept for export only
        out = 0.0
        for w, pop in self.components:
            out = out + w * pop._demand_profile(prices)
        return np.clip(out, 0.0, 1.0)

    def to_dict(self) -> dict:
        return {"form": "mixture",
                "components": [{"weight": w, "population": pop.to_dict()}
                               for w, pop in self.components]}


# -- family constructors and bounds -----------------------------------

def _low_delta_bound(ratio: RatioMarginalSpec) -> float:
    """Largest admissible offset for the low-regime mean curve.

    Equals 2 g(r_lo) * int (r - r_lo) dr over the support, which keeps
    h(r_lo) weakly below twice the integral of h.
    """
    length = ratio.r_hi - ratio.r_lo
    return ratio.g_lo * length ** 2


def _high_delta_bound(ratio: RatioMarginalSpec) -> float:
    """Supremum of offsets keeping the high-regime curve valid (strict).

    The positive root of delta**2 + L*delta - 1/(16 g(r_lo)**2), with
    L the support length.
    """
    g0 = ratio.g_lo
    if g0 <= 0.0:
        return np.inf
    length = ratio.r_hi - ratio.r_lo
    return 0.5 * (math.sqrt(length ** 2 + 1.0 / (4.0 * g0 ** 2)) - length)


def make_low_population(ratio: RatioMarginalSpec, delta: float,
                        **cond_kwargs) -> RatioConditionalPopulation:
    """Population with the given ratio marginal and a *low* boundary mean.

    The conditional mean curve is m(r) = ((r - r_lo) + delta) / g(r); the
    offset must satisfy 0 < delta <= 2 g(r_lo) * int (r - r_lo) dr, else
    :class:`BoundViolation`.
    """
    _require_seed_ratio(ratio)
    bound = _low_delta_bound(ratio)
    if not 0.0 < delta <= bound:
        raise BoundViolation(
            f"low-family offset {delta:g} outside (0, {bound:g}]",
            delta=delta, bound=bound)
    return RatioConditionalPopulation(
        ratio, ConditionalSpec("low", delta=delta, **cond_kwargs))


def make_high_population(ratio: RatioMarginalSpec, delta: float,
                         **cond_kwargs) -> RatioConditionalPopulation:
    """Population with the given ratio marginal and a *high* boundary mean.

    The conditional mean curve is m(r) = (r - r_lo + delta)**-0.5 / g(r);
    the offset must satisfy 0 < delta < bound with the bound the positive
    root of delta**2 + L*delta - 1/(16 g(r_lo)**2) (strict inequality),
    else :class:`BoundViolation`.
    """
    _require_seed_ratio(ratio)
    bound = _high_delta_bound(ratio)
    if not 0.0 < delta < bound:
        raise BoundViolation(
            f"high-family offset {delta:g} outside (0, {bound:g})",
            delta=delta, bound=bound)
    return RatioConditionalPopulation(
        ratio, ConditionalSpec("high", delta=delta, **cond_kwargs))


# -- module-level operations ------------------------------------------

def density(pop: Population, vk, vm):
    """Joint density of (vk, vm); raises NoDensity on degenerate forms."""
    return pop._density(vk, vm)


def sample(pop: Population, n: int, seed: int) -> np.ndarray:
    """Draw n consumers as an (n, 2) array of (vk, vm) rows."""
    if n < 0:
        raise ValueError("sample size must be >= 0")
    rng = np.random.default_rng(seed)
    return pop._sample(int(n), rng)


def ratio_marginal(pop: Population) -> RatioMarginalSpec:
    """Marginal law of the ratio vk / vm (degenerate forms give atoms)."""
    return pop._ratio_marginal()


def moments(pop: Population, max_order: int) -> MomentTable:
    """Cross moments E[vk**j vm**k] for all j + k <= max_order."""
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    entries = {}
    errors = {}
    for n in range(max_order + 1):
        for j in range(n + 1):
            value, diag = pop._moment(j, n - j)
            entries[(j, n - j)] = float(value)
            errors[(j, n - j)] = float(diag)
    return MomentTable(max_order, entries, errors)
