"""Shared builders for the test suite: one population per family."""

import numpy as np

from demandlab import populations as pops
from demandlab.marginals import MarginalSpec

# Closed-form anchors for the Uniform[1, 2] ratio seed (density g = 1,
# width L = 1): the low family tolerates offsets up to g_lo * L**2 = 1,
# the high family up to (sqrt(L**2 + 1/(4 g_lo**2)) - L) / 2.
LOW_BOUND_U12 = 1.0
HIGH_BOUND_U12 = 0.5 * (np.sqrt(1.25) - 1.0)  # 0.05901699437494745...

# Money-value means of the two stock demo populations: the low family
# with delta = 0.5 has E[vm] = int_1^2 (r - 0.5) dr = 1; the high family
# with delta = 0.04 has E[vm] = 2 (sqrt(1.04) - sqrt(0.04)).
LOW_MEAN_VM = 1.0
HIGH_MEAN_VM = 2.0 * (np.sqrt(1.04) - 0.2)


def seed_ratio(vm_hi: float = 100.0) -> pops.RatioMarginalSpec:
    return pops.RatioMarginalSpec.uniform(1.0, 2.0, vm_hi=vm_hi)


def beta_independent() -> pops.IndependentPopulation:
    return pops.IndependentPopulation(
        MarginalSpec.scaled_beta(2.0, 3.0, lo=0.0, hi=1.0),
        MarginalSpec.scaled_beta(2.0, 2.0, lo=0.5, hi=1.5))


def population_zoo() -> dict:
    """One instance of every constructible population family."""
    ratio3 = pops.RatioMarginalSpec.uniform(1.0, 2.0, vm_hi=3.0)
    return {
        "point_mass": pops.PointMassPopulation(vk=2.0, vm=1.0),
        "product": pops.ProductPopulation(
            ratio3, MarginalSpec.scaled_beta(2.0, 2.0, lo=0.5, hi=1.5)),
        "independent": beta_independent(),
        "conditional_low": pops.make_low_population(seed_ratio(), delta=0.5),
        "conditional_high": pops.make_high_population(seed_ratio(),
                                                      delta=0.04),
        "mixture": pops.MixturePopulation((
            (0.4, pops.ProductPopulation(ratio3,
                                         MarginalSpec.uniform(0.5, 1.5))),
            (0.6, pops.PointMassPopulation(vk=2.0, vm=1.0)))),
    }


def continuous_zoo() -> dict:
    """Families whose ratio law carries no atoms (smooth demand)."""
    zoo = population_zoo()
    zoo.pop("point_mass")
    zoo.pop("mixture")
    zoo["mixture"] = pops.MixturePopulation((
        (0.3, pops.ProductPopulation(
            pops.RatioMarginalSpec.uniform(1.0, 2.0, vm_hi=3.0),
            MarginalSpec.uniform(0.5, 1.5))),
        (0.7, pops.ProductPopulation(
            pops.RatioMarginalSpec.triangular(0.8, 2.2, vm_hi=3.0),
            MarginalSpec.uniform(0.5, 1.5)))))
    return zoo
