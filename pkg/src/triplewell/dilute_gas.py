"""Dilute instanton gas for the 0 -> 1 transition and the three lowest levels.

A path contributing to <1| exp(-H T) |0> is a string of k (odd) widely
separated instantons and anti-instantons hopping between adjacent minima.
Each hop carries the density d per unit omega*tau, the centres range over
the ordered simplex of volume (omega T)^k / k!, and there are
2^((k-1)/2) admissible hop sequences.  Summing gives

    A(T) = sqrt(3 omega / 4 pi) exp(-3 omega T / 4) sinh(omega T d),

whose large-T decomposition yields E = 3 omega/4 -+ omega d (and 3 omega/4
for the odd state, which does not couple to x = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EvenK
from .fluctuation import FluctuationResult, reduced_ratio, stability_problem
from .instanton import box_grid, closed_form_profile


def instanton_action(omega: float) -> float:
    """S = omega / 4 for the canonical triple well."""
    return omega / 4.0


def instanton_density(omega: float) -> float:
    """d = sqrt(8 / 3 pi) sqrt(S) exp(-S), with the pair factor sqrt(2) absorbed."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    s = instanton_action(omega)
    return math.sqrt(8.0 / (3.0 * math.pi)) * math.sqrt(s) * math.exp(-s)


def one_instanton_density(omega: float) -> float:
    """Density of a single hop, sqrt(4 / 3 pi) sqrt(S) exp(-S).

    Differs from :func:`instanton_density` by sqrt(2): writing the factor
    2^((k-1)/2) as 2^(k/2) / sqrt(2) moves one sqrt(2) into every hop and
    a 1/sqrt(2) into the prefactor, (3w/2pi)^(1/2) -> (3w/4pi)^(1/2).
    """
    return instanton_density(omega) / math.sqrt(2.0)


def prefactor(omega: float) -> float:
    return math.sqrt(3.0 * omega / (4.0 * math.pi))


def translational_volume(k: int, omega: float, T: float) -> float:
    """(omega T)^k / k!, the volume of ordered instanton centres."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return 1.0
    return math.exp(k * math.log(omega * T) - math.lgamma(k + 1))


def combinatorial_factor(k: int) -> float:
    if k < 1:
        raise ValueError("k must be a positive odd integer")
    if k % 2 == 0:
        raise EvenK(f"k = {k}: the 0 -> 1 channel needs an odd number of hops")
    return float(2 ** ((k - 1) // 2))


def amplitude(omega: float, T: float, k_max: float = math.inf, density: float | None = None) -> float:
    """<x=1| exp(-H T) |x=0> in the dilute-gas approximation.

    ``k_max = inf`` gives the sinh closed form; a finite ``k_max`` sums the
    odd-k terms with k <= k_max.
    """
    d = instanton_density(omega) if density is None else density
    pre = prefactor(omega) * math.exp(-0.75 * omega * T)
    x = omega * T * d
    if math.isinf(k_max):
        return pre * math.sinh(x)
    terms, term = [], x
    for k in range(1, int(k_max) + 1, 2):
        terms.append(term)
        term *= x * x / ((k + 1) * (k + 2))
    return pre * math.fsum(terms)


def amplitude_series(omega: float, T: float, rtol: float = 1e-15) -> tuple[float, int]:
    """Partial sum stopped once the next term is below ``rtol`` of the sum.

    Returns (value, largest k included).
    """
    d = instanton_density(omega)
    x = omega * T * d
    term, total, k = x, 0.0, 1
    while True:
        total += term
        nxt = term * x * x / ((k + 1) * (k + 2))
        if nxt < rtol * total:
            break
        term, k = nxt, k + 2
    return prefactor(omega) * math.exp(-0.75 * omega * T) * total, k


def log_amplitude(omega: float, T: float) -> float:
    x = omega * T * instanton_density(omega)
    log_sinh = x + math.log1p(-math.exp(-2.0 * x)) - math.log(2.0)
    return math.log(prefactor(omega)) - 0.75 * omega * T + log_sinh


@dataclass(frozen=True)
class SpectrumTriplet:
    e0: float
    e1: float
    e2: float

    def __post_init__(self) -> None:
        if not self.e0 <= self.e1 <= self.e2:
            raise ValueError(f"levels out of order: {self.e0}, {self.e1}, {self.e2}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.e0, self.e1, self.e2)


def energy_levels(omega: float) -> SpectrumTriplet:
    centre = 0.75 * omega
    split = omega * instanton_density(omega)
    return SpectrumTriplet(centre - split, centre, centre + split)


def fit_energy_levels(omega: float) -> SpectrumTriplet:
    """Recover E0 and E2 from the time dependence of the 0 -> 1 amplitude.

    The amplitude is a two-exponential signal a (e^{-E0 T} - e^{-E2 T}).
    Four equally spaced samples determine both rates exactly (Prony): the
    samples obey a_{n+2} = p a_{n+1} - q a_n with e^{-E s} the roots of
    z^2 - p z + q.  Samples are rescaled by e^{c T} with c read off the
    log-slope of the last two, which keeps them representable.  The odd
    level E1 is invisible in this channel and is returned as 3 omega / 4.
    """
    gap = 2.0 * omega * instanton_density(omega)
    s = 1.0 / gap
    times = s * np.arange(1, 5)
    logs = np.array([log_amplitude(omega, t) for t in times])
    c = -(logs[3] - logs[2]) / s
    a = np.exp(logs + c * times - np.max(logs + c * times))
    p, q = np.linalg.solve([[a[1], -a[0]], [a[2], -a[1]]], [a[2], a[3]])
    disc = math.sqrt(p * p - 4.0 * q)
    z_slow, z_fast = 0.5 * (p + disc), 0.5 * (p - disc)
    e0 = c - math.log(z_slow) / s
    e2 = c - math.log(z_fast) / s
    return SpectrumTriplet(float(e0), 0.75 * omega, float(e2))


def pipeline_density(omega: float, half_box: float | None = None) -> tuple[float, FluctuationResult]:
    """Density assembled from the computed determinant ratio.

    d = sqrt(2) (Det'/Det)^(-1/2) sqrt(S / 2 pi) exp(-S) / omega, with
    Det'/Det from the Gelfand-Yaglom route on the closed-form instanton and
    the sqrt(2) of the pair-counting factor absorbed as in
    :func:`instanton_density`.
    """
    if half_box is None:
        half_box = 8.0 / omega
    profile = closed_form_profile(omega, grid=box_grid(omega, half_box))
    result = reduced_ratio(profile, stability_problem(profile, half_box))
    s = instanton_action(omega)
    d = (
        math.sqrt(2.0)
        * result.reduced_ratio ** -0.5
        * math.sqrt(s / (2.0 * math.pi))
        * math.exp(-s)
        / omega
    )
    return d, result


@dataclass(frozen=True)
class DiluteGasResult:
    omega: float
    density: float
    prefactor: float
    energies: SpectrumTriplet
    k_max_used: int
    density_pipeline: float
    fluctuation: FluctuationResult = field(repr=False)

    @property
    def amplitude_fn(self) -> Callable[[float], float]:
        return lambda T: amplitude(self.omega, T)

    @property
    def density_ratio(self) -> float:
        return self.density_pipeline / self.density

    def to_record(self) -> dict[str, float]:
        return {
            "omega": self.omega,
            "d": self.density,
            "E0": self.energies.e0,
            "E1": self.energies.e1,
            "E2": self.energies.e2,
            "d_pipeline": self.density_pipeline,
            "d_ratio": self.density_ratio,
        }


def dilute_gas(omega: float, half_box: float | None = None) -> DiluteGasResult:
    """Closed-form density and levels plus the pipeline density diagnostic.

    ``k_max_used`` is the series length needed at T = 2 * half_box.
    """
    if half_box is None:
        half_box = 8.0 / omega
    d_pipe, fluct = pipeline_density(omega, half_box)
    _, k_used = amplitude_series(omega, 2.0 * half_box)
    return DiluteGasResult(
        omega=omega,
        density=instanton_density(omega),
        prefactor=prefactor(omega),
        energies=energy_levels(omega),
        k_max_used=k_used,
        density_pipeline=d_pipe,
        fluctuation=fluct,
    )
