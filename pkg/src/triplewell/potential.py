"""Potential families: triple well, harmonic reference and symmetric double well.

All potentials use unit mass and are shifted so that every minimum sits at
V = 0.  The triple well is

    V(x) = k * x**2 * (x**2 - 1)**2,

with ``k = omega**2 / 2`` under the ``canonical`` convention and
``k = omega**2 / 8`` under the ``literal`` one.  Only the canonical
normalization is consistent with the closed-form instanton
``x_c = sqrt((1 + tanh(omega * tau)) / 2)``, its action ``omega / 4`` and the
well frequencies ``omega`` (central) and ``2 * omega`` (lateral); the literal
one is kept so both readings of the prefactor can be compared.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]

# V = DOUBLE_WELL_COEFF * omega^2 * (x^2 - 1)^2 gives V''(+-1) = omega^2.
DOUBLE_WELL_COEFF = 0.125


class Family(str, Enum):
    TRIPLE_WELL = "triple_well"
    HARMONIC = "harmonic"
    DOUBLE_WELL = "double_well"


class Convention(str, Enum):
    CANONICAL = "canonical"
    LITERAL = "literal"


@dataclass(frozen=True)
class PotentialSpec:
    """A member of one of the supported potential families.

    ``omega`` is the frequency parameter.  For the harmonic family it is the
    oscillator frequency itself (V = omega^2 x^2 / 2).  ``convention`` only
    affects the triple well.
    """

    family: Family = Family.TRIPLE_WELL
    omega: float = 1.0
    convention: Convention = Convention.CANONICAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "convention", Convention(self.convention))
        omega = float(self.omega)
        if not np.isfinite(omega) or omega <= 0.0:
            raise ValueError(f"omega must be a positive finite number, got {self.omega!r}")
        object.__setattr__(self, "omega", omega)

    @property
    def coefficient(self) -> float:
        """Overall prefactor multiplying the polynomial part of V."""
        w2 = self.omega**2
        if self.family is Family.TRIPLE_WELL:
            return w2 / 2.0 if self.convention is Convention.CANONICAL else w2 / 8.0
        if self.family is Family.HARMONIC:
            return w2 / 2.0
        return DOUBLE_WELL_COEFF * w2


def triple_well(omega: float, convention: Convention | str = Convention.CANONICAL) -> PotentialSpec:
    return PotentialSpec(Family.TRIPLE_WELL, omega, Convention(convention))


def harmonic(nu: float) -> PotentialSpec:
    return PotentialSpec(Family.HARMONIC, nu)


def double_well(omega: float) -> PotentialSpec:
    return PotentialSpec(Family.DOUBLE_WELL, omega)


def canonical_omega(spec: PotentialSpec) -> float:
    """Frequency parameter of the canonical triple well describing ``spec``.

    A literal-convention well with parameter omega is the canonical well
    with parameter omega / 2.
    """
    if spec.family is not Family.TRIPLE_WELL:
        raise ValueError("canonical_omega is only defined for the triple well")
    return spec.omega if spec.convention is Convention.CANONICAL else spec.omega / 2.0


def evaluate(spec: PotentialSpec, x: ArrayLike) -> FloatArray:
    """Potential energy V(x)."""
    x = np.asarray(x, dtype=np.float64)
    k = spec.coefficient
    if spec.family is Family.TRIPLE_WELL:
        return k * x**2 * (x**2 - 1.0) ** 2
    if spec.family is Family.HARMONIC:
        return k * x**2
    return k * (x**2 - 1.0) ** 2


def first_derivative(spec: PotentialSpec, x: ArrayLike) -> FloatArray:
    x = np.asarray(x, dtype=np.float64)
    k = spec.coefficient
    if spec.family is Family.TRIPLE_WELL:
        return k * (6.0 * x**5 - 8.0 * x**3 + 2.0 * x)
    if spec.family is Family.HARMONIC:
        return 2.0 * k * x
    return k * 4.0 * x * (x**2 - 1.0)


def second_derivative(spec: PotentialSpec, x: ArrayLike) -> FloatArray:
    """Analytic curvature V''(x)."""
    x = np.asarray(x, dtype=np.float64)
    k = spec.coefficient
    if spec.family is Family.TRIPLE_WELL:
        return k * (30.0 * x**4 - 24.0 * x**2 + 2.0)
    if spec.family is Family.HARMONIC:
        return np.full_like(x, 2.0 * k)
    return k * (12.0 * x**2 - 4.0)


def bogomolny_speed(spec: PotentialSpec, x: ArrayLike) -> FloatArray:
    """|dx/dtau| = sqrt(2 V(x)) along a zero-energy euclidean trajectory."""
    return np.sqrt(2.0 * evaluate(spec, x))


def minima(spec: PotentialSpec) -> list[float]:
    if spec.family is Family.TRIPLE_WELL:
        return [-1.0, 0.0, 1.0]
    if spec.family is Family.HARMONIC:
        return [0.0]
    return [-1.0, 1.0]


class WellFrequencies(NamedTuple):
    per_minimum: dict[float, float]
    average: float


def well_frequencies(spec: PotentialSpec) -> WellFrequencies:
    """Harmonic frequency sqrt(V''(m)) of every minimum and their average.

    The average runs over the *distinct* well types, so the two equivalent
    lateral wells of the triple well count once: nu = (omega + 2 omega) / 2
    in the canonical convention.
    """
    per_min = {m: float(np.sqrt(second_derivative(spec, m))) for m in minima(spec)}
    distinct: dict[float, float] = {}
    for f in per_min.values():
        distinct.setdefault(round(f, 12), f)
    return WellFrequencies(per_min, float(np.mean(list(distinct.values()))))
