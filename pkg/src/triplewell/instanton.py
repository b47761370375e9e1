"""Euclidean instanton between adjacent minima, its action and zero mode.

Profiles are tabulated on a uniform time grid.  The closed-form triple-well
instanton is available analytically; any adjacent pair of minima of a
supported potential can also be joined numerically by integrating the
first-order (Bogomol'nyi) equation dx/dtau = +-sqrt(2 V(x)).
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import quad, simpson, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.special import expit

from .errors import InsufficientTail, NonAdjacentMinima, QuadratureFailure
from .potential import (
    FloatArray,
    PotentialSpec,
    bogomolny_speed,
    evaluate,
    minima,
    second_derivative,
    triple_well,
)

# Default box and resolution, in units of 1/omega.
DEFAULT_OMEGA_T = 40.0
DEFAULT_OMEGA_STEP = 0.01
# Inside V < BOUNDARY_LAYER_V the linearized approach to the minimum is used.
BOUNDARY_LAYER_V = 1e-12


def make_grid(half_box: float, step: float) -> FloatArray:
    """Uniform grid on [-half_box, half_box] with spacing at most ``step``."""
    if half_box <= 0 or step <= 0:
        raise ValueError("half_box and step must be positive")
    n = int(np.ceil(2.0 * half_box / step - 1e-9)) + 1
    return np.linspace(-half_box, half_box, max(n, 3))


def default_grid(omega: float, half_box: float | None = None) -> FloatArray:
    if half_box is None:
        half_box = 0.5 * DEFAULT_OMEGA_T / omega
    return make_grid(half_box, DEFAULT_OMEGA_STEP / omega)


def box_grid(omega: float, half_box: float, margin: float = 20.0) -> FloatArray:
    """Grid reaching at least margin/omega that has +-half_box as nodes."""
    if half_box <= 0:
        raise ValueError("half_box must be positive")
    step = half_box / math.ceil(half_box * omega / DEFAULT_OMEGA_STEP)
    outer = step * math.ceil(max(half_box, margin / omega) / step - 1e-9)
    return np.linspace(-outer, outer, 2 * int(round(outer / step)) + 1)


@dataclass(frozen=True, eq=False)
class InstantonProfile:
    """Tabulated classical solution x_c(tau) and its velocity.

    ``c_const`` and ``d_const`` are the amplitudes of the normalized zero
    mode in the tails: x_o ~ c_const * exp(-k_end * tau) as tau -> +inf and
    x_o ~ d_const * exp(k_start * tau) as tau -> -inf, where k_start and
    k_end are the well frequencies at ``x_start`` and ``x_end``.
    """

    tau: FloatArray
    x_c: FloatArray
    dx_c: FloatArray
    tau_c: float
    action: float
    c_const: float
    d_const: float
    potential: PotentialSpec
    x_start: float
    x_end: float
    exact_position: Callable[[FloatArray], FloatArray] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        for name in ("tau", "x_c", "dx_c"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.tau.shape == self.x_c.shape == self.dx_c.shape) or self.tau.ndim != 1:
            raise ValueError("tau, x_c and dx_c must be 1-D arrays of equal length")
        if np.any(np.diff(self.tau) <= 0):
            raise ValueError("tau grid must be strictly increasing")

    @property
    def step(self) -> float:
        return float(self.tau[1] - self.tau[0])

    @property
    def start_rate(self) -> float:
        """Decay rate of the zero mode as tau -> -inf."""
        return float(np.sqrt(second_derivative(self.potential, self.x_start)))

    @property
    def end_rate(self) -> float:
        return float(np.sqrt(second_derivative(self.potential, self.x_end)))

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.tau, self.x_c)

    def position(self, tau) -> FloatArray:
        """x_c at arbitrary times inside the grid (exact when available)."""
        tau = np.asarray(tau, dtype=np.float64)
        if self.exact_position is not None:
            return self.exact_position(tau)
        return self._spline(tau)

    def curvature(self, tau) -> FloatArray:
        """V''(x_c(tau)), the potential term of the stability operator."""
        return second_derivative(self.potential, self.position(tau))

    def restrict(self, half_box: float) -> InstantonProfile:
        """Sub-profile on [-half_box, half_box]; both ends must be grid points."""
        lo = _grid_index(self.tau, -half_box)
        hi = _grid_index(self.tau, half_box)
        return InstantonProfile(
            self.tau[lo : hi + 1],
            self.x_c[lo : hi + 1],
            self.dx_c[lo : hi + 1],
            self.tau_c,
            self.action,
            self.c_const,
            self.d_const,
            self.potential,
            self.x_start,
            self.x_end,
            self.exact_position,
        )


def _grid_index(tau: FloatArray, t: float) -> int:
    i = int(np.argmin(np.abs(tau - t)))
    h = tau[1] - tau[0]
    if abs(tau[i] - t) > 1e-6 * h:
        raise ValueError(f"time {t} is not a node of the profile grid")
    return i


def closed_form_profile(
    omega: float, tau_c: float = 0.0, grid: FloatArray | None = None
) -> InstantonProfile:
    """Analytic instanton from x = 0 to x = 1 of the canonical triple well.

    x_c = sqrt((1 + tanh(omega (tau - tau_c))) / 2), written with logistic
    functions so that 1 - x_c**2 keeps full relative precision in the tail.
    """
    if grid is None:
        grid = default_grid(omega)
    tau = np.asarray(grid, dtype=np.float64)

    def position(t):
        return np.sqrt(expit(2.0 * omega * (np.asarray(t) - tau_c)))

    z2 = 2.0 * omega * (tau - tau_c)
    x = np.sqrt(expit(z2))
    dx = omega * x * expit(-z2)
    action = omega / 4.0
    amp = omega / np.sqrt(action)
    return InstantonProfile(
        tau, x, dx, float(tau_c), action, amp, amp,
        triple_well(omega), 0.0, 1.0, position,
    )


def _check_adjacent(spec: PotentialSpec, x_start: float, x_end: float) -> None:
    mins = minima(spec)
    idx = []
    for x in (x_start, x_end):
        hits = [i for i, m in enumerate(mins) if abs(m - x) < 1e-12]
        if not hits:
            raise NonAdjacentMinima(f"{x} is not a minimum of the {spec.family.value} potential")
        idx.append(hits[0])
    if abs(idx[0] - idx[1]) != 1:
        raise NonAdjacentMinima(
            f"({x_start}, {x_end}) are not neighbouring minima; minima are {mins}"
        )


def _regular_part(spec: PotentialSpec, m: float, x_a: float, tol: float) -> float:
    """Finite part of the time integral from the anchor to the minimum m.

    Returns int |dx| [1/sqrt(2V) - 1/(k |x - m|)] between m and x_a, with
    k the well frequency at m.
    """
    k = float(np.sqrt(second_derivative(spec, m)))

    def integrand(x):
        d = abs(x - m)
        if d == 0.0:
            return 0.0
        return 1.0 / float(bogomolny_speed(spec, x)) - 1.0 / (k * d)

    a, b = sorted((m, x_a))
    val, err = quad(integrand, a, b, epsabs=tol, epsrel=tol, limit=200)
    if not np.isfinite(val) or err > 1e3 * max(tol, abs(val) * tol):
        raise QuadratureFailure(f"tail integral near minimum {m} did not converge (err={err:.3g})")
    return val


def solve_bogomolny(
    spec: PotentialSpec,
    x_start: float,
    x_end: float,
    grid: FloatArray | None = None,
    tol: float = 1e-12,
    tau_c: float = 0.0,
) -> InstantonProfile:
    """Numerical instanton joining two adjacent minima.

    The quadrature tau(x) = tau_c + int dx / sqrt(2 V) is inverted onto the
    grid by integrating dx/dtau = +-sqrt(2V) outward from the anchor point
    x(tau_c) = sign(x_start + x_end) * sqrt((x_start**2 + x_end**2) / 2)
    (the crossing point of the closed-form triple-well kink, and the origin
    for the symmetric double well).  Once V drops below BOUNDARY_LAYER_V the
    linearized solution x = m + (x_b - m) exp(-k |tau - tau_b|) takes over.
    The tail amplitudes of the zero mode come from the regularized
    quadrature, not from the grid.
    """
    _check_adjacent(spec, x_start, x_end)
    if grid is None:
        grid = default_grid(spec.omega)
    tau = np.asarray(grid, dtype=np.float64)
    sign = 1.0 if x_end > x_start else -1.0
    x_a = float(np.sign(x_start + x_end) * np.sqrt(0.5 * (x_start**2 + x_end**2)))

    def rhs(_t, y):
        return sign * np.sqrt(2.0 * max(float(evaluate(spec, y[0])), 0.0))

    def layer(_t, y):
        return float(evaluate(spec, y[0])) - BOUNDARY_LAYER_V

    layer.terminal = True
    layer.direction = -1.0

    x = np.empty_like(tau)
    dx = np.empty_like(tau)
    for target, m, side in ((tau[-1], x_end, tau >= tau_c), (tau[0], x_start, tau < tau_c)):
        if not np.any(side):
            continue
        sol = solve_ivp(
            rhs, (tau_c, target), [x_a], method="DOP853", rtol=tol, atol=tol * 1e-3,
            dense_output=True, events=layer,
        )
        if sol.status == -1:
            raise QuadratureFailure(sol.message)
        t_side = tau[side]
        k = float(np.sqrt(second_derivative(spec, m)))
        if sol.t_events[0].size:
            t_b = float(sol.t_events[0][0])
            x_b = float(sol.y_events[0][0][0])
        else:
            t_b, x_b = float(sol.t[-1]), float(sol.y[0, -1])
        inner = np.abs(t_side - tau_c) <= abs(t_b - tau_c)
        xs = np.empty_like(t_side)
        xs[inner] = sol.sol(t_side[inner])[0]
        decay = np.exp(-k * np.abs(t_side[~inner] - t_b))
        xs[~inner] = m + (x_b - m) * decay
        vs = np.empty_like(t_side)
        vs[inner] = sign * bogomolny_speed(spec, xs[inner])
        vs[~inner] = sign * k * np.abs(x_b - m) * decay
        x[side] = xs
        dx[side] = vs

    s_val, s_err = quad(lambda y: float(bogomolny_speed(spec, y)), min(x_start, x_end),
                        max(x_start, x_end), epsabs=tol, epsrel=tol)
    if s_err > 1e3 * tol * max(1.0, s_val):
        raise QuadratureFailure(f"action quadrature error {s_err:.3g} exceeds tolerance")

    k_s = float(np.sqrt(second_derivative(spec, x_start)))
    k_e = float(np.sqrt(second_derivative(spec, x_end)))
    # |x - m| ~ A exp(-+k tau) in the two tails.
    log_a_end = k_e * tau_c + k_e * _regular_part(spec, x_end, x_a, tol) + np.log(abs(x_end - x_a))
    log_a_start = -k_s * tau_c + k_s * _regular_part(spec, x_start, x_a, tol) + np.log(
        abs(x_a - x_start)
    )
    root_s = np.sqrt(s_val)
    c_const = k_e * np.exp(log_a_end) / root_s
    d_const = k_s * np.exp(log_a_start) / root_s
    return InstantonProfile(
        tau, x, dx, float(tau_c), float(s_val), float(c_const), float(d_const),
        spec, float(x_start), float(x_end),
    )


def classical_action(profile: InstantonProfile, spec: PotentialSpec | None = None) -> float:
    """Euclidean action int [dx^2/2 + V(x)] dtau over the profile grid (Simpson)."""
    spec = profile.potential if spec is None else spec
    lagrangian = 0.5 * profile.dx_c**2 + evaluate(spec, profile.x_c)
    return float(simpson(lagrangian, x=profile.tau))


def kinetic_action(profile: InstantonProfile) -> float:
    """int (dx_c/dtau)^2 dtau; equals the full action on a Bogomol'nyi profile."""
    return float(simpson(profile.dx_c**2, x=profile.tau))


def zero_mode(profile: InstantonProfile) -> FloatArray:
    """Translation mode dx_c/dtau / sqrt(S), unit-normalized on the real line."""
    if profile.action <= 0:
        raise ValueError("zero mode needs a positive action")
    return profile.dx_c / np.sqrt(profile.action)


def _tail_fit(
    tau: FloatArray, mode: FloatArray, rate: float, window: float, right: bool
) -> tuple[float, float]:
    """(amplitude with slope pinned to -+rate, free log-linear slope)."""
    sel = tau >= tau[-1] - window if right else tau <= tau[0] + window
    t = tau[sel]
    y = np.abs(mode[sel])
    good = y > np.finfo(float).tiny
    if good.sum() < 3:
        raise InsufficientTail("fewer than three representable points in the fit window")
    t, logy = t[good], np.log(y[good])
    slope = float(np.polyfit(t, logy, 1)[0])
    expected = -rate if right else rate
    if abs(slope - expected) > 0.01 * rate:
        side = "right" if right else "left"
        raise InsufficientTail(
            f"{side} tail slope {slope:.6g} differs from {expected:.6g} by more than 1%"
        )
    amp = float(np.exp(np.mean(logy - expected * t)))
    return amp, slope


def tail_slopes(profile: InstantonProfile, fit_window: float | None = None) -> tuple[float, float]:
    """Free log-linear slopes of |x_o| on the (left, right) tails."""
    return _fit_tails(profile, fit_window)[1]


def asymptotic_constants(
    profile: InstantonProfile, fit_window: float | None = None
) -> tuple[float, float]:
    """Fit (C, D) from the tails of the zero mode.

    C multiplies exp(-k_end tau) on the right tail, D multiplies
    exp(k_start tau) on the left tail; the rates are the well frequencies
    at the end points and are pinned during the fit.  ``fit_window`` is the
    width of each tail window measured inward from the grid ends (default
    5 / min rate, at most a quarter of the box).
    """
    return _fit_tails(profile, fit_window)[0]


def _fit_tails(profile, fit_window):
    x_o = zero_mode(profile)
    k_s, k_e = profile.start_rate, profile.end_rate
    span = profile.tau[-1] - profile.tau[0]
    window = min(5.0 / min(k_s, k_e), 0.25 * span) if fit_window is None else float(fit_window)
    peak = np.max(np.abs(x_o))
    for sel in (profile.tau >= profile.tau[-1] - window, profile.tau <= profile.tau[0] + window):
        if np.max(np.abs(x_o[sel])) > 1e-6 * peak:
            raise InsufficientTail("fit window lies where the zero mode exceeds 1e-6 of its peak")
    c, right = _tail_fit(profile.tau, x_o, k_e, window, right=True)
    d, left = _tail_fit(profile.tau, x_o, k_s, window, right=False)
    return (c, d), (left, right)


def antiinstanton(profile: InstantonProfile) -> InstantonProfile:
    """Time-reversed profile tau -> -tau (runs x_end -> x_start)."""
    exact = profile.exact_position
    return InstantonProfile(
        -profile.tau[::-1],
        profile.x_c[::-1],
        -profile.dx_c[::-1],
        -profile.tau_c,
        profile.action,
        profile.d_const,
        profile.c_const,
        profile.potential,
        profile.x_end,
        profile.x_start,
        None if exact is None else (lambda t: exact(-np.asarray(t))),
    )


def mirror(profile: InstantonProfile) -> InstantonProfile:
    """Reflected profile x -> -x (same times, opposite side of the well)."""
    exact = profile.exact_position
    return InstantonProfile(
        profile.tau,
        -profile.x_c,
        -profile.dx_c,
        profile.tau_c,
        profile.action,
        profile.c_const,
        profile.d_const,
        profile.potential,
        -profile.x_start,
        -profile.x_end,
        None if exact is None else (lambda t: -exact(t)),
    )
