"""Fluctuation determinants by the Gelfand-Yaglom initial-value method.

For an operator -d^2/dtau^2 + W(tau) on [-T/2, T/2] with Dirichlet ends, the
determinant relative to a reference operator is the ratio of terminal
values f(T/2)/g(T/2) of the solutions of f'' = W f with f(-T/2) = 0,
f'(-T/2) = 1.  On the instanton the operator has a near-zero eigenvalue
lambda ~ exp(-k T); it is computed at first order from the zero mode x_o
and its reduction-of-order partner y_o and divided out to give the reduced
ratio Det'/Det.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .errors import AsymptoticRegimeViolated, GYOverflow, ZeroModeVanishes
from .instanton import InstantonProfile, zero_mode
from .potential import FloatArray, well_frequencies

RESCALE_AT = 1e8
# Beyond k*T = IVP_MAX_KT the forward IVP loses all digits: the decaying
# zero mode must be followed through the core while any local error seeds
# the growing branch, amplified by ~exp(k T).
IVP_MAX_KT = 20.0
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class StabilityProblem:
    """Operator -d^2/dtau^2 + curvature(tau) on [-half_box, half_box]."""

    curvature: Callable[[FloatArray], FloatArray]
    half_box: float
    reference_frequency: float

    def __post_init__(self) -> None:
        if self.half_box <= 0 or self.reference_frequency <= 0:
            raise ValueError("half_box and reference_frequency must be positive")

    @property
    def length(self) -> float:
        return 2.0 * self.half_box


def stability_problem(
    profile: InstantonProfile,
    half_box: float | None = None,
    reference_frequency: float | None = None,
) -> StabilityProblem:
    """Stability operator of ``profile``; nu defaults to the mean well frequency."""
    if half_box is None:
        half_box = float(min(-profile.tau[0], profile.tau[-1]))
    if reference_frequency is None:
        reference_frequency = well_frequencies(profile.potential).average
    return StabilityProblem(profile.curvature, float(half_box), float(reference_frequency))


def constant_curvature(nu: float, half_box: float, reference_frequency: float | None = None):
    """Harmonic operator -d^2/dtau^2 + nu^2."""
    nu2 = float(nu) ** 2
    ref = float(nu) if reference_frequency is None else reference_frequency
    return StabilityProblem(lambda t: np.full_like(np.asarray(t, dtype=float), nu2), half_box, ref)


def default_steps(problem: StabilityProblem) -> int:
    h = min(0.005 / problem.reference_frequency, problem.length / 1e4)
    return int(math.ceil(problem.length / h))


def gy_log_solve(
    problem: StabilityProblem, steps: int | None = None, rescale_at: float = RESCALE_AT
) -> tuple[float, float]:
    """Integrate f'' = W f from -T/2 with f = 0, f' = 1 by classical RK4.

    The state is renormalized whenever |f| or |f'| exceeds ``rescale_at``;
    the equation is linear so this is exact.  Returns (log|f(T/2)|, sign).
    """
    n = default_steps(problem) if steps is None else int(steps)
    if n < 100:
        raise ValueError(f"need at least 100 steps, got {n}")
    length = problem.length
    h = length / n
    nodes = -problem.half_box + h * np.arange(n + 1)
    w_node = np.asarray(problem.curvature(nodes), dtype=float).tolist()
    w_mid = np.asarray(problem.curvature(nodes[:-1] + 0.5 * h), dtype=float).tolist()

    y, v, log_scale = 0.0, 1.0, 0.0
    h2, h6 = 0.5 * h, h / 6.0
    for i in range(n):
        wm = w_mid[i]
        k1y, k1v = v, w_node[i] * y
        k2y, k2v = v + h2 * k1v, wm * (y + h2 * k1y)
        k3y, k3v = v + h2 * k2v, wm * (y + h2 * k2y)
        k4y, k4v = v + h * k3v, w_node[i + 1] * (y + h * k3y)
        y += h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        v += h6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        big = max(abs(y), abs(v))
        if big > rescale_at:
            y /= big
            v /= big
            log_scale += math.log(big)
    if y == 0.0:
        return -math.inf, 0.0
    return log_scale + math.log(abs(y)), math.copysign(1.0, y)


def gy_forward_solve(problem: StabilityProblem, steps: int | None = None) -> float:
    """f_o(T/2) for the problem's operator; see :func:`gy_log_solve`."""
    log_f, sign = gy_log_solve(problem, steps)
    if log_f > _LOG_MAX:
        raise GYOverflow(f"|f(T/2)| = exp({log_f:.6g}) is not representable; use gy_log_solve")
    return sign * math.exp(log_f)


def harmonic_gy(nu: float, half_box: float) -> float:
    """sinh(nu T)/nu, the terminal value of the harmonic solution."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    return math.sinh(2.0 * nu * half_box) / nu


def harmonic_amplitude(nu: float, T: float) -> float:
    """<0| exp(-H T) |0> of the oscillator: sqrt(nu/pi) (2 sinh(nu T))^(-1/2)."""
    return math.sqrt(nu / math.pi) / math.sqrt(2.0 * math.sinh(nu * T))


def harmonic_gy_log(nu: float, half_box: float) -> float:
    x = 2.0 * nu * half_box
    if x < 20.0:
        return math.log(math.sinh(x) / nu)
    return x + math.log1p(-math.exp(-2.0 * x)) - math.log(2.0 * nu)


def gy_ratio(problem: StabilityProblem, steps: int | None = None) -> float:
    """Det[-d^2 + W] / Det[-d^2 + nu^2] including every eigenvalue."""
    log_f, sign = gy_log_solve(problem, steps)
    return sign * math.exp(log_f - harmonic_gy_log(problem.reference_frequency, problem.half_box))


def derivative(f: FloatArray, h: float) -> FloatArray:
    """Five-point central derivative on a uniform grid (2nd order at the ends)."""
    d = np.gradient(f, h, edge_order=2)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    return d


def wronskian(x_o: FloatArray, y_o: FloatArray, tau: FloatArray) -> FloatArray:
    h = float(tau[1] - tau[0])
    return x_o * derivative(y_o, h) - derivative(x_o, h) * y_o


def _profile_on_box(profile: InstantonProfile, half_box: float | None) -> InstantonProfile:
    return profile if half_box is None else profile.restrict(half_box)


def second_solution(profile: InstantonProfile, half_box: float | None = None) -> FloatArray:
    """y_o = x_o * int_{tau_c}^{tau} ds / x_o(s)^2 on the (restricted) grid.

    The integral is accumulated outward from the grid node nearest tau_c in
    both directions with cumulative Simpson, so the exponentially growing
    integrand never cancels against a large constant.
    """
    prof = _profile_on_box(profile, half_box)
    x_o = zero_mode(prof)
    with np.errstate(divide="ignore", over="ignore"):
        inv = 1.0 / x_o**2
    if not np.all(np.isfinite(inv)):
        raise ZeroModeVanishes("x_o underflows inside the box; use a smaller half_box")
    tau = prof.tau
    i0 = int(np.clip(np.argmin(np.abs(tau - prof.tau_c)), 0, tau.size - 1))
    acc = np.zeros_like(tau)
    if i0 < tau.size - 1:
        acc[i0:] = cumulative_simpson(inv[i0:], x=tau[i0:], initial=0.0)
    if i0 > 0:
        acc[: i0 + 1] = -cumulative_simpson(inv[i0::-1], x=-tau[i0::-1], initial=0.0)[::-1]
    return x_o * acc


def assemble_f_from_pair(x_o: FloatArray, y_o: FloatArray, tau: FloatArray) -> FloatArray:
    """f_o = [x_o(-T/2) y_o - y_o(-T/2) x_o] / W on the grid of ``tau``.

    The combination vanishes at the left end; dividing by the Wronskian W
    (constant, taken as the median of its interior values) gives unit slope
    there.
    """
    w = wronskian(x_o, y_o, tau)
    scale = float(np.median(w[2:-2]))
    return (x_o[0] * y_o - y_o[0] * x_o) / scale


def _first_order_lambda(prof: InstantonProfile) -> float:
    x_o = zero_mode(prof)
    y_o = second_solution(prof)
    f_o = assemble_f_from_pair(x_o, y_o, prof.tau)
    # f_lambda(T/2) = f_o(T/2) + lambda * int [x_o(T/2) y_o(s) - y_o(T/2) x_o(s)] f_o(s) ds
    kernel = (x_o[-1] * y_o - y_o[-1] * x_o) * f_o
    return float(-f_o[-1] / simpson(kernel, x=prof.tau))


def lowest_eigenvalue(
    profile: InstantonProfile, half_box: float, check_regime: bool = True
) -> float:
    """First-order Dirichlet eigenvalue of the compressed zero mode.

    Solves f_lambda(T/2) = 0 with f_lambda expanded to first order in
    lambda.  With ``check_regime`` the calculation is repeated on a box
    shorter by 2/k (k the slower tail rate) and the measured slope of
    log lambda in T must be -k within 2%.
    """
    k = min(profile.start_rate, profile.end_rate)
    if check_regime and k * 2.0 * half_box < 10.0:
        raise AsymptoticRegimeViolated(f"k T = {2 * k * half_box:.3g} < 10")
    lam = _first_order_lambda(profile.restrict(half_box))
    if check_regime:
        tau = profile.tau
        inner = float(tau[np.argmin(np.abs(tau - (half_box - 1.0 / k)))])
        lam_inner = _first_order_lambda(profile.restrict(inner))
        if lam <= 0 or lam_inner <= 0:
            raise AsymptoticRegimeViolated(f"non-positive eigenvalue estimate {lam:.3g}")
        slope = (math.log(lam) - math.log(lam_inner)) / (2.0 * (half_box - inner))
        if abs(slope + k) > 0.02 * k:
            raise AsymptoticRegimeViolated(
                f"d log(lambda)/dT = {slope:.6g}, expected {-k:.6g} within 2%"
            )
    return lam


def asymptotic_lowest_eigenvalue(profile: InstantonProfile, half_box: float) -> float:
    """Leading large-T form 2 k_s D^2 e^{-k_s T} + 2 k_e C^2 e^{-k_e T}.

    k_s, k_e are the start/end well frequencies.  For the canonical triple
    well only the first term survives: lambda ~ 2 omega D^2 exp(-omega T).
    """
    length = 2.0 * half_box
    ks, ke = profile.start_rate, profile.end_rate
    return 2.0 * ks * profile.d_const**2 * math.exp(-ks * length) + (
        2.0 * ke * profile.c_const**2 * math.exp(-ke * length)
    )


@dataclass(frozen=True)
class FluctuationResult:
    omega: float
    half_box: float
    f_end: float
    g_end: float
    lambda_low: float
    raw_ratio: float
    reduced_ratio: float
    route: str = "ivp"

    def to_record(self) -> dict[str, float]:
        return {
            "omega": self.omega,
            "T": 2.0 * self.half_box,
            "f_end": self.f_end,
            "g_end": self.g_end,
            "lambda": self.lambda_low,
            "raw_ratio": self.raw_ratio,
            "reduced_ratio": self.reduced_ratio,
            "route": self.route,
        }


def terminal_value_from_pair(profile: InstantonProfile, half_box: float) -> float:
    """f_o(T/2) from the exact zero-mode combination instead of the IVP."""
    prof = profile.restrict(half_box)
    x_o = zero_mode(prof)
    y_o = second_solution(prof)
    return float(assemble_f_from_pair(x_o, y_o, prof.tau)[-1])


def reduced_ratio(
    profile: InstantonProfile,
    problem: StabilityProblem,
    steps: int | None = None,
    route: str = "auto",
) -> FluctuationResult:
    """Raw ratio f_o(T/2)/g_o(T/2) and reduced ratio raw/lambda.

    ``route`` selects how f_o(T/2) is obtained: ``"ivp"`` integrates the
    problem's curvature forward, ``"pair"`` evaluates the zero-mode
    combination on the profile grid, ``"auto"`` uses the IVP while
    k T <= IVP_MAX_KT.
    """
    k = min(profile.start_rate, profile.end_rate)
    if route == "auto":
        route = "ivp" if k * problem.length <= IVP_MAX_KT else "pair"
    if route == "ivp":
        log_f, sign = gy_log_solve(problem, steps)
    elif route == "pair":
        f_end = terminal_value_from_pair(profile, problem.half_box)
        log_f, sign = math.log(abs(f_end)), math.copysign(1.0, f_end)
    else:
        raise ValueError(f"unknown route {route!r}")
    log_g = harmonic_gy_log(problem.reference_frequency, problem.half_box)
    if max(log_f, log_g) > _LOG_MAX:
        raise GYOverflow("terminal values exceed the double range; shorten the box")
    lam = lowest_eigenvalue(profile, problem.half_box)
    raw = sign * math.exp(log_f - log_g)
    return FluctuationResult(
        omega=profile.potential.omega,
        half_box=problem.half_box,
        f_end=sign * math.exp(log_f),
        g_end=math.exp(log_g),
        lambda_low=lam,
        raw_ratio=raw,
        reduced_ratio=raw / lam,
        route=route,
    )
