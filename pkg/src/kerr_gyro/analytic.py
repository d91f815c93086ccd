"""Closed-form models: the physical signal map, exact moment formulas for
coherent and number probes, the squeezed-probe estimator model, and the
large-resource Gaussian surrogate for the optimum resource split.

The moment formulas here are the exact operator-algebra results, confirmed
against the Fock engine.  Normal ordering of the interference operator adds
a one-photon offset to the phase lever of coherent probes (argument
``nbar sin(2 phi) + 2 phi`` instead of ``nbar sin(2 phi)``) and makes the
number-probe lever exactly ``2 phi (n1 + n2)``; textbook small-signal forms
recover these only to leading order in the photon number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR
from scipy.constants import mu_0 as MU_0

# Validity guards for the small-signal asymptotics: the interference
# visibility degrades once sqrt(nbar) * phi is no longer small, and the
# cosine lever must stay near unity.
VISIBILITY_LIMIT = 0.1
COSINE_LIMIT = 1.0 / math.sqrt(2.0)


class ModelError(ValueError):
    """Raised when a closed-form model is evaluated outside its regime."""


# ---------------------------------------------------------------------------
# physical signal map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhysicalParams:
    """Fiber, pulse and rotation parameters mapping a rotation rate to the
    nonlinear signal phase.

    Units are SI throughout: omega (rad/s), fiber_length (m), loop_radius
    (m), chi (m^2/V^2), cross_section (m^2), pulse_duration (s),
    rotation_rate (rad/s).
    """

    omega: float
    fiber_length: float
    loop_radius: float
    n_loops: int
    chi: float
    cross_section: float
    pulse_duration: float
    linear_index: float
    rotation_rate: float
    light_speed: float = SPEED_OF_LIGHT
    mu0: float = MU_0
    hbar: float = HBAR

    def __post_init__(self) -> None:
        positives = {
            "omega": self.omega,
            "fiber_length": self.fiber_length,
            "loop_radius": self.loop_radius,
            "chi": self.chi,
            "cross_section": self.cross_section,
            "pulse_duration": self.pulse_duration,
            "linear_index": self.linear_index,
        }
        for name, value in positives.items():
            if not value > 0:
                raise ModelError(f"{name} must be positive, got {value!r}")
        if self.n_loops < 1:
            raise ModelError("n_loops must be at least 1")

    @property
    def loop_area(self) -> float:
        return math.pi * self.loop_radius**2


def signal_from_rotation(p: PhysicalParams) -> float:
    """Nonlinear signal phase per photon pair: linear in rotation rate and
    in the number of loops."""
    return (
        p.mu0
        * p.loop_area
        * p.hbar
        * p.omega**2
        * p.n_loops
        * p.chi
        * p.rotation_rate
        / (p.cross_section * p.pulse_duration * p.light_speed)
    )


def kerr_index(p: PhysicalParams, chi: float, photons: float) -> float:
    """Intensity-shifted refractive index of one propagation direction."""
    n_sq = p.linear_index**2 + p.mu0 * p.hbar * p.omega * p.light_speed * chi * photons / (
        p.cross_section * p.pulse_duration
    )
    if n_sq <= 0:
        raise ModelError("Kerr shift drove the squared index non-positive")
    return math.sqrt(n_sq)


def sagnac_phase(
    p: PhysicalParams,
    chi_plus: float,
    chi_minus: float,
    photons_plus: float,
    photons_minus: float,
) -> float:
    """Total counter-propagation phase difference: the index-imbalance term
    plus the rotation term, with Kerr-shifted indices."""
    n_plus = kerr_index(p, chi_plus, photons_plus)
    n_minus = kerr_index(p, chi_minus, photons_minus)
    linear = p.omega / p.light_speed * p.fiber_length * (n_plus - n_minus)
    rotational = (
        2.0
        * p.omega
        * p.loop_area
        * p.n_loops
        / p.light_speed**2
        * p.rotation_rate
        * (n_plus**2 + n_minus**2)
    )
    return linear + rotational


# ---------------------------------------------------------------------------
# coherent probes
# ---------------------------------------------------------------------------


def coherent_moments(
    n_plus: float, n_minus: float, nbar: float, phi: float, phi0: float
) -> tuple[float, float]:
    """Exact <M> and <M^2> for coherent light split as (n_plus, n_minus)
    between the counter-propagating modes (real, non-negative amplitudes).

    Valid for any phi; the visibility factors exp(-2 nbar sin^2 phi) carry
    the total-photon-number dispersion of coherent light.
    """
    if n_plus < 0 or n_minus < 0:
        raise ModelError("mode occupations must be non-negative")
    if abs(n_plus + n_minus - nbar) > 1e-9 * max(1.0, nbar):
        raise ModelError("nbar must equal n_plus + n_minus")
    vis1 = math.exp(-2.0 * nbar * math.sin(phi) ** 2)
    vis2 = math.exp(-2.0 * nbar * math.sin(2.0 * phi) ** 2)
    mean_m = 2.0 * math.sqrt(n_plus * n_minus) * vis1 * math.cos(
        nbar * math.sin(2.0 * phi) + 2.0 * phi + phi0
    )
    mean_m2 = nbar + 2.0 * n_plus * n_minus * (
        1.0 + vis2 * math.cos(nbar * math.sin(4.0 * phi) + 8.0 * phi + 2.0 * phi0)
    )
    return mean_m, mean_m2


def coherent_mean_derivative(
    n_plus: float, n_minus: float, nbar: float, phi: float, phi0: float
) -> float:
    """Analytic d<M>/dphi of the exact coherent mean."""
    arg = nbar * math.sin(2.0 * phi) + 2.0 * phi + phi0
    vis = math.exp(-2.0 * nbar * math.sin(phi) ** 2)
    amp = 2.0 * math.sqrt(n_plus * n_minus)
    return amp * vis * (
        -2.0 * nbar * math.sin(2.0 * phi) * math.cos(arg)
        - (2.0 * nbar * math.cos(2.0 * phi) + 2.0) * math.sin(arg)
    )


def coherent_error_propagation(
    n_plus: float, n_minus: float, nbar: float, phi: float, phi0: float
) -> float:
    """Closed-form Var(M)/(d<M>/dphi)^2 for coherent probes (exact)."""
    mean_m, mean_m2 = coherent_moments(n_plus, n_minus, nbar, phi, phi0)
    deriv = coherent_mean_derivative(n_plus, n_minus, nbar, phi, phi0)
    if deriv == 0.0:
        raise ModelError("flat response: d<M>/dphi vanishes at this working point")
    return (mean_m2 - mean_m**2) / deriv**2


@dataclass(frozen=True)
class AsymptoteReport:
    """A small-signal model value with its validity bookkeeping."""

    value: float
    asymptote: float
    flags: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.flags


def coherent_delta2phi(nbar: float, phi: float) -> AsymptoteReport:
    """Small-signal resolution model for a balanced coherent probe.

    Evaluates 1/(16 nbar (nbar/2)^2 cos(2 nbar phi)) with asymptote
    1/(4 nbar^3); flags mark working points outside the small-signal
    regime.  The exact finite-photon-number value carries an additional
    ((nbar+1)/nbar)^2 lever factor, see ``coherent_error_propagation``.
    """
    if nbar <= 0:
        raise ModelError("nbar must be positive")
    cosine = math.cos(2.0 * nbar * phi)
    if cosine <= 0.0:
        raise ModelError("out of regime: cos(2 nbar phi) is non-positive")
    flags = []
    if math.sqrt(nbar) * abs(phi) >= VISIBILITY_LIMIT:
        flags.append("visibility")
    if cosine < COSINE_LIMIT:
        flags.append("cosine-lever")
    value = 1.0 / (16.0 * nbar * (nbar / 2.0) ** 2 * cosine)
    return AsymptoteReport(value=value, asymptote=1.0 / (4.0 * nbar**3), flags=tuple(flags))


# ---------------------------------------------------------------------------
# coherent x squeezed probes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SqueezedSimpleReport:
    """Small-signal difference-count model for coherent x squeezed probes."""

    var_m: float
    commutator_magnitude: float
    delta2_phi: float
    optimum_n2: float
    asymptote: float


def squeezed_simple_model(alpha: float, r: float) -> SqueezedSimpleReport:
    """Difference-count resolution at the phase-quadrature working point.

    Var(M) = alpha^2 e^{-2r} + sinh^2 r is exact for the probe; the signal
    lever is |<[M, G]>| = 2(alpha^4 + alpha^2 - n2^2 - Var N2) with
    Var N2 = 2 sinh^2 r cosh^2 r.  The optimum squeezed fraction at fixed
    nbar = alpha^2 + sinh^2 r sits near n2 = sqrt(nbar)/2, where the
    resolution approaches 1/(4 nbar^{7/2}).
    """
    if alpha < 0 or r < 0:
        raise ModelError("alpha and r must be non-negative")
    n2 = math.sinh(r) ** 2
    var_n2 = 2.0 * math.sinh(r) ** 2 * math.cosh(r) ** 2
    var_m = alpha**2 * math.exp(-2.0 * r) + n2
    lever = 2.0 * (alpha**4 + alpha**2 - n2**2 - var_n2)
    nbar = alpha**2 + n2
    if lever <= 0.0:
        raise ModelError("the squeezed mode dominates: the signal lever is non-positive")
    return SqueezedSimpleReport(
        var_m=var_m,
        commutator_magnitude=abs(lever),
        delta2_phi=var_m / lever**2,
        optimum_n2=math.sqrt(nbar) / 2.0,
        asymptote=1.0 / (4.0 * nbar**3.5) if nbar > 0 else math.inf,
    )


_GH_NODES, _GH_WEIGHTS = hermegauss(48)
_GH_WEIGHTS = _GH_WEIGHTS / math.sqrt(2.0 * math.pi)


def _surrogate_generators(fraction: float, nbar: float) -> tuple[np.ndarray, np.ndarray]:
    """Linear and nonlinear generators as polynomials of a standard normal.

    With mode-1 fluctuations neglected and the squeezed occupation modeled
    as n2 X^2 (X standard normal), the anti-squeezed quadrature is
    2 sqrt(n2) X, giving G_L = 2 alpha sqrt(n2) X and G_NL = (alpha^2 +
    n2 X^2) G_L.  Moments are taken by Gauss-Hermite quadrature rather
    than hand-entered Gaussian-moment constants.
    """
    if not 0.0 < fraction < 1.0:
        raise ModelError("fraction must lie strictly between 0 and 1")
    if nbar <= 0:
        raise ModelError("nbar must be positive")
    alpha_sq = (1.0 - fraction) * nbar
    n2 = fraction * nbar
    x = _GH_NODES
    g_linear = 2.0 * math.sqrt(alpha_sq * n2) * x
    g_nonlinear = (alpha_sq + n2 * x**2) * g_linear
    return g_linear, g_nonlinear


def _quad_moments(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.dot(_GH_WEIGHTS, values))
    second = float(np.dot(_GH_WEIGHTS, values * values))
    return mean, second


def squeezed_qfi_surrogate(fraction: float, nbar: float) -> float:
    """Large-resource surrogate for the quantum Fisher information 4 Var G."""
    _, g_nl = _surrogate_generators(fraction, nbar)
    mean, second = _quad_moments(g_nl)
    return 4.0 * (second - mean**2)


def surrogate_fisher_matrix(fraction: float, nbar: float) -> np.ndarray:
    """Surrogate 2x2 quantum Fisher matrix for (linear, nonlinear) phases."""
    g_l, g_nl = _surrogate_generators(fraction, nbar)
    mean_l, sq_l = _quad_moments(g_l)
    mean_nl, sq_nl = _quad_moments(g_nl)
    cross = float(np.dot(_GH_WEIGHTS, g_l * g_nl))
    return 4.0 * np.array(
        [
            [sq_l - mean_l**2, cross - mean_l * mean_nl],
            [cross - mean_l * mean_nl, sq_nl - mean_nl**2],
        ]
    )


def surrogate_multiparam_bounds(fraction: float, nbar: float) -> tuple[float, float]:
    """Diagonal of the inverse surrogate Fisher matrix."""
    m = surrogate_fisher_matrix(fraction, nbar)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det <= 0:
        raise ModelError("surrogate Fisher matrix is singular here")
    return m[1, 1] / det, m[0, 0] / det


# ---------------------------------------------------------------------------
# number-state probes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NumberStateReport:
    """Exact moments and resolution figures for a |n1>|n2> probe.

    ``delta2_phi_simple`` is None when n1 = n2 (the mean count difference
    carries no signal there).  The twin M^2 fields apply to n1 = n2 = k.
    """

    mean_m: float
    mean_m2: float
    delta2_phi_simple: float | None
    quantum_fisher: float
    twin_m2_mean: float
    twin_m2_var: float
    twin_m2_floor: float


def number_state_model(n1: int, n2: int, phi: float, phi0: float) -> NumberStateReport:
    """Closed forms for number-pair probes, oracle-confirmed.

    With x = 2 phi (n1 + n2) + phi0:  <M> = (n1 - n2) cos x,
    <M^2> = (n1 - n2)^2 cos^2 x + (2 n1 n2 + n1 + n2) sin^2 x, giving the
    phi-independent resolution (2 n1 n2 + nbar)/(4 nbar^2 (n1 - n2)^2).
    The quantum Fisher information is 4 nbar^2 (2 n1 n2 + nbar); for twin
    pairs the squared-difference estimator reaches its inverse, with
    large-nbar floor 1/(2 nbar^4).
    """
    if n1 < 0 or n2 < 0 or n1 + n2 < 1:
        raise ModelError("need at least one photon across the two modes")
    nbar = float(n1 + n2)
    x = 2.0 * phi * nbar + phi0
    cos_x, sin_x = math.cos(x), math.sin(x)
    weight = 2.0 * n1 * n2 + nbar
    mean_m = (n1 - n2) * cos_x
    mean_m2 = (n1 - n2) ** 2 * cos_x**2 + weight * sin_x**2
    if n1 == n2:
        delta2 = None
    else:
        delta2 = weight / (4.0 * nbar**2 * (n1 - n2) ** 2)
    # twin-pair squared-difference moments in the large-nbar regime
    s1sq = sin_x**2
    c1sq = cos_x**2
    twin_mean = nbar**2 / 2.0 * s1sq
    twin_var = s1sq * (nbar**4 / 8.0 * s1sq + 2.0 * nbar**2 * c1sq)
    return NumberStateReport(
        mean_m=mean_m,
        mean_m2=mean_m2,
        delta2_phi_simple=delta2,
        quantum_fisher=4.0 * nbar**2 * weight,
        twin_m2_mean=twin_mean,
        twin_m2_var=twin_var,
        twin_m2_floor=1.0 / (2.0 * nbar**4),
    )
