"""Resolution estimators: error propagation, Fisher information, bounds.

All derivatives with respect to the signal phase are central finite
differences of full channel passes (the channel stays a black box), with a
step-halving consistency check and Richardson extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, PhotonStatistics, channel_amplitudes
from .fock import Basis, TwoModeState, apply_exchange_generator, fsum, fsum_complex, g_moments


class EstimatorError(ValueError):
    """Base class for estimation failures."""


class FlatResponseError(EstimatorError):
    """The mean of the chosen observable does not respond to the signal."""


class DerivativeUnstableError(EstimatorError):
    """Step halving disagrees; the finite difference is truncation-dominated."""


@dataclass(frozen=True)
class EstimatorConfig:
    """Finite-difference and floor policy for the estimators.

    ``fd_step`` is scaled down automatically when the phase response of a
    probe oscillates on a scale ~1/nbar shorter than the step allows.
    """

    fd_step: float = 1e-5
    prob_floor: float = 1e-14
    flat_threshold: float = 1e-8
    step_check_tol: float = 1e-3
    realness_tol: float = 1e-8


DEFAULT_CONFIG = EstimatorConfig()


def small_signal_phi(nbar: float) -> float:
    """Standardized working point for small-signal claims (phi << 1/nbar)."""
    return 1e-3 / max(nbar, 1.0)


def _effective_step(cfg: EstimatorConfig, probe: TwoModeState) -> float:
    # keep 2*nbar*h well inside one oscillation of the response
    nbar = expectation_total_photons(probe)
    return min(cfg.fd_step, 1e-3 / max(nbar, 1.0))


def expectation_total_photons(state: TwoModeState) -> float:
    n1 = np.arange(state.cutoff1 + 1, dtype=float)[:, None]
    n2 = np.arange(state.cutoff2 + 1, dtype=float)[None, :]
    return fsum((n1 + n2) * state.probabilities())


def _richardson(f_minus_h, f_plus_h, f_minus_half, f_plus_half, h):
    """Central differences at steps h and h/2, Richardson-combined.

    Returns (derivative, relative disagreement between the two steps).
    """
    d_h = (f_plus_h - f_minus_h) / (2.0 * h)
    d_half = (f_plus_half - f_minus_half) / h
    combined = (4.0 * d_half - d_h) / 3.0
    disagreement = abs(d_h - d_half) / max(abs(d_h), abs(d_half), 1e-300)
    return combined, disagreement


def _mean_observable_derivative(
    probe: TwoModeState,
    params: ChannelParams,
    cfg: EstimatorConfig,
    moment_power: int,
) -> tuple[float, float, PhotonStatistics]:
    """(d<M^k>/dphi, disagreement, center statistics) via 4-point stencil."""
    h = _effective_step(cfg, probe)
    phis = [params.phi - h, params.phi - h / 2, params.phi + h / 2, params.phi + h, params.phi]
    states = channel_amplitudes(probe, [ChannelParams(p, params.phi0) for p in phis])
    stats = [
        PhotonStatistics(s.probabilities(), phi=p, phi0=params.phi0, tail_tol=probe.tail_tol)
        for s, p in zip(states, phis)
    ]
    means = [s.moment_of_difference(moment_power) for s in stats]
    deriv, disagreement = _richardson(means[0], means[3], means[1], means[2], h)
    return deriv, disagreement, stats[4]


def error_propagation_delta_phi(
    probe: TwoModeState,
    params: ChannelParams,
    cfg: EstimatorConfig = DEFAULT_CONFIG,
) -> float:
    """Signal variance from the count difference M: Var(M) / (d<M>/dphi)^2."""
    deriv, disagreement, stats = _mean_observable_derivative(probe, params, cfg, 1)
    if abs(deriv) < cfg.flat_threshold:
        raise FlatResponseError(
            f"|d<M>/dphi| = {abs(deriv):.3e} at phi={params.phi}: "
            "the mean count difference does not respond to the signal here"
        )
    if disagreement > cfg.step_check_tol:
        raise DerivativeUnstableError(
            f"d<M>/dphi step-halving disagreement {disagreement:.2e} exceeds "
            f"{cfg.step_check_tol:.1e}"
        )
    var_m = stats.moment_of_difference(2) - stats.moment_of_difference(1) ** 2
    return var_m / deriv**2


def m2_error_propagation(
    probe: TwoModeState,
    params: ChannelParams,
    cfg: EstimatorConfig = DEFAULT_CONFIG,
) -> float:
    """Signal variance from the squared difference: Var(M^2)/(d<M^2>/dphi)^2."""
    deriv, disagreement, stats = _mean_observable_derivative(probe, params, cfg, 2)
    if abs(deriv) < cfg.flat_threshold:
        raise FlatResponseError(
            f"|d<M^2>/dphi| = {abs(deriv):.3e} at phi={params.phi}: "
            "the squared count difference does not respond to the signal here"
        )
    if disagreement > cfg.step_check_tol:
        raise DerivativeUnstableError(
            f"d<M^2>/dphi step-halving disagreement {disagreement:.2e} exceeds "
            f"{cfg.step_check_tol:.1e}"
        )
    m2 = stats.moment_of_difference(2)
    m4 = stats.moment_of_difference(4)
    return (m4 - m2**2) / deriv**2


@dataclass(frozen=True)
class FisherReport:
    """Classical Fisher information of p(n1,n2|phi) and its quantum ceiling."""

    fisher: float
    quantum_fisher: float
    fd_disagreement: float

    @property
    def bound_fisher(self) -> float:
        return math.inf if self.fisher == 0 else 1.0 / self.fisher

    @property
    def bound_quantum(self) -> float:
        return math.inf if self.quantum_fisher == 0 else 1.0 / self.quantum_fisher


def fisher_information(
    probe: TwoModeState,
    params: ChannelParams,
    cfg: EstimatorConfig = DEFAULT_CONFIG,
) -> FisherReport:
    """Classical Fisher information via the amplitude form 4 * sum (dc/dphi)^2.

    Differentiating probability amplitudes instead of probabilities removes
    the division by small p.  For probes with real number-basis
    coefficients the channel output is real, so the signed amplitudes are
    differentiated directly; otherwise |c| is used (smooth wherever p > 0).
    The quantum value is 4 Var(G) from the generator moments.
    """
    h = _effective_step(cfg, probe)
    phis = [params.phi - h, params.phi - h / 2, params.phi + h / 2, params.phi + h]
    states = channel_amplitudes(probe, [ChannelParams(p, params.phi0) for p in phis])
    grids = [s.amplitudes for s in states]
    scale = max(np.abs(g).max() for g in grids)
    is_real = all(np.abs(g.imag).max() <= cfg.realness_tol * scale for g in grids)
    if is_real:
        fields = [g.real for g in grids]
    else:
        fields = [np.abs(g) for g in grids]

    def quadratic_sum(df: np.ndarray) -> float:
        return 4.0 * fsum(df * df)

    d_h = (fields[3] - fields[0]) / (2.0 * h)
    d_half = (fields[2] - fields[1]) / h
    combined = (4.0 * d_half - d_h) / 3.0
    f_h = quadratic_sum(d_h)
    f_half = quadratic_sum(d_half)
    fisher = quadratic_sum(combined)
    disagreement = abs(f_h - f_half) / max(f_h, f_half, 1e-300)
    if disagreement > cfg.step_check_tol and max(f_h, f_half) > cfg.prob_floor:
        raise DerivativeUnstableError(
            f"Fisher step-halving disagreement {disagreement:.2e} exceeds "
            f"{cfg.step_check_tol:.1e}; derivative is truncation-dominated"
        )
    quantum = g_moments(probe).quantum_fisher
    return FisherReport(fisher=fisher, quantum_fisher=quantum, fd_disagreement=disagreement)


def fisher_information_probability_form(
    probe: TwoModeState,
    params: ChannelParams,
    cfg: EstimatorConfig = DEFAULT_CONFIG,
) -> float:
    """Classical Fisher via sum (dp/dphi)^2 / p with a probability floor.

    Kept as an independent cross-check of the amplitude form; the two agree
    wherever p is smooth and not degenerate.
    """
    h = _effective_step(cfg, probe)
    phis = [params.phi - h, params.phi + h, params.phi]
    states = channel_amplitudes(probe, [ChannelParams(p, params.phi0) for p in phis])
    p_minus, p_plus, p0 = (s.probabilities() for s in states)
    dp = (p_plus - p_minus) / (2.0 * h)
    mask = p0 > cfg.prob_floor
    return fsum(dp[mask] ** 2 / p0[mask])


@dataclass(frozen=True)
class MultiParamFisherReport:
    """Quantum Fisher matrix for joint linear/nonlinear phase estimation.

    ``matrix`` is 4 * [[Var G_L, Cov], [Cov, Var G_NL]] for the linear
    photon-exchange generator G_L and the nonlinear one G_NL = N G_L.
    Bounds are the diagonal entries of the matrix inverse; ``singular``
    marks unidentifiable parameters (no finite bounds reported).
    """

    matrix: np.ndarray
    singular: bool
    bound_linear: float | None
    bound_nonlinear: float | None

    @property
    def single_parameter_bounds(self) -> tuple[float, float]:
        f11, f22 = self.matrix[0, 0], self.matrix[1, 1]
        return (
            math.inf if f11 == 0 else 1.0 / f11,
            math.inf if f22 == 0 else 1.0 / f22,
        )


def multiparam_fisher(probe: TwoModeState) -> MultiParamFisherReport:
    """Exact 2x2 quantum Fisher matrix on the truncated probe.

    Both generators conserve the total photon number and commute, so all
    four second moments follow from a single application of the exchange
    generator J: with chi = J|psi>, Var G_L = <chi|chi> - <psi|J|psi>^2,
    Var G_NL = <chi|N^2|chi> - <psi|NJ|psi>^2, Cov = <chi|N|chi> - ...
    """
    if probe.basis is not Basis.INPUT:
        raise EstimatorError("multiparameter bounds need the input-mode basis")
    probe.validate()
    a = probe.amplitudes
    chi = apply_exchange_generator(a)
    pad = np.zeros_like(chi)
    pad[: a.shape[0], : a.shape[1]] = a
    n1 = np.arange(chi.shape[0], dtype=float)[:, None]
    n2 = np.arange(chi.shape[1], dtype=float)[None, :]
    total = n1 + n2
    chi_sq = chi.real**2 + chi.imag**2

    mean_l = fsum_complex(np.conj(pad) * chi)
    mean_nl = fsum_complex(np.conj(pad) * total * chi)
    for name, val in (("<G_L>", mean_l), ("<G_NL>", mean_nl)):
        if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
            raise EstimatorError(f"{name} came out non-real: {val!r}")
    sq_l = fsum(chi_sq)
    sq_nl = fsum(total * total * chi_sq)
    cross = fsum(total * chi_sq)  # <chi|N|chi> = Re<G_L G_NL> for commuting generators

    var_l = sq_l - mean_l.real**2
    var_nl = sq_nl - mean_nl.real**2
    cov = cross - mean_l.real * mean_nl.real
    matrix = 4.0 * np.array([[var_l, cov], [cov, var_nl]])

    det = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
    scale = max(matrix[0, 0] * matrix[1, 1], matrix[0, 1] ** 2, 1.0)
    if det <= 1e-12 * scale:
        return MultiParamFisherReport(
            matrix=matrix, singular=True, bound_linear=None, bound_nonlinear=None
        )
    return MultiParamFisherReport(
        matrix=matrix,
        singular=False,
        bound_linear=matrix[1, 1] / det,
        bound_nonlinear=matrix[0, 0] / det,
    )
