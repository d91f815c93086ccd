"""Detection noise: finite quantum efficiency, thermal photons, and Gaussian
randomization of the interference phase.

Noise enters through the detection operator (each mode mixed with a thermal
ancilla at transmissivity eta, plus a random phase on the cross term), not
as channel loss, so probe states stay pure.  The closed forms below are the
exact operator expectations for a coherent x squeezed probe at zero signal;
a Monte Carlo oracle over the random phase cross-checks them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import fsum


class NoiseError(ValueError):
    """Raised for invalid noise parameters."""


@dataclass(frozen=True)
class NoiseParams:
    """Detector efficiency eta, thermal occupation, and phase variance."""

    eta: float = 1.0
    thermal_photons: float = 0.0
    phase_var: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.eta <= 1.0:
            raise NoiseError("eta must lie in (0, 1]")
        if self.thermal_photons < 0.0:
            raise NoiseError("thermal_photons must be non-negative")
        if self.phase_var < 0.0:
            raise NoiseError("phase_var must be non-negative")

    @property
    def epsilon(self) -> float:
        """Contrast loss 1 - exp(-2 sigma^2) of the phase-randomized term."""
        return 1.0 - math.exp(-2.0 * self.phase_var)

    def thermal_regime_ok(self, nbar: float) -> bool:
        """Whether thermal occupation is small against the probe energy."""
        return self.thermal_photons < 0.1 * nbar


def _mode2_moments(r: float) -> tuple[float, float]:
    """(<a2^2>, <a2^dag a2>) of squeezed vacuum along the reduce-x axis."""
    return -math.cosh(r) * math.sinh(r), math.sinh(r) ** 2


def noisy_m_variance(alpha: float, r: float, noise: NoiseParams) -> float:
    """Exact Var(M) of the noisy difference measurement at zero signal.

    The coherent amplitude couples to the squeezed quadrature through the
    phase-averaged cross terms (weight e^{-2 sigma^2}); the remaining terms
    are the exact normally-and-antinormally ordered occupations of the two
    detection modes including their thermal halves N_t/2.  Reduces to
    alpha^2 e^{-2r} + sinh^2 r when the noise is switched off.
    """
    if alpha < 0 or r < 0:
        raise NoiseError("alpha and r must be non-negative")
    a2_sq, n2 = _mode2_moments(r)
    eta = noise.eta
    half_t = noise.thermal_photons / 2.0
    cross = 2.0 * math.exp(-2.0 * noise.phase_var) * eta**2 * alpha**2 * a2_sq
    occ_a = eta * alpha**2 + half_t          # <A^dag A>
    occ_b = eta * n2 + half_t                # <B^dag B>
    return cross + occ_a * (occ_b + 1.0) + (occ_a + 1.0) * occ_b


def noisy_delta2phi(nbar: float, probe_kind: str, noise: NoiseParams) -> float:
    """Degraded resolution bounds at the optimum working points.

    ``coherent-squeezed-at-optimum`` assumes the squeezed occupation
    sqrt(nbar)/2; ``coherent`` is the plain coherent probe, which is immune
    to the phase randomization at leading order.
    """
    if nbar <= 0:
        raise NoiseError("nbar must be positive")
    eta, n_t = noise.eta, noise.thermal_photons
    if probe_kind == "coherent":
        return (n_t + 1.0) / (4.0 * eta**3 * nbar**3)
    if probe_kind == "coherent-squeezed-at-optimum":
        return (
            1.0 / (4.0 * eta**2 * nbar**3.5)
            + (n_t + 1.0 - eta) / (4.0 * eta**3 * nbar**3)
            + noise.epsilon / (4.0 * eta**2 * nbar**2.5)
        )
    raise NoiseError(f"unknown probe kind {probe_kind!r}")


def squeezing_advantage_retained(nbar: float, noise: NoiseParams) -> bool:
    """True while phase randomization has not erased the squeezing gain.

    The randomized term overtakes the noiseless one once
    2 sigma^2 > 1/nbar (equivalently epsilon * nbar > 1).
    """
    return noise.epsilon * nbar <= 1.0


def _fock_mode_moments(vector: np.ndarray) -> dict[str, float]:
    """<a^2>, <a^dag a> of a single-mode state, evaluated numerically.

    Used by the Monte Carlo oracle so its per-sample conditional moments do
    not share the hand-derived squeezed-state moments of the closed form.
    """
    v = np.asarray(vector, dtype=np.complex128)
    n = np.arange(v.size, dtype=float)
    occupation = fsum(n * (v.real**2 + v.imag**2))
    # <a^2>: sum_n conj(c_n) sqrt((n+1)(n+2)) c_{n+2}
    if v.size >= 3:
        w = np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0))
        a_sq = complex(np.sum(np.conj(v[:-2]) * w * v[2:]))
    else:
        a_sq = 0.0
    if abs(complex(a_sq).imag) > 1e-10 * max(1.0, abs(complex(a_sq).real)):
        raise NoiseError("mode moment <a^2> came out non-real")
    return {"a_sq": complex(a_sq).real, "occupation": occupation}


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    std_error: float
    samples: int


def mc_noise_oracle(
    alpha: float,
    r: float,
    noise: NoiseParams,
    n_samples: int = 100_000,
    seed: int = 0,
    n_blocks: int = 1,
) -> MonteCarloResult:
    """Monte Carlo check of the noisy Var(M): sample the random phase,
    average the exact conditional second moment.

    The conditional moments are assembled from numerically computed
    single-mode moments (coherent and squeezed vectors in a truncated Fock
    basis) and the exact thermal occupations, so the only approximation is
    the phase sampling; at sigma = 0 the estimate equals the analytic value
    with zero variance.  Sampling uses a counter-based generator split into
    ``n_blocks`` equal blocks, so the result is independent of the split.
    """
    if n_samples < 1:
        raise NoiseError("need at least one sample")
    if n_blocks < 1 or n_samples % n_blocks != 0:
        raise NoiseError("n_blocks must evenly divide n_samples")
    block = n_samples // n_blocks
    if n_blocks > 1 and block % 2 != 0:
        raise NoiseError("block size must be even to align the counter stream")
    from .probes import coherent_vector, squeezed_vacuum_vector, plan_cutoffs, CoherentSqueezed

    plan = plan_cutoffs(CoherentSqueezed(alpha, r), 1e-13)
    m1 = _fock_mode_moments(coherent_vector(alpha, max(plan.cutoff1, 2)))
    m2 = _fock_mode_moments(squeezed_vacuum_vector(r, "reduce-x", max(plan.cutoff2, 2)))

    eta = noise.eta
    half_t = noise.thermal_photons / 2.0
    # detection-mode moments: A mixes mode 1 with a thermal ancilla, B mode 2
    a_dag_sq = eta * m1["a_sq"]          # <A^dag^2> (real alpha)
    b_sq = eta * m2["a_sq"]
    occ_a = eta * m1["occupation"] + half_t
    occ_b = eta * m2["occupation"] + half_t
    constant = occ_a * (occ_b + 1.0) + (occ_a + 1.0) * occ_b
    cross_amp = 2.0 * a_dag_sq * b_sq    # coefficient of cos(2 phase)

    sigma = math.sqrt(noise.phase_var)
    block = n_samples // n_blocks
    bit_gen = np.random.Philox(key=seed)
    values = np.empty(n_samples)
    for b in range(n_blocks):
        gen = np.random.Generator(bit_gen.jumped(b))
        phases = gen.normal(0.0, sigma, size=block) if sigma > 0 else np.zeros(block)
        values[b * block : (b + 1) * block] = constant + cross_amp * np.cos(2.0 * phases)
    estimate = fsum(values) / n_samples
    if n_samples > 1:
        variance = fsum((values - estimate) ** 2) / (n_samples - 1)
    else:
        variance = 0.0
    return MonteCarloResult(
        estimate=estimate,
        std_error=math.sqrt(variance / n_samples),
        samples=n_samples,
    )
