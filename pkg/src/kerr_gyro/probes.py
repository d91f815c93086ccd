"""Input light states: coherent pairs, coherent x squeezed vacuum, number pairs.

Single-mode amplitude vectors are computed in the log domain with explicit
sign tracking so cutoffs of a few hundred photons stay finite.  Cutoffs are
auto-sized so the truncated tail falls below a requested tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import gammaln

from .fock import DEFAULT_TAIL_TOL, Basis, FockError, TwoModeState, fsum, product_state

REDUCE_X = "reduce-x"   # squeeze fluctuations of a + a^dag
REDUCE_P = "reduce-p"   # squeeze fluctuations of i(a^dag - a)

_MAX_CUTOFF = 20000


class CutoffError(FockError):
    """Raised when a requested tail tolerance is unreachable at a cutoff."""


@dataclass(frozen=True)
class CoherentPair:
    """Coherent states |alpha1>|alpha2> in the two input modes."""

    alpha1: complex
    alpha2: complex = 0.0

    @property
    def mean_total_photons(self) -> float:
        return abs(self.alpha1) ** 2 + abs(self.alpha2) ** 2


@dataclass(frozen=True)
class CoherentSqueezed:
    """Coherent |alpha> in mode 1, squeezed vacuum (r, axis) in mode 2.

    Both allowed axes give real number-basis coefficients; ``reduce-x``
    (the axis that reduces a2 + a2^dag noise) is the one whose coherent
    coupling benefits the difference measurement.
    """

    alpha: float
    r: float
    axis: str = REDUCE_X

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.r < 0:
            raise FockError("alpha and r must be non-negative")
        if self.axis not in (REDUCE_X, REDUCE_P):
            raise FockError(f"unknown squeezing axis {self.axis!r}")

    @property
    def mean_total_photons(self) -> float:
        return self.alpha**2 + math.sinh(self.r) ** 2


@dataclass(frozen=True)
class NumberPair:
    """Photon-number states |n1>|n2> in the two input modes."""

    n1: int
    n2: int

    def __post_init__(self) -> None:
        if self.n1 < 0 or self.n2 < 0:
            raise FockError("photon numbers must be non-negative")

    @property
    def mean_total_photons(self) -> float:
        return float(self.n1 + self.n2)


ProbeSpec = Union[CoherentPair, CoherentSqueezed, NumberPair]


@dataclass(frozen=True)
class CutoffPlan:
    """Per-mode cutoffs with the tail mass each one actually leaves out."""

    cutoff1: int
    cutoff2: int
    tail1: float
    tail2: float

    @property
    def predicted_tail(self) -> float:
        return self.tail1 + self.tail2


def coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """Amplitudes c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n <= cutoff."""
    if cutoff < 0:
        raise FockError("cutoff must be non-negative")
    if alpha == 0:
        out = np.zeros(cutoff + 1, dtype=np.complex128)
        out[0] = 1.0
        return out
    n = np.arange(cutoff + 1, dtype=float)
    mag2 = abs(alpha) ** 2
    log_mag = -0.5 * mag2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    phase = np.exp(1j * n * np.angle(alpha))
    return np.exp(log_mag) * phase


def squeezed_vacuum_vector(r: float, axis: str, cutoff: int) -> np.ndarray:
    """Squeezed-vacuum amplitudes: only even n populated, coefficients real.

    |c_{2m}| = sqrt( (2m)! ) tanh(r)^m / (2^m m! sqrt(cosh r)); the sign is
    (-1)^m for the reduce-x axis and +1 for reduce-p.
    """
    if r < 0:
        raise FockError("squeezing parameter must be non-negative")
    if axis not in (REDUCE_X, REDUCE_P):
        raise FockError(f"unknown squeezing axis {axis!r}")
    if cutoff < 0:
        raise FockError("cutoff must be non-negative")
    out = np.zeros(cutoff + 1, dtype=np.complex128)
    if r == 0:
        out[0] = 1.0
        return out
    m = np.arange(cutoff // 2 + 1, dtype=float)
    log_mag = (
        0.5 * gammaln(2 * m + 1.0)
        - m * math.log(2.0)
        - gammaln(m + 1.0)
        + m * math.log(math.tanh(r))
        - 0.5 * math.log(math.cosh(r))
    )
    sign = (-1.0) ** m if axis == REDUCE_X else np.ones_like(m)
    out[:: 2] = sign * np.exp(log_mag)
    return out


def number_vector(n: int, cutoff: int) -> np.ndarray:
    if n < 0:
        raise FockError("photon number must be non-negative")
    if n > cutoff:
        raise FockError(f"photon number {n} exceeds cutoff {cutoff}")
    out = np.zeros(cutoff + 1, dtype=np.complex128)
    out[n] = 1.0
    return out


def _vector_tail(vector: np.ndarray) -> float:
    norm = fsum(vector.real**2 + vector.imag**2)
    return max(1.0 - norm, 0.0)


def _size_mode(build, mean: float, stdev: float, tol: float) -> tuple[int, float]:
    """Grow cutoff = mean + k * stdev until the exact truncated tail <= tol."""
    widths = 6.0
    while widths <= 64.0:
        cutoff = int(math.ceil(mean + widths * max(stdev, 1.0))) + 1
        cutoff = min(cutoff, _MAX_CUTOFF)
        tail = _vector_tail(build(cutoff))
        if tail <= tol:
            return cutoff, tail
        widths *= 1.5
    raise CutoffError(f"could not reach tail {tol:.1e} below cutoff {_MAX_CUTOFF}")


def plan_cutoffs(spec: ProbeSpec, tail_tol: float = DEFAULT_TAIL_TOL) -> CutoffPlan:
    """Choose per-mode cutoffs so each mode's truncated tail is <= tail_tol / 2."""
    half = tail_tol / 2.0
    if isinstance(spec, NumberPair):
        return CutoffPlan(spec.n1, spec.n2, 0.0, 0.0)
    if isinstance(spec, CoherentPair):
        plans = []
        for alpha in (spec.alpha1, spec.alpha2):
            mean = abs(alpha) ** 2
            if mean == 0.0:
                plans.append((0, 0.0))
                continue
            plans.append(
                _size_mode(lambda c, a=alpha: coherent_vector(a, c), mean, math.sqrt(mean), half)
            )
        (c1, t1), (c2, t2) = plans
        return CutoffPlan(c1, c2, t1, t2)
    if isinstance(spec, CoherentSqueezed):
        mean1 = spec.alpha**2
        if mean1 == 0.0:
            c1, t1 = 0, 0.0
        else:
            c1, t1 = _size_mode(
                lambda c: coherent_vector(spec.alpha, c), mean1, math.sqrt(mean1), half
            )
        mean2 = math.sinh(spec.r) ** 2
        if mean2 == 0.0:
            c2, t2 = 0, 0.0
        else:
            # photon-number variance of squeezed vacuum is 2 n2 (n2 + 1)
            stdev2 = math.sqrt(2.0 * mean2 * (mean2 + 1.0))
            c2, t2 = _size_mode(
                lambda c: squeezed_vacuum_vector(spec.r, spec.axis, c), mean2, stdev2, half
            )
            c2 += c2 % 2  # keep the even ladder complete
        return CutoffPlan(c1, c2, t1, t2)
    raise FockError(f"unknown probe spec {spec!r}")


def build_probe(spec: ProbeSpec, tail_tol: float = DEFAULT_TAIL_TOL) -> TwoModeState:
    """Build the two-mode input state for a probe spec with auto-sized cutoffs."""
    plan = plan_cutoffs(spec, tail_tol)
    if isinstance(spec, CoherentPair):
        v1 = coherent_vector(spec.alpha1, plan.cutoff1)
        v2 = coherent_vector(spec.alpha2, plan.cutoff2)
    elif isinstance(spec, CoherentSqueezed):
        v1 = coherent_vector(spec.alpha, plan.cutoff1)
        v2 = squeezed_vacuum_vector(spec.r, spec.axis, plan.cutoff2)
    else:
        v1 = number_vector(spec.n1, plan.cutoff1)
        v2 = number_vector(spec.n2, plan.cutoff2)
    state = product_state(v1, v2, basis=Basis.INPUT, tail_tol=tail_tol)
    state.validate()
    return state
