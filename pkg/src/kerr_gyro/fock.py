"""Truncated two-mode Fock-space states and exact moment kernels.

A pure two-mode bosonic state is stored as a dense complex amplitude grid
``c[n1, n2]`` over photon numbers ``0 <= n_i <= cutoff_i``.  All operations
are pure functions on immutable states, so concurrent evaluation over
independent states is safe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

DEFAULT_TAIL_TOL = 1e-10

# Norms may exceed unity only by float rounding.
NORM_EXCESS_TOL = 1e-12


class FockError(ValueError):
    """Base class for state construction and truncation errors."""


class TailMassError(FockError):
    """Raised when the outermost truncation band carries too much weight."""


class Basis(enum.Enum):
    """Which mode pair the grid indices refer to."""

    INPUT = "input"            # lab modes entering the device (a1, a2)
    PLUS_MINUS = "plus_minus"  # counter-propagating fiber modes (a+, a-)
    OUTPUT = "output"          # modes leaving the recombining splitter

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


def fsum(values: np.ndarray) -> float:
    """Exactly rounded sum of a float array (compensated summation).

    High moments of the photon-number generator involve cancellations of
    terms ~N^4, so plain left-to-right accumulation is not good enough.
    """
    return math.fsum(np.asarray(values, dtype=float).ravel())


def fsum_complex(values: np.ndarray) -> complex:
    arr = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(arr.real), math.fsum(arr.imag))


@dataclass(frozen=True)
class TwoModeState:
    """Pure two-mode state on a truncated photon-number grid.

    ``amplitudes[n1, n2]`` is the coefficient of |n1, n2> in the basis
    named by ``basis``.  The grid is read-only after construction.
    """

    amplitudes: np.ndarray
    basis: Basis = Basis.INPUT
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self) -> None:
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 2 or amps.size == 0:
            raise FockError("amplitude grid must be a non-empty 2-D array")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def cutoff1(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def cutoff2(self) -> int:
        return self.amplitudes.shape[1] - 1

    def norm_squared(self) -> float:
        a = self.amplitudes
        return fsum(a.real * a.real + a.imag * a.imag)

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real * a.real + a.imag * a.imag

    def tail_mass(self) -> float:
        """Probability mass lost to truncation (max(0, 1 - total norm))."""
        return max(1.0 - self.norm_squared(), 0.0)

    def edge_band_mass(self) -> float:
        """Weight sitting on the outermost band (n1 = cutoff1 or n2 = cutoff2).

        A diagnostic: for decaying states a heavy band predicts that
        photon-redistributing operations will push weight off the grid.
        Exactly representable states (number pairs) occupy the band
        legitimately, so this is not part of ``validate``.
        """
        p = self.probabilities()
        if p.shape[0] == 1 and p.shape[1] == 1:
            return 0.0
        total = fsum(p[-1, :]) + fsum(p[:, -1]) - float(p[-1, -1])
        return max(total, 0.0)

    def validate(self) -> None:
        """Check the norm/tail invariant; raise on violation."""
        norm = self.norm_squared()
        if norm > 1.0 + NORM_EXCESS_TOL:
            raise FockError(f"state norm {norm!r} exceeds 1 beyond tolerance")
        if norm < 1.0 - self.tail_tol - NORM_EXCESS_TOL:
            raise TailMassError(
                f"truncated-away mass {1.0 - norm:.3e} exceeds tail tolerance "
                f"{self.tail_tol:.3e}; increase the cutoffs"
            )

    def with_amplitudes(self, amplitudes: np.ndarray, basis: Basis | None = None) -> "TwoModeState":
        return TwoModeState(amplitudes, basis=self.basis if basis is None else basis,
                            tail_tol=self.tail_tol)

    def padded(self, cutoff1: int, cutoff2: int) -> "TwoModeState":
        """Embed into a larger grid (new entries are exact zeros)."""
        c1, c2 = self.cutoff1, self.cutoff2
        if cutoff1 < c1 or cutoff2 < c2:
            raise FockError("padding may only grow the grid")
        if cutoff1 == c1 and cutoff2 == c2:
            return self
        out = np.zeros((cutoff1 + 1, cutoff2 + 1), dtype=np.complex128)
        out[: c1 + 1, : c2 + 1] = self.amplitudes
        return self.with_amplitudes(out)


@dataclass(frozen=True)
class GMoments:
    """Mean and variance of the nonlinear phase generator N+^2 - N-^2."""

    mean: float
    variance: float

    @property
    def quantum_fisher(self) -> float:
        """4 * variance: the pure-state quantum Fisher information."""
        return 4.0 * self.variance


def product_state(
    vector1: Sequence[complex],
    vector2: Sequence[complex],
    basis: Basis = Basis.INPUT,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> TwoModeState:
    """Assemble the product state with c[n1, n2] = v1[n1] * v2[n2]."""
    v1 = np.asarray(vector1, dtype=np.complex128)
    v2 = np.asarray(vector2, dtype=np.complex128)
    for name, v in (("vector1", v1), ("vector2", v2)):
        if v.ndim != 1 or v.size == 0:
            raise FockError(f"{name} must be a non-empty 1-D amplitude list")
        norm = fsum(v.real * v.real + v.imag * v.imag)
        if norm > 1.0 + NORM_EXCESS_TOL:
            raise FockError(f"{name} norm {norm!r} exceeds 1 beyond tolerance")
    return TwoModeState(np.outer(v1, v2), basis=basis, tail_tol=tail_tol)


def _index_grids(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    n1 = np.arange(shape[0], dtype=float)[:, None]
    n2 = np.arange(shape[1], dtype=float)[None, :]
    return n1, n2


def apply_exchange_generator(amplitudes: np.ndarray) -> np.ndarray:
    """Apply J = i(a2^dag a1 - a1^dag a2) to an amplitude grid.

    The result lives on a grid one row and one column larger, so no weight
    is lost to the truncation edge.
    """
    r, c = amplitudes.shape
    out = np.zeros((r + 1, c + 1), dtype=np.complex128)
    # a2^dag a1 term: image at (m1, m2) = sqrt((m1+1) m2) psi(m1+1, m2-1)
    w = np.sqrt(np.arange(1, r, dtype=float)[:, None] * np.arange(1, c + 1, dtype=float)[None, :])
    out[: r - 1, 1 : c + 1] += 1j * w * amplitudes[1:, :]
    # a1^dag a2 term: image at (m1, m2) = sqrt(m1 (m2+1)) psi(m1-1, m2+1)
    w = np.sqrt(np.arange(1, r + 1, dtype=float)[:, None] * np.arange(1, c, dtype=float)[None, :])
    out[1 : r + 1, : c - 1] += -1j * w * amplitudes[:, 1:]
    return out


def g_moments(state: TwoModeState) -> GMoments:
    """Exact <G> and Var(G) for G = N+^2 - N-^2 on the truncated state.

    In the counter-propagating basis the generator is diagonal.  In the
    input basis it equals N * J with J = i(a2^dag a1 - a1^dag a2) and
    N = N1 + N2, and both of its moments follow from one application of J.
    Moments of degree up to six in the mode operators amplify truncation
    error, so the state must satisfy its tail invariant with margin.
    """
    state.validate()
    a = state.amplitudes
    if state.basis is Basis.PLUS_MINUS:
        n_plus, n_minus = _index_grids(a.shape)
        w = n_plus**2 - n_minus**2
        p = state.probabilities()
        mean = fsum(w * p)
        mean_sq = fsum(w * w * p)
    elif state.basis is Basis.INPUT:
        chi = apply_exchange_generator(a)
        n1, n2 = _index_grids(chi.shape)
        total = n1 + n2
        pad = np.zeros_like(chi)
        pad[: a.shape[0], : a.shape[1]] = a
        mean_c = fsum_complex(np.conj(pad) * total * chi)
        if abs(mean_c.imag) > 1e-9 * max(1.0, abs(mean_c.real)):
            raise FockError(f"<G> came out non-real ({mean_c!r}); state is inconsistent")
        mean = mean_c.real
        chi_p = chi.real**2 + chi.imag**2
        mean_sq = fsum(total * total * chi_p)
    else:
        raise FockError("g_moments needs the input or plus/minus basis")
    variance = mean_sq - mean * mean
    if variance < 0.0:
        if variance < -1e-9 * max(1.0, abs(mean_sq)):
            raise FockError(f"negative Var(G) = {variance!r}")
        variance = 0.0
    return GMoments(mean=mean, variance=variance)


Observable = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def expectation_observable(state: TwoModeState, observable: Observable) -> float | complex:
    """Exact expectation of a diagonal weight grid or an operator callable.

    A ``numpy`` array is interpreted as a weight function w(n1, n2) over the
    truncated grid; a callable must map an amplitude grid to Op|psi> on the
    same shape.  Returns a float when the imaginary part is negligible.
    """
    a = state.amplitudes
    if callable(observable):
        image = np.asarray(observable(a), dtype=np.complex128)
        if image.shape != a.shape:
            raise FockError(
                f"operator image shape {image.shape} does not match state {a.shape}"
            )
        value = fsum_complex(np.conj(a) * image)
    else:
        w = np.asarray(observable)
        if w.shape != a.shape:
            raise FockError(f"weight shape {w.shape} does not match state {a.shape}")
        value = fsum_complex(w * state.probabilities())
    if abs(value.imag) <= 1e-12 * max(1.0, abs(value.real)):
        return value.real
    return value


def photon_number_weights(state: TwoModeState, power1: int = 1, power2: int = 0) -> np.ndarray:
    """Weight grid n1^power1 * n2^power2 matching the state's shape."""
    n1, n2 = _index_grids(state.amplitudes.shape)
    return n1**power1 * n2**power2


def total_number_distribution(state: TwoModeState) -> np.ndarray:
    """Marginal probability of the total photon number n1 + n2."""
    p = state.probabilities()
    r, c = p.shape
    out = np.zeros(r + c - 1)
    flipped = p[:, ::-1]
    for n in range(r + c - 1):
        out[n] = fsum(np.diagonal(flipped, offset=c - 1 - n))
    return out
