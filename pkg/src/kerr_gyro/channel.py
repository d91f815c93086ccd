"""Signal transformation of the nonlinear gyroscope.

The pipeline is: 50/50 input splitter (lab modes -> counter-propagating
modes), diagonal Kerr phase exp(-i[phi (n+^2 - n-^2) + (phi0/2)(n+ - n-)]),
inverse splitter, photon counting.

Photon number is conserved throughout, so every operation acts sector by
sector on states of fixed total n.  Within a sector the splitter and the
full pass are SU(2) rotations; their matrices come from the eigensystem of
a real symmetric tridiagonal operator (one LAPACK call per sector), which
stays orthogonal to machine precision at cutoffs of a thousand and beyond,
unlike a naively iterated column recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .fock import Basis, FockError, TwoModeState, fsum

_CACHED_SECTOR_LIMIT = 128


class ChannelError(FockError):
    """Raised on basis mismatches in channel operations."""


@dataclass(frozen=True)
class ChannelParams:
    """Nonlinear signal phase phi and fixed linear bias phi0 (radians)."""

    phi: float
    phi0: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.phi) and math.isfinite(self.phi0)):
            raise ChannelError("phi and phi0 must be finite")


@dataclass(frozen=True)
class PhotonStatistics:
    """Joint photon-count distribution p(n1, n2) at the gyroscope outputs."""

    probabilities: np.ndarray
    phi: float
    phi0: float
    tail_tol: float

    def __post_init__(self) -> None:
        p = np.ascontiguousarray(self.probabilities, dtype=float)
        p.flags.writeable = False
        object.__setattr__(self, "probabilities", p)

    def total(self) -> float:
        return fsum(self.probabilities)

    def moment_of_difference(self, power: int) -> float:
        """< (n1 - n2)^power > under the count distribution."""
        r, c = self.probabilities.shape
        d = np.arange(r, dtype=float)[:, None] - np.arange(c, dtype=float)[None, :]
        return fsum(d**power * self.probabilities)


@dataclass(frozen=True)
class MStatistics:
    """First two moments of the count difference M = N1 - N2."""

    mean: float
    mean_square: float

    @property
    def variance(self) -> float:
        return self.mean_square - self.mean**2


def _sector_eigensystem(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors/eigenvalues of the symmetric tridiagonal sector generator.

    T has zero diagonal and off-diagonal beta_k = sqrt((k+1)(n-k)); its
    spectrum is {n - 2k}.  The photon-exchange generator of the splitter is
    a diagonal similarity transform of -i T.
    """
    if n == 0:
        return np.ones((1, 1)), np.zeros(1)
    k = np.arange(n, dtype=float)
    beta = np.sqrt((k + 1.0) * (n - k))
    lam, vec = eigh_tridiagonal(np.zeros(n + 1), beta)
    return vec, lam


@lru_cache(maxsize=None)
def _sector_eigensystem_small(n: int) -> tuple[np.ndarray, np.ndarray]:
    vec, lam = _sector_eigensystem(n)
    vec.flags.writeable = False
    lam.flags.writeable = False
    return vec, lam


def _eigensystem(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n <= _CACHED_SECTOR_LIMIT:
        return _sector_eigensystem_small(n)
    return _sector_eigensystem(n)


def _quarter_powers_of_i(n: int) -> np.ndarray:
    """i^k for k = 0..n."""
    return 1j ** (np.arange(n + 1) % 4)


def _pad_square(state: TwoModeState) -> TwoModeState:
    """Grow the grid so every populated total-n sector is complete.

    A complete sector n needs both cutoffs >= n, so the square side is the
    highest populated total photon number (at most cutoff1 + cutoff2).
    """
    rows, cols = np.nonzero(state.amplitudes)
    n_max = int((rows + cols).max()) if rows.size else 0
    side = max(state.cutoff1, state.cutoff2, n_max)
    return state.padded(side, side)


def _sectors(side: int) -> Iterator[tuple[int, np.ndarray]]:
    for n in range(side + 1):
        rows = np.arange(max(0, n - side), min(n, side) + 1)
        yield n, rows


def apply_beam_splitter(state: TwoModeState, sense: str = "forward") -> TwoModeState:
    """Exact 50/50 splitter as per-sector SU(2) rotations.

    ``forward`` maps the input basis onto the counter-propagating one;
    ``inverse`` undoes it, landing in the output basis.  Unitary to 1e-12.
    """
    if sense == "forward":
        if state.basis is not Basis.INPUT:
            raise ChannelError("forward splitter expects the input basis")
        new_basis = Basis.PLUS_MINUS
    elif sense == "inverse":
        if state.basis is not Basis.PLUS_MINUS:
            raise ChannelError("inverse splitter expects the plus/minus basis")
        new_basis = Basis.OUTPUT
    else:
        raise ChannelError(f"unknown splitter sense {sense!r}")
    state.validate()
    padded = _pad_square(state)
    side = padded.cutoff1
    amps = padded.amplitudes
    out = np.zeros_like(amps)
    quarter = _quarter_powers_of_i(side)
    for n, rows in _sectors(side):
        cols = n - rows
        v = amps[rows, cols]
        if not v.any():
            continue
        vec, lam = _eigensystem(n)
        i_k = quarter[rows]      # i^{k} over the sector's mode-1 index
        i_n2 = quarter[cols]     # i^{n-k}
        rot = np.exp(1j * (math.pi / 4.0) * lam)
        # rotation matrix D = S V rot V^T S^{-1} with S = diag(i^k)
        if sense == "forward":
            u = np.conj(i_k) * (i_n2 * v)            # pre-phase i^{n2}, then S^{-1}
            u = vec @ (rot * (vec.T @ u))
            out[rows, cols] = i_k * u
        else:
            sign = np.where(cols % 2 == 0, 1.0, -1.0)  # (-1)^{n2}
            u = np.conj(i_k) * (sign * v)
            u = vec @ (rot * (vec.T @ u))
            out[rows, cols] = i_n2 * (i_k * u)       # post-phase i^{n2}
    return TwoModeState(out, basis=new_basis, tail_tol=state.tail_tol)


def apply_gyro_phase(state: TwoModeState, params: ChannelParams) -> TwoModeState:
    """Diagonal Kerr + bias phase in the counter-propagating basis."""
    if state.basis is not Basis.PLUS_MINUS:
        raise ChannelError("the gyro phase acts in the plus/minus basis")
    n_plus = np.arange(state.cutoff1 + 1, dtype=float)[:, None]
    n_minus = np.arange(state.cutoff2 + 1, dtype=float)[None, :]
    phase = params.phi * (n_plus**2 - n_minus**2) + 0.5 * params.phi0 * (n_plus - n_minus)
    return state.with_amplitudes(state.amplitudes * np.exp(-1j * phase))


def channel_amplitudes(
    probe: TwoModeState, params_list: Sequence[ChannelParams]
) -> list[TwoModeState]:
    """Output-basis amplitudes of the full pass for several working points.

    Composed analytically, the pass acts on each total-n sector as a single
    rotation exp(theta_n K) with theta_n = phi * n + phi0 / 2 and K the
    photon-exchange generator, so the per-sector eigensystem is shared by
    every requested (phi, phi0).  Output amplitudes are real for probes
    with real number-basis coefficients.
    """
    if probe.basis is not Basis.INPUT:
        raise ChannelError("the channel expects a probe in the input basis")
    probe.validate()
    padded = _pad_square(probe)
    side = padded.cutoff1
    amps = padded.amplitudes
    outs = [np.zeros_like(amps) for _ in params_list]
    quarter = _quarter_powers_of_i(side)
    for n, rows in _sectors(side):
        cols = n - rows
        v = amps[rows, cols]
        if not v.any():
            continue
        vec, lam = _eigensystem(n)
        i_k = quarter[rows]
        t = vec.T @ (i_k * v)
        for out, params in zip(outs, params_list):
            theta = params.phi * n + 0.5 * params.phi0
            u = vec @ (np.exp(-1j * theta * lam) * t)
            out[rows, cols] = np.conj(i_k) * u
    return [
        TwoModeState(out, basis=Basis.OUTPUT, tail_tol=probe.tail_tol) for out in outs
    ]


def gyro_pass(probe: TwoModeState, params: ChannelParams) -> PhotonStatistics:
    """Full pass: splitter, Kerr phase, inverse splitter, photon counting."""
    final = channel_amplitudes(probe, [params])[0]
    return PhotonStatistics(
        probabilities=final.probabilities(),
        phi=params.phi,
        phi0=params.phi0,
        tail_tol=probe.tail_tol,
    )


def m_statistics(stats: PhotonStatistics) -> MStatistics:
    """Mean and second moment of the output count difference."""
    return MStatistics(
        mean=stats.moment_of_difference(1),
        mean_square=stats.moment_of_difference(2),
    )


def total_number_marginal(p: np.ndarray) -> np.ndarray:
    """Marginal distribution of n1 + n2 for a probability grid."""
    r, c = p.shape
    out = np.zeros(r + c - 1)
    flipped = p[:, ::-1]
    for n in range(r + c - 1):
        out[n] = fsum(np.diagonal(flipped, offset=c - 1 - n))
    return out
