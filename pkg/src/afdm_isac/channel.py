"""Doubly dispersive channel, radar echo generation, and DAFT-domain models.

A path with integer delay tau, normalized Doppler nu and gain alpha acts on
the prefix-free symbol as

    y[n] = alpha * gamma_tau[n] * s[<n - tau>_Nc] * exp(j*2*pi*nu*<n - tau>_Nc/Nc)

where gamma_tau is the prefix phase factor (identically 1 when 2*c1*Nc is an
integer and Nc is even).  In the DAFT domain the same path is the unitary
matrix A * Gamma * Pi^tau * Delta_nu * A^H scaled by alpha; time-domain
application and the matrix route agree exactly, which the tests exploit.

The radar echo follows the sampled receiver-clock model

    r[n] = beta * s((n - tau_bar) * Ts) * exp(j*2*pi*nu_bar*n/Nc) + noise

whose fractional delays are evaluated with the frequency-wrapped chirp model
(``waveform_samples``).  For integer delays the two conventions differ only
by the constant phase exp(j*2*pi*nu*tau/Nc), which is absorbed by the path
gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .daft import AfdmConfig, build_daft_matrix, daft, idaft, waveform_samples
from .errors import ConfigurationError, ParameterError

__all__ = [
    "SPEED_OF_LIGHT",
    "ChannelPath",
    "ChannelRealization",
    "SensingTarget",
    "BasisGrid",
    "basis_grid",
    "apply_basis",
    "basis_matrix",
    "effective_channel_matrix",
    "channel_matrix",
    "apply_channel_time",
    "sample_channel",
    "sensing_echo",
    "delay_doppler_to_range_velocity",
]

SPEED_OF_LIGHT = 3.0e8


@dataclass(frozen=True)
class ChannelPath:
    """One propagation path: complex gain, integer delay (samples), real Doppler."""

    gain: complex
    delay: int
    doppler: float


@dataclass(frozen=True)
class ChannelRealization:
    """A set of paths plus the communication noise power and grid bounds."""

    paths: tuple[ChannelPath, ...]
    noise_power: float
    tau_m: int
    nu_m: int

    def __post_init__(self):
        if not self.paths:
            raise ParameterError("realization must contain at least one path")
        if len(self.paths) > self.max_paths:
            raise ParameterError(
                f"{len(self.paths)} paths exceed the basis size {self.max_paths}"
            )

    @property
    def max_paths(self) -> int:
        return (2 * self.nu_m + 1) * (self.tau_m + 1)


@dataclass(frozen=True)
class SensingTarget:
    """Point target: complex gain, real delay in samples, normalized Doppler.

    ``delay_samples`` may be fractional; range/velocity conversions use the
    monostatic round trip 2R/c and 2Vf_c/c.
    """

    gain: complex
    delay_samples: float
    doppler_norm: float
    noise_power: float

    def range_m(self, cfg: AfdmConfig) -> float:
        return SPEED_OF_LIGHT * self.delay_samples * cfg.t_s / 2.0

    def velocity_mps(self, cfg: AfdmConfig) -> float:
        return SPEED_OF_LIGHT * self.doppler_norm * cfg.delta_f / (2.0 * cfg.f_c)


@dataclass(frozen=True)
class BasisGrid:
    """Integer delay-Doppler basis covering [0, tau_m] x [-nu_m, nu_m].

    Pair i (0-based) has tau_i = i // (2*nu_m + 1) and
    nu_i = i % (2*nu_m + 1) - nu_m.
    """

    tau_m: int
    nu_m: int
    pairs: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        span = 2 * self.nu_m + 1
        pairs = tuple(
            (i // span, i % span - self.nu_m) for i in range(span * (self.tau_m + 1))
        )
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def index_of(self, tau: int, nu: int) -> int:
        return tau * (2 * self.nu_m + 1) + nu + self.nu_m


def basis_grid(tau_m: int, nu_m: int) -> BasisGrid:
    return BasisGrid(tau_m=tau_m, nu_m=nu_m)


def _prefix_factor(cfg: AfdmConfig, tau: int, n: np.ndarray) -> np.ndarray:
    out = np.ones(n.shape, dtype=np.complex128)
    early = n < tau
    if np.any(early):
        nc = cfg.n_sub
        out[early] = np.exp(-2j * np.pi * cfg.c1 * (nc * nc + 2.0 * nc * (n[early] - tau)))
    return out


def _shift_and_rotate(s: np.ndarray, cfg: AfdmConfig, tau: int, nu: float) -> np.ndarray:
    """Unit-gain path action on the prefix-free window (cyclic form)."""
    n = np.arange(cfg.n_sub)
    src = (n - tau) % cfg.n_sub
    return _prefix_factor(cfg, tau, n) * s[src] * np.exp(2j * np.pi * nu * src / cfg.n_sub)


def apply_basis(x, cfg: AfdmConfig, tau: int, nu: float) -> np.ndarray:
    """DAFT-domain action of a unit-gain (tau, nu) path, via chirp-FFT ops."""
    if tau < 0 or tau >= cfg.n_sub:
        raise ParameterError(f"delay must lie in [0, Nc), got {tau}")
    return daft(_shift_and_rotate(idaft(x, cfg), cfg, tau, nu), cfg)


def basis_matrix(cfg: AfdmConfig, tau: int, nu: float) -> np.ndarray:
    """Dense unit-gain DAFT-domain path matrix A*Gamma*Pi^tau*Delta_nu*A^H."""
    a = build_daft_matrix(cfg)
    ah = a.conj().T
    n = np.arange(cfg.n_sub)
    stage = ah * np.exp(2j * np.pi * nu * n / cfg.n_sub)[:, None]
    stage = np.roll(stage, tau, axis=0)
    stage = stage * _prefix_factor(cfg, tau, n)[:, None]
    return a @ stage


def effective_channel_matrix(path: ChannelPath, cfg: AfdmConfig) -> np.ndarray:
    """DAFT-domain matrix of one path (gain included)."""
    if path.delay != int(path.delay):
        raise ParameterError("effective channel matrices support integer delays only")
    if not (0 <= path.delay < cfg.n_sub):
        raise ParameterError(f"delay {path.delay} outside [0, Nc)")
    return path.gain * basis_matrix(cfg, int(path.delay), path.doppler)


def channel_matrix(realization: ChannelRealization, cfg: AfdmConfig) -> np.ndarray:
    """Sum of per-path DAFT-domain matrices."""
    out = np.zeros((cfg.n_sub, cfg.n_sub), dtype=np.complex128)
    for p in realization.paths:
        out += effective_channel_matrix(p, cfg)
    return out


def apply_channel_time(s_cpp, realization: ChannelRealization, cfg: AfdmConfig, rng=None) -> np.ndarray:
    """Push a prefixed time signal through the channel.

    Returns a signal of the same length; the prefix region carries the
    cyclic-equivalent continuation (it is discarded by the receiver).  Each
    path's Doppler ramp rides with the delayed signal, so the post-prefix
    window equals the DAFT-domain matrix model exactly.  With rng given,
    circularly symmetric Gaussian noise of the realization's power is added.
    """
    s_cpp = np.asarray(s_cpp, dtype=np.complex128)
    if s_cpp.shape != (cfg.n_sub + cfg.n_cpp,):
        raise ConfigurationError(
            f"expected prefixed signal of length {cfg.n_sub + cfg.n_cpp}, got {s_cpp.shape}"
        )
    for p in realization.paths:
        if p.delay > cfg.n_cpp:
            raise ParameterError(
                f"path delay {p.delay} exceeds prefix length {cfg.n_cpp}"
            )
    s = s_cpp[cfg.n_cpp :]
    n_full = np.arange(-cfg.n_cpp, cfg.n_sub)
    y = np.zeros(n_full.size, dtype=np.complex128)
    for p in realization.paths:
        src = (n_full - p.delay) % cfg.n_sub
        y += (
            p.gain
            * _prefix_factor(cfg, p.delay, n_full)
            * s[src]
            * np.exp(2j * np.pi * p.doppler * src / cfg.n_sub)
        )
    if rng is not None and realization.noise_power > 0:
        scale = math.sqrt(realization.noise_power / 2.0)
        y += scale * (rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size))
    return y


def sample_channel(
    L: int, tau_m: int, nu_m: int, rng, noise_power: float = 0.0
) -> ChannelRealization:
    """Draw L distinct integer (tau, nu) pairs and CN(0, 1/L) gains."""
    if L < 1:
        raise ParameterError("L must be >= 1")
    grid = basis_grid(tau_m, nu_m)
    if L > len(grid):
        raise ParameterError(f"L={L} exceeds the {len(grid)}-pair grid")
    picks = rng.choice(len(grid), size=L, replace=False)
    scale = math.sqrt(1.0 / (2 * L))
    paths = []
    for i in picks:
        tau, nu = grid.pairs[int(i)]
        gain = scale * (rng.standard_normal() + 1j * rng.standard_normal())
        paths.append(ChannelPath(gain=complex(gain), delay=tau, doppler=float(nu)))
    return ChannelRealization(
        paths=tuple(paths), noise_power=noise_power, tau_m=tau_m, nu_m=nu_m
    )


def sensing_echo(s_cpp, cfg: AfdmConfig, target: SensingTarget, rng=None) -> np.ndarray:
    """Target echo over the post-prefix window (Nc samples).

    r[n] = beta * s((n - tau_bar)*Ts) * exp(j*2*pi*nu_bar*n/Nc) + w[n].
    Integer delays read the prefixed record directly; fractional delays
    evaluate the chirp waveform model, which agrees with the record at
    integer instants.
    """
    s_cpp = np.asarray(s_cpp, dtype=np.complex128)
    if s_cpp.shape != (cfg.n_sub + cfg.n_cpp,):
        raise ConfigurationError(
            f"expected prefixed signal of length {cfg.n_sub + cfg.n_cpp}, got {s_cpp.shape}"
        )
    tau = target.delay_samples
    if tau < 0 or tau > cfg.n_cpp:
        raise ParameterError(
            f"target delay {tau} samples outside the prefix budget [0, {cfg.n_cpp}]"
        )
    n = np.arange(cfg.n_sub)
    if float(tau).is_integer():
        delayed = s_cpp[cfg.n_cpp + n - int(tau)]
    else:
        x = daft(s_cpp[cfg.n_cpp :], cfg)
        delayed = waveform_samples(x, cfg, n - tau)
    r = target.gain * delayed * np.exp(2j * np.pi * target.doppler_norm * n / cfg.n_sub)
    if rng is not None and target.noise_power > 0:
        scale = math.sqrt(target.noise_power / 2.0)
        r = r + scale * (rng.standard_normal(cfg.n_sub) + 1j * rng.standard_normal(cfg.n_sub))
    return r


def delay_doppler_to_range_velocity(tau_hat: float, nu_hat: float, cfg: AfdmConfig) -> tuple[float, float]:
    """Convert normalized estimates to range (m) and radial velocity (m/s)."""
    r = SPEED_OF_LIGHT * tau_hat * cfg.t_s / 2.0
    v = SPEED_OF_LIGHT * nu_hat * cfg.delta_f / (2.0 * cfg.f_c)
    return r, v
