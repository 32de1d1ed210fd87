"""Pilot sequence generators for superimposed-pilot AFDM.

Three families are provided:

* ``proposed_pilot`` — a chirp-corrected Zadoff-Chu comb whose spacing is set
  by the Doppler budget alone.  On an Nc = 2^p grid with c1 = 2^q/(2 Nc) the
  comb spacing is Q = 2^(q+r); each nonzero pilot carries a ZC value times a
  quadratic phase correction that cancels the chirp coupling, which makes the
  cyclic ambiguity function of the pilot exactly zero everywhere on the
  evaluated delay-Doppler region except the origin.  The zero region covers
  all Doppler offsets |nu| <= 2^q - 1 and all delays |tau| <= 1/(2 c1) - 1;
  at delay multiples of 1/(2 c1) the comb recurs with a full-height peak, so
  that is the design's unambiguous-delay limit (see
  ``proposed_delay_limit``).

* ``traditional_spi_pilot`` — the conventional superimposed comb whose
  spacing must exceed the full delay-Doppler footprint (spacing grows with
  the delay budget, so the pilot count collapses for long channels).

* ``single_pilot`` — all pilot energy on subcarrier 0.

All generators return a DAFT-domain vector with total energy sigma_p^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .daft import AfdmConfig
from .errors import ParameterError

__all__ = [
    "ZcParams",
    "PilotScheme",
    "zc_sequence",
    "select_c1_q",
    "proposed_pilot",
    "proposed_spacing",
    "proposed_delay_limit",
    "traditional_spi_pilot",
    "traditional_spacing",
    "single_pilot",
    "max_unambiguous_delay",
    "pilot_vector",
]


@dataclass(frozen=True)
class ZcParams:
    """Zadoff-Chu parameters: sequence length and root (gcd(length, root) = 1)."""

    length: int
    root: int = 1

    def __post_init__(self):
        if self.length < 1:
            raise ParameterError(f"ZC length must be >= 1, got {self.length}")
        if math.gcd(self.length, self.root) != 1:
            raise ParameterError(
                f"ZC root {self.root} must be coprime with length {self.length}"
            )


def zc_sequence(params: ZcParams) -> np.ndarray:
    """Unit-modulus Zadoff-Chu sequence with zero periodic autocorrelation.

    Even lengths use exp(-j*pi*u*n^2/N); odd lengths use the standard
    exp(-j*pi*u*n*(n+1)/N) form so the sequence stays N-periodic.
    """
    n = np.arange(params.length, dtype=np.float64)
    if params.length % 2 == 0:
        phase = params.root * n * n / params.length
    else:
        phase = params.root * n * (n + 1) / params.length
    return np.exp(-1j * np.pi * phase)


def select_c1_q(nu_m: int, cfg: AfdmConfig) -> tuple[float, int]:
    """Pick the power-of-two chirp rate for a Doppler budget nu_m.

    Returns (c1, q) with c1 = 2^q/(2*Nc) and q the smallest integer such
    that 2^(q-1) < 2*nu_m + 1 <= 2^q.  Requires Nc to be a power of two.
    """
    if nu_m < 0:
        raise ParameterError("nu_m must be non-negative")
    _require_pow2(cfg.n_sub)
    target = 2 * nu_m + 1
    q = max(0, math.ceil(math.log2(target)))
    return (2**q) / (2.0 * cfg.n_sub), q


def proposed_spacing(cfg: AfdmConfig, r: int) -> tuple[int, int]:
    """Comb spacing and pilot count (Q, Np) for the chirp-corrected design."""
    p = _require_pow2(cfg.n_sub)
    q = _require_pow2(cfg.two_c1_n, what="2*c1*Nc")
    if not 0 <= r <= p - q:
        raise ParameterError(f"r must lie in [0, {p - q}], got {r}")
    spacing = cfg.two_c1_n * 2**r
    return spacing, cfg.n_sub // spacing


def proposed_delay_limit(cfg: AfdmConfig) -> int:
    """Largest delay with a guaranteed-zero pilot ambiguity function, 1/(2*c1) - 1."""
    return cfg.n_sub // cfg.two_c1_n - 1


def proposed_pilot(
    cfg: AfdmConfig,
    pilot_power: float,
    r: int = 0,
    zc_root: int = 1,
    chirp_correction: bool = True,
) -> np.ndarray:
    """Chirp-corrected ZC comb pilot with an ideal cyclic ambiguity function.

    Nonzero entries sit at m = 0, Q, ..., (Np-1)*Q with
    x[m] = sqrt(sigma_p^2/Np) * z[m/Q] * exp(j*2*pi*psi[m]) and
    psi[m] = m^2*2^r/(2*Q*Nc) - c2*m^2.  ``chirp_correction=False`` drops the
    psi phase (places the raw ZC values on the comb), which breaks the
    zero-sidelobe property for nonzero Doppler — useful as a counterexample.
    """
    spacing, n_p = proposed_spacing(cfg, r)
    z = zc_sequence(ZcParams(length=n_p, root=zc_root))
    positions = np.arange(n_p) * spacing
    x = np.zeros(cfg.n_sub, dtype=np.complex128)
    amp = math.sqrt(pilot_power / n_p)
    if chirp_correction:
        m = positions.astype(np.float64)
        psi = m * m * 2**r / (2.0 * spacing * cfg.n_sub) - cfg.c2 * m * m
        x[positions] = amp * z * np.exp(2j * np.pi * psi)
    else:
        x[positions] = amp * z
    return x


def traditional_spacing(cfg: AfdmConfig, tau_m: int, nu_m: int) -> tuple[int, int]:
    """Spacing and count (Q, Np) required by the full delay-Doppler footprint.

    Q = 2*c1*tau_m*Nc + 2*nu_m + 1 and Np = floor(Nc/Q).
    """
    spacing = cfg.two_c1_n * tau_m + 2 * nu_m + 1
    n_p = cfg.n_sub // spacing
    if n_p < 1:
        raise ParameterError(
            f"spacing {spacing} exceeds Nc={cfg.n_sub}: no pilot fits"
        )
    return spacing, n_p


def traditional_spi_pilot(
    cfg: AfdmConfig,
    pilot_power: float,
    tau_m: int = 0,
    nu_m: int = 0,
    spacing: Optional[int] = None,
    n_pilots: Optional[int] = None,
    zc_root: Optional[int] = None,
) -> np.ndarray:
    """Conventional superimposed pilot comb.

    By default the spacing follows the delay-Doppler footprint rule; both
    ``spacing`` and ``n_pilots`` can be pinned independently to reproduce
    published baselines that fix Np regardless of the channel budget.  The
    nonzero entries carry equal phases by default, which makes the comb's
    delay ambiguity outside its validity region explicit (delay offsets of
    one comb period collide coherently); pass ``zc_root`` to place a ZC
    sequence on the comb instead.  Within the validity region any
    unit-modulus phases give zero inter-pilot interference.
    """
    if spacing is None:
        spacing, derived_np = traditional_spacing(cfg, tau_m, nu_m)
    else:
        derived_np = cfg.n_sub // spacing
    n_p = derived_np if n_pilots is None else n_pilots
    if n_p < 1:
        raise ParameterError("pilot count must be >= 1")
    if (n_p - 1) * spacing >= cfg.n_sub:
        raise ParameterError(
            f"{n_p} pilots at spacing {spacing} do not fit in Nc={cfg.n_sub}"
        )
    if zc_root is None:
        z = np.ones(n_p, dtype=np.complex128)
    else:
        z = zc_sequence(ZcParams(length=n_p, root=zc_root))
    x = np.zeros(cfg.n_sub, dtype=np.complex128)
    x[np.arange(n_p) * spacing] = math.sqrt(pilot_power / n_p) * z
    return x


def single_pilot(cfg: AfdmConfig, pilot_power: float) -> np.ndarray:
    """All pilot energy on subcarrier 0."""
    x = np.zeros(cfg.n_sub, dtype=np.complex128)
    x[0] = math.sqrt(pilot_power)
    return x


def max_unambiguous_delay(spacing: int, nu_m: int, c1: float, n_sub: int) -> int:
    """Largest delay the conventional comb tolerates: floor((Q-2*nu_m-1)/(2*c1*Nc))."""
    margin = spacing - 2 * nu_m - 1
    if margin < 0:
        return 0
    return int(margin // (2.0 * c1 * n_sub)) if c1 > 0 else n_sub - 1


@dataclass(frozen=True)
class PilotScheme:
    """Selectable pilot family with its parameters (used by experiment configs).

    variant is one of "proposed", "traditional_spi", "single".  ``r`` applies
    to the proposed family; ``tau_m``/``nu_m``/``spacing``/``n_pilots`` to the
    traditional one.
    """

    variant: str
    pilot_power: float
    r: int = 0
    tau_m: int = 0
    nu_m: int = 0
    spacing: Optional[int] = None
    n_pilots: Optional[int] = None
    zc_root: int = 1
    traditional_zc_root: Optional[int] = None

    def __post_init__(self):
        if self.variant not in ("proposed", "traditional_spi", "single"):
            raise ParameterError(f"unknown pilot variant {self.variant!r}")
        if self.pilot_power <= 0:
            raise ParameterError("pilot_power must be positive")


def pilot_vector(scheme: PilotScheme, cfg: AfdmConfig) -> np.ndarray:
    """Build the DAFT-domain pilot vector for a scheme."""
    if scheme.variant == "proposed":
        return proposed_pilot(cfg, scheme.pilot_power, r=scheme.r, zc_root=scheme.zc_root)
    if scheme.variant == "traditional_spi":
        return traditional_spi_pilot(
            cfg,
            scheme.pilot_power,
            tau_m=scheme.tau_m,
            nu_m=scheme.nu_m,
            spacing=scheme.spacing,
            n_pilots=scheme.n_pilots,
            zc_root=scheme.traditional_zc_root,
        )
    return single_pilot(cfg, scheme.pilot_power)


def _require_pow2(value: int, what: str = "Nc") -> int:
    if value < 1 or value & (value - 1):
        raise ParameterError(f"{what} must be a power of two, got {value}")
    return value.bit_length() - 1
