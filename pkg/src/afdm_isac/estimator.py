"""Channel estimation over the integer delay-Doppler basis.

The received DAFT-domain frame is y = Psi_p a + (Psi_d a + w), where column i
of Psi_p is the pilot pushed through basis path i.  Because every basis path
matrix is unitary, the data-plus-noise term is white with per-sample variance

    c = sigma_d^2 * sum_i prior_var_i + sigma_cn^2

(the data covariance sigma_d^2 I is preserved by each unitary path, and the
path gains are uncorrelated under the prior), so the MMSE estimate reduces to
a ridge-regularized least squares over Psi_p.  Detected paths are kept by
magnitude thresholding and the channel matrix is rebuilt from the surviving
coefficients.  Pilot-data interference can be peeled iteratively: demodulate
with the current estimate, subtract the rebuilt data contribution, and
re-estimate against the smaller residual noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channel import BasisGrid, apply_basis, basis_matrix
from .daft import AfdmConfig
from .errors import NumericalError, ParameterError
from .modem import FrameSpec, demap_symbols, map_bits

__all__ = [
    "PriorModel",
    "EstimationResult",
    "build_psi",
    "effective_noise_covariance",
    "mmse_estimate",
    "posterior_variances",
    "threshold_paths",
    "reconstruct_channel",
    "equalize_demod",
    "iterative_estimate",
    "channel_mse",
]


@dataclass(frozen=True)
class PriorModel:
    """Diagonal gain prior and the white effective-noise variance."""

    gain_variances: np.ndarray
    noise_variance: float

    def __post_init__(self):
        g = np.asarray(self.gain_variances, dtype=np.float64)
        if np.any(g < 0):
            raise ParameterError("prior variances must be non-negative")
        if self.noise_variance < 0:
            raise ParameterError("noise variance must be non-negative")
        object.__setattr__(self, "gain_variances", g)

    @staticmethod
    def uniform(grid: BasisGrid, noise_variance: float, total_gain_power: float = 1.0):
        """Spread a total gain power uniformly over the basis."""
        n = len(grid)
        return PriorModel(np.full(n, total_gain_power / n), noise_variance)


@dataclass
class EstimationResult:
    """Output of the (iterative) estimator."""

    alpha_hat: np.ndarray
    indicator: np.ndarray
    h_eff_hat: np.ndarray
    residual_norms: list[float]
    monotone: bool
    metadata: dict = field(default_factory=dict)


def build_psi(x, grid: BasisGrid, cfg: AfdmConfig) -> np.ndarray:
    """Nc x L matrix whose column i is the basis-path-i image of x."""
    x = np.asarray(x, dtype=np.complex128)
    return np.stack(
        [apply_basis(x, cfg, tau, float(nu)) for tau, nu in grid.pairs], axis=1
    )


def effective_noise_covariance(
    gain_variances, data_symbol_power: float, noise_power: float
) -> float:
    """Scalar variance of the data-interference-plus-noise term.

    The model covariance is this scalar times the identity; each basis path
    is unitary so random data contributes sigma_d^2 * sum(prior variances)
    per received sample.
    """
    total = float(np.sum(np.asarray(gain_variances, dtype=np.float64)))
    return data_symbol_power * total + noise_power


_LS_NOISE_FLOOR = 1e-30


def mmse_estimate(y, psi_p, prior: PriorModel) -> np.ndarray:
    """Linear MMSE gain estimate; degrades gracefully to least squares.

    With white effective noise c the estimate is
    (Psi^H Psi / c + diag(1/prior))^{-1} Psi^H y / c.  A vanishing c (or an
    infinite prior) removes the corresponding regularization.
    """
    y = np.asarray(y, dtype=np.complex128)
    psi_p = np.asarray(psi_p, dtype=np.complex128)
    if np.linalg.norm(y) == 0.0:
        return np.zeros(psi_p.shape[1], dtype=np.complex128)
    c = prior.noise_variance
    if c <= _LS_NOISE_FLOOR:
        sol, *_ = np.linalg.lstsq(psi_p, y, rcond=None)
        return sol
    normal = psi_p.conj().T @ psi_p / c
    inv_prior = np.where(
        np.isfinite(prior.gain_variances) & (prior.gain_variances > 0),
        1.0 / np.where(prior.gain_variances > 0, prior.gain_variances, 1.0),
        0.0,
    )
    normal = normal + np.diag(inv_prior)
    rhs = psi_p.conj().T @ y / c
    try:
        sol = np.linalg.solve(normal, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"singular normal matrix (cond={np.linalg.cond(normal):.3e})"
        ) from exc
    if not np.all(np.isfinite(sol)):
        raise NumericalError(
            f"non-finite estimate (cond={np.linalg.cond(normal):.3e})"
        )
    return sol


def posterior_variances(psi_p, prior: PriorModel) -> np.ndarray:
    """Diagonal of the posterior covariance of the gain estimate."""
    psi_p = np.asarray(psi_p, dtype=np.complex128)
    c = max(prior.noise_variance, _LS_NOISE_FLOOR)
    normal = psi_p.conj().T @ psi_p / c
    inv_prior = np.where(prior.gain_variances > 0, 1.0 / prior.gain_variances, 0.0)
    normal = normal + np.diag(inv_prior)
    return np.real(np.diag(np.linalg.inv(normal)))


def threshold_paths(alpha_hat, eps) -> np.ndarray:
    """Binary path indicator: keep coefficients with |alpha| above eps."""
    eps_arr = np.asarray(eps, dtype=np.float64)
    if np.any(eps_arr < 0):
        raise ParameterError("threshold must be non-negative")
    return (np.abs(np.asarray(alpha_hat)) > eps_arr).astype(np.int8)


@lru_cache(maxsize=8)
def _basis_stack(cfg: AfdmConfig, tau_m: int, nu_m: int) -> np.ndarray:
    grid = BasisGrid(tau_m=tau_m, nu_m=nu_m)
    return np.stack(
        [basis_matrix(cfg, tau, float(nu)) for tau, nu in grid.pairs], axis=0
    )


def reconstruct_channel(alpha_hat, indicator, grid: BasisGrid, cfg: AfdmConfig) -> np.ndarray:
    """Rebuild the effective channel matrix from surviving coefficients."""
    weights = np.asarray(alpha_hat, dtype=np.complex128) * np.asarray(indicator)
    stack = _basis_stack(cfg, grid.tau_m, grid.nu_m)
    return np.tensordot(weights, stack, axes=(0, 0))


def equalize_demod(
    y, h_hat, x_pilot, spec: FrameSpec, noise_power: float
) -> tuple[np.ndarray, np.ndarray]:
    """Regularized linear equalizer plus hard demapping.

    Returns (equalized data symbols, bits).  The pilot contribution through
    the estimated channel is removed before equalization.
    """
    y = np.asarray(y, dtype=np.complex128)
    h_hat = np.asarray(h_hat, dtype=np.complex128)
    if h_hat.shape[0] != h_hat.shape[1]:
        raise ParameterError("channel matrix must be square")
    if spec.data_symbol_power <= 0:
        return np.zeros(y.shape, dtype=np.complex128), np.zeros(0, dtype=np.int64)
    lam = noise_power / spec.data_symbol_power
    resid = y - h_hat @ np.asarray(x_pilot, dtype=np.complex128)
    normal = h_hat.conj().T @ h_hat + lam * np.eye(h_hat.shape[0])
    try:
        x_d = np.linalg.solve(normal, h_hat.conj().T @ resid)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular equalizer matrix") from exc
    bits = demap_symbols(x_d, spec)
    return x_d, bits


def iterative_estimate(
    y,
    x_pilot,
    spec: FrameSpec,
    grid: BasisGrid,
    cfg: AfdmConfig,
    noise_power: float,
    n_iter: int = 2,
    prior: PriorModel | None = None,
    eps_scale: float = 3.0,
    eps: float | None = None,
    channel_power: float = 1.0,
    known_data=None,
) -> EstimationResult:
    """Estimate, demodulate, cancel, and re-estimate.

    Iteration 1 models the data as white interference of power
    sigma_d^2 * channel_power per sample; each later iteration subtracts the
    demodulated data pushed through the current channel estimate and sets the
    interference model from the measured residual of the previous fit (so a
    failed cancellation does not make the next pass overconfident).  The
    ``monotone`` flag reports whether the fit residual never increased.
    ``known_data`` replaces the demodulated feedback with a given data vector
    (diagnostic genie for isolating the cancellation algebra).
    """
    if n_iter < 1:
        raise ParameterError("n_iter must be >= 1")
    y = np.asarray(y, dtype=np.complex128)
    x_pilot = np.asarray(x_pilot, dtype=np.complex128)
    psi_p = build_psi(x_pilot, grid, cfg)
    if prior is None:
        prior = PriorModel.uniform(grid, noise_variance=0.0)
    c_it = effective_noise_covariance(
        np.asarray([channel_power]), spec.data_symbol_power, noise_power
    )
    residuals: list[float] = []
    feedback = np.zeros(cfg.n_sub, dtype=np.complex128)
    alpha_hat = np.zeros(len(grid), dtype=np.complex128)
    indicator = np.zeros(len(grid), dtype=np.int8)
    h_hat = np.zeros((cfg.n_sub, cfg.n_sub), dtype=np.complex128)
    for it in range(n_iter):
        prior_it = PriorModel(prior.gain_variances, c_it)
        observation = y if it == 0 else y - h_hat @ feedback
        alpha_hat = mmse_estimate(observation, psi_p, prior_it)
        if eps is None:
            post = posterior_variances(psi_p, prior_it)
            eps_it = eps_scale * np.sqrt(np.maximum(post, 0.0))
        else:
            eps_it = eps
        indicator = threshold_paths(alpha_hat, eps_it)
        h_hat = reconstruct_channel(alpha_hat, indicator, grid, cfg)
        x_d_hat, bits = equalize_demod(y, h_hat, x_pilot, spec, noise_power)
        if spec.data_symbol_power > 0 and bits.size:
            x_d_hat = map_bits(bits, spec)
        feedback = x_d_hat if known_data is None else np.asarray(known_data, dtype=np.complex128)
        resid = float(np.linalg.norm(y - h_hat @ (x_pilot + x_d_hat)))
        residuals.append(resid)
        # unexplained power per sample, corrected for the fitted coefficients
        dof = max(cfg.n_sub - int(indicator.sum()), cfg.n_sub // 4)
        c_it = max(noise_power, resid * resid / dof)
    monotone = all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))
    return EstimationResult(
        alpha_hat=alpha_hat,
        indicator=indicator,
        h_eff_hat=h_hat,
        residual_norms=residuals,
        monotone=monotone,
        metadata={"equalizer": "regularized-linear", "n_iter": n_iter, "eps_scale": eps_scale},
    )


def channel_mse(h_true, h_hat) -> float:
    """Frobenius norm of the channel matrix error (single run, unsquared)."""
    h_true = np.asarray(h_true)
    h_hat = np.asarray(h_hat)
    if h_true.shape != h_hat.shape:
        raise ParameterError(f"shape mismatch: {h_true.shape} vs {h_hat.shape}")
    return float(np.linalg.norm(h_true - h_hat))
