"""Physical-layer quantities for IRS-assisted two-way links.

Everything here is a pure function of its inputs. Powers are linear
milliwatts; dB values are converted with :func:`db_to_linear` and
:func:`dbm_to_mw` at the configuration boundary only.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

logger = logging.getLogger(__name__)

#: log-domain floor for beta * L, keeps exp() away from underflow to 0/NaN
LOG_FLOOR = -700.0

_EULER_GAMMA = 0.5772156649015329
# below this argument the CDF is summed from its power series
_SERIES_SWITCH = 1.0


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def dbm_to_mw(value_dbm: float) -> float:
    return 10.0 ** (value_dbm / 10.0)


def mw_to_dbm(value_mw: float) -> float:
    return 10.0 * math.log10(value_mw)


class Duplex(str, enum.Enum):
    FD = "FD"
    HD = "HD"


@dataclass(frozen=True)
class PathLossParams:
    a0: float = 1.0
    alpha: float = 2.7

    def __post_init__(self):
        if not (self.a0 > 0 and self.alpha > 0):
            raise ValueError(f"path-loss parameters must be positive, got {self}")


@dataclass(frozen=True)
class LiModel:
    """Residual loop interference ``omega * P**nu`` after cancellation."""

    omega: float
    nu: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not 0.0 <= self.nu <= 1.0:
            raise ValueError("nu must lie in [0, 1]")


@dataclass(frozen=True)
class LinkBudget:
    """Transmit/noise powers (mW) and the nominal SINR threshold (linear).

    ``sinr_threshold`` is always the full-duplex threshold. A half-duplex
    budget applies :func:`hd_threshold` through :attr:`effective_threshold`
    so both modes are compared at equal spectral efficiency.
    """

    tx_power_mw: float
    noise_mw: float
    residual_li_mw: float
    sinr_threshold: float
    duplex: Duplex = Duplex.FD

    def __post_init__(self):
        object.__setattr__(self, "duplex", Duplex(self.duplex))
        if not (self.tx_power_mw > 0 and self.noise_mw > 0 and self.sinr_threshold > 0):
            raise ValueError(f"powers and threshold must be positive: {self}")
        if self.residual_li_mw < 0:
            raise ValueError("residual LI power must be nonnegative")
        if self.duplex is Duplex.HD and self.residual_li_mw != 0:
            raise ValueError("half-duplex budget cannot carry residual LI power")

    @classmethod
    def from_db(cls, tx_power_dbm, noise_dbm, residual_li_dbm, sinr_threshold_db,
                duplex=Duplex.FD):
        li = 0.0 if residual_li_dbm is None else dbm_to_mw(residual_li_dbm)
        budget = cls(dbm_to_mw(tx_power_dbm), dbm_to_mw(noise_dbm), li,
                     db_to_linear(sinr_threshold_db))
        return budget.half_duplex() if Duplex(duplex) is Duplex.HD else budget

    def half_duplex(self) -> "LinkBudget":
        return replace(self, residual_li_mw=0.0, duplex=Duplex.HD)

    @property
    def effective_threshold(self) -> float:
        if self.duplex is Duplex.HD:
            return hd_threshold(self.sinr_threshold)
        return self.sinr_threshold


@dataclass(frozen=True)
class RayleighProduct:
    """Product of two independent Rayleigh(sigma/sqrt(2)) magnitudes."""

    sigma_sq: float = 1.0

    def __post_init__(self):
        if not self.sigma_sq > 0:
            raise ValueError("sigma_sq must be positive")

    def cdf(self, u):
        return _rayleigh_product_cdf(np.asarray(u, dtype=float) * 2.0 / self.sigma_sq)

    def logcdf(self, u):
        return _rayleigh_product_logcdf(np.asarray(u, dtype=float) * 2.0 / self.sigma_sq)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        # inverse transform: Rayleigh(s) = s * sqrt(-2 ln(1 - U))
        scale = math.sqrt(self.sigma_sq / 2.0)
        u = rng.random((2,) + tuple(np.atleast_1d(size)))
        return rayleigh_from_uniform(u[0], scale) * rayleigh_from_uniform(u[1], scale)


#: closed set of supported per-element fade models
FadeDistribution = RayleighProduct


def rayleigh_from_uniform(u, scale):
    return scale * np.sqrt(-2.0 * np.log1p(-np.asarray(u)))


def path_loss(params: PathLossParams, distance_m: float) -> float:
    if not distance_m > 0:
        raise ValueError(f"distance must be positive, got {distance_m}")
    return params.a0 * distance_m ** (-params.alpha)


def effective_gain(budget: LinkBudget, delta_n: float) -> float:
    """SINR scale ``P * delta / (sigma_LI^2 + sigma_w^2)`` for end-to-end loss delta."""
    if not delta_n > 0:
        raise ValueError("end-to-end path loss must be positive")
    return budget.tx_power_mw * delta_n / (budget.residual_li_mw + budget.noise_mw)


def residual_li_power(model: LiModel, tx_power_mw: float) -> float:
    if not tx_power_mw > 0:
        raise ValueError("transmit power must be positive")
    return model.omega * tx_power_mw ** model.nu


def hd_threshold(gamma_th):
    """Half-duplex threshold with the same spectral efficiency as ``gamma_th``."""
    return (1.0 + gamma_th) ** 2 - 1.0


def bessel_k1(x):
    """Modified Bessel function of the second kind, order one."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("bessel_k1 is defined for x > 0 only")
    out = special.k1(x)
    return float(out) if out.ndim == 0 else out


def _one_minus_xk1_series(y):
    # 1 - y K1(y) = -y ln(y/2) I1(y) + (y^2/4) sum_k (psi(k+1)+psi(k+2)) (y^2/4)^k / (k!(k+1)!)
    q = 0.25 * y * y
    term = np.ones_like(y)
    psi_a = -_EULER_GAMMA            # psi(k+1)
    psi_b = 1.0 - _EULER_GAMMA       # psi(k+2)
    acc = (psi_a + psi_b) * term
    for k in range(1, 30):
        term = term * q / (k * (k + 1))
        psi_a += 1.0 / k
        psi_b += 1.0 / (k + 1)
        acc = acc + (psi_a + psi_b) * term
        if np.all(np.abs(term) < 1e-18):
            break
    return -y * np.log(0.5 * y) * special.i1(y) + q * acc


def _rayleigh_product_cdf(y):
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("CDF argument must be nonnegative")
    out = np.zeros_like(y)
    small = (y > 0) & (y < _SERIES_SWITCH)
    large = y >= _SERIES_SWITCH
    out[small] = _one_minus_xk1_series(y[small])
    out[large] = -np.expm1(np.log(y[large]) + np.log(special.k1e(y[large])) - y[large])
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _rayleigh_product_logcdf(y):
    y = np.asarray(y, dtype=float)
    out = np.full_like(y, -np.inf)
    small = (y > 0) & (y < _SERIES_SWITCH)
    large = y >= _SERIES_SWITCH
    out[small] = np.log(_one_minus_xk1_series(y[small]))
    # log1p keeps precision when F is close to one
    out[large] = np.log1p(-y[large] * special.k1e(y[large]) * np.exp(-y[large]))
    return float(out) if out.ndim == 0 else out


def fade_cdf(dist: FadeDistribution, u):
    """Per-element CDF of the cascaded fading magnitude."""
    return dist.cdf(u)


def threshold_argument(budget: LinkBudget, rho_n: float) -> float:
    return math.sqrt(budget.effective_threshold / rho_n)


class InfiniteGainError(ValueError):
    """Raised when a site's outage CDF is exactly zero at the threshold."""


def beta_coeff(dist: FadeDistribution, budget: LinkBudget, rho_n: float,
               l_max: int | None = None) -> float:
    """Log of the per-element outage probability, ``ln F(sqrt(gamma_th / rho))``.

    Values below ``LOG_FLOOR / l_max`` are clamped (with a warning) so that
    ``exp(beta * L)`` never underflows for admissible ``L``. A CDF that is
    exactly zero cannot be represented and raises :class:`InfiniteGainError`.
    """
    if not rho_n > 0:
        raise ValueError("rho must be positive")
    u = threshold_argument(budget, rho_n)
    beta = float(dist.logcdf(u))
    if beta == -math.inf:
        raise InfiniteGainError(f"outage CDF vanishes at u={u:g} (rho={rho_n:g})")
    floor = LOG_FLOOR / max(l_max or 1, 1)
    if beta < floor:
        logger.warning("beta=%g below floor %g, clamping", beta, floor)
        beta = floor
    return min(beta, 0.0)


def outage_bound_single(f_val: float, elements: int) -> float:
    if not 0 < f_val <= 1:
        raise ValueError("f_val must lie in (0, 1]")
    if elements < 0:
        raise ValueError("element count must be nonnegative")
    return f_val ** elements


def outage_bound_system(betas, x, elements) -> float:
    """Upper bound on system outage, ``exp(sum beta_n x_n L_n)``."""
    betas = np.asarray(betas, dtype=float)
    x = np.asarray(x)
    elements = np.asarray(elements)
    if not (betas.shape == x.shape == elements.shape):
        raise ValueError("betas, x and elements must have the same length")
    return math.exp(float(np.sum(betas * x * elements)))


def li_crossover_mw(budget: LinkBudget) -> float:
    """Residual-LI power at which FD and HD per-link outage bounds coincide.

    The bounds are equal exactly when ``gamma_th / rho_FD == gamma_th_HD / rho_HD``,
    i.e. ``gamma_th (sigma_LI^2 + sigma_w^2) = gamma_th_HD sigma_w^2``.
    """
    g = budget.sinr_threshold
    return budget.noise_mw * (hd_threshold(g) / g - 1.0)
