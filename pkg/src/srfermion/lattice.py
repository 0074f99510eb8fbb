"""Exact finite-L ground-state quantities from the correlation-matrix spectrum.

For a block of L sites the reduced density matrix is a product of independent
modes with occupation ``(1 + nu_j)/2``; every charged moment, charge-resolved
moment and entropy below is a function of the ``nu_j`` only.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from .errors import ComputationError, DomainError, SectorEmptyError
from .model import ModelSpec, filled_intervals

log = logging.getLogger(__name__)

CLAMP_ABORT = 1e-8
SECTOR_FLOOR = 1e-300
VN_STEP = 1e-4


@dataclass(frozen=True)
class CorrelationSpectrum:
    L: int
    nu: np.ndarray
    clamp_violation: float = 0.0

    @property
    def occupations(self) -> np.ndarray:
        return 0.5 * (1.0 + self.nu)

    @property
    def mean_charge(self) -> float:
        """Finite-L expectation of the block charge, trace of C."""
        return float(np.sum(self.occupations))


def spectrum_from_nu(nu) -> CorrelationSpectrum:
    """Wrap a hand-made list of nu values (tests, synthetic spectra)."""
    nu = np.sort(np.asarray(nu, dtype=float))
    if np.any(np.abs(nu) > 1.0):
        raise DomainError("nu values must lie in [-1, 1]")
    return CorrelationSpectrum(len(nu), nu)


@dataclass
class ChargedMomentGrid:
    n: float
    L: int
    alphas: np.ndarray
    values: np.ndarray


@dataclass
class ResolvedResult:
    n: float
    L: int
    q: np.ndarray
    moments: np.ndarray
    mean_charge: float
    entropies: Optional[np.ndarray] = None

    @property
    def q_delta(self) -> np.ndarray:
        return self.q - self.mean_charge


def correlation_matrix(spec: ModelSpec, L: int) -> np.ndarray:
    """C_mn = <c_m^dag c_n> on a block of L sites."""
    if L < 1:
        raise DomainError("L must be >= 1")
    d = np.arange(L, dtype=float)
    kernel = np.zeros(L)
    for a, b in filled_intervals(spec):
        with np.errstate(divide="ignore", invalid="ignore"):
            off = (np.sin(b * d) - np.sin(a * d)) / (math.pi * d)
        off[0] = (b - a) / math.pi
        kernel += off
    return linalg.toeplitz(kernel)


def correlation_spectrum(spec: ModelSpec, L: int) -> CorrelationSpectrum:
    C = correlation_matrix(spec, L)
    try:
        eig = linalg.eigvalsh(C, driver="evr")
    except linalg.LinAlgError as exc:
        raise ComputationError(f"eigensolver failed for L={L}") from exc
    nu = 2.0 * eig - 1.0
    violation = float(max(np.max(np.abs(nu)) - 1.0, 0.0))
    if violation > CLAMP_ABORT:
        raise ComputationError(f"correlation eigenvalue outside [0,1] by {violation:.2e}")
    if violation > 0:
        log.debug("clamped nu by %.2e at L=%d", violation, L)
    return CorrelationSpectrum(L, np.clip(np.sort(nu), -1.0, 1.0), violation)


def _mode_weights(s: CorrelationSpectrum, n: float):
    if not n > 0:
        raise DomainError("Renyi index must be positive")
    p = s.occupations
    return p**n, (1.0 - p) ** n


def charged_moment_exact(s: CorrelationSpectrum, n: float, alpha: float) -> complex:
    """Z_n(alpha, L) = prod_j (p_j^n e^{i alpha} + (1-p_j)^n)."""
    a, b = _mode_weights(s, n)
    return complex(np.prod(a * np.exp(1j * alpha) + b))


def charged_moment_grid(s: CorrelationSpectrum, n: float, alphas) -> ChargedMomentGrid:
    alphas = np.asarray(alphas, dtype=float)
    a, b = _mode_weights(s, n)
    phase = np.exp(1j * alphas)[:, None]
    values = np.prod(a[None, :] * phase + b[None, :], axis=1)
    return ChargedMomentGrid(n, s.L, alphas, values)


def charged_moment_derivative_check(s: CorrelationSpectrum) -> float:
    """|dZ_1/dalpha at 0 - i trace C|, with the derivative from the product rule.

    At alpha = 0 each factor of Z_1 is p_j + (1 - p_j); the derivative of factor
    j is i p_j, so dZ_1/dalpha = i sum_j p_j prod_{l != j} (p_l + 1 - p_l).
    """
    p = s.occupations
    factors = p + (1.0 - p)
    # prod_{l != j} as prefix * suffix products
    before = np.concatenate([[1.0], np.cumprod(factors)[:-1]])
    after = np.concatenate([np.cumprod(factors[::-1])[::-1][1:], [1.0]])
    total = float(np.sum(p * before * after))
    return abs(1j * total - 1j * np.sum(p))


def _sector_polynomial(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficients of prod_j (b_j + a_j x), lowest order first."""
    coeffs = np.zeros(len(a) + 1)
    coeffs[0] = 1.0
    for j, (aj, bj) in enumerate(zip(a, b)):
        top = j + 1
        coeffs[1 : top + 1] = coeffs[1 : top + 1] * bj + coeffs[0:top] * aj
        coeffs[0] *= bj
    return coeffs


def resolve_moments_exact(s: CorrelationSpectrum, n: float) -> ResolvedResult:
    """Charge-resolved moments Z_n(q), q = 0..L, by exact polynomial expansion."""
    a, b = _mode_weights(s, n)
    moments = _sector_polynomial(a, b)
    return ResolvedResult(n, s.L, np.arange(s.L + 1), moments, s.mean_charge)


def _sector_logs(s: CorrelationSpectrum, n: float, q: int):
    if not 0 <= q <= s.L:
        raise SectorEmptyError(f"charge {q} outside 0..{s.L}")
    z1 = resolve_moments_exact(s, 1.0).moments[q]
    if z1 < SECTOR_FLOOR * s.L:
        raise SectorEmptyError(f"sector q={q} has weight {z1:.3e}")
    zn = resolve_moments_exact(s, n).moments[q]
    return math.log(zn), math.log(z1)


def sr_entropy_exact(s: CorrelationSpectrum, n: float, q: int) -> float:
    """Renyi-n entropy of the normalised charge-q block."""
    if n == 1:
        raise DomainError("use sr_vn_entropy_exact for n = 1")
    log_zn, log_z1 = _sector_logs(s, n, q)
    return (log_zn - n * log_z1) / (1.0 - n)


def sr_entropies_exact(s: CorrelationSpectrum, n: float) -> ResolvedResult:
    """All sectors at once; entropies are NaN where the sector is empty."""
    res = resolve_moments_exact(s, n)
    z1 = resolve_moments_exact(s, 1.0).moments
    ok = (z1 >= SECTOR_FLOOR * s.L) & (res.moments > 0)
    ent = np.full(len(z1), np.nan)
    with np.errstate(divide="ignore"):
        ent[ok] = (np.log(res.moments[ok]) - n * np.log(z1[ok])) / (1.0 - n)
    res.entropies = ent
    return res


def _binary_entropy(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    inside = (p > 0) & (p < 1)
    pi = p[inside]
    out[inside] = -pi * np.log(pi) - (1.0 - pi) * np.log1p(-pi)
    return out


def vn_entropy_exact(s: CorrelationSpectrum) -> float:
    return float(np.sum(_binary_entropy(s.occupations)))


def sr_vn_entropy_exact(s: CorrelationSpectrum, q: int) -> float:
    """von Neumann entropy of the charge-q block as the n -> 1 limit.

    With g(n) = log Z_n(q) - n log Z_1(q) we have S(q) = -g'(1); the
    derivative is a central difference with one Richardson step.
    """
    _, log_z1 = _sector_logs(s, 1.0, q)

    def g(n):
        zn = resolve_moments_exact(s, n).moments[q]
        return math.log(zn) - n * log_z1

    def central(h):
        return (g(1.0 + h) - g(1.0 - h)) / (2.0 * h)

    d_h = central(VN_STEP)
    d_h2 = central(VN_STEP / 2.0)
    return -(4.0 * d_h2 - d_h) / 3.0
