"""Closed-form large-L predictions for charged and charge-resolved moments.

Conventions: ``n`` is the Renyi index, ``alpha`` the flux conjugate to the
block charge, ``L`` the block length and ``L_sigma = sigma * L``. All
formulas are written for the sign convention ``f(e^{i pi}) < 0``; specs with
the opposite sign are mapped through the particle-hole relation
``Z_n(alpha)|_{+} = e^{i alpha L} Z_n(-alpha)|_{-}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from .errors import ComputationError, DomainError, UsageError
from .model import ModelSpec, error_exponent_mu, mean_charge, sigma_scale
from .specfun import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    gamma_phase,
    integrate_half_line,
    integrate_line,
    log_abs_barnes_g_sq,
    log_barnes_g,
    polygamma,
    sech,
    tanh_shift_difference,
)

FD_STEP = 1e-4
RICHARDSON_AGREEMENT = 1e-5
SUM_IMAG_THRESHOLD = 1e-12


def _is_integer(n: float) -> bool:
    return float(n).is_integer()


def _check_index(n, alpha=0.0):
    if not n > 0:
        raise DomainError("Renyi index must be positive")
    if not abs(alpha) < math.pi:
        raise DomainError("|alpha| must be < pi")


# ---------------------------------------------------------------------------
# Upsilon(n, alpha)


def _twist_kernel(n, alpha):
    # tanh(pi w) - tanh(n pi w + i alpha/2)
    return lambda w: tanh_shift_difference(math.pi * w, n * math.pi * w + 0.5j * alpha)


@lru_cache(maxsize=4096)
def _upsilon_quadrature(n: float, alpha: float, spec: QuadratureSpec) -> float:
    kernel = _twist_kernel(n, alpha)
    # log[Gamma(1/2+iw)/Gamma(1/2-iw)] = 2i Im log Gamma(1/2+iw)
    val = integrate_line(lambda w: kernel(w) * gamma_phase(w), spec)
    return float((-2.0 * n * val).real)


def _upsilon_integer(n: int, alpha: float) -> float:
    total = 0.0
    shift = alpha / (2.0 * math.pi * n)
    for m in range(n):
        c = (2 * m + 1 - n) / (2.0 * n)
        total += log_barnes_g(1.0 - shift + c) + log_barnes_g(1.0 + shift + c)
    return 2.0 * total


def branch_integral(n: float, alpha: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Branch-cut contribution to Upsilon for non-integer n."""
    ca = math.cos(alpha)
    cn = math.cos(math.pi * n)
    e1 = np.exp(1j * math.pi * n)

    def f(x):
        # every power is taken relative to (x+2)^n to keep things in range
        r = (x / (x + 2.0)) ** n
        num = ca * (r * r + 1.0) + 2.0 * r * cn
        den = np.abs(1.0 + 2.0 * r * e1 * ca + e1 * e1 * r * r) ** 2
        pref = x ** (n - 1.0) * (x + 2.0) ** (n - 1.0) / (x + 2.0) ** (2.0 * n)
        y = np.log1p(2.0 / x) / (2.0 * math.pi)
        return pref * num / den * log_abs_barnes_g_sq(y)

    return float(integrate_half_line(f, spec).real)


@lru_cache(maxsize=4096)
def _upsilon_nonint(n: float, alpha: float, spec: QuadratureSpec) -> float:
    m1 = math.floor(n / 2 - 0.5 + alpha / (2 * math.pi))
    m2 = math.floor(n / 2 + 0.5 - alpha / (2 * math.pi))
    a_pi = alpha / math.pi
    total = 0.0
    for m in range(0, m1 + 1):
        c = (2 * m + 1 - n - a_pi) / (2 * n)
        total += log_barnes_g(1 + c) + log_barnes_g(1 - c)
    for m in range(1, m2 + 1):
        c = (1 + n - 2 * m - a_pi) / (2 * n)
        total += log_barnes_g(1 + c) + log_barnes_g(1 - c)
    return 2 * total + 8 * n * math.sin(n * math.pi) / math.pi * branch_integral(n, alpha, spec)


def upsilon(n: float, alpha: float = 0.0, method: str = "closed",
            spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Universal constant in log Z_n(alpha); even in alpha.

    ``method="closed"`` uses Barnes-G sums (plus a one-dimensional branch
    integral when n is not an integer); ``method="quadrature"`` integrates the
    defining line integral directly.
    """
    _check_index(n, alpha)
    if method == "quadrature":
        return _upsilon_quadrature(float(n), float(alpha), spec)
    if method != "closed":
        raise UsageError(f"unknown method {method!r}")
    if _is_integer(n):
        return _upsilon_integer(int(n), float(alpha))
    return _upsilon_nonint(float(n), float(alpha), spec)


@dataclass
class UpsilonExpansion:
    n: float
    upsilon0: float
    gamma2: float
    gamma4: float

    def remainder(self, alpha: float) -> float:
        return upsilon(self.n, alpha) - self.upsilon0 - alpha**2 * self.gamma2 - alpha**4 * self.gamma4


def upsilon_expansion(n: float) -> UpsilonExpansion:
    g2, g4 = gamma_coefficients(n, "closed" if _is_integer(n) else "quadrature")
    return UpsilonExpansion(n, upsilon(n, 0.0), g2, g4)


# ---------------------------------------------------------------------------
# gamma_2, gamma_4


@lru_cache(maxsize=4096)
def _gamma_quadrature(n: float, spec: QuadratureSpec):
    def weight2(w):
        x = n * math.pi * w
        # tanh^3 - tanh = -tanh sech^2
        return -np.tanh(x) * sech(x) ** 2

    def weight4(w):
        x = n * math.pi * w
        t, s2 = np.tanh(x), sech(x) ** 2
        # (sinh 3x - 11 sinh x)/cosh^5 x = tanh sech^2 (4 tanh^2 - 8 sech^2)
        return t * s2 * (4.0 * t * t - 8.0 * s2)

    i2 = integrate_line(lambda w: weight2(w) * gamma_phase(w), spec).real
    i4 = integrate_line(lambda w: weight4(w) * gamma_phase(w), spec).real
    # prefactors i n/4 and i n/192 times the 2i from the log-Gamma ratio
    return float(-n / 2.0 * i2), float(-n / 96.0 * i4)


def _gamma_closed(n: int):
    g2 = g4 = 0.0
    for m in range(n):
        c = (2 * m + 1 - n) / (2.0 * n)
        x = 1.0 + c
        g2 += (-1.0 + polygamma(0, x) + c * polygamma(1, x)) / (4.0 * n**2 * math.pi**2)
        g4 += (3.0 * polygamma(2, x) + c * polygamma(3, x)) / (192.0 * n**4 * math.pi**4)
    return 2.0 * g2, 2.0 * g4


def gamma_coefficients(n: float, method: str = "quadrature",
                       spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """(gamma_2(n), gamma_4(n)), the alpha^2 and alpha^4 Taylor coefficients of Upsilon."""
    if not n > 0:
        raise DomainError("Renyi index must be positive")
    if method == "closed":
        if not _is_integer(n):
            raise UsageError("closed-form gamma coefficients need integer n")
        return _gamma_closed(int(n))
    if method != "quadrature":
        raise UsageError(f"unknown method {method!r}")
    return _gamma_quadrature(float(n), spec)


def _gammas(n):
    return gamma_coefficients(n, "closed" if _is_integer(n) else "quadrature")


def _richardson_derivative(f: Callable[[float], float], x0: float, h: float = FD_STEP):
    d1 = (f(x0 + h) - f(x0 - h)) / (2 * h)
    d2 = (f(x0 + h / 2) - f(x0 - h / 2)) / h
    best = (4 * d2 - d1) / 3
    return best, abs(best - d2)


@lru_cache(maxsize=1)
def gamma_derivatives_at_1():
    """(gamma_2'(1), gamma_4'(1), Upsilon'(1)) with Upsilon(n) = Upsilon(n, 0)."""
    funcs = (
        lambda n: gamma_coefficients(n, "quadrature")[0],
        lambda n: gamma_coefficients(n, "quadrature")[1],
        lambda n: upsilon(n, 0.0, "quadrature"),
    )
    out = []
    for f in funcs:
        val, disagreement = _richardson_derivative(f, 1.0)
        if disagreement > RICHARDSON_AGREEMENT:
            raise ComputationError(f"finite-difference levels disagree by {disagreement:.2e}")
        out.append(val)
    return tuple(out)


# ---------------------------------------------------------------------------
# leading-order charged moments


@dataclass
class AsymptoticPrediction:
    n: float
    alpha: float
    L: int
    leading: complex
    mu: float
    cft_exponent: float
    d_n: complex
    d_tilde: complex
    L_sigma: float
    notes: list = field(default_factory=list)

    @property
    def improved(self) -> complex:
        return self.leading * (1.0 + self.d_n + self.d_tilde)


def scaling_exponent(N: int, n: float, alpha: float) -> float:
    """Power x in Z_n ~ L_sigma^{-x}."""
    return N / 6.0 * (n - 1.0 / n) + 2.0 * N / n * (alpha / (2 * math.pi)) ** 2


def leading_charged_moment(spec: ModelSpec, n: float, alpha: float, L: int) -> complex:
    _check_index(n, alpha)
    L_sigma = sigma_scale(spec) * L
    log_mod = -scaling_exponent(spec.N, n, alpha) * math.log(L_sigma) + spec.N * upsilon(n, alpha)
    phase = alpha * mean_charge(spec, L)
    return complex(math.exp(log_mod) * np.exp(1j * math.fmod(phase, 2 * math.pi)))


def charged_moment_asymptotic(spec: ModelSpec, n: float, alpha: float, L: int) -> AsymptoticPrediction:
    leading = leading_charged_moment(spec, n, alpha, L)
    mu = error_exponent_mu(n, alpha)
    return AsymptoticPrediction(
        n=n, alpha=alpha, L=L, leading=leading, mu=mu, cft_exponent=2 * mu,
        d_n=subleading_dn(spec, n, alpha, L),
        d_tilde=descendant_correction(spec, n, alpha, L),
        L_sigma=sigma_scale(spec) * L,
    )


# ---------------------------------------------------------------------------
# subleading oscillatory corrections


@dataclass
class SubleadingScales:
    angles: np.ndarray          # theta_t of z_t = e^{i theta_t}, t = 1..2N
    sigma_star: dict            # (r, s) -> sigma_star(r, s)
    pair_index: dict            # (r, s) -> (t_minus, t_plus), 1-based

    @property
    def z(self) -> np.ndarray:
        return np.exp(1j * self.angles)


def _circle_angles(spec: ModelSpec) -> np.ndarray:
    k = np.asarray(spec.momenta)
    return np.concatenate([k, 2 * math.pi - k[::-1]])


def _reduced_angles(spec: ModelSpec) -> np.ndarray:
    k = np.asarray(spec.momenta)
    return np.concatenate([k, -k[::-1]])


def _pair_ranges(N: int):
    r_range = range(-((N + 1) // 2) + 1, N // 2 + 1)
    s_range = range(-(N // 2), (N + 1) // 2)
    return r_range, s_range


def subleading_scales(spec: ModelSpec) -> SubleadingScales:
    N = spec.N
    theta = _circle_angles(spec)
    z = np.exp(1j * theta)
    sign = np.array([(-1) ** (N - t) for t in range(1, 2 * N + 1)], dtype=float)

    def log_weight(t0):
        # sum_{t != t0} (-1)^{N-t} log|z_t - z_t0|, 1-based t0
        mask = np.arange(1, 2 * N + 1) != t0
        return float(np.sum(sign[mask] * np.log(np.abs(z[mask] - z[t0 - 1]))))

    r_range, s_range = _pair_ranges(N)
    sig, idx = {}, {}
    for r in r_range:
        for s in s_range:
            tm, tp = N + 2 * r, N + 1 + 2 * s
            sig[(r, s)] = math.exp(0.5 * (log_weight(tp) - log_weight(tm)))
            idx[(r, s)] = (tm, tp)
    return SubleadingScales(theta, sig, idx)


def _gamma_ratio_sq(x: float) -> float:
    """Gamma(1/2 + x)^2 / Gamma(1/2 - x)^2, zero on the poles of the denominator."""
    return float((special.gamma(0.5 + x) * special.rgamma(0.5 - x)) ** 2)


def _oscillating_phase(dtheta: float, L: int) -> complex:
    return complex(np.exp(1j * math.fmod(dtheta * L, 2 * math.pi)))


def _dn_minus_convention(spec: ModelSpec, n: float, alpha: float, L: int) -> complex:
    sc = subleading_scales(spec)
    z = sc.z
    # L is an integer, so the 2 pi in the lower-half angles drops out of the phases
    reduced = _reduced_angles(spec)
    total = 0j
    for sgn in (+1, -1):
        x = 2.0 / n * (1.0 + sgn * alpha / math.pi)
        pref = L ** (-x) * _gamma_ratio_sq(x / 4.0)
        if pref == 0.0:
            continue
        acc = 0j
        for key, (tm, tp) in sc.pair_index.items():
            dtheta = sgn * (reduced[tm - 1] - reduced[tp - 1])
            acc += (_oscillating_phase(dtheta, L) * sc.sigma_star[key] ** (2.0 - x)
                    / abs(z[tm - 1] - z[tp - 1]) ** 2)
        total += pref * acc
    return total


def subleading_dn(spec: ModelSpec, n: float, alpha: float, L: int) -> complex:
    """Oscillating relative correction to Z_n(alpha, L), decaying as L^{-2 mu}."""
    _check_index(n, alpha)
    if spec.sign_at_pi > 0:
        alpha = -alpha
    return _dn_minus_convention(spec, n, alpha, L)


def n2_coefficients(spec: ModelSpec, n: float, alpha: float):
    """(c1, c2, c3) multiplying e^{-i(k2-k1)L}, e^{-2ik2 L}, e^{2ik1 L} at N=2.

    These are the amplitudes of the L^{-(2/n)(1 - alpha/pi)} group of
    :func:`subleading_dn`; the other group uses the same functions at -alpha.
    """
    if spec.N != 2:
        raise UsageError("n2_coefficients needs exactly two Fermi momenta")
    k1, k2 = spec.momenta
    x = 2.0 / n * (1.0 - alpha / math.pi)
    s_minus = math.sin(0.5 * (k2 - k1))
    s_plus = math.sin(0.5 * (k2 + k1))
    prod = math.sin(k1) * math.sin(k2)
    c1 = 2.0 * (2.0 * s_minus) ** (-x) * prod ** (1.0 - x / 2.0) * s_plus ** (x - 2.0)
    c2 = (2.0 * math.sin(k2)) ** (-x) * (s_minus / s_plus) ** (2.0 - x)
    c3 = (2.0 * math.sin(k1)) ** (-x) * (s_minus / s_plus) ** (2.0 - x)
    return c1, c2, c3


def subleading_dn_n2(spec: ModelSpec, n: float, alpha: float, L: int) -> complex:
    """N=2 regrouping of :func:`subleading_dn` into three oscillation frequencies."""
    _check_index(n, alpha)
    if spec.sign_at_pi > 0:
        alpha = -alpha
    k1, k2 = spec.momenta
    total = 0j
    for sgn in (+1, -1):
        x = 2.0 / n * (1.0 - sgn * alpha / math.pi)
        pref = L ** (-x) * _gamma_ratio_sq(x / 4.0)
        c1, c2, c3 = n2_coefficients(spec, n, sgn * alpha)
        total += pref * (
            c1 * _oscillating_phase(-sgn * (k2 - k1), L)
            + c2 * _oscillating_phase(-sgn * 2 * k2, L)
            + c3 * _oscillating_phase(sgn * 2 * k1, L)
        )
    return total


# ---------------------------------------------------------------------------
# non-oscillating (descendant) correction


def descendant_J(n: float, alpha: float, method: str = "closed",
                 spec: QuadratureSpec = DEFAULT_QUADRATURE) -> complex:
    """n * int (tanh(pi w) - tanh(n pi w + i alpha/2)) (3 w^2 - 1/4) dw."""
    if not n > 0:
        raise DomainError("Renyi index must be positive")
    if not abs(alpha) <= math.pi:
        raise DomainError("|alpha| must be <= pi")
    if method == "closed":
        a = alpha / math.pi
        return 1j / (4 * n * n) * ((n * n - 1) * a + a**3)
    if method != "quadrature":
        raise UsageError(f"unknown method {method!r}")
    kernel = _twist_kernel(n, alpha)
    return complex(n * integrate_line(lambda w: kernel(w) * (3 * w * w - 0.25), spec))


def descendant_pair_sum(spec: ModelSpec) -> complex:
    N = spec.N
    z = np.exp(1j * _circle_angles(spec))
    total = 0j
    for r in range(2 * N):
        for s in range(2 * N):
            if s != r:
                total += (-1) ** (N - (s + 1)) * (z[r] + z[s]) / (z[r] - z[s])
    return total


def descendant_correction(spec: ModelSpec, n: float, alpha: float, L: int) -> complex:
    """O(1/L) non-oscillating relative correction; purely imaginary, odd in alpha."""
    _check_index(n, alpha)
    if spec.sign_at_pi > 0:
        alpha = -alpha
    zsum = descendant_pair_sum(spec)
    # each (z_r + z_s)/(z_r - z_s) with |z| = 1 is imaginary
    if abs(zsum.real) > SUM_IMAG_THRESHOLD * max(1.0, abs(zsum)):
        raise ComputationError(f"z-pair sum has real part {zsum.real:.3e}")
    a = alpha / math.pi
    return complex(-1.0 / (8 * n * n * L) * ((n * n - 1) * a + a**3) * 1j * zsum.imag)


# ---------------------------------------------------------------------------
# resolved moments and entropies


def a_coeff(spec: ModelSpec, n: float, L: int) -> float:
    """Gaussian variance parameter of the charge distribution of moment n."""
    g2, _ = _gammas(n)
    return spec.N / (2 * n * math.pi**2) * (math.log(sigma_scale(spec) * L) - 2 * n * math.pi**2 * g2)


def resolved_moment_asymptotic(spec: ModelSpec, n: float, q: float, L: int, z0=None) -> float:
    """Gaussian prediction for Z_n(q); ``z0`` overrides the leading Z_n(0, L)."""
    a = a_coeff(spec, n, L)
    if not a > 0:
        raise DomainError(f"a(n, L) = {a:.3g} <= 0; L too small")
    _, g4 = _gammas(n)
    if z0 is None:
        z0 = leading_charged_moment(spec, n, 0.0, L).real
    qd = q - mean_charge(spec, L)
    return float(z0 / math.sqrt(4 * math.pi * a) * math.exp(-qd * qd / (4 * a))
                 * (1 + 0.75 * spec.N * g4 / a**2))


def sr_entropy_asymptotic(spec: ModelSpec, n: float, q: float, L: int) -> float:
    """Charge-resolved Renyi entropy through order log(L)^-2."""
    if n == 1:
        raise DomainError("use sr_vn_entropy_asymptotic for n = 1")
    _check_index(n)
    N = spec.N
    sigma = sigma_scale(spec)
    ls, logL = math.log(sigma), math.log(L)
    if not logL > 0:
        raise DomainError("L must exceed 1")
    g2n, g4n = _gammas(n)
    g21, g41 = _gammas(1)
    qd = q - mean_charge(spec, L)
    pi2 = math.pi**2
    zeroth = (N / 6 * (1 + 1 / n) * math.log(sigma * L) + N / (1 - n) * upsilon(n)
              - 0.5 * math.log(2 * N / math.pi * logL) + math.log(n) / (2 * (1 - n)))
    first = n * pi2 * (g2n - g21) / (1 - n) - 0.5 * ls
    second = (n * pi2 / (1 - n) * (pi2 * (n * g2n**2 - g21**2) + ls * (g21 - g2n)
                                   + 3 * pi2 / N * (n * g4n - g41))
              + 0.25 * ls**2 + qd**2 * n * pi2**2 / (N * (1 - n)) * (g21 - n * g2n))
    return zeroth + first / logL + second / logL**2


def vn_entropy_asymptotic(spec: ModelSpec, L: int) -> float:
    _, _, dups = gamma_derivatives_at_1()
    return spec.N / 3 * math.log(sigma_scale(spec) * L) - spec.N * dups


def sr_vn_entropy_asymptotic(spec: ModelSpec, q: float, L: int) -> float:
    """Charge-resolved von Neumann entropy through order log(L)^-2.

    This is the n -> 1 limit of :func:`sr_entropy_asymptotic` term by term,
    which includes a -pi^4 gamma_2(1)^2 piece at order log(L)^-2.
    """
    N = spec.N
    ls, logL = math.log(sigma_scale(spec)), math.log(L)
    if not logL > 0:
        raise DomainError("L must exceed 1")
    g21, g41 = _gammas(1)
    dg2, dg4, _ = gamma_derivatives_at_1()
    qd = q - mean_charge(spec, L)
    pi2, pi4 = math.pi**2, math.pi**4
    zeroth = vn_entropy_asymptotic(spec, L) - 0.5 * math.log(2 * N / math.pi * logL) - 0.5
    first = -(pi2 * dg2 + 0.5 * ls)
    second = (-pi4 * g21**2 - 2 * pi4 * g21 * dg2 + pi2 * dg2 * ls - 3 * pi4 / N * (g41 + dg4)
              + 0.25 * ls**2 + qd**2 * pi4 / N * (g21 + dg2))
    return zeroth + first / logL + second / logL**2


def fluctuation_entropy_asymptotic(spec: ModelSpec, L: int) -> float:
    """Leading -sum_q p(q) log p(q) of the charge distribution."""
    return 0.5 * (1 + math.log(2 * spec.N / math.pi * math.log(L)))


# ---------------------------------------------------------------------------
# twisted overlaps


def twisted_overlap_modulus(spec: ModelSpec, n: int, alpha: float) -> float:
    """|A_n(alpha)|^2 for one fermion sector, with the spec's sigma as length scale.

    Established for the half-filled chain (sigma = 2); for other fillings this
    is the expected form rather than a derived one.
    """
    if int(n) != n or n < 1:
        raise DomainError("twisted overlaps are defined for integer n >= 1")
    _check_index(n, alpha)
    x = (n - 1.0 / n) / 6.0 + 2.0 / n * (alpha / (2 * math.pi)) ** 2
    return sigma_scale(spec) ** (-x) * math.exp(upsilon(n, alpha))
