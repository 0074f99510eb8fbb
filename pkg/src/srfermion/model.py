"""Ground-state data of a critical hopping chain and identities built on it.

A chain in the class is fixed (as far as its ground state goes) by its Fermi
momenta ``0 < k_1 < ... < k_N < pi`` and the sign of the dispersion at
``k = pi``. Everything downstream is a function of a :class:`ModelSpec`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

_ENVELOPE_GRID = np.linspace(0.0, math.pi, 10_000)


@dataclass(frozen=True)
class ModelSpec:
    momenta: tuple
    sign_at_pi: int = -1
    envelope: Optional[tuple] = None

    def __post_init__(self):
        k = tuple(float(x) for x in self.momenta)
        object.__setattr__(self, "momenta", k)
        if len(k) == 0:
            raise DomainError("at least one Fermi momentum is required")
        if any(not (0.0 < x < math.pi) for x in k):
            raise DomainError("Fermi momenta must lie strictly inside (0, pi)")
        if any(b <= a for a, b in zip(k, k[1:])):
            raise DomainError("Fermi momenta must be strictly ascending")
        if self.sign_at_pi not in (-1, 1):
            raise DomainError("sign_at_pi must be +1 or -1")
        if self.envelope is not None:
            env = tuple(float(b) for b in self.envelope)
            object.__setattr__(self, "envelope", env)
            if np.min(envelope_values(env, _ENVELOPE_GRID)) <= 0.0:
                raise DomainError("envelope h(k) must be strictly positive on [0, pi]")

    @property
    def N(self) -> int:
        return len(self.momenta)

    def to_dict(self) -> dict:
        d = {"momenta": list(self.momenta), "sign_at_pi": self.sign_at_pi}
        if self.envelope is not None:
            d["envelope"] = list(self.envelope)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        env = d.get("envelope")
        return cls(
            momenta=tuple(d["momenta"]),
            sign_at_pi=int(d.get("sign_at_pi", -1)),
            envelope=None if env is None else tuple(env),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.from_dict(json.loads(text))


def xx_spec(k_fermi: float = math.pi / 2) -> ModelSpec:
    """Nearest-neighbour tight-binding chain filled below ``k_fermi``."""
    return ModelSpec((k_fermi,), -1)


def envelope_values(coeffs: Sequence[float], k) -> np.ndarray:
    """h(k) = sum_m b_m cos(m k)."""
    k = np.asarray(k, dtype=float)
    return sum(b * np.cos(m * k) for m, b in enumerate(coeffs))


@dataclass(frozen=True)
class VelocityReport:
    velocities: tuple
    b: float = 0.0
    valid: bool = field(default=True)


def sigma_scale(spec: ModelSpec) -> float:
    """Inverse length scale fixed by the Fermi momenta alone."""
    k = spec.momenta
    N = spec.N
    log_sigma = sum(math.log(2.0 * math.sin(kr)) for kr in k)
    for r in range(N):
        for s in range(r + 1, N):
            ratio = math.sin(0.5 * (k[r] + k[s])) ** 2 / math.sin(0.5 * (k[r] - k[s])) ** 2
            # r, s are 0-based here; the parity of r+s is unchanged
            log_sigma += (-1) ** (r + s) * math.log(ratio)
    return math.exp(log_sigma / N)


def _alternating_momentum_sum(spec: ModelSpec) -> float:
    N = spec.N
    return sum((-1) ** (N - r) * kr for r, kr in enumerate(spec.momenta, start=1))


def mean_charge(spec: ModelSpec, L: int) -> float:
    """Extensive ground-state particle number in L sites."""
    alt = _alternating_momentum_sum(spec)
    if spec.sign_at_pi < 0:
        return L * alt / math.pi
    return L * (math.pi - alt) / math.pi


def filled_intervals(spec: ModelSpec) -> list:
    """Maximal sub-intervals of (0, pi) on which the dispersion is positive."""
    edges = (0.0,) + spec.momenta + (math.pi,)
    # sign on the last interval is sign_at_pi and flips across every k_r
    n_int = len(edges) - 1
    out = []
    for i in range(n_int):
        sign = spec.sign_at_pi * (-1) ** (n_int - 1 - i)
        if sign > 0:
            out.append((edges[i], edges[i + 1]))
    return out


def error_exponent_mu(n: float, alpha: float) -> float:
    """Rigorous exponent of the relative error of the leading charged moment."""
    if not n > 0:
        raise DomainError("Renyi index must be positive")
    if not abs(alpha) < math.pi:
        raise DomainError("|alpha| must be < pi")
    return min(0.5, (1.0 - abs(alpha) / math.pi) / n)


def decoupled_spec(N: int, h: float) -> ModelSpec:
    """N decoupled tight-binding chains, dispersion cos(N k) - h."""
    if N < 1:
        raise DomainError("N must be >= 1")
    if not abs(h) < 1:
        raise DomainError("decoupled chains are critical only for |h| < 1")
    a = math.acos(h)
    roots = [(a + 2 * math.pi * m) / N for m in range(N)]
    roots += [(-a + 2 * math.pi * m) / N for m in range(1, N + 1)]
    roots = sorted(r for r in roots if 0.0 < r < math.pi)
    sign = 1 if (-1) ** N - h > 0 else -1
    return ModelSpec(tuple(roots), sign)


def decoupled_identity_residual(N: int, h: float) -> float:
    """|sigma of the decoupled model - 2 sin(k_F)/N| with k_F = arccos h."""
    return abs(sigma_scale(decoupled_spec(N, h)) - 2.0 * math.sin(math.acos(h)) / N)


def sine_product_residual(N: int, z: float) -> float:
    """Residual of sin(z/N) prod_s sin(z/N + pi s/N)/sin(pi s/N) = sin(z)/N."""
    if N < 1:
        raise DomainError("N must be >= 1")
    lhs = math.sin(z / N)
    for s in range(1, N):
        den = math.sin(math.pi * s / N)
        if den == 0.0:
            raise DomainError("degenerate denominator in sine product")
        lhs *= math.sin(z / N + math.pi * s / N) / den
    return abs(lhs - math.sin(z) / N)


def fermi_velocities(spec: ModelSpec) -> tuple:
    """|df/dk| at each k_r for f = h(k) prod_j (cos k_j - cos k)/2.

    The unit envelope is used when the spec carries none.
    """
    k = np.asarray(spec.momenta)
    env = spec.envelope if spec.envelope is not None else (1.0,)
    hk = envelope_values(env, k)
    out = []
    for i, ki in enumerate(k):
        others = np.prod([abs(math.cos(kj) - math.cos(ki)) / 2.0 for j, kj in enumerate(k) if j != i])
        out.append(float(hk[i] * 0.5 * math.sin(ki) * others))
    return tuple(out)


def fermi_velocities_n2(k1: float, k2: float, b: float = 0.0) -> VelocityReport:
    """Fermi velocities of the N=2 chain with envelope 1 + b cos k."""
    if not 0.0 < k1 < k2 < math.pi:
        raise DomainError("need 0 < k1 < k2 < pi")
    gap = math.cos(k1) - math.cos(k2)
    v1 = (1.0 + b * math.cos(k1)) * 0.25 * math.sin(k1) * gap
    v2 = (1.0 + b * math.cos(k2)) * 0.25 * math.sin(k2) * gap
    return VelocityReport((v1, v2), b, abs(b) < 1.0)


def velocity_tuning_b(k1: float, k2: float) -> float:
    """Envelope coefficient b equalising the two N=2 Fermi velocities.

    Validity (|b| < 1) is left to the caller.
    """
    if not 0.0 < k1 < k2 < math.pi:
        raise DomainError("need 0 < k1 < k2 < pi")
    den = math.cos(k1) * math.sin(k1) - math.cos(k2) * math.sin(k2)
    if abs(den) < 1e-15:
        raise DomainError("velocity tuning denominator vanishes")
    return (math.sin(k2) - math.sin(k1)) / den
