"""Brute-force reduced density matrix on the 2^L Fock space of a block.

The block state is built as exp(-sum_ij h_ij c_i^dag c_j)/Z with
h = log((1 - C) C^{-1}), assembled from Jordan-Wigner matrix elements in
each particle-number block and diagonalised there. Nothing here touches the
product-over-modes formulas of the library.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

TINY = 1e-300


@dataclass
class DenseBlockState:
    L: int
    sectors: dict        # q -> (basis states, eigenvalues of rho, eigenvectors)
    nu: np.ndarray       # 2 eig(C) - 1, the spectrum the state was built from

    def sector_moment(self, n: float, q: int) -> float:
        if q not in self.sectors:
            return 0.0
        return float(np.sum(self.sectors[q][1] ** n))

    def charged_moment(self, n: float, alpha: float) -> complex:
        return complex(sum(np.exp(1j * alpha * q) * self.sector_moment(n, q) for q in self.sectors))

    def sector_entropy(self, n: float, q: int) -> float:
        lam = self.sectors[q][1]
        p = lam / lam.sum()
        return float(np.log(np.sum(p**n)) / (1.0 - n))

    def two_point(self, i: int, j: int) -> float:
        """tr(rho c_i^dag c_j)."""
        total = 0.0
        for q, (states, lam, vec) in self.sectors.items():
            op = _hop_matrix(states, i, j)
            rho = (vec * lam) @ vec.T
            total += float(np.sum(rho * op.T))
        return total


def _hop_matrix(states, i, j):
    """Matrix of c_i^dag c_j inside one particle-number block (rows: output state)."""
    index = {int(s): k for k, s in enumerate(states)}
    dim = len(states)
    out = np.zeros((dim, dim))
    for col, s in enumerate(states):
        s = int(s)
        if not (s >> j) & 1:
            continue
        sign = (-1) ** bin(s & ((1 << j) - 1)).count("1")
        t = s ^ (1 << j)
        if (t >> i) & 1:
            continue
        sign *= (-1) ** bin(t & ((1 << i) - 1)).count("1")
        out[index[t ^ (1 << i)], col] += sign
    return out


def dense_block_state(C: np.ndarray) -> DenseBlockState:
    L = C.shape[0]
    eig, U = linalg.eigh(C)
    # occupations rounded through nu exactly as the library stores them
    nu = np.clip(2.0 * eig - 1.0, -1.0, 1.0)
    p = 0.5 * (1.0 + nu)
    h = (U * (np.log(np.maximum(1.0 - p, TINY)) - np.log(np.maximum(p, TINY)))) @ U.T
    raw = {}
    for q in range(L + 1):
        states = np.array(sorted(sum(1 << b for b in bits) for bits in itertools.combinations(range(L), q)),
                          dtype=np.int64)
        H = np.zeros((len(states), len(states)))
        for i in range(L):
            for j in range(L):
                if h[i, j] != 0.0:
                    H += h[i, j] * _hop_matrix(states, i, j)
        eps, vec = linalg.eigh(H)
        raw[q] = (states, eps, vec)
    log_z = special.logsumexp(np.concatenate([-r[1] for r in raw.values()]))
    sectors = {q: (s, np.exp(-eps - log_z), v) for q, (s, eps, v) in raw.items()}
    return DenseBlockState(L, sectors, nu)
