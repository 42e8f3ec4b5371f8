"""Shared helpers for the test suite.

The oracle functions here deliberately avoid the package's transfer-matrix
code paths so that tests compare two independent computations.
"""

from __future__ import annotations

import numpy as np
import pytest

from qdeconv import PAULIS


def kron(*mats: np.ndarray) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def apply_kraus(kraus, rho: np.ndarray) -> np.ndarray:
    """Brute-force channel application, independent of vectorization."""
    out = np.zeros_like(np.asarray(rho, dtype=complex))
    for A in kraus:
        out += A @ rho @ A.conj().T
    return out


def matrix_unit(d: int, i: int, j: int) -> np.ndarray:
    E = np.zeros((d, d), dtype=complex)
    E[i, j] = 1.0
    return E


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260811)


SIGMA = PAULIS
