"""Small dense-matrix helpers shared by the symbol and model layers."""

from __future__ import annotations

import numpy as np

TOL_UNITARY = 1e-12


def clock(n: int) -> np.ndarray:
    """diag(1, w, w^2, ...) with w = exp(2 pi i / n)."""
    return np.diag(np.exp(2j * np.pi * np.arange(n) / n))


def shift(n: int) -> np.ndarray:
    """Cyclic permutation sending e_l to e_{l+1 mod n}."""
    v = np.zeros((n, n), dtype=complex)
    v[(np.arange(n) + 1) % n, np.arange(n)] = 1.0
    return v


def unitary_power(u: np.ndarray, k: int, order: int) -> np.ndarray:
    """u^k for unitary u of finite order (negative k via the adjoint)."""
    k %= order
    return np.linalg.matrix_power(u, k)


def max_abs(a: np.ndarray) -> float:
    return float(np.abs(a).max()) if a.size else 0.0


def batched_sigma_max(mats: np.ndarray) -> np.ndarray:
    """Largest singular value along the last two axes of a (..., m, m) stack."""
    m = mats.shape[-1]
    if m == 1:
        return np.abs(mats[..., 0, 0])
    if m == 2:
        h = np.einsum("...ki,...kj->...ij", mats.conj(), mats)
        tr = (h[..., 0, 0] + h[..., 1, 1]).real
        det = (h[..., 0, 0] * h[..., 1, 1] - h[..., 0, 1] * h[..., 1, 0]).real
        disc = np.maximum(tr * tr - 4.0 * det, 0.0)
        return np.sqrt(np.maximum(0.5 * (tr + np.sqrt(disc)), 0.0))
    return np.linalg.svd(mats, compute_uv=False)[..., 0]


def operator_norm(x: np.ndarray, dense_cutoff: int = 512) -> float:
    """Largest singular value; exact SVD up to dense_cutoff, then deterministic
    shifted power iteration on x*x (start vector fixed, rtol 1e-10)."""
    n = x.shape[0]
    if n <= dense_cutoff:
        return float(np.linalg.svd(x, compute_uv=False)[0])
    v = np.ones(n, dtype=complex) + 1e-3 * np.arange(n) / n
    v /= np.linalg.norm(v)
    xh = x.conj().T
    lam = 0.0
    for _ in range(5000):
        w = xh @ (x @ v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - lam) <= 1e-10 * max(new, 1.0):
            return float(np.sqrt(new))
        lam = new
    raise RuntimeError("power iteration did not converge for the operator norm")


def hermitian_max_eig(x: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(x)[-1])
