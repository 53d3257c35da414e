"""Dense matrix kernel: validation, norms, SPD square roots and skew spectra."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NotSkew, NotSpd

# relative tolerances for symmetry, unitarity and reconstruction checks
TAU = 1e-9
# absolute floor for lambda_min > 0
EIG_FLOOR = 1e-12


def as_matrix(m, dtype=float) -> np.ndarray:
    a = np.array(m, dtype=dtype)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix dimension must be >= 1")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _scale(a):
    return 1.0 + np.max(np.abs(a))


def as_spd(m, tol: float = TAU) -> np.ndarray:
    """Validate a symmetric positive definite matrix and return its exact symmetrization."""
    a = as_matrix(m)
    if np.max(np.abs(a - a.T)) > tol * _scale(a):
        raise NotSpd("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    if lambda_min(a) <= EIG_FLOOR:
        raise NotSpd("matrix is not positive definite")
    return a


def skew_from_upper(m) -> np.ndarray:
    """Skew matrix built from the strict upper triangle of ``m``; exactly skew."""
    upper = np.triu(np.asarray(m, dtype=float), 1)
    return upper - upper.T


def as_skew(m, tol: float = TAU) -> np.ndarray:
    a = as_matrix(m)
    if np.max(np.abs(a + a.T)) > tol * _scale(a):
        raise NotSkew("matrix is not skew-symmetric")
    # x - y == -(y - x) in IEEE arithmetic, so this is exactly skew
    return 0.5 * (a - a.T)


def sym_part(m) -> np.ndarray:
    m = np.asarray(m)
    return 0.5 * (m + m.T)


def skew_part(m) -> np.ndarray:
    m = np.asarray(m)
    return 0.5 * (m - m.T)


def lambda_min(m) -> float:
    return float(np.linalg.eigvalsh(m)[0])


def lambda_max(m) -> float:
    return float(np.linalg.eigvalsh(m)[-1])


def spd_roots(omega) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(omega**1/2, omega**-1/2)`` from one symmetric eigendecomposition."""
    omega = as_matrix(omega)
    if np.max(np.abs(omega - omega.T)) > TAU * _scale(omega):
        raise NotSpd("matrix is not symmetric")
    try:
        lam, vec = np.linalg.eigh(0.5 * (omega + omega.T))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    if lam[0] <= EIG_FLOOR:
        raise NotSpd("matrix is not positive definite")
    root = np.sqrt(lam)
    sqrt = (vec * root) @ vec.T
    inv_sqrt = (vec / root) @ vec.T
    return sym_part(sqrt), sym_part(inv_sqrt)


@dataclass(frozen=True)
class SkewSpectrum:
    """Eigen-data of a real skew matrix: eigenvalues ``1j * sigmas``, eigenvectors in ``unitary``.

    ``sigmas`` come in pairs ``(s, -s)`` with ``s >= 0``, largest first; for odd
    dimension the last entry is exactly zero.
    """

    sigmas: np.ndarray
    unitary: np.ndarray

    @property
    def n(self) -> int:
        return len(self.sigmas)

    @property
    def paired(self) -> np.ndarray:
        """The nonnegative member of each pair (sigma_1, sigma_3, ...)."""
        return self.sigmas[0 : 2 * (self.n // 2) : 2]

    def reconstruct(self) -> np.ndarray:
        c = self.unitary
        return (c * (1j * self.sigmas)) @ c.conj().T

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.sigmas))) if self.n else 0.0


def skew_spectrum(beta) -> SkewSpectrum:
    """Diagonalize a real skew matrix through the Hermitian matrix ``1j * beta``.

    If ``(1j*beta) v = lam v`` then ``beta v = 1j*(-lam) v``, so ``sigma = -lam``.
    Sorted eigenvalues are paired outermost-first; the pair values are averaged so
    the output satisfies the ``(s, -s)`` structure exactly.
    """
    beta = as_skew(beta)
    n = beta.shape[0]
    try:
        lam, vec = np.linalg.eigh(1j * beta)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    sig = -lam
    order = np.argsort(sig, kind="stable")
    sigmas = np.empty(n)
    cols = []
    for j in range(n // 2):
        hi, lo = order[n - 1 - j], order[j]
        s = 0.5 * (sig[hi] - sig[lo])
        sigmas[2 * j], sigmas[2 * j + 1] = s, -s
        cols += [hi, lo]
    if n % 2:
        sigmas[-1] = 0.0
        cols.append(order[n // 2])
    return SkewSpectrum(sigmas=sigmas, unitary=vec[:, cols])


def norms(m) -> tuple[float, float]:
    """Operator (spectral) norm and Frobenius norm; works for real or complex input."""
    a = np.asarray(m)
    if a.size == 0:
        return 0.0, 0.0
    return op_norm(a), fro_norm(a)


def op_norm(m) -> float:
    a = np.asarray(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def fro_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m), "fro"))


def matrix_from_json(text: str | list) -> np.ndarray:
    """Parse a row-major JSON array-of-arrays (string or already-decoded list)."""
    data = json.loads(text) if isinstance(text, str) else text
    if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
        raise ValueError("matrix literal must be a JSON array of arrays")
    return as_matrix(data)


def matrix_to_json(m) -> list:
    return np.asarray(m, dtype=float).tolist()
