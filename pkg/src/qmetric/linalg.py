"""Dense complex matrix kernel.

Matrices are plain numpy ``complex128`` 2-D arrays, validated on entry:
finite entries only. The operator norm is the largest singular value,
computed from the full singular spectrum up to side 256 and by power
iteration on ``m* m`` above that (desk scale favors exactness over speed).
"""

from __future__ import annotations

import numpy as np

from .caps import check_cap
from .errors import NumericalError, PreconditionError

_SVD_SIDE_LIMIT = 256


def as_matrix(a) -> np.ndarray:
    """Validate and return a 2-D complex128 matrix."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise PreconditionError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise PreconditionError("matrix has non-finite entries")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product; result dimensions are cap-checked before allocation."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    check_cap("matrix_dim", max(rows, cols), "kron result")
    return np.kron(a, b)


def singular_values(m) -> np.ndarray:
    """Full nonincreasing singular spectrum."""
    m = as_matrix(m)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def _power_iteration_norm(m: np.ndarray, tol: float = 1e-13, max_iter: int = 20000) -> float:
    n = m.shape[1]
    # deterministic start with a mild ramp to avoid orthogonality accidents
    x = np.ones(n, dtype=np.complex128) + 1e-3 * np.arange(n)
    x /= np.linalg.norm(x)
    last = 0.0
    for _ in range(max_iter):
        y = m.conj().T @ (m @ x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        est = np.sqrt(ny)
        if abs(est - last) <= tol * max(est, 1.0):
            return float(est)
        last = est
    raise NumericalError("power iteration for operator norm did not converge")


def operator_norm(m, *, force_power_iteration: bool = False) -> float:
    """Largest singular value, relative accuracy 1e-10."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    if force_power_iteration or max(m.shape) > _SVD_SIDE_LIMIT:
        return _power_iteration_norm(m)
    return float(np.linalg.svd(m, compute_uv=False)[0])


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(as_matrix(m)))
