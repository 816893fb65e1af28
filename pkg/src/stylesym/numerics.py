"""Dense linear-algebra kernels used by every other module.

Everything operates on plain 2-D float64 numpy arrays.  Factorizations
delegate to ``numpy.linalg`` (LAPACK); the matrix exponential and the
principal-angle computation are implemented here because their accuracy
contracts are stricter than what a naive composition of library calls
gives (see `principal_angles` for the small-angle treatment).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, RankDeficiencyError

#: Smallest singular value a column set may have and still count as
#: linearly independent.
RANK_TOLERANCE = 1e-10


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert input to a finite 2-D float64 array.

    Args:
        a: array-like input.
        name: label used in diagnostics.

    Returns:
        A float64 ndarray of dimension 2.

    Raises:
        NumericError: if the input is not 2-D or contains NaN/inf.
    """
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise NumericError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        bad = int(np.size(m) - np.count_nonzero(np.isfinite(m)))
        raise NumericError(f"{name} contains {bad} non-finite entries")
    return m


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``m = u @ diag(singular_values) @ vt``.

    `singular_values` is 1-D and sorted in descending order; `u` and
    `vt` have orthonormal columns / rows respectively.
    """

    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray


def svd(m) -> SvdResult:
    """Thin singular value decomposition with input validation.

    Args:
        m: matrix of shape (r, c); must be finite.

    Returns:
        SvdResult with ``min(r, c)`` singular values in descending order.
    """
    m = as_matrix(m)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return SvdResult(u=u, singular_values=s, vt=vt)


def orthonormal_basis(m) -> np.ndarray:
    """Orthonormal basis for the column span of `m`.

    Uses a reduced QR factorization; the result spans exactly the same
    subspace, and orthonormal input comes back unchanged up to the sign
    of individual columns.

    Args:
        m: (d, k) matrix whose k columns must be linearly independent
            (smallest singular value >= RANK_TOLERANCE).

    Returns:
        (d, k) matrix with orthonormal columns.

    Raises:
        RankDeficiencyError: naming how many columns are deficient.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if cols == 0:
        raise NumericError("orthonormal_basis needs at least one column")
    s = np.linalg.svd(m, compute_uv=False)
    rank = int(np.count_nonzero(s >= RANK_TOLERANCE))
    if rank < cols:
        raise RankDeficiencyError(
            f"columns are rank deficient: {cols - rank} of {cols} columns "
            f"dependent (smallest singular value {s.min():.3e})"
        )
    q, r = np.linalg.qr(m, mode="reduced")
    # Fix the sign convention so diag(r) >= 0; for orthonormal input this
    # makes the output reproduce the input columns exactly up to sign.
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def principal_angles(a, b) -> np.ndarray:
    """Principal angles between the column spans of `a` and `b`.

    Both matrices must live in the same ambient dimension; each must
    have independent columns.  Returns ``min(k_a, k_b)`` angles sorted
    ascending, all within [0, pi/2].

    Cosine-based angles lose roughly half the significant digits near
    zero, so angles below pi/4 are recomputed from the sines via the
    complementary factorization ``svd(Qb - Qa (Qa^T Qb))``, which keeps
    tiny angles accurate to machine precision (d(A, A) returns exact 0).
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != b.shape[0]:
        raise NumericError(
            f"ambient dimension mismatch: {a.shape[0]} vs {b.shape[0]}"
        )
    qa = orthonormal_basis(a)
    qb = orthonormal_basis(b)
    cross = qa.T @ qb
    cosines = np.linalg.svd(cross, compute_uv=False)
    cosines = np.clip(cosines, 0.0, 1.0)
    theta = np.arccos(cosines)  # descending cosines -> ascending angles

    sines = np.linalg.svd(qb - qa @ cross, compute_uv=False)
    sines = np.clip(sines, 0.0, 1.0)
    theta_small = np.arcsin(np.sort(sines))
    k = min(theta.size, theta_small.size)
    theta = theta[:k]
    use_sine = theta < (math.pi / 4.0)
    theta[use_sine] = theta_small[:k][use_sine]
    return theta


def matrix_exp(a, t: float = 1.0) -> np.ndarray:
    """Matrix exponential ``exp(t * a)`` by scaling and squaring.

    The scaled matrix is pushed below norm 1/2, the Taylor series is
    summed to convergence, then the result is squared back up.
    ``matrix_exp(a, 0.0)`` returns the identity exactly.

    Args:
        a: square matrix.
        t: scalar flow parameter.

    Returns:
        Square matrix of the same shape as `a`.
    """
    a = as_matrix(a)
    n, m = a.shape
    if n != m:
        raise NumericError(f"matrix_exp needs a square matrix, got {a.shape}")
    if not math.isfinite(t):
        raise NumericError(f"flow parameter must be finite, got {t}")
    x = a * float(t)
    norm = np.linalg.norm(x, ord=np.inf) if n else 0.0
    squarings = 0
    if norm > 0.5:
        squarings = int(math.ceil(math.log2(norm / 0.5)))
        x = x / (2.0**squarings)
    result = np.eye(n)
    term = np.eye(n)
    for k in range(1, 64):
        term = term @ x / k
        result = result + term
        if np.linalg.norm(term, ord=np.inf) < 1e-18 * max(
            1.0, np.linalg.norm(result, ord=np.inf)
        ):
            break
    for _ in range(squarings):
        result = result @ result
    return result
