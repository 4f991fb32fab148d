"""Dense complex linear-algebra kernel.

Self-contained routines used by every other module: full eigendecomposition,
rank and null-space decisions, and minimum-norm solves of singular systems.
Everything works on plain ``complex128`` ndarrays in double precision; the
problem sizes of interest are tiny (m = 2..10), so robustness is preferred
over asymptotic speed and the routines lean on LAPACK throughout.

Gauge convention: every reported eigenvector or null vector is scaled so that
its largest-magnitude entry is real positive, ties broken by lowest index.
This makes repeated calls on the same input bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DegeneracyError, DimensionError, NumericError

#: Default relative threshold (w.r.t. the largest singular value) separating
#: "numerically zero" from "numerically nonzero" singular values.
DEFAULT_RANK_TOL = 1e-8


def as_cvector(u) -> np.ndarray:
    """Coerce to a finite 1-d complex128 array."""
    arr = np.asarray(u, dtype=complex)
    if arr.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {arr.shape}")
    if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
        raise DimensionError("vector has non-finite entries")
    return arr


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a finite square 2-d complex128 array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
        raise DimensionError("matrix has non-finite entries")
    return arr


def hermitian_inner(u, v) -> complex:
    """Hermitian inner product (u, v) = sum_i u_i * conj(v_i).

    Conjugate-symmetric: ``hermitian_inner(u, v) == conj(hermitian_inner(v, u))``.
    """
    ua = as_cvector(u)
    va = as_cvector(v)
    if ua.shape != va.shape:
        raise DimensionError(f"length mismatch: {ua.shape[0]} vs {va.shape[0]}")
    return complex(np.vdot(va, ua))


def gauge_fix(x: np.ndarray) -> np.ndarray:
    """Rotate a complex vector so its largest-|.| entry is real positive.

    Ties in magnitude are broken by the lowest index. The zero vector is
    returned unchanged.
    """
    x = as_cvector(x)
    mags = np.abs(x)
    top = float(mags.max(initial=0.0))
    if top == 0.0:
        return x.copy()
    # lowest index among entries within one ulp-ish of the max magnitude
    idx = int(np.flatnonzero(mags >= top * (1.0 - 1e-12))[0])
    phase = x[idx] / abs(x[idx])
    return x / phase


@dataclass(frozen=True)
class EigenSet:
    """All eigenvalues of a matrix with unit-norm right eigenvectors.

    ``values[k]`` pairs with the column ``vectors[:, k]``; entries are sorted
    by (real, imag) of the eigenvalue for reproducibility.
    """

    values: np.ndarray
    vectors: np.ndarray

    def __iter__(self):
        return ((self.values[k], self.vectors[:, k]) for k in range(len(self.values)))

    @property
    def m(self) -> int:
        return len(self.values)


def eig_all(a) -> EigenSet:
    """Full eigendecomposition (values with multiplicity + right eigenvectors).

    Eigenvectors are unit-norm and gauge-fixed; the set is sorted by
    (Re, Im) of the eigenvalue so identical inputs give identical output.
    """
    arr = as_cmatrix(a)
    try:
        w, v = np.linalg.eig(arr)
    except np.linalg.LinAlgError as exc:  # iteration cap inside LAPACK
        raise NumericError(f"eigensolver did not converge: {exc}") from exc
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    v = v[:, order]
    cols = []
    for k in range(len(w)):
        col = v[:, k]
        nrm = np.linalg.norm(col)
        cols.append(gauge_fix(col / nrm) if nrm > 0 else col)
    return EigenSet(values=w, vectors=np.column_stack(cols))


def singular_values(a) -> np.ndarray:
    """Singular values in descending order."""
    return np.linalg.svd(as_cmatrix(a), compute_uv=False)


def rank_at(m, tol_rank: float = DEFAULT_RANK_TOL) -> int:
    """Numerical rank: number of singular values above ``tol_rank * sigma_max``.

    The zero matrix has rank 0.
    """
    if tol_rank <= 0:
        raise ValueError("tol_rank must be positive")
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol_rank * s[0]))


def null_basis(m, tol_rank: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical kernel, as columns (may be empty)."""
    arr = as_cmatrix(m)
    _, s, vh = np.linalg.svd(arr)
    smax = s[0] if s.size else 0.0
    keep = s > tol_rank * smax if smax > 0 else np.zeros_like(s, dtype=bool)
    rank = int(np.count_nonzero(keep))
    return vh[rank:].conj().T


def null_vector(m, tol_rank: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """The kernel vector of a rank-(m-1) matrix, unit-norm and gauge-fixed.

    Raises DegeneracyError unless the numerical kernel is exactly
    one-dimensional at the given threshold.
    """
    basis = null_basis(m, tol_rank)
    if basis.shape[1] != 1:
        raise DegeneracyError(
            f"kernel dimension is {basis.shape[1]}, expected 1 "
            f"(tol_rank={tol_rank:g})"
        )
    return gauge_fix(basis[:, 0])


def solve_on_complement(m, b, tol_rank: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Minimum-norm solution of M x = b for a (possibly) singular M.

    Singular directions below ``tol_rank * sigma_max`` are excluded, so the
    returned x is orthogonal to the numerical kernel of M. Raises
    ConsistencyError when b has a component outside the range of M, i.e.
    the residual exceeds ``tol_rank * (||M|| ||x|| + ||b||)``.
    """
    arr = as_cmatrix(m)
    rhs = as_cvector(b)
    if rhs.shape[0] != arr.shape[0]:
        raise DimensionError("right-hand side length does not match the matrix")
    u, s, vh = np.linalg.svd(arr)
    smax = s[0] if s.size else 0.0
    inv = np.zeros_like(s)
    keep = s > tol_rank * smax if smax > 0 else np.zeros_like(s, dtype=bool)
    inv[keep] = 1.0 / s[keep]
    x = vh.conj().T @ (inv * (u.conj().T @ rhs))
    residual = np.linalg.norm(arr @ x - rhs)
    bound = tol_rank * (smax * np.linalg.norm(x) + np.linalg.norm(rhs))
    if residual > bound:
        raise ConsistencyError(
            f"inconsistent right-hand side: residual {residual:.3e} "
            f"exceeds {bound:.3e}"
        )
    return x
