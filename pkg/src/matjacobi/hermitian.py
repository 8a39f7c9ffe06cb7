"""Small dense complex Hermitian linear algebra.

The numeric substrate for every other module: exact symmetrization,
eigendecomposition, functional calculus ``f(A) = V f(L) V^H``, positive
definite log-determinants and Loewner-order predicates.  Matrices are plain
complex numpy arrays; "Hermitian" means exactly equal to one's own conjugate
transpose, which :func:`hermitize` enforces bit for bit.

All functions are pure; arrays are never mutated in place, so values can be
shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SpectrumOutOfDomain

# Positive-definiteness floor.  Spectra at or below this are treated as
# degenerate: log-determinants and inverse roots blow up there.
EPS_PD = 1e-12


def hermitize(a):
    """Return the Hermitian part ``(A + A^H)/2`` of a square matrix.

    The result is exactly Hermitian in floating point: entries (i, j) and
    (j, i) are built from the same commutative sum, and diagonal imaginary
    parts cancel exactly.
    """
    a = np.asarray(a, dtype=complex)
    return (a + np.conj(np.swapaxes(a, -1, -2))) / 2.0


def as_matrix(x, dim=None):
    """Coerce a scalar or array to a complex square matrix.

    Scalars become ``x * I`` (``dim`` required), arrays are passed through.
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim == 0:
        if dim is None:
            raise ValueError("dim is required to promote a scalar to a matrix")
        return complex(x) * np.eye(dim, dtype=complex)
    return x


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral factorization A = V diag(eigenvalues) V^H.

    Eigenvalues are real and ascending; eigenvector columns are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return hermitize((v * self.eigenvalues) @ np.conj(v.T))


def herm_eigen(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("cannot eigendecompose a matrix with non-finite entries")
    w, v = np.linalg.eigh(hermitize(a))
    return EigenDecomposition(w, v)


def min_eig(a):
    """Smallest eigenvalue of the Hermitian part of ``a``."""
    return float(np.linalg.eigvalsh(hermitize(a))[0])


def matrix_function(a, f, floor=None):
    """Apply a scalar function to the spectrum: ``V f(L) V^H``, symmetrized.

    ``floor`` guards the domain of ``f``; any eigenvalue at or below it
    raises :class:`SpectrumOutOfDomain` (use ``EPS_PD`` for sqrt/log/inverse
    powers).
    """
    dec = herm_eigen(a)
    lam = dec.eigenvalues
    if floor is not None and lam[0] <= floor:
        raise SpectrumOutOfDomain(
            f"eigenvalue {lam[0]:.3e} at or below floor {floor:.1e}"
        )
    v = dec.eigenvectors
    return hermitize((v * f(lam)) @ np.conj(v.T))


def sqrtm_pd(a):
    """Unique positive definite square root of a positive definite matrix."""
    return matrix_function(a, np.sqrt, floor=EPS_PD)


def invsqrtm_pd(a):
    """Inverse of the positive definite square root."""
    return matrix_function(a, lambda lam: 1.0 / np.sqrt(lam), floor=EPS_PD)


def logdet_pd(a):
    """log det A as the sum of log-eigenvalues, for A positive definite."""
    lam = np.linalg.eigvalsh(hermitize(a))
    if lam[0] <= EPS_PD:
        raise SpectrumOutOfDomain(
            f"log-determinant undefined: smallest eigenvalue {lam[0]:.3e}"
        )
    return float(np.sum(np.log(lam)))


def loewner_strictly_between(a, lo, hi, margin=EPS_PD):
    """True iff ``lo + margin < A < hi - margin`` in the Loewner order.

    ``lo`` and ``hi`` may be scalars (meaning multiples of the identity).
    Predicate only; never raises for indefinite inputs.
    """
    a = np.asarray(a, dtype=complex)
    p = a.shape[0]
    lo = as_matrix(lo, p)
    hi = as_matrix(hi, p)
    return min_eig(a - lo) > margin and min_eig(hi - a) > margin
