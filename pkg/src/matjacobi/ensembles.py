"""Reproducible samplers for the classical unitary matrix ensembles.

Gaussian, Laguerre and Jacobi unitary ensembles plus the matrix-Dirichlet
weight law and spectral matrix measures of sampled matrices.  All samplers
take a seed or an existing ``numpy.random.Generator``; identical seeds give
bit-identical output.  Batch sampling is exposed through ``size`` in the
numpy style.

Conventions: a complex standard normal has independent real and imaginary
parts of variance 1/2, so E|g|^2 = 1; the Laguerre matrix built from an
N x (N+a) block of such entries then has E[trace] = N(N+a).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .chains import spectral_measure
from .exceptions import SpectrumOutOfDomain
from .hermitian import hermitize, invsqrtm_pd
from .measures import MatrixMeasure

log = logging.getLogger(__name__)

_KINDS = ("gue", "lue", "jue")


@dataclass(frozen=True)
class EnsembleSpec:
    """What to sample: ensemble kind, size, spectral dimension and seed."""

    kind: str
    size: int
    dim: int
    a: int = 0
    b: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        if self.size < self.dim or self.dim < 1:
            raise ValueError("need size >= dim >= 1")
        if self.kind in ("lue", "jue") and (self.a < 0 or int(self.a) != self.a):
            raise ValueError("parameter a must be a nonnegative integer")
        if self.kind == "jue" and (self.b < 0 or int(self.b) != self.b):
            raise ValueError("parameter b must be a nonnegative integer")


@dataclass
class SpectralSample:
    """A sampled spectral matrix measure together with its provenance."""

    measure: MatrixMeasure
    spec: EnsembleSpec


def rng_from(seed):
    """Generator from a seed, a SeedSequence, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def split_seeds(seed, count):
    """Independent child seed sequences for parallel workers.

    The split is the documented SeedSequence spawn tree, so worker streams
    are reproducible and non-overlapping for any worker count.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return ss.spawn(count)


def standard_complex_normal(rng, shape):
    """Entries with E|g|^2 = 1: real and imaginary parts are N(0, 1/2)."""
    scale = np.sqrt(0.5)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_gue(n, seed=None, size=None):
    """Hermitian matrix with N(0,1) diagonal and N(0,1/2) off-diagonal parts."""
    rng = rng_from(seed)
    shape = (n, n) if size is None else (size, n, n)
    a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return hermitize(a)


def sample_lue(n, a, seed=None, size=None):
    """G G^H for G an n x (n+a) block of complex standard normals."""
    if a < 0 or int(a) != a:
        raise ValueError("parameter a must be a nonnegative integer")
    rng = rng_from(seed)
    shape = (n, n + int(a)) if size is None else (size, n, n + int(a))
    g = standard_complex_normal(rng, shape)
    return hermitize(g @ np.conj(np.swapaxes(g, -1, -2)))


def _invsqrt_psd_batch(mats):
    """Batched inverse PD square root via eigh; inputs must be PD."""
    w, v = np.linalg.eigh(mats)
    if float(w.min()) <= 0.0:
        raise SpectrumOutOfDomain("batched inverse square root of a singular matrix")
    inv_root = 1.0 / np.sqrt(w)
    return hermitize(np.einsum("...ij,...j,...kj->...ik", v, inv_root, v.conj()))


def sample_jue(n, a, b, seed=None, size=None):
    """Matrix of the Jacobi ensemble via two independent Laguerre draws.

    X = (L1 + L2)^{-1/2} L1 (L1 + L2)^{-1/2}; eigenvalues lie strictly in
    (0,1) almost surely.  Margin violations are logged, never clipped.
    """
    rng = rng_from(seed)
    l1 = sample_lue(n, a, rng, size=size)
    l2 = sample_lue(n, b, rng, size=size)
    t = _invsqrt_psd_batch(l1 + l2)
    x = hermitize(t @ l1 @ t)
    lam = np.linalg.eigvalsh(x)
    margin = min(float(lam.min()), float(1.0 - lam.max()))
    if margin <= 0.0:
        log.warning("jue sample touched the boundary of (0,1): margin %.3e", margin)
    return x


def sample_weights(n, dim, seed=None):
    """Matrix-Dirichlet weights: n rank-one PSD matrices summing to identity.

    Built from i.i.d. complex standard normal vectors z_j as
    H^{-1/2} z_j z_j^H H^{-1/2} with H the sum of the outer products.
    """
    if n < dim:
        raise ValueError("need at least dim vectors")
    rng = rng_from(seed)
    z = standard_complex_normal(rng, (n, dim))
    h = hermitize(np.einsum("ni,nj->ij", z, z.conj()))
    t = invsqrtm_pd(h)
    y = z @ t.T  # rows are H^{-1/2} z_j since T is Hermitian
    return np.einsum("ni,nj->nij", y, y.conj())


def _sample_matrix(spec, rng):
    if spec.kind == "gue":
        return sample_gue(spec.size, rng)
    if spec.kind == "lue":
        return sample_lue(spec.size, spec.a, rng)
    return sample_jue(spec.size, spec.a, spec.b, rng)


def spectral_sample(spec, seed=None, method="full"):
    """Spectral matrix measure of one ensemble draw.

    ``method="full"`` eigendecomposes the sampled matrix and projects
    eigenvectors onto the first ``dim`` coordinates.  ``method="split"``
    uses the eigenvalues of an independent draw together with independent
    matrix-Dirichlet weights; the two routes agree in law because the
    eigenvector matrix is Haar distributed independently of the spectrum.
    """
    if spec.size % spec.dim:
        raise ValueError("spectral dimension must divide the matrix size")
    rng = rng_from(spec.seed if seed is None else seed)
    x = _sample_matrix(spec, rng)
    if method == "full":
        measure = spectral_measure(x, spec.dim)
    elif method == "split":
        lam = np.linalg.eigvalsh(x)
        w = sample_weights(spec.size, spec.dim, rng)
        measure = MatrixMeasure(dim=spec.dim, atom_locations=lam, atom_weights=w,
                                normalized=True)
    else:
        raise ValueError("method must be 'full' or 'split'")
    return SpectralSample(measure=measure, spec=spec)
