"""Monic orthogonal matrix polynomials and block Jacobi operators.

Gram-Schmidt over a matrix measure produces the three-term recursion data
(gamma_k, u_k, v_k), their Hermitian versions (B_k, A~_k, A_k), the
truncated block Jacobi matrix, and back again: the spectral measure of the
block Jacobi matrix recovers the source measure when it had exactly n*p
atoms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import serialize
from .exceptions import TrivialityBreakdown
from .hermitian import EPS_PD, hermitize, herm_eigen, invsqrtm_pd, sqrtm_pd
from .measures import MatrixMeasure, from_atoms

CHAIN_SCHEMA = "matjacobi/recursion-chain-v1"

# Eigenvalue gap below which spectral-measure atoms are merged.  Sampled
# ensembles have simple spectrum a.s., so this only guards numeric ties.
MERGE_GAP = 1e-10


@dataclass
class RecursionChain:
    """Three-term recursion data of monic orthogonal matrix polynomials.

    With lists indexed from zero: ``gamma[k]`` is the norm matrix of the
    k-th monic polynomial (k <= depth-1), ``u[k]`` and ``v[k]`` the monic
    recursion coefficients (``v[0]`` is zero by convention), ``b[k]`` the
    (k+1)-th Hermitian diagonal block, ``a_tilde[k]``/``a[k]`` the (k+1)-th
    off-diagonal block and its Hermitian square.
    """

    dim: int
    depth: int
    gamma: np.ndarray
    u: np.ndarray
    v: np.ndarray
    b: np.ndarray
    a_tilde: np.ndarray
    a: np.ndarray

    def to_dict(self):
        return {
            "$schema": CHAIN_SCHEMA,
            "dim": self.dim,
            "depth": self.depth,
            "gamma": serialize.complex_list_to_json(self.gamma),
            "u": serialize.complex_list_to_json(self.u),
            "v": serialize.complex_list_to_json(self.v),
            "b": serialize.complex_list_to_json(self.b),
            "a_tilde": serialize.complex_list_to_json(self.a_tilde),
            "a": serialize.complex_list_to_json(self.a),
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            dim=int(doc["dim"]),
            depth=int(doc["depth"]),
            gamma=serialize.json_to_complex_list(doc["gamma"]),
            u=serialize.json_to_complex_list(doc["u"]),
            v=serialize.json_to_complex_list(doc["v"]),
            b=serialize.json_to_complex_list(doc["b"]),
            a_tilde=serialize.json_to_complex_list(doc["a_tilde"]),
            a=serialize.json_to_complex_list(doc["a"]),
        )

    def save(self, path):
        serialize.dump_json(self.to_dict(), path)

    @classmethod
    def load(cls, path):
        return cls.from_dict(serialize.load_json(path))


def _orthonormal_blocks(gamma, u):
    """Hermitian recursion blocks from monic data via PD square roots."""
    depth = len(u)
    p = gamma.shape[-1]
    roots = np.array([sqrtm_pd(g) for g in gamma])
    inv_roots = np.array([invsqrtm_pd(g) for g in gamma])
    b = np.empty((depth, p, p), dtype=complex)
    a_tilde = np.empty((max(depth - 1, 0), p, p), dtype=complex)
    a = np.empty_like(a_tilde)
    for k in range(depth):
        b[k] = hermitize(roots[k] @ u[k] @ inv_roots[k])
    for k in range(1, depth):
        a_tilde[k - 1] = inv_roots[k - 1] @ roots[k]
        a[k - 1] = hermitize(a_tilde[k - 1] @ np.conj(a_tilde[k - 1].T))
    return b, a_tilde, a


def chain_from_monic(gamma, u, v):
    """Assemble a RecursionChain from monic coefficient arrays."""
    gamma = np.asarray(gamma, dtype=complex)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    b, a_tilde, a = _orthonormal_blocks(gamma, u)
    return RecursionChain(dim=gamma.shape[-1], depth=len(u), gamma=gamma,
                          u=u, v=v, b=b, a_tilde=a_tilde, a=a)


def gram_schmidt(measure, depth):
    """Orthogonalize 1, x*1, ... against the measure up to the given depth.

    Runs the Stieltjes procedure on the measure's point masses: polynomial
    values are carried on the support grid and inner products are exact
    finite sums, which keeps the computation well conditioned at the depths
    used here.  One re-orthogonalization pass per step controls drift.

    Raises :class:`TrivialityBreakdown` at the first k whose norm matrix
    gamma_k is not positive definite above the floor.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    p = measure.dim
    x, w = measure.point_masses()
    eye = np.eye(p, dtype=complex)

    values = [np.broadcast_to(eye, (len(x), p, p)).copy()]

    def pairing(fv, gv):
        return np.einsum("nji,njk,nkl->il", fv.conj(), w, gv)

    gamma = [hermitize(w.sum(axis=0))]
    _require_pd(gamma[0], 0)

    u = []
    v = [np.zeros((p, p), dtype=complex)]
    for k in range(depth):
        pk = values[k]
        s_k = hermitize(np.einsum("n,nji,njk,nkl->il", x, pk.conj(), w, pk))
        u.append(np.linalg.solve(gamma[k], s_k))
        if k == depth - 1:
            break
        nxt = x[:, None, None] * pk - pk @ u[k]
        if k >= 1:
            nxt = nxt - values[k - 1] @ v[k]
        # one re-orthogonalization sweep against all previous polynomials
        for j in range(k + 1):
            corr = np.linalg.solve(gamma[j], pairing(values[j], nxt))
            nxt = nxt - values[j] @ corr
        g = hermitize(pairing(nxt, nxt))
        _require_pd(g, k + 1)
        values.append(nxt)
        gamma.append(g)
        v.append(np.linalg.solve(gamma[k], gamma[k + 1]))

    return chain_from_monic(np.array(gamma), np.array(u), np.array(v))


def _require_pd(g, index):
    if float(np.linalg.eigvalsh(g)[0]) <= EPS_PD:
        raise TrivialityBreakdown(index)


def build_block_jacobi(chain):
    """Assemble the truncated block-tridiagonal Hermitian matrix."""
    p, n = chain.dim, chain.depth
    j = np.zeros((n * p, n * p), dtype=complex)
    for k in range(n):
        j[k * p:(k + 1) * p, k * p:(k + 1) * p] = chain.b[k]
    for k in range(n - 1):
        j[k * p:(k + 1) * p, (k + 1) * p:(k + 2) * p] = chain.a_tilde[k]
        j[(k + 1) * p:(k + 2) * p, k * p:(k + 1) * p] = np.conj(chain.a_tilde[k].T)
    return j


def spectral_measure(j, dim):
    """Spectral matrix measure of a Hermitian operator for the first basis block.

    Atoms sit at eigenvalues, each weighted by the outer product of the
    first ``dim`` coordinates of the unit eigenvector; eigenvalues closer
    than the merge gap pool their projector weights.
    """
    j = np.asarray(j, dtype=complex)
    if j.shape[0] % dim:
        raise ValueError("operator size must be divisible by the block dimension")
    dec = herm_eigen(j)
    lam = dec.eigenvalues
    vecs = dec.eigenvectors[:dim, :]
    locs = []
    weights = []
    start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[i] - lam[i - 1] > MERGE_GAP:
            group = vecs[:, start:i]
            weights.append(hermitize(group @ np.conj(group.T)))
            locs.append(float(np.mean(lam[start:i])))
            start = i
    return from_atoms(np.array(locs), np.array(weights))


def eval_monic_op(chain, k, z):
    """Value of the k-th monic orthogonal polynomial at a complex point."""
    if k > chain.depth:
        raise ValueError("polynomial degree exceeds chain depth")
    p = chain.dim
    prev = np.zeros((p, p), dtype=complex)
    cur = np.eye(p, dtype=complex)
    for j in range(k):
        nxt = z * cur - cur @ chain.u[j] - prev @ chain.v[j]
        prev, cur = cur, nxt
    return cur


def moments_from_chain(chain, count):
    """First ``count`` moments implied by the chain, via block Jacobi powers.

    Valid for orders up to 2*depth - 1, where the truncation is faithful to
    the source measure.
    """
    p = chain.dim
    j = build_block_jacobi(chain)
    out = []
    power = np.eye(j.shape[0], dtype=complex)
    for _ in range(count):
        power = power @ j
        out.append(hermitize(power[:p, :p]))
    return np.array(out)
