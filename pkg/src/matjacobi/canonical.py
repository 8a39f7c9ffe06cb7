"""Canonical moments of normalized matrix measures on [0,1].

The recursion coefficients (u_k, v_k) of a measure supported in [0,1]
factor through a product chain zeta_k = (1 - U_{k-1}) U_k; the U_k locate
each moment between its extremal values given the lower-order moments.  The
Hermitian versions cU_k = R_k^{-1/2} H_k R_k^{-1/2} are similar to the U_k
and satisfy 0 < cU_k < 1 strictly whenever the measure puts no mass on the
endpoints and is nontrivial far enough.

Both directions of the correspondence live here, plus the range/position
bookkeeping (R_k, H_k) and the derived moment bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import serialize
from .chains import chain_from_monic, moments_from_chain
from .exceptions import BoundaryDegeneracy
from .hermitian import EPS_PD, hermitize, invsqrtm_pd, min_eig, sqrtm_pd

CANONICAL_SCHEMA = "matjacobi/canonical-chain-v1"


@dataclass
class CanonicalChain:
    """Canonical-moment data of length m = 2n - 1, lists indexed from zero.

    ``u[k-1]`` is U_k, ``u_herm[k-1]`` its Hermitian version, ``zeta[k-1]``
    the product-chain factor, ``r``/``h`` the moment range and position,
    and ``m_minus``/``m_plus`` the derived extremal moment bounds.
    """

    dim: int
    length: int
    zeta: np.ndarray
    u: np.ndarray
    u_herm: np.ndarray
    r: np.ndarray
    h: np.ndarray
    m_minus: np.ndarray
    m_plus: np.ndarray

    def to_dict(self):
        return {
            "$schema": CANONICAL_SCHEMA,
            "dim": self.dim,
            "length": self.length,
            "zeta": serialize.complex_list_to_json(self.zeta),
            "u": serialize.complex_list_to_json(self.u),
            "u_herm": serialize.complex_list_to_json(self.u_herm),
            "r": serialize.complex_list_to_json(self.r),
            "h": serialize.complex_list_to_json(self.h),
            "m_minus": serialize.complex_list_to_json(self.m_minus),
            "m_plus": serialize.complex_list_to_json(self.m_plus),
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            dim=int(doc["dim"]),
            length=int(doc["length"]),
            zeta=serialize.json_to_complex_list(doc["zeta"]),
            u=serialize.json_to_complex_list(doc["u"]),
            u_herm=serialize.json_to_complex_list(doc["u_herm"]),
            r=serialize.json_to_complex_list(doc["r"]),
            h=serialize.json_to_complex_list(doc["h"]),
            m_minus=serialize.json_to_complex_list(doc["m_minus"]),
            m_plus=serialize.json_to_complex_list(doc["m_plus"]),
        )

    def save(self, path):
        serialize.dump_json(self.to_dict(), path)

    @classmethod
    def load(cls, path):
        return cls.from_dict(serialize.load_json(path))


def _invert(mat, index, what):
    """Invert with an explicit conditioning guard; non-Hermitian allowed."""
    smin = np.linalg.svd(mat, compute_uv=False)[-1]
    if smin <= EPS_PD:
        raise BoundaryDegeneracy(index, f"{what} singular at index {index} "
                                        f"(smallest singular value {smin:.3e})")
    return np.linalg.inv(mat)


def _require_pd(mat, index, what):
    if min_eig(mat) <= EPS_PD:
        raise BoundaryDegeneracy(index, f"{what} not positive definite at index {index}")


def _bounded_strictly(mat, index, what):
    if min_eig(mat) <= EPS_PD or min_eig(np.eye(mat.shape[0]) - mat) <= EPS_PD:
        raise BoundaryDegeneracy(index, f"{what} leaves the open (0,1) block at index {index}")


def _complete_chain(u_list, zeta_list, moments):
    """Fill R/H/Hermitian-version/moment-bound bookkeeping from U and zeta."""
    m = len(u_list)
    p = u_list[0].shape[0]
    eye = np.eye(p, dtype=complex)
    r = np.empty((m, p, p), dtype=complex)
    h = np.empty_like(r)
    u_herm = np.empty_like(r)
    for k in range(m):
        if k == 0:
            r[0] = eye
        else:
            r[k] = hermitize(r[k - 1] @ (eye - u_list[k - 1]) @ u_list[k - 1])
        _require_pd(r[k], k + 1, "moment range R")
        h[k] = hermitize(r[k] @ u_list[k])
        _require_pd(h[k], k + 1, "moment position H")
        ir = invsqrtm_pd(r[k])
        u_herm[k] = hermitize(ir @ h[k] @ ir)
        _bounded_strictly(u_herm[k], k + 1, "Hermitian canonical moment")
    m_minus = np.array([hermitize(moments[k] - h[k]) for k in range(m)])
    m_plus = np.array([hermitize(m_minus[k] + r[k]) for k in range(m)])
    return CanonicalChain(dim=p, length=m, zeta=np.array(zeta_list),
                          u=np.array(u_list), u_herm=u_herm, r=r, h=h,
                          m_minus=m_minus, m_plus=m_plus)


def _check_normalized(chain):
    err = np.linalg.norm(chain.gamma[0] - np.eye(chain.dim))
    if err > 1e-8:
        raise ValueError("canonical moments require a normalized measure "
                         f"(gamma_0 deviates from the identity by {err:.2e})")


def canonical_from_recursion(chain):
    """Extract canonical moments U_1..U_{2n-1} from a depth-n chain.

    Inverts the product decomposition zeta-wise: zeta_1 = u_0,
    zeta_{2k} = zeta_{2k-1}^{-1} v_k, zeta_{2k+1} = u_k - zeta_{2k}, and
    U_k = (1 - U_{k-1})^{-1} zeta_k.  Raises
    :class:`~matjacobi.exceptions.BoundaryDegeneracy` when an inversion or a
    positivity requirement fails, which signals mass at 0/1 or a measure
    that is trivial before the requested length.
    """
    _check_normalized(chain)
    n = chain.depth
    p = chain.dim
    eye = np.eye(p, dtype=complex)
    m = 2 * n - 1
    zeta = []
    u_can = []
    for idx in range(1, m + 1):
        if idx == 1:
            z = chain.u[0]
        elif idx % 2 == 0:
            k = idx // 2
            z = _invert(zeta[idx - 2], idx - 1, "zeta") @ chain.v[k]
        else:
            k = (idx - 1) // 2
            z = chain.u[k] - zeta[idx - 2]
        zeta.append(z)
        if idx == 1:
            u_can.append(z)
        else:
            u_can.append(_invert(eye - u_can[idx - 2], idx - 1, "1 - U") @ z)
    moments = moments_from_chain(chain, m)
    return _complete_chain(u_can, zeta, moments)


def _monic_from_u(u_list, dim):
    """zeta products and monic (gamma, u, v) arrays from canonical moments."""
    m = len(u_list)
    if m % 2 == 0:
        raise ValueError("canonical chain length must be odd (2n - 1)")
    eye = np.eye(dim, dtype=complex)
    zeta = []
    for k, u_k in enumerate(u_list):
        zeta.append(u_k if k == 0 else (eye - u_list[k - 1]) @ u_k)
    n = (m + 1) // 2
    u = np.empty((n, dim, dim), dtype=complex)
    v = np.zeros((n, dim, dim), dtype=complex)
    gamma = np.empty((n, dim, dim), dtype=complex)
    u[0] = zeta[0]
    gamma[0] = eye
    for k in range(1, n):
        v[k] = zeta[2 * k - 2] @ zeta[2 * k - 1]
        u[k] = zeta[2 * k] + zeta[2 * k - 1]
        gamma[k] = hermitize(gamma[k - 1] @ v[k])
        _require_pd(gamma[k], 2 * k, "norm matrix gamma")
    return zeta, gamma, u, v


def canonical_to_recursion(canon):
    """Rebuild the normalized-measure recursion chain from canonical moments.

    Inverse of :func:`canonical_from_recursion` on its image.  The chain has
    depth n = (m + 1)/2; its last monic coefficient u_{n-1} uses only
    zeta_{2n-2} and zeta_{2n-1}, so no canonical data beyond index m is
    needed.
    """
    u_list = [np.asarray(x, dtype=complex) for x in canon.u]
    _, gamma, u, v = _monic_from_u(u_list, canon.dim)
    return chain_from_monic(gamma, u, v)


def canonical_chain_from_u(u_list):
    """Build a full CanonicalChain from raw canonical moments U_1..U_m.

    Useful for synthetic families (constant chains, perturbed chains); the
    moment bounds are derived through the induced recursion chain.
    """
    u_list = [np.asarray(x, dtype=complex) for x in u_list]
    dim = u_list[0].shape[0]
    zeta, gamma, u, v = _monic_from_u(u_list, dim)
    chain = chain_from_monic(gamma, u, v)
    moments = moments_from_chain(chain, len(u_list))
    return _complete_chain(u_list, zeta, moments)


def hermitian_canonical_direct(canon, k):
    """Hermitian canonical moment at index k (1-based), recomputed from R, H.

    Returns R_k^{-1/2} H_k R_k^{-1/2}; agrees with the similarity transform
    R_k^{1/2} U_k R_k^{-1/2} up to roundoff.
    """
    if not 1 <= k <= canon.length:
        raise ValueError("index out of range")
    r = canon.r[k - 1]
    ir = invsqrtm_pd(r)
    return hermitize(ir @ canon.h[k - 1] @ ir)


def similarity_check(canon, k):
    """Frobenius gap between the two equivalent forms of cU_k."""
    r = canon.r[k - 1]
    direct = hermitian_canonical_direct(canon, k)
    via_u = sqrtm_pd(r) @ canon.u[k - 1] @ invsqrtm_pd(r)
    return float(np.linalg.norm(direct - via_u))
