"""Exact identities connecting measures, canonical moments and circle data.

Four families of checks, each computed by two independent routes:

* determinant products: det J_n and det(I - J_n) against eigenvalue
  products and against canonical-moment determinant products;
* the Schur-complement recursion phi_k = 1 - u_{k-1} - phi_{k-1}^{-1} v_{k-1}
  against its closed form (1 - U_{2k-2})(1 - U_{2k-1});
* the reflection-coefficient bridge alpha_n = 2 cU_{n+1} - 1 and the monic
  circle-polynomial recursion;
* the degree-halving evaluation identity relating monic polynomials of the
  pushed-forward [-2,2] measure to circle polynomials at z and 1/z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .canonical import canonical_chain_from_u, canonical_from_recursion
from .chains import build_block_jacobi, chain_from_monic, eval_monic_op, gram_schmidt
from .exceptions import BoundaryDegeneracy
from .hermitian import (EPS_PD, hermitize, herm_eigen, invsqrtm_pd,
                        loewner_strictly_between, sqrtm_pd)


@dataclass(frozen=True)
class IdentityReport:
    """One identity evaluated by two routes, with a relative residual."""

    name: str
    lhs: complex
    rhs: complex
    residual: float
    passed: bool

    @classmethod
    def compare(cls, name, lhs, rhs, tol):
        residual = abs(lhs - rhs) / (1.0 + abs(lhs))
        return cls(name=name, lhs=lhs, rhs=rhs, residual=residual, passed=residual < tol)


@dataclass
class VerblunskySeq:
    """Hermitian reflection coefficients with their derived normalizers.

    ``alpha[j]`` is the j-th coefficient (0-based) and ``rho[j]`` the
    positive root of 1 - alpha_j^2.  ``kappa[k]`` is the inverse positive
    definite square root of the k-th monic circle polynomial's norm matrix,
    built from the norm recursion

        gamma_0 = 1,   gamma_{k+1} = gamma_k^{1/2} (1 - alpha_k^2) gamma_k^{1/2}.

    In the scalar case this collapses to the familiar inverse product
    (rho_0 ... rho_{k-1})^{-1}; matrix coefficients do not commute, and the
    Hermitian root of the norm matrix is what actually conjugates the
    recursion coefficient.
    """

    alpha: np.ndarray
    rho: np.ndarray
    kappa: np.ndarray

    def __len__(self):
        return len(self.alpha)

    def conjugated(self, k):
        """kappa_k alpha_k kappa_k^{-1}, the coefficient as it enters the recursion."""
        return self.kappa[k] @ self.alpha[k] @ np.linalg.inv(self.kappa[k])

    def tau(self, n):
        """Normalizer 1 - kappa_{2n-1} alpha_{2n-1} kappa_{2n-1}^{-1}."""
        p = self.alpha.shape[-1]
        t = np.eye(p, dtype=complex) - self.conjugated(2 * n - 1)
        smin = np.linalg.svd(t, compute_uv=False)[-1]
        if smin <= EPS_PD:
            raise BoundaryDegeneracy(2 * n - 1, "normalizer tau is singular")
        return t


def _norm_kappas(alpha):
    """Inverse PD roots of the circle norm matrices along the sequence."""
    p = alpha.shape[-1]
    eye = np.eye(p, dtype=complex)
    kappa = np.empty((len(alpha) + 1, p, p), dtype=complex)
    gamma = eye
    kappa[0] = eye
    for k, a in enumerate(alpha):
        root = sqrtm_pd(gamma)
        gamma = hermitize(root @ (eye - a @ a) @ root)
        kappa[k + 1] = invsqrtm_pd(gamma)
    return kappa


def verblunsky_from_canonical(canon):
    """alpha_j = 2 cU_{j+1} - 1 for j = 0 .. m-2, with rho/kappa bookkeeping."""
    p = canon.dim
    eye = np.eye(p, dtype=complex)
    alpha = np.array([hermitize(2.0 * canon.u_herm[j] - eye)
                      for j in range(canon.length - 1)])
    for j, a in enumerate(alpha):
        if not loewner_strictly_between(a, -1.0, 1.0, EPS_PD):
            raise BoundaryDegeneracy(j, f"reflection coefficient {j} touches the unit bound")
    rho = np.array([sqrtm_pd(eye - a @ a) for a in alpha])
    return VerblunskySeq(alpha=alpha, rho=rho, kappa=_norm_kappas(alpha))


def szego_phi(seq, k, z):
    """Monic circle polynomial Phi_k at z, and its value at 1/z.

    Runs the coupled recursion
        Phi_{j+1}(z) = z Phi_j(z) - z^j Phi_j(1/z) kappa_j alpha_j kappa_j^{-1}
    tracking both evaluation points so the reciprocal is never re-expanded.
    Plain substitution z -> 1/z is used throughout (the coefficients here
    are Hermitian).  Returns the pair (Phi_k(z), Phi_k(1/z)).
    """
    if k > len(seq):
        raise ValueError("degree exceeds the available coefficients")
    z = complex(z)
    if abs(z) < 1e-8:
        raise ValueError("evaluation point too close to the origin")
    p = seq.alpha.shape[-1]
    w = 1.0 / z
    f = np.eye(p, dtype=complex)
    g = np.eye(p, dtype=complex)
    for j in range(k):
        cj = seq.conjugated(j)
        f_next = z * f - z**j * (g @ cj)
        g_next = w * g - w**j * (f @ cj)
        f, g = f_next, g_next
    return f, g


def orientation_flip(seq):
    """Reflection z -> -z of the symmetrized measure: flip even-index alphas.

    The affine map x -> 2 - 4x reverses orientation, so the circle
    coefficients of its lift differ from the canonical-moment formula by a
    sign on every even index; rho and kappa only see the squares of the
    coefficients and are unchanged.
    """
    signs = np.array([(-1.0) ** (j + 1) for j in range(len(seq.alpha))])
    return VerblunskySeq(alpha=signs[:, None, None] * seq.alpha,
                         rho=seq.rho.copy(), kappa=seq.kappa.copy())


def default_circle_samples():
    """Eight unit-circle points: +-1 plus the non-real eighth roots of unity."""
    roots = [np.exp(2j * np.pi * k / 8) for k in range(8)]
    return [z for z in roots if abs(z.imag) > 1e-12] + [1.0 + 0j, -1.0 + 0j]


def check_det_identities(measure, depth, tol=1e-8):
    """Determinant identities for an atomic measure on (0,1) at a given depth.

    Four reports: det J_n and det(I - J_n), each compared against the
    eigenvalue-product oracle and against the canonical-moment determinant
    products.
    """
    chain = gram_schmidt(measure, depth)
    canon = canonical_from_recursion(chain)
    j = build_block_jacobi(chain)
    lam = herm_eigen(j).eigenvalues
    det_j = complex(np.linalg.det(j))
    det_c = complex(np.linalg.det(np.eye(j.shape[0]) - j))

    n = depth
    eye = np.eye(measure.dim)
    odd = [np.linalg.det(canon.u_herm[2 * k]) for k in range(n)]
    even_c = [np.linalg.det(eye - canon.u_herm[2 * k + 1]) for k in range(n - 1)]
    all_c = [np.linalg.det(eye - canon.u_herm[k]) for k in range(2 * n - 1)]

    return [
        IdentityReport.compare("det_jacobi_vs_eigenvalue_product",
                               det_j, complex(np.prod(lam)), tol),
        IdentityReport.compare("det_complement_vs_eigenvalue_product",
                               det_c, complex(np.prod(1.0 - lam)), tol),
        IdentityReport.compare("det_jacobi_vs_canonical_product",
                               det_j, complex(np.prod(odd) * np.prod(even_c)), tol),
        IdentityReport.compare("det_complement_vs_canonical_product",
                               det_c, complex(np.prod(all_c)), tol),
    ]


def check_schur_recursion(chain, canon, tol=1e-9):
    """Schur-complement recursion against its canonical closed form.

    Iterates phi_1 = 1 - u_0, phi_k = 1 - u_{k-1} - phi_{k-1}^{-1} v_{k-1}
    and reports the Frobenius gap to (1 - U_{2k-2})(1 - U_{2k-1}) per step
    (with U_0 = 0, so the first step reduces to 1 - U_1).
    """
    p = chain.dim
    eye = np.eye(p, dtype=complex)
    reports = []
    phi = eye - chain.u[0]
    for k in range(1, chain.depth + 1):
        if k > 1:
            smin = np.linalg.svd(phi, compute_uv=False)[-1]
            if smin <= EPS_PD:
                raise BoundaryDegeneracy(k - 1, "Schur complement became singular")
            phi = eye - chain.u[k - 1] - np.linalg.inv(phi) @ chain.v[k - 1]
        v_even = eye if k == 1 else eye - canon.u[2 * k - 3]
        closed = v_even @ (eye - canon.u[2 * k - 2])
        gap = float(np.linalg.norm(phi - closed))
        reports.append(IdentityReport(
            name=f"schur_step_{k}", lhs=complex(np.linalg.det(phi)),
            rhs=complex(np.linalg.det(closed)), residual=gap, passed=gap < tol))
    return reports


def transform_chain_to_sym(chain):
    """Recursion chain of the pushforward under x -> 2 - 4x (onto [-2,2]).

    Affine spectral mapping: monic coefficients become 2 - 4 u_k and 16 v_k,
    norm matrices scale by 16^k, diagonal blocks by 2 - 4 B_k and
    off-diagonal blocks by 4 A~_k (the alternating-sign conjugation makes
    the off-diagonal sign positive while leaving the spectral weights of
    the first block untouched).
    """
    n = chain.depth
    scale = np.array([16.0**k for k in range(n)])
    gamma = scale[:, None, None] * chain.gamma
    u = 2.0 * np.eye(chain.dim) - 4.0 * chain.u
    v = 16.0 * chain.v
    return chain_from_monic(gamma, u, v)


def check_ym(measure, n, z_samples=None, tol=1e-7):
    """Degree-halving evaluation identity at sample points on the unit circle.

    For a normalized measure on [0,1]: the n-th monic polynomial of the
    pushforward under x -> 2 - 4x, evaluated at z + 1/z, must equal
    [z^{-n} Phi_{2n}(z) + z^n Phi_{2n}(1/z)] tau_n^{-1} where the circle
    polynomials are driven by alpha_j = 2 cU_{j+1} - 1.  Requires canonical
    data to index 2n + 1, i.e. a chain of depth n + 1.
    """
    if z_samples is None:
        z_samples = default_circle_samples()
    chain = gram_schmidt(measure, n + 1)
    canon = canonical_from_recursion(chain)
    return check_ym_from_chain(chain, canon, n, z_samples, tol)


def check_ym_from_chain(chain, canon, n, z_samples=None, tol=1e-7):
    """Same as :func:`check_ym` but starting from precomputed chain data."""
    if z_samples is None:
        z_samples = default_circle_samples()
    if canon.length < 2 * n + 1:
        raise ValueError("need canonical moments up to index 2n+1")
    # the pushforward under 2 - 4x reverses orientation, so the circle
    # recursion runs on the reflected coefficient sequence
    seq = orientation_flip(verblunsky_from_canonical(canon))
    tau_inv = np.linalg.inv(seq.tau(n))
    sym_chain = transform_chain_to_sym(chain)
    worst = 0.0
    for z in z_samples:
        z = complex(z)
        lhs = eval_monic_op(sym_chain, n, z + 1.0 / z)
        phi_z, phi_w = szego_phi(seq, 2 * n, z)
        rhs = (z**(-n) * phi_z + z**n * phi_w) @ tau_inv
        worst = max(worst, float(np.linalg.norm(lhs - rhs) / (1.0 + np.linalg.norm(lhs))))
    return IdentityReport(name=f"degree_halving_n{n}", lhs=0.0, rhs=0.0,
                          residual=worst, passed=worst < tol)


def free_canonical_chain(dim, length):
    """Canonical chain of the arcsine truncation: every moment centered at 1/2."""
    half = 0.5 * np.eye(dim, dtype=complex)
    return canonical_chain_from_u([half] * length)


def check_phi_det_product(seq, n, tol=1e-9):
    """det Phi_{2n}(1) against the product of det(1 - alpha_j)."""
    phi_1, _ = szego_phi(seq, 2 * n, 1.0)
    lhs = complex(np.linalg.det(phi_1))
    eye = np.eye(seq.alpha.shape[-1])
    rhs = complex(np.prod([np.linalg.det(eye - a) for a in seq.alpha[:2 * n]]))
    return IdentityReport.compare(f"phi_det_product_n{n}", lhs, rhs, tol)
