"""Kesten-McKay reference law on [0,1].

Support endpoints, scalar density and the constant canonical-moment values
for the two-parameter family, plus edge-adapted quadrature rules.
KMK(0, 0) is the arcsine law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre


@dataclass(frozen=True)
class KMKParams:
    """Geometry of KMK(kappa1, kappa2).

    ``u_minus``/``u_plus`` bound the support, ``u_odd``/``u_even`` are the
    constant odd/even canonical moments (as scalars; the matrix law has
    these times the identity).
    """

    kappa1: float
    kappa2: float
    u_minus: float
    u_plus: float
    u_odd: float
    u_even: float


def kmk_params(kappa1, kappa2):
    """Closed-form support endpoints and canonical-moment constants."""
    if kappa1 < 0 or kappa2 < 0:
        raise ValueError("kappa parameters must be nonnegative")
    s = 2.0 + kappa1 + kappa2
    root = 4.0 * math.sqrt((1.0 + kappa1) * (1.0 + kappa2) * (1.0 + kappa1 + kappa2))
    base = kappa1**2 - kappa2**2
    u_plus = 0.5 + (base + root) / (2.0 * s**2)
    u_minus = 0.5 + (base - root) / (2.0 * s**2)
    # kappa1 = 0 forces u_minus = 0 and kappa2 = 0 forces u_plus = 1 exactly;
    # clamp the last-bit roundoff so downstream interval tests stay clean.
    u_minus = min(max(u_minus, 0.0), 1.0)
    u_plus = min(max(u_plus, 0.0), 1.0)
    return KMKParams(
        kappa1=float(kappa1),
        kappa2=float(kappa2),
        u_minus=u_minus,
        u_plus=u_plus,
        u_odd=(1.0 + kappa1) / s,
        u_even=1.0 / s,
    )


def kmk_density(params, x):
    """Scalar KMK density, zero outside the open support interval."""
    x = np.asarray(x, dtype=float)
    c = (2.0 + params.kappa1 + params.kappa2) / (2.0 * math.pi)
    inside = (x > params.u_minus) & (x < params.u_plus)
    out = np.zeros_like(x)
    xs = x[inside]
    out[inside] = c * np.sqrt((params.u_plus - xs) * (xs - params.u_minus)) / (xs * (1.0 - xs))
    return out if out.ndim else float(out)


def support_quadrature(params, n_nodes):
    """Lebesgue quadrature rule on the KMK support, adapted to its edges.

    Gauss-Legendre in theta after x = mid + half*sin(theta): the square-root
    edge factor of the density becomes half*cos(theta) and the substituted
    KMK integrand is analytic in theta even when the support touches 0 or 1,
    so integration against the law is spectrally accurate for smooth
    integrands and still O(n^-2) for endpoint-logarithmic ones.  Returns
    (nodes, dx weights) with sum(q_i f(x_i)) ~ int f(x) dx over [u-, u+].
    """
    if n_nodes < 8:
        raise ValueError("need at least 8 quadrature nodes")
    t, w = roots_legendre(n_nodes)
    theta = 0.5 * math.pi * t
    mid = 0.5 * (params.u_plus + params.u_minus)
    half = 0.5 * (params.u_plus - params.u_minus)
    x = mid + half * np.sin(theta)
    q = 0.5 * math.pi * w * half * np.cos(theta)
    return x, q


def kmk_quadrature(params, n_nodes):
    """Nodes and weights integrating smooth f against the KMK law itself.

    Returns (nodes, weights) with sum(w_i f(x_i)) ~ int f dKMK; the weights
    are assembled in substituted form, sqrt((u+ - x)(x - u-)) appearing as
    half*cos(theta), so no edge singularity is ever evaluated.
    """
    if n_nodes < 8:
        raise ValueError("need at least 8 quadrature nodes")
    t, w = roots_legendre(n_nodes)
    theta = 0.5 * math.pi * t
    mid = 0.5 * (params.u_plus + params.u_minus)
    half = 0.5 * (params.u_plus - params.u_minus)
    x = mid + half * np.sin(theta)
    c = (2.0 + params.kappa1 + params.kappa2) / (2.0 * math.pi)
    weights = 0.5 * math.pi * w * c * (half * np.cos(theta)) ** 2 / (x * (1.0 - x))
    return x, weights
