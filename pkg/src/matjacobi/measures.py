"""Matrix measures on the real line and matrix polynomials.

A p x p matrix measure is stored as a list of atoms (location, PSD weight)
plus an optional absolutely continuous part held pre-discretized on a
quadrature grid.  Every downstream use -- moments, inner products, entropy
integrals -- is a finite sum, and the representation serializes to plain
JSON.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import serialize
from .hermitian import hermitize, min_eig
from .kmk import kmk_density, kmk_params, support_quadrature

MEASURE_SCHEMA = "matjacobi/matrix-measure-v1"

# PSD slack for stored weights: tiny negative eigenvalues from projector
# arithmetic are tolerated, anything worse is rejected on construction.
WEIGHT_TOL = 1e-12


@dataclass
class MatrixPolynomial:
    """Polynomial with p x p matrix coefficients, P(x) = sum_k x^k C_k.

    Coefficients act on the right (right-module convention), matching the
    inner product below.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 3 or self.coeffs.shape[1] != self.coeffs.shape[2]:
            raise ValueError("coefficients must have shape (degree+1, p, p)")

    @property
    def dim(self):
        return self.coeffs.shape[1]

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    @classmethod
    def constant(cls, c):
        return cls(np.asarray(c, dtype=complex)[None, :, :])

    @classmethod
    def monomial(cls, k, dim):
        """x^k times the identity."""
        coeffs = np.zeros((k + 1, dim, dim), dtype=complex)
        coeffs[k] = np.eye(dim)
        return cls(coeffs)

    def __call__(self, x):
        """Evaluate at a scalar or 1-d array of points; returns (..., p, p)."""
        x = np.asarray(x, dtype=complex)
        powers = x[..., None] ** np.arange(self.coeffs.shape[0])
        return np.einsum("...k,kij->...ij", powers, self.coeffs)

    def right_mul(self, c):
        """P(x) C for a constant matrix C."""
        return MatrixPolynomial(self.coeffs @ np.asarray(c, dtype=complex))


@dataclass
class MatrixMeasure:
    """Finitely supported or quadrature-discretized p x p matrix measure.

    ``atom_weights[i]`` is the PSD mass at ``atom_locations[i]``.  The
    absolutely continuous part, when present, is a triple of nodes, positive
    quadrature weights and PSD density values: integrals against it are
    ``sum_i q_i f(x_i) D_i``.
    """

    dim: int
    atom_locations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    atom_weights: np.ndarray = field(default_factory=lambda: np.zeros((0, 1, 1), dtype=complex))
    ac_nodes: np.ndarray | None = None
    ac_quad_weights: np.ndarray | None = None
    ac_densities: np.ndarray | None = None
    normalized: bool = False

    def __post_init__(self):
        self.atom_locations = np.asarray(self.atom_locations, dtype=float)
        self.atom_weights = np.asarray(self.atom_weights, dtype=complex)
        if self.atom_weights.ndim == 2:
            self.atom_weights = self.atom_weights[None, :, :]
        if self.atom_locations.size:
            if len(np.unique(self.atom_locations)) != len(self.atom_locations):
                raise ValueError("atom locations must be pairwise distinct")
            for w in self.atom_weights:
                if min_eig(w) < -WEIGHT_TOL:
                    raise ValueError("atom weight is not positive semidefinite")
        if self.ac_nodes is not None:
            self.ac_nodes = np.asarray(self.ac_nodes, dtype=float)
            self.ac_quad_weights = np.asarray(self.ac_quad_weights, dtype=float)
            self.ac_densities = np.asarray(self.ac_densities, dtype=complex)
            if np.any(self.ac_quad_weights <= 0):
                raise ValueError("quadrature weights must be positive")
        if self.normalized:
            err = np.linalg.norm(self.mass() - np.eye(self.dim))
            if err > 1e-10:
                raise ValueError(f"measure flagged normalized but mass deviates by {err:.2e}")

    # -- integration ---------------------------------------------------

    def point_masses(self):
        """All support data as one (locations, weights) pair.

        AC density values are folded with their quadrature weights, so any
        integral against the measure is a plain weighted sum over the result.
        """
        xs = [self.atom_locations]
        ws = [self.atom_weights.reshape(-1, self.dim, self.dim)]
        if self.ac_nodes is not None:
            xs.append(self.ac_nodes)
            ws.append(self.ac_quad_weights[:, None, None] * self.ac_densities)
        return np.concatenate(xs), np.concatenate(ws)

    def mass(self):
        _, w = self.point_masses()
        return hermitize(w.sum(axis=0))

    def support_interval(self):
        x, _ = self.point_masses()
        return float(x.min()), float(x.max())

    # -- serialization -------------------------------------------------

    def to_dict(self):
        atoms = []
        for x, w in zip(self.atom_locations, self.atom_weights):
            re, im = serialize.complex_to_pair(w)
            atoms.append({"x": float(x), "w_re": re, "w_im": im})
        doc = {"$schema": MEASURE_SCHEMA, "dim": self.dim,
               "normalized": self.normalized, "atoms": atoms}
        if self.ac_nodes is not None:
            doc["ac"] = {
                "nodes": self.ac_nodes.tolist(),
                "quad_weights": self.ac_quad_weights.tolist(),
                "densities": serialize.complex_list_to_json(self.ac_densities),
            }
        return doc

    @classmethod
    def from_dict(cls, doc):
        dim = int(doc["dim"])
        atoms = doc.get("atoms", [])
        locs = np.array([a["x"] for a in atoms], dtype=float)
        weights = (
            np.array([serialize.pair_to_complex(a["w_re"], a["w_im"]) for a in atoms])
            if atoms else np.zeros((0, dim, dim), dtype=complex)
        )
        kwargs = {}
        if "ac" in doc:
            ac = doc["ac"]
            kwargs = {
                "ac_nodes": np.asarray(ac["nodes"], dtype=float),
                "ac_quad_weights": np.asarray(ac["quad_weights"], dtype=float),
                "ac_densities": serialize.json_to_complex_list(ac["densities"]),
            }
        return cls(dim=dim, atom_locations=locs, atom_weights=weights,
                   normalized=bool(doc.get("normalized", False)), **kwargs)

    def save(self, path):
        serialize.dump_json(self.to_dict(), path)

    @classmethod
    def load(cls, path):
        return cls.from_dict(serialize.load_json(path))


def from_atoms(locations, weights, normalized=None):
    """Build an atomic measure; the normalized flag defaults to a mass check."""
    locations = np.asarray(locations, dtype=float)
    weights = np.asarray(weights, dtype=complex)
    dim = weights.shape[-1]
    if normalized is None:
        mass = hermitize(weights.sum(axis=0))
        normalized = bool(np.linalg.norm(mass - np.eye(dim)) <= 1e-10)
    return MatrixMeasure(dim=dim, atom_locations=locations, atom_weights=weights,
                         normalized=normalized)


def moment(measure, k):
    """k-th matrix moment, int x^k dSigma, as an exactly Hermitian matrix."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    x, w = measure.point_masses()
    return hermitize(np.einsum("n,nij->ij", x**k, w))


def inner_product(measure, f, g):
    """Right inner product of matrix polynomials, int f(x)^H dSigma g(x)."""
    if f.dim != g.dim or f.dim != measure.dim:
        raise ValueError("dimension mismatch between polynomials and measure")
    x, w = measure.point_masses()
    fv = f(x)
    gv = g(x)
    return np.einsum("nji,njk,nkl->il", fv.conj(), w, gv)


def kmk_measure(kappa1, kappa2, dim=1, n_nodes=200):
    """Kesten-McKay matrix measure (scalar KMK density times the identity).

    Discretized on the edge-adapted Gauss-Jacobi grid of the support; the
    total mass converges to the identity spectrally in ``n_nodes``.
    """
    params = kmk_params(kappa1, kappa2)
    x, q = support_quadrature(params, n_nodes)
    dens = kmk_density(params, x)
    eye = np.eye(dim, dtype=complex)
    mass_err = abs(float(np.sum(q * dens)) - 1.0)
    return MatrixMeasure(
        dim=dim,
        atom_locations=np.zeros(0),
        atom_weights=np.zeros((0, dim, dim), dtype=complex),
        ac_nodes=x,
        ac_quad_weights=q,
        ac_densities=dens[:, None, None] * eye,
        normalized=mass_err <= 1e-10,
    )
