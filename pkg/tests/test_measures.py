import json

import numpy as np
import pytest

from matjacobi.hermitian import hermitize
from matjacobi.kmk import kmk_params
from matjacobi.measures import (MatrixMeasure, MatrixPolynomial, from_atoms,
                                inner_product, kmk_measure, moment)


def two_atom_measure():
    locs = np.array([0.2, 0.8])
    w = np.array([0.5 * np.eye(2), 0.5 * np.eye(2)], dtype=complex)
    return from_atoms(locs, w)


def test_moment_zero_is_identity():
    m = two_atom_measure()
    assert m.normalized
    assert np.allclose(moment(m, 0), np.eye(2), atol=1e-14)


def test_moment_single_atom():
    m = from_atoms(np.array([0.3]), np.eye(2)[None, :, :].astype(complex))
    assert np.allclose(moment(m, 2), 0.09 * np.eye(2), atol=1e-15)


def test_arcsine_first_moment():
    m = kmk_measure(0.0, 0.0, dim=1, n_nodes=200)
    assert moment(m, 1)[0, 0].real == pytest.approx(0.5, abs=1e-10)


def test_kmk_mass_is_identity():
    for k1, k2 in [(0.0, 0.0), (1.0, 0.0), (1.0, 2.0)]:
        m = kmk_measure(k1, k2, dim=2, n_nodes=200)
        assert np.linalg.norm(m.mass() - np.eye(2)) < 1e-8


def test_kmk_mass_error_decays_with_nodes():
    errs = []
    for n in (16, 32, 64):
        m = kmk_measure(0.5, 1.5, dim=1, n_nodes=n)
        errs.append(abs(m.mass()[0, 0].real - 1.0))
    assert errs[2] <= errs[0]


def test_inner_product_constants():
    m = two_atom_measure()
    one = MatrixPolynomial.constant(np.eye(2))
    assert np.allclose(inner_product(m, one, one), np.eye(2), atol=1e-14)


def test_inner_product_reproduces_first_moment():
    m = two_atom_measure()
    one = MatrixPolynomial.constant(np.eye(2))
    x1 = MatrixPolynomial.monomial(1, 2)
    assert np.allclose(inner_product(m, one, x1), moment(m, 1), atol=1e-14)


def test_inner_product_psd_trace():
    rng = np.random.default_rng(4)
    locs = np.sort(rng.uniform(0.05, 0.95, 6))
    vecs = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    w = np.einsum("ni,nj->nij", vecs, vecs.conj()) / 6
    m = from_atoms(locs, w, normalized=False)
    coeffs = rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))
    f = MatrixPolynomial(coeffs)
    gram = inner_product(m, f, f)
    assert np.trace(gram).real >= -1e-12
    assert np.allclose(gram, np.conj(gram.T), atol=1e-10)


def test_inner_product_right_linear():
    m = two_atom_measure()
    rng = np.random.default_rng(5)
    f = MatrixPolynomial(rng.standard_normal((2, 2, 2)) + 0j)
    g = MatrixPolynomial(rng.standard_normal((3, 2, 2)) + 0j)
    c = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    lhs = inner_product(m, f, g.right_mul(c))
    rhs = inner_product(m, f, g) @ c
    assert np.allclose(lhs, rhs, atol=1e-13)


def test_conjugate_symmetry():
    m = two_atom_measure()
    rng = np.random.default_rng(6)
    f = MatrixPolynomial(rng.standard_normal((2, 2, 2))
                         + 1j * rng.standard_normal((2, 2, 2)))
    g = MatrixPolynomial(rng.standard_normal((3, 2, 2))
                         + 1j * rng.standard_normal((3, 2, 2)))
    assert np.allclose(inner_product(m, f, g),
                       np.conj(inner_product(m, g, f).T), atol=1e-13)


def test_duplicate_atoms_rejected():
    with pytest.raises(ValueError):
        from_atoms(np.array([0.5, 0.5]), np.array([np.eye(1), np.eye(1)], dtype=complex))


def test_non_psd_weight_rejected():
    with pytest.raises(ValueError):
        from_atoms(np.array([0.5]), np.array([[[-1.0]]], dtype=complex))


def test_normalized_flag_checked():
    with pytest.raises(ValueError):
        MatrixMeasure(dim=1, atom_locations=np.array([0.5]),
                      atom_weights=np.array([[[0.5]]], dtype=complex),
                      normalized=True)


def test_json_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    vec = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    w = np.einsum("ni,nj->nij", vec, vec.conj())
    w = w / np.trace(w.sum(axis=0)).real * 2
    m = from_atoms(np.array([0.1, 0.4, 0.9]), w, normalized=False)
    path = tmp_path / "m.json"
    m.save(path)
    m2 = MatrixMeasure.load(path)
    assert m2.dim == m.dim
    assert np.allclose(m2.atom_locations, m.atom_locations)
    assert np.allclose(m2.atom_weights, m.atom_weights)
    # serialized form is valid JSON with the documented keys
    doc = json.loads(path.read_text())
    assert doc["atoms"][0].keys() >= {"x", "w_re", "w_im"}


def test_kmk_ac_round_trip(tmp_path):
    m = kmk_measure(1.0, 2.0, dim=2, n_nodes=64)
    path = tmp_path / "kmk.json"
    m.save(path)
    m2 = MatrixMeasure.load(path)
    assert np.allclose(m2.ac_nodes, m.ac_nodes)
    assert np.allclose(m2.ac_densities, m.ac_densities)
    assert np.allclose(m2.mass(), m.mass(), atol=1e-12)


def test_kmk_support_endpoints():
    par = kmk_params(1.0, 1.0)
    assert par.u_minus == pytest.approx(0.5 - np.sqrt(3) / 4, abs=1e-14)
    assert par.u_plus == pytest.approx(0.5 + np.sqrt(3) / 4, abs=1e-14)
    m = kmk_measure(1.0, 1.0, dim=1, n_nodes=100)
    lo, hi = m.support_interval()
    assert lo > par.u_minus and hi < par.u_plus
