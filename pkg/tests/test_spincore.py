"""Exact spin-space layer: operator algebra, basis bookkeeping, propagator."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinchain.errors import ResourceError, ValidationError
from spinchain.spincore import (
    Lattice,
    LatticeBasisState,
    Propagator,
    Spin,
    build_heisenberg,
    exact_propagate,
    open_chain,
    pt2_correlator,
    site_operator,
    spin_matrices,
    spin_xyz,
    two_site,
)


def comm(a, b):
    return a @ b - b @ a


@given(st.integers(min_value=1, max_value=8))
def test_ladder_algebra(two_s):
    """[Sz, S+-] = +-S+- and [S+, S-] = 2 Sz at every spin."""
    sz, sp, sm = spin_matrices(Spin(two_s))
    assert np.allclose(comm(sz, sp), sp, atol=1e-12)
    assert np.allclose(comm(sz, sm), -sm, atol=1e-12)
    assert np.allclose(comm(sp, sm), 2 * sz, atol=1e-12)


@given(st.integers(min_value=1, max_value=8))
def test_casimir(two_s):
    """Sx^2 + Sy^2 + Sz^2 = S(S+1) I."""
    s = two_s / 2.0
    sx, sy, sz = spin_xyz(Spin(two_s))
    total = sx @ sx + sy @ sy + sz @ sz
    assert np.allclose(total, s * (s + 1) * np.eye(two_s + 1), atol=1e-12)


def test_spin_half_matrices():
    """Pauli algebra in the ascending-M basis (index 0 is M = -1/2)."""
    sx, sy, sz = spin_xyz(Spin(1))
    assert np.allclose(2 * sx, [[0, 1], [1, 0]])
    assert np.allclose(2 * sy, [[0, 1j], [-1j, 0]])
    assert np.allclose(2 * sz, [[-1, 0], [0, 1]])


def test_spin_validation():
    with pytest.raises(ValidationError):
        Spin(0)
    with pytest.raises(ValidationError):
        Spin(1.0)  # must be the integer 2S, not a float


@given(
    st.integers(min_value=1, max_value=6),
    st.lists(st.integers(min_value=0, max_value=6), min_size=1, max_size=4),
)
def test_basis_state_roundtrip(two_s, raw_levels):
    """levels() and basis_index() are consistent with the stored twoM tuple."""
    levels = [l % (two_s + 1) for l in raw_levels]
    two_m = tuple(2 * l - two_s for l in reversed(levels))  # ket order, site 0 last
    state = LatticeBasisState(two_m, Spin(two_s))
    assert state.levels() == tuple(levels)
    assert state.two_m_tot == sum(two_m)
    d = two_s + 1
    assert state.basis_index() == sum(l * d**n for n, l in enumerate(levels))


def test_basis_state_rejects_bad_parity_and_range():
    with pytest.raises(ValidationError):
        LatticeBasisState((1,), Spin(2))  # wrong parity for integer spin
    with pytest.raises(ValidationError):
        LatticeBasisState((4,), Spin(2))  # |2M| > 2S


def test_lattice_validation():
    with pytest.raises(ValidationError):
        Lattice(2, ((0, 0),), Spin(1))
    with pytest.raises(ValidationError):
        Lattice(2, ((0, 2),), Spin(1))
    with pytest.raises(ValidationError):
        Lattice(3, ((0, 1), (1, 0)), Spin(1))  # duplicate up to direction


def test_lattice_helpers():
    lat = two_site(Spin(3))
    assert lat.n_sites == 2 and lat.edges == ((0, 1),) and lat.dim == 16
    chain = open_chain(4, Spin(2))
    assert chain.edges == ((0, 1), (1, 2), (2, 3))
    assert chain.dim == 3**4


def test_site_operator_embedding():
    """site 0 is the least significant kron factor."""
    sz = spin_matrices(Spin(2))[0]
    ident = np.eye(3)
    assert np.allclose(site_operator(sz, 0, 2), np.kron(ident, sz))
    assert np.allclose(site_operator(sz, 1, 2), np.kron(sz, ident))


@pytest.mark.parametrize("two_s", [1, 2, 3])
def test_heisenberg_matches_xyz_form(two_s):
    """sum_edges [SzSz + (S+S- + S-S+)/2] equals sum_alpha S_alpha x S_alpha."""
    lat = two_site(Spin(two_s))
    h = build_heisenberg(lat)
    assert np.allclose(h, h.conj().T)
    sx, sy, sz = spin_xyz(Spin(two_s))
    ref = sum(np.kron(op, op) for op in (sx, sy, sz))
    assert np.allclose(h, ref, atol=1e-12)


@pytest.mark.parametrize("n_sites,two_s", [(2, 3), (4, 1), (4, 2)])
def test_heisenberg_conserves_total_sz(n_sites, two_s):
    lat = open_chain(n_sites, Spin(two_s))
    h = build_heisenberg(lat)
    sz = spin_matrices(Spin(two_s))[0]
    sz_tot = sum(site_operator(sz, n, n_sites) for n in range(n_sites))
    assert np.max(np.abs(comm(h, sz_tot))) < 1e-12


def test_heisenberg_dense_cap():
    with pytest.raises(ResourceError):
        build_heisenberg(two_site(Spin(3)), dim_cap=8)


def test_exact_propagate_unitary_and_reversible():
    lat = two_site(Spin(2))
    h = build_heisenberg(lat)
    rng = np.random.default_rng(7)
    psi = rng.normal(size=lat.dim) + 1j * rng.normal(size=lat.dim)
    psi /= np.linalg.norm(psi)
    out = exact_propagate(h, psi, 1.3)
    assert abs(np.linalg.norm(out) - 1.0) < 1e-12
    back = exact_propagate(h, out, -1.3)
    assert np.allclose(back, psi, atol=1e-10)


def test_exact_propagate_eigenvector_phase():
    h = build_heisenberg(two_site(Spin(1)))
    evals, evecs = np.linalg.eigh(h)
    v = evecs[:, 0]
    out = exact_propagate(h, v, 0.7)
    assert np.allclose(out, np.exp(-1j * evals[0] * 0.7) * v, atol=1e-12)


def test_exact_propagate_rejects_unnormalized():
    h = build_heisenberg(two_site(Spin(1)))
    with pytest.raises(ValidationError):
        exact_propagate(h, np.ones(9), 0.1)


def test_propagator_matches_single_shot():
    h = build_heisenberg(two_site(Spin(2)))
    prop = Propagator(h)
    assert prop.dim == 9
    psi = np.zeros(9, dtype=complex)
    psi[4] = 1.0
    for t in (0.3, 1.0, 2.5):
        assert np.allclose(prop(psi, t), exact_propagate(h, psi, t), atol=1e-12)


def test_pt2_correlator_form():
    """-1 at t=0; curvature grows linearly with S."""
    assert pt2_correlator(Spin(2), 0.0) == -1.0
    for two_s in (1, 2, 3, 4, 5):
        s = two_s / 2.0
        assert abs(pt2_correlator(Spin(two_s), 0.2) - (-1.0 + s * 0.04)) < 1e-12
