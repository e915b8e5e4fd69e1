import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import states as S
from artifact import tensor as T


def test_named_states_normalized():
    for v in (S.max_entangled(3), S.ghz(4, 3), S.ghz_minus(), S.w_state(), S.w_bar()):
        assert abs(np.linalg.norm(v) - 1) < 1e-12


def test_w_state_amplitudes():
    w = S.w_state()
    for idx in (1, 2, 4):
        assert abs(w[idx] - 1 / np.sqrt(3)) < 1e-15
    assert abs(np.vdot(w, S.w_bar())) < 1e-15


def test_flip_swaps_factors():
    d = 3
    rng = np.random.default_rng(0)
    a, b = T.haar_vector(d, rng), T.haar_vector(d, rng)
    assert T.allclose(S.flip(d) @ np.kron(a, b), np.kron(b, a), 1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_isotropic_fidelity_and_threshold(d):
    for p in np.linspace(0, 1, 11):
        rho = S.isotropic(d, p)
        assert T.is_state(rho)
        # overlap with phi+ is p + (1-p)/d^2
        assert abs(np.real(np.trace(rho @ S.phi_plus(d))) - (p + (1 - p) / d ** 2)) < 1e-12
        # PPT across the cut coincides with separability for isotropic states
        ppt = T.min_eig(T.partial_transpose(rho, [d, d], [0])) >= -1e-12
        assert ppt == (not S.IsotropicSpec(d, p).entangled)


def test_isotropic_spec_validation():
    with pytest.raises(ValueError):
        S.IsotropicSpec(2, 1.5)
    with pytest.raises(ValueError):
        S.IsotropicSpec(1, 0.5)


def test_ghz_symmetric_coordinates_roundtrip():
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = rng.dirichlet(np.ones(3))
        s = S.GhzSymState(*w)
        x, y = S.ghz_sym_coords(S.ghz_symmetric(s))
        back = S.GhzSymState.from_coords(x, y)
        assert np.allclose([back.lambda_plus, back.lambda_minus, back.lam], w, atol=1e-12)


def test_ghz_symmetric_separability_matches_ppt_on_pure_ghz_line():
    # along lambda_minus = 0 the state is PPT iff lambda_plus <= lambda/3
    for lp in np.linspace(0, 1, 21):
        s = S.GhzSymState(lp, 0.0, 1 - lp)
        rho = S.ghz_symmetric(s)
        ppt = T.min_eig(T.partial_transpose(rho, [2, 2, 2], [0])) >= -1e-12
        assert ppt == s.fully_separable


def test_multistate_json_roundtrip():
    rho = S.isotropic(2, 0.3) + 1j * 0
    ms = S.MultiState(rho, (2, 2))
    back = S.MultiState.from_json(ms.to_json())
    assert T.allclose(back.rho, rho) and back.dims == (2, 2)


def test_network_layout_lambda():
    ns = S.network_state(S.lambda_graph(2, 0.3, 0.7))
    assert ns.party_particles == ((0, 1), (2,), (3,))
    assert ns.perm == (0, 2, 1, 3)
    assert T.allclose(ns.edge_order(), np.kron(S.isotropic(2, 0.3), S.isotropic(2, 0.7)), 1e-14)
    assert ns.party_dims == (4, 2, 2)


def test_network_state_reduced_edges():
    g = S.triangle_graph(2, 0.4)
    ns = S.network_state(g)
    for k in range(3):
        pa, pb = ns.particle_map[k]
        red = T.partial_trace(ns.rho, ns.dims, [pa, pb])
        # partial_trace keeps ascending order; the i-side particle has the smaller index here
        assert T.allclose(red, S.isotropic(2, 0.4), 1e-12)


def test_graph_topology_helpers():
    g = S.path_graph(4, 2, 0.5)
    assert g.is_tree() and g.is_connected()
    assert not S.polygon_graph(5, 2, 0.5).is_tree()
    assert sorted(map(sorted, g.components(skip=[1]))) == [[0, 1], [2, 3, 4]]
    assert g.crossing({0, 1}) == [1]
    assert len(S.complete_graph(5, 2, 0.5).edges) == 10


def test_star_filter_shape():
    a = S.star_filter(3, 2)
    assert a.shape == (2, 4)
    assert a[0, 0] == 1 and a[1, 3] == 1 and a.sum() == 2


def test_filter_rejects_wrong_columns():
    ns = S.network_state(S.star_network(3, 2, 0.5))
    with pytest.raises(ValueError):
        S.apply_local_filter(ns, [np.eye(3), None, None])


@settings(max_examples=20, deadline=None)
@given(p1=st.floats(0, 1), p2=st.floats(0, 1))
def test_teleportation_matches_product_visibility(p1, p2):
    out = S.simulate_teleportation(S.isotropic(2, p1), S.isotropic(2, p2))
    assert T.allclose(out, S.isotropic(2, p1 * p2), 1e-12)
    assert S.teleport_through(S.IsotropicSpec(2, p1), S.IsotropicSpec(2, p2)).p == pytest.approx(p1 * p2)


def test_perfect_teleportation_of_pure_state():
    rng = np.random.default_rng(2)
    psi = T.haar_vector(4, rng)
    out = S.simulate_teleportation(T.proj(psi), S.isotropic(2, 1.0))
    assert T.allclose(out, T.proj(psi), 1e-12)
