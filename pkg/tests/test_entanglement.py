import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import entanglement as E
from artifact import states as S
from artifact import tensor as T

P_GRID = np.linspace(0, 1, 11)


def fid(p, d=2):
    # overlap of isotropic(d, p) with phi+
    return p + (1 - p) / d ** 2


# ------------------------------------------------------------- witnesses


@pytest.mark.parametrize("p1", P_GRID)
def test_lambda_witness_on_isotropic_pairs(p1):
    w = E.named_witness("lambda")
    for p2 in P_GRID:
        val = E.witness_value(w, S.network_state(S.lambda_graph(2, p1, p2)))
        # the operator is linear in each phi+ projector, so it only sees the two overlaps
        f1, f2 = fid(p1), fid(p2)
        oracle = 1 + 2 * f2 + 2 * f1 - 8 * f1 * f2
        assert abs(val - oracle) < 1e-9
        assert abs(val - 1.5 * (1 - 3 * p1 * p2)) < 1e-9


def test_triangle_witness_on_isotropic_triangle():
    w = E.named_witness("triangle")
    for p in P_GRID:
        val = E.witness_value(w, S.network_state(S.triangle_graph(2, p)))
        f = fid(p)
        oracle = 3 * f - 3 * f * f - 3 * f ** 3
        assert abs(val - oracle) < 1e-9
        assert abs(val - 3 / 64 * (11 + 15 * p - 63 * p ** 2 - 27 * p ** 3)) < 1e-9


def test_threshold_constants_match_witness_roots():
    # lambda witness vanishes at p1 p2 = 1/3, uniform p = 1/sqrt(3)
    p = E.thresholds("lambda_gme_uniform")
    assert abs(1.5 * (1 - 3 * p * p)) < 1e-12
    p = E.thresholds("triangle_gme")
    assert abs(11 + 15 * p - 63 * p ** 2 - 27 * p ** 3) < 1e-9


def test_threshold_table_decimals():
    tab = E.threshold_table()
    # three-decimal values of the two-qubit lambda / triangle table
    assert tab["lambda_bisep"] == pytest.approx(0.547, abs=5e-4)
    assert tab["lambda_gme"] == pytest.approx(0.577, abs=5e-4)
    assert tab["triangle_bisep"] == pytest.approx(0.429, abs=5e-4)
    assert tab["triangle_gme"] == pytest.approx(0.491, abs=5e-4)
    assert E.thresholds("lambda_bisep", d=2) == pytest.approx((1 + 2 * math.sqrt(2)) / 7, abs=1e-15)


def test_unknown_threshold_rejected():
    with pytest.raises(ValueError):
        E.thresholds("nope")


@pytest.mark.parametrize("kind", ["lambda", "triangle"])
def test_witness_decompositions_reconstruct(kind):
    w = E.named_witness(kind)
    checks = E.verify_witness_decomposition(w)
    assert len(checks) == 3
    for c in checks:
        assert c.reconstruction_error < 1e-9
        assert c.min_eig_P > -1e-9 and c.min_eig_Q > -1e-9


def _random_bisep_product(w, rng, side):
    """Product of Haar states on the two sides of a party bipartition, built by hand."""
    n = len(w.party_grouping)
    groups = [sorted(side), [k for k in range(n) if k not in side]]
    psi = np.ones(1)
    order = []
    for grp in groups:
        subs = [s for k in grp for s in w.party_grouping[k]]
        order += subs
        psi = np.kron(psi, T.haar_vector(2 ** len(subs), rng))
    # reorder qubits explicitly with a reshape/transpose
    t = psi.reshape([2] * len(order)).transpose(np.argsort(order))
    return t.reshape(-1)


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from(["lambda", "triangle"]), seed=st.integers(0, 10 ** 6), which=st.integers(0, 2))
def test_gme_witnesses_nonnegative_on_biseparable_products(kind, seed, which):
    w = E.named_witness(kind)
    rng = np.random.default_rng(seed)
    psi = _random_bisep_product(w, rng, {which})
    assert np.real(psi.conj() @ w.op @ psi) >= -1e-9


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from(["ghz_robustness", "w_robustness"]), seed=st.integers(0, 10 ** 6))
def test_fs_witnesses_nonnegative_on_products(kind, seed):
    w = E.named_witness(kind)
    rng = np.random.default_rng(seed)
    psi = T.kron(*[T.haar_vector(2, rng) for _ in range(3)])
    assert np.real(psi.conj() @ w.op @ psi) >= -1e-9


def test_soundness_scan_is_nonnegative():
    for kind in ("lambda", "triangle", "ghz_robustness", "w_robustness"):
        lo, hi = E.soundness_scan(E.named_witness(kind), 100, seed=3)
        assert lo >= -1e-9 and hi >= lo


def test_witness_value_rejects_wrong_shape():
    with pytest.raises(ValueError):
        E.witness_value(E.named_witness("lambda"), np.eye(8) / 8)


def test_robustness_anchor_values():
    assert abs(E.witness_value(E.named_witness("ghz_robustness"), S.ghz(3, 2)) + 2) < 1e-9
    assert abs(E.witness_value(E.named_witness("w_robustness"), S.w_state()) + 2) < 1e-9


def test_ghz_mixture_lands_on_robustness_line():
    mix = T.proj(S.ghz(3, 2)) / 3 + 2 / 3 * S.ghz_symmetric(S.GhzSymState(0, 0.25, 0.75))
    target = S.ghz_symmetric(S.GhzSymState(1 / 3, 1 / 6, 1 / 2))
    assert np.abs(mix - target).max() < 1e-9
    for s in (S.GhzSymState(0, 0.25, 0.75), S.GhzSymState(1 / 3, 1 / 6, 1 / 2)):
        assert abs(abs(s.lambda_plus - s.lambda_minus) - s.lam / 3) < 1e-15


def test_shifted_w_witness_on_symmetric_products():
    A = E.w_witness_shifted()
    for alpha in np.linspace(0, math.pi, 13):
        for beta in (0.0, 1.1, 2.5):
            psi = E.symmetric_product(alpha, beta)
            val = np.real(psi.conj() @ A @ psi)
            # direct expansion in cos/sin of alpha gives half of cos(6 alpha)
            assert abs(abs(val) - 0.5 * abs(math.cos(6 * alpha))) < 1e-12


def test_fsp_not_bsp_demo():
    out = E.fsp_not_bsp_demo()
    assert abs(out["fs_input"]["overlap"] - 4 / 9) < 1e-12
    assert abs(out["bs_input"]["overlap"] - 2 / 3) < 1e-12
    assert abs(out["fs_input"]["W_FS"]) < 1e-12
    assert abs(out["bs_input"]["W_BS"] + 1 / 24) < 1e-12


# -------------------------------------------------------------- measures


def test_geometric_measure_examples():
    assert abs(E.geometric_measure_bs(S.ghz(3, 2), [2, 2, 2]) - 0.5) < 1e-12
    assert abs(E.geometric_measure_bs(S.w_state(), [2, 2, 2]) - 1 / 3) < 1e-12
    rng = np.random.default_rng(0)
    prod = np.kron(T.haar_vector(4, rng), T.haar_vector(2, rng))
    assert abs(E.geometric_measure_bs(prod, [2, 2, 2])) < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_robustness_of_max_entangled(d):
    assert abs(E.robustness_pure_bipartite(S.max_entangled(d)) - (d - 1)) < 1e-12


def test_bsp_transform_condition():
    assert E.bsp_transform_feasible(0.5, 1.0)
    assert not E.bsp_transform_feasible(0.5, 1.01)
    with pytest.raises(ValueError):
        E.bsp_transform_feasible(1.0, 0.1)


# --------------------------------------------------------- star and K_n


@pytest.mark.parametrize("d", [2, 3])
def test_star_filter_witness(d):
    w = E.named_witness("star_ghz", 3, d)
    for p in P_GRID:
        ms, norm = S.apply_local_filter(S.network_state(S.star_network(3, d, p)),
                                        [S.star_filter(3, d), None, None])
        val = E.witness_value(w, ms.rho)
        expected = (d - 1 - p * (d * d - 1)) / d ** 2
        assert abs(val - expected) < 1e-9
        assert (val < -1e-12) == (p > 1 / (d + 1) + 1e-12)
        assert norm > 0


@pytest.mark.parametrize("n", range(3, 9))
def test_complete_graph_verdict_flip(n):
    pc = E.thresholds("complete_graph_gme", n=n)
    # fidelity sum n(n-1)/2 (1+3p)/4 equals (n-1)^2/2 exactly at pc
    assert abs(n * (n - 1) / 2 * (1 + 3 * pc) / 4 - (n - 1) ** 2 / 2) < 1e-12
    assert not E.complete_graph_gme_verdict(n, pc - 1e-9)
    assert E.complete_graph_gme_verdict(n, pc + 1e-9)


# ------------------------------------------------ biseparable decompositions


def test_lambda_decomposition_at_threshold():
    p = (1 + 2 * math.sqrt(2)) / 7
    dec = E.bisep_decomposition(S.lambda_graph(2, p), "lambda")
    rep = dec.verify()
    assert rep["ok"], rep
    assert rep["dense_reconstruction_error"] < 1e-9
    assert min(E.dense_ppt_check(dec)) > -1e-9
    above = E.bisep_decomposition(S.lambda_graph(2, 1.01 * p), "lambda")
    assert not above and "q" in above.constraint


def test_triangle_decomposition_at_threshold():
    dec = E.bisep_decomposition(S.triangle_graph(2, 3 / 7), "triangle")
    assert dec.verify()["ok"]
    assert min(E.dense_ppt_check(dec)) > -1e-9
    above = E.bisep_decomposition(S.triangle_graph(2, 1.01 * 3 / 7), "triangle")
    assert not above
    assert above.values["visibility"] > above.values["bound"]


@settings(max_examples=15, deadline=None)
@given(p=st.floats(0.01, 0.42))
def test_triangle_decomposition_below_threshold(p):
    dec = E.bisep_decomposition(S.triangle_graph(2, p), "triangle")
    assert dec and dec.verify()["ok"]


def test_tree_decomposition_K18():
    dec = E.bisep_decomposition(S.path_graph(18, 2, 0.9), "tree")
    rep = dec.verify()
    assert rep["ok"] and rep["n_terms"] == 18 + 18 * 17 // 2
    above = E.bisep_decomposition(S.path_graph(18, 2, 0.909), "tree")
    assert not above and above.values["required_K"] == 20


def test_small_tree_dense_check():
    dec = E.bisep_decomposition(S.path_graph(3, 2, 0.5), "tree")
    assert dec.verify()["ok"]
    assert min(E.dense_ppt_check(dec)) > -1e-9


def test_polygon_min_edges_and_decomposition():
    K = E.polygon_min_edges(0.5, 2)
    assert K == 8
    dec = E.bisep_decomposition(S.polygon_graph(K, 2, 0.5), "polygon")
    assert dec.verify()["ok"]
    short = E.bisep_decomposition(S.polygon_graph(K - 1, 2, 0.5), "polygon")
    assert not short and short.values["required_K"] == K


def test_decomposition_rejects_wrong_graph():
    with pytest.raises(ValueError):
        E.bisep_decomposition(S.triangle_graph(2, 0.3), "lambda")
    with pytest.raises(ValueError):
        E.bisep_decomposition(S.lambda_graph(2, 0.3, 0.4), "lambda")


def test_w_robustness_upper_bound_states():
    eta, tau = E.w_robustness_states()
    cert = E.w_robustness_certificate()
    assert cert["ok"]
    for rho in (eta, tau):
        # partial transpose on the first qubit by index swapping
        t = rho.reshape([2] * 6).transpose(3, 1, 2, 0, 4, 5).reshape(8, 8)
        assert np.linalg.eigvalsh(t).min() > -1e-12
    # the W witness is nonnegative on the separable mixer and -2 on W
    A = E.named_witness("w_robustness").op
    assert np.real(np.trace(A @ eta)) >= -1e-12
    assert abs(np.real(np.trace(A @ (T.proj(S.w_state()) + 2 * eta) / 3) - np.trace(A @ tau))) < 1e-12
