import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import boxes as B
from artifact import states as S
from artifact import tensor as T


# ------------------------------------------------------------------ BoxN


def test_pr_box_is_nonsignalling_and_valid():
    for conv in ("xor", "correlated"):
        pr = B.pr_box_table(conv)
        assert pr.is_valid() and pr.is_nonsignalling()
    with pytest.raises(ValueError):
        B.pr_box_table("other")


def test_signalling_box_detected():
    # Bob outputs Alice's input: maximal signalling
    t = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product(range(2), repeat=2):
        t[0, x, x, y] = 1
    box = B.BoxN(t)
    assert box.is_valid() and not box.is_nonsignalling()
    assert abs(box.signalling_error() - 1) < 1e-12


def test_box_json_roundtrip():
    box = B.random_local_box(np.random.default_rng(0), (2, 3), (3, 2))
    back = B.BoxN.from_json(box.to_json())
    assert np.allclose(back.table, box.table, atol=0, rtol=0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_random_local_boxes_are_nonsignalling(seed):
    box = B.random_local_box(np.random.default_rng(seed), (2, 3), (2, 3))
    assert box.is_valid() and box.is_nonsignalling()


# ------------------------------------------------------------- Born rule


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_born_box_matches_direct_trace(seed):
    rng = np.random.default_rng(seed)
    psi = T.haar_vector(6, rng)
    rho = T.proj(psi)

    def random_povm(d):
        u = T.haar_unitary(d, rng)
        return [T.proj(u[:, k]) for k in range(d)]

    povms = [[random_povm(2) for _ in range(2)], [random_povm(3) for _ in range(3)]]
    box = B.born_box(rho, [[0], [1]], povms, [2, 3])
    for a, b, x, y in itertools.product(range(2), range(3), range(2), range(3)):
        direct = np.real(np.trace(np.kron(povms[0][x][a], povms[1][y][b]) @ rho))
        assert abs(box.table[a, b, x, y] - direct) < 1e-12
    assert box.is_nonsignalling()


def test_born_box_party_grouping_permutes():
    rng = np.random.default_rng(1)
    u, v = T.haar_vector(2, rng), T.haar_vector(3, rng)
    rho = T.proj(np.kron(u, v))
    z2 = [[T.proj(T.ket(0, 2)), T.proj(T.ket(1, 2))]]
    z3 = [[T.proj(T.ket(k, 3)) for k in range(3)]]
    # party 0 holds the qutrit, party 1 the qubit
    box = B.born_box(rho, [[1], [0]], [z3, z2], [2, 3])
    assert abs(box.table[2, 1, 0, 0] - abs(v[2]) ** 2 * abs(u[1]) ** 2) < 1e-12


def test_born_box_rejects_non_povm():
    with pytest.raises(ValueError):
        B.born_box(np.eye(4) / 4, [[0], [1]],
                   [[[np.eye(2), np.eye(2)]], [[np.eye(2), np.zeros((2, 2))]]], [2, 2])


# ----------------------------------------------------------------- Hardy


LAM_GRID = [0.1, 0.25, 0.4, 0.6, 0.85]
ALPHA_GRID = [0.2, 0.5, math.pi / 4, 1.0, 1.4]


def hardy_p0000_by_vectors(l0, l1, alpha):
    """P(00|00) from the two normalized rank-one effects applied to the Schmidt vector."""
    c, s = math.cos(alpha), math.sin(alpha)
    e = np.array([c, s])
    f = np.array([l1 ** 1.5 * s, -(l0 ** 1.5) * c])
    f = f / np.linalg.norm(f)
    psi = np.array([math.sqrt(l0), 0, 0, math.sqrt(l1)])
    return abs(np.kron(e, f) @ psi) ** 2


@pytest.mark.parametrize("l0", LAM_GRID)
@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_hardy_zeros_and_positive_event(l0, alpha):
    box = B.hardy_box([l0, 1 - l0], alpha)
    assert max(abs(z) for z in B.hardy_zeros(box)) < 1e-10
    p = box.prob((0, 0), (0, 0))
    assert p > 0
    assert abs(p - B.hardy_p0000_closed(l0, 1 - l0, alpha)) < 1e-9
    assert abs(p - hardy_p0000_by_vectors(l0, 1 - l0, alpha)) < 1e-9
    # the unnormalized numerator is the textbook amplitude
    num = (math.sin(alpha) * math.cos(alpha) * math.sqrt(l0 * (1 - l0)) * (1 - 2 * l0)) ** 2
    assert p <= num / min((1 - l0) ** 3, l0 ** 3) + 1e-12


def test_hardy_qutrit_embedding():
    lam = [0.5, 0.3, 0.2]
    box = B.hardy_box(lam)
    assert max(abs(z) for z in B.hardy_zeros(box)) < 1e-10
    # the block state on the first two levels has weight 0.8
    closed = 0.8 * B.hardy_p0000_closed(0.5 / 0.8, 0.3 / 0.8, math.pi / 4)
    assert abs(box.prob((0, 0), (0, 0)) - closed) < 1e-9
    assert box.is_nonsignalling()


def test_hardy_rejects_degenerate_inputs():
    with pytest.raises(ValueError):
        B.hardy_povms(0.5, 0.5, 0.3)
    with pytest.raises(ValueError):
        B.hardy_povms(1.0, 0.0, 0.3)
    with pytest.raises(ValueError):
        B.hardy_povms(0.3, 0.7, 0.0)


def test_hardy_with_phase():
    box = B.hardy_box([0.3, 0.7], 0.6, delta=0.9)
    assert max(abs(z) for z in B.hardy_zeros(box)) < 1e-10


# ------------------------------------------------------ Bell functionals


def test_chsh_equiv_local_max_by_hand():
    f = B.chsh_equiv()
    vals = []
    for a0, a1, b0, b1 in itertools.product(range(2), repeat=4):
        box = B.deterministic_box([(a0, a1), (b0, b1)], (2, 2))
        vals.append(f.evaluate(box))
    assert len(vals) == 16 and max(vals) == 0.0
    res = B.deterministic_max(f, "fully_local")
    assert res.value == 0.0
    assert f.evaluate(res.strategy.box((2, 2), (2, 2))) == 0.0


def test_chsh_equiv_on_pr_box():
    # PR box: P(00|00)=1/2, P(01|01)=P(10|10)=0, P(00|11)=0
    assert abs(B.chsh_equiv().evaluate(B.pr_box_table()) - 0.5) < 1e-15


def lambda_i3_by_hand():
    """Three-party lifted functional written term by term.

    Party 0 holds two bits (edge to party 1 first), parties 1 and 2 one bit.
    """
    c = np.zeros((4, 2, 2, 4, 2, 2))

    def P(a11, a12, a2, a3, x11, x12, x2, x3, w):
        c[2 * a11 + a12, a2, a3, 2 * x11 + x12, x2, x3] += w

    for s in range(2):
        # first lifted seed, summed over party 0's second bit
        P(0, s, 0, 0, 0, 0, 0, 0, 1)
        P(0, s, 1, 0, 0, 0, 1, 0, -1)
        P(1, s, 0, 0, 1, 0, 0, 0, -1)
        P(0, s, 0, 0, 1, 0, 1, 0, -1)
        # second lifted seed, summed over party 0's first bit
        P(s, 0, 0, 0, 0, 0, 0, 0, 1)
        P(s, 0, 0, 1, 0, 0, 0, 1, -1)
        P(s, 1, 0, 0, 0, 1, 0, 0, -1)
        P(s, 0, 0, 0, 0, 1, 0, 1, -1)
    P(0, 0, 0, 0, 0, 0, 0, 0, 1)
    for s in range(2):
        P(0, s, 0, 0, 0, 0, 0, 0, -1)
        P(s, 0, 0, 0, 0, 0, 0, 0, -1)
    return c


def test_lambda_lift_matches_hand_written_functional():
    f = B.lift_and_combine(S.lambda_graph(2, 1.0))
    assert np.array_equal(f.coeffs, lambda_i3_by_hand())
    assert f.declared_bound == 0.0


def test_lifted_edge_functionals_are_local_bounded():
    g = S.lambda_graph(2, 1.0)
    for k in B.spanning_tree(g):
        fk = B.lifted_edge_functional(g, k)
        assert B.deterministic_max(fk, "fully_local").value <= 1e-12


def test_lambda_i3_fully_local_max():
    f = B.lift_and_combine(S.lambda_graph(2, 1.0))
    assert B.deterministic_max(f, "fully_local").value <= 1e-12


def test_lambda_i3_on_product_deterministic_bilocal_strategies():
    # bilocal bound over every bipartition-product deterministic strategy
    f = B.lift_and_combine(S.lambda_graph(2, 1.0))
    res = B.deterministic_max(f, "bilocal_all_bipartitions")
    assert res.value <= 1e-12, res.per_bipartition


def test_lambda_i3_nonsignalling_bilocal_max():
    f = B.lift_and_combine(S.lambda_graph(2, 1.0))
    res = B.deterministic_max(f, "ns_bilocal")
    assert res.value <= 1e-9


def test_fully_local_below_bilocal_random_functionals():
    rng = np.random.default_rng(5)
    for _ in range(10):
        f = B.BellFunctional(rng.standard_normal((2, 2, 2, 2, 2, 2)))
        loc = B.deterministic_max(f, "fully_local").value
        bil = B.deterministic_max(f, "bilocal_all_bipartitions").value
        assert loc <= bil + 1e-12


def test_deterministic_max_brute_force_small():
    rng = np.random.default_rng(6)
    f = B.BellFunctional(rng.standard_normal((2, 3, 3, 2)))
    best = max(f.evaluate(B.deterministic_box(v, (2, 3))) for v in B.local_vertices((2, 3), (3, 2)))
    assert abs(B.deterministic_max(f, "fully_local").value - best) < 1e-12


def test_hardy_network_violates_lambda_i3():
    g = S.lambda_graph(2, 1.0)
    f = B.lift_and_combine(g)
    h1 = B.hardy_box([0.3, 0.7], 0.8)
    h2 = B.hardy_box([0.6, 0.4], 0.5)
    box = B.network_box(g, [h1, h2])
    assert box.is_nonsignalling()
    val = f.evaluate(box)
    assert abs(val - h1.prob((0, 0), (0, 0)) * h2.prob((0, 0), (0, 0))) < 1e-12
    assert val > 0


def test_product_box_marginals():
    rng = np.random.default_rng(7)
    p, q = B.random_local_box(rng), B.random_local_box(rng, (3, 2), (2, 2))
    pq = B.product_box(p, q, ([0, 1], [0, 2]))
    # party 0 output index is 3*a_p + a_q
    for a, a2, b, c, x, x2, y, z in itertools.product(range(2), range(3), range(2), range(2),
                                                      range(2), range(2), range(2), range(2)):
        lhs = pq.table[3 * a + a2, b, c, 2 * x + x2, y, z]
        assert abs(lhs - p.table[a, b, x, y] * q.table[a2, c, x2, z]) < 1e-15


# ------------------------------------------------------------------ EPR2


@pytest.mark.parametrize("v", [0.5, 0.6, 0.75, 0.9, 1.0])
def test_epr2_noisy_pr_box(v):
    box = B.uniform_box((2, 2), (2, 2)).mix(B.pr_box_table(), v)
    res = B.epr2_local_weight(box)
    # CHSH gives p_L <= 2(1-v); the uniform part of the PR/anti-PR split attains it
    assert abs(res.local_weight - min(1.0, 2 * (1 - v))) < 1e-9
    assert np.abs(res.reconstruct().table - box.table).max() < 1e-9
    assert res.ns_remainder.is_nonsignalling(1e-8)


def test_epr2_local_box_is_fully_local():
    box = B.random_local_box(np.random.default_rng(8))
    assert abs(B.epr2_local_weight(box).local_weight - 1) < 1e-9


def test_epr2_hardy_box_is_partly_nonlocal():
    box = B.hardy_box([0.3, 0.7])
    res = B.epr2_local_weight(box)
    assert 0 < res.local_weight < 1 - box.prob((0, 0), (0, 0)) + 1e-9
    assert np.abs(res.reconstruct().table - box.table).max() < 1e-9
