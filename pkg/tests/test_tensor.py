import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import tensor as T


def random_state(dims, rng, rank=None):
    n = int(np.prod(dims))
    rank = rank or n
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def loop_partial_trace(rho, dims, keep):
    """Entry-by-entry partial trace, used as an oracle."""
    n = len(dims)
    keep = sorted(keep)
    gone = [i for i in range(n) if i not in keep]
    kd = [dims[i] for i in keep]
    out = np.zeros((int(np.prod(kd)),) * 2, dtype=complex)
    t = rho.reshape(list(dims) * 2)
    for r in itertools.product(*[range(d) for d in kd]):
        for c in itertools.product(*[range(d) for d in kd]):
            s = 0
            for g in itertools.product(*[range(dims[i]) for i in gone]):
                row, col = [0] * n, [0] * n
                for k, i in enumerate(keep):
                    row[i], col[i] = r[k], c[k]
                for k, i in enumerate(gone):
                    row[i] = col[i] = g[k]
                s += t[tuple(row + col)]
            out[np.ravel_multi_index(r, kd), np.ravel_multi_index(c, kd)] = s
    return out


dims_st = st.lists(st.integers(1, 3), min_size=1, max_size=3)


@settings(max_examples=40, deadline=None)
@given(dims=dims_st, seed=st.integers(0, 10 ** 6), data=st.data())
def test_partial_trace_matches_loop_oracle(dims, seed, data):
    rng = np.random.default_rng(seed)
    rho = random_state(dims, rng)
    keep = data.draw(st.sets(st.integers(0, len(dims) - 1)))
    assert T.allclose(T.partial_trace(rho, dims, keep), loop_partial_trace(rho, dims, keep), 1e-12)


def test_partial_trace_of_product():
    rng = np.random.default_rng(1)
    a, b, c = random_state([2], rng), random_state([3], rng), random_state([2], rng)
    rho = T.kron(a, b, c)
    assert T.allclose(T.partial_trace(rho, [2, 3, 2], [1]), b, 1e-12)
    assert T.allclose(T.partial_trace(rho, [2, 3, 2], [0, 2]), np.kron(a, c), 1e-12)
    assert T.partial_trace(rho, [2, 3, 2], []).shape == (1, 1)


def test_partial_trace_rejects_bad_dims():
    with pytest.raises(ValueError):
        T.partial_trace(np.eye(4), [3, 2], [0])
    with pytest.raises(IndexError):
        T.partial_trace(np.eye(4), [2, 2], [2])


@settings(max_examples=40, deadline=None)
@given(dims=dims_st, seed=st.integers(0, 10 ** 6), data=st.data())
def test_partial_transpose_entrywise(dims, seed, data):
    rng = np.random.default_rng(seed)
    rho = random_state(dims, rng)
    sub = data.draw(st.sets(st.integers(0, len(dims) - 1)))
    pt = T.partial_transpose(rho, dims, sub)
    t, tp = rho.reshape(list(dims) * 2), pt.reshape(list(dims) * 2)
    n = len(dims)
    for idx in itertools.product(*[range(d) for d in list(dims) * 2]):
        swapped = list(idx)
        for i in sub:
            swapped[i], swapped[n + i] = swapped[n + i], swapped[i]
        assert abs(tp[idx] - t[tuple(swapped)]) < 1e-14


def test_partial_transpose_full_is_transpose_and_involution():
    rng = np.random.default_rng(2)
    rho = random_state([2, 3], rng)
    assert T.allclose(T.partial_transpose(rho, [2, 3], [0, 1]), rho.T, 1e-14)
    twice = T.partial_transpose(T.partial_transpose(rho, [2, 3], [0]), [2, 3], [0])
    assert T.allclose(twice, rho, 1e-14)


def test_ppt_of_bell_state_is_negative():
    phi = (T.ket([0, 0], [2, 2]) + T.ket([1, 1], [2, 2])) / np.sqrt(2)
    # partial transpose of a Bell state is the swap / 2, spectrum {1/2 x3, -1/2}
    assert abs(T.min_eig(T.partial_transpose(T.proj(phi), [2, 2], [0])) + 0.5) < 1e-12


def test_permute_subsystems_on_product_and_inverse():
    rng = np.random.default_rng(3)
    ops = [random_state([d], rng) for d in (2, 3, 4)]
    rho = T.kron(*ops)
    perm = [2, 0, 1]
    out = T.permute_subsystems(rho, [2, 3, 4], perm)
    assert T.allclose(out, T.kron(ops[2], ops[0], ops[1]), 1e-14)
    back = T.permute_subsystems(out, [4, 2, 3], list(np.argsort(perm)))
    assert T.allclose(back, rho, 1e-14)
    v = [rng.standard_normal(d) for d in (2, 3, 4)]
    assert T.allclose(T.permute_subsystems(T.kron(*v), [2, 3, 4], perm), T.kron(v[2], v[0], v[1]), 1e-14)


def test_permute_rejects_non_permutation():
    with pytest.raises(ValueError):
        T.permute_subsystems(np.eye(4), [2, 2], [0, 0])


@settings(max_examples=30, deadline=None)
@given(da=st.integers(1, 4), db=st.integers(1, 4), seed=st.integers(0, 10 ** 6))
def test_schmidt_reconstructs_and_sums_to_one(da, db, seed):
    rng = np.random.default_rng(seed)
    psi = T.haar_vector(da * db, rng)
    sd = T.schmidt(psi, [da, db], [0])
    assert abs(sd.coefficients.sum() - 1) < 1e-12
    assert np.all(np.diff(sd.coefficients) <= 1e-14)
    assert T.allclose(sd.reconstruct(), psi, 1e-12)
    # squared Schmidt coefficients are the spectrum of the reduced state
    red = T.partial_trace(T.proj(psi), [da, db], [0])
    eigs = np.sort(np.linalg.eigvalsh(red))[::-1][: len(sd.coefficients)]
    assert np.allclose(eigs, sd.coefficients, atol=1e-12)


def test_schmidt_non_prefix_bipartition():
    rng = np.random.default_rng(4)
    a, b, c = T.haar_vector(2, rng), T.haar_vector(3, rng), T.haar_vector(2, rng)
    sd = T.schmidt(T.kron(a, b, c), [2, 3, 2], [1])
    assert len(sd.coefficients) == 1
    assert abs(sd.coefficients[0] - 1) < 1e-12


def test_schmidt_rejects_unnormalized():
    with pytest.raises(ValueError):
        T.schmidt(np.ones(4), [2, 2], [0])


def test_fidelity_pure_states_is_overlap_squared():
    rng = np.random.default_rng(5)
    for _ in range(20):
        u, v = T.haar_vector(4, rng), T.haar_vector(4, rng)
        assert abs(T.fidelity(T.proj(u), T.proj(v)) - abs(np.vdot(u, v)) ** 2) < 1e-9


def test_fidelity_commuting_states_is_classical():
    p = np.array([0.5, 0.3, 0.2, 0.0])
    q = np.array([0.1, 0.1, 0.4, 0.4])
    expected = np.sqrt(p * q).sum() ** 2
    assert abs(T.fidelity(np.diag(p), np.diag(q)) - expected) < 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_fidelity_symmetric_and_bounded(seed):
    rng = np.random.default_rng(seed)
    r, s = random_state([3], rng), random_state([3], rng, rank=2)
    f = T.fidelity(r, s)
    assert -1e-12 <= f <= 1
    assert abs(f - T.fidelity(s, r)) < 1e-9
    assert abs(T.fidelity(r, r) - 1) < 1e-9


def test_fidelity_rejects_non_states():
    with pytest.raises(ValueError):
        T.fidelity(np.eye(2), np.eye(2) / 2)


def test_hermitian_guards():
    assert T.is_state(np.eye(3) / 3)
    assert not T.is_state(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        T.hermitian_spectrum(np.array([[0, 1], [0, 0]]))


def test_haar_unitary_is_unitary():
    u = T.haar_unitary(5, np.random.default_rng(6))
    assert T.allclose(u.conj().T @ u, np.eye(5), 1e-12)


def test_ket_and_kron_shapes():
    assert T.ket([1, 2], [2, 3])[5] == 1
    assert T.kron().shape == (1, 1)
    assert T.allclose(T.kron(np.eye(2), np.eye(3)), np.eye(6))
