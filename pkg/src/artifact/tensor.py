"""Dense linear algebra on tensor products of finite-dimensional spaces.

Operators are plain ``numpy`` arrays. Subsystem layouts are described by a
list of local dimensions, and subsystem ``k`` of an operator on
``H_0 ⊗ H_1 ⊗ ...`` is the ``k``-th factor in that list.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-9


def _dims(dims: Sequence[int], side: int | None = None) -> list[int]:
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise ValueError(f"local dimensions must be positive, got {dims}")
    if side is not None and int(np.prod(dims)) != side:
        raise ValueError(f"dims {dims} do not match operator side {side}")
    return dims


def _subset(idx: Iterable[int], n: int) -> list[int]:
    idx = sorted({int(i) for i in idx})
    for i in idx:
        if not 0 <= i < n:
            raise IndexError(f"subsystem {i} out of range for {n} subsystems")
    return idx


def kron(*ops) -> np.ndarray:
    """Kronecker product of any number of operators or vectors."""
    if not ops:
        return np.ones((1, 1))
    return reduce(np.kron, ops)


def ket(index: Sequence[int] | int, dims: Sequence[int] | int) -> np.ndarray:
    """Computational basis vector |i_0 i_1 ...> as a 1d complex array."""
    if np.isscalar(dims):
        dims = [int(dims)]
        index = [int(index)]
    dims = _dims(dims)
    flat = int(np.ravel_multi_index(tuple(index), dims))
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[flat] = 1.0
    return v


def proj(v: np.ndarray) -> np.ndarray:
    """Rank-one operator |v><v| (no normalization)."""
    v = np.asarray(v).reshape(-1)
    return np.outer(v, v.conj())


def is_hermitian(a: np.ndarray, tol: float = TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, atol=tol, rtol=0)


def allclose(a, b, tol: float = TOL) -> bool:
    """Entrywise comparison with an explicit absolute tolerance."""
    return bool(np.allclose(a, b, atol=tol, rtol=0))


def permute_subsystems(rho: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of an operator or a state vector.

    The output's subsystem ``k`` is the input's subsystem ``perm[k]``.
    """
    rho = np.asarray(rho)
    n = len(dims)
    perm = list(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n} subsystems")
    if rho.ndim == 1:
        dims = _dims(dims, rho.shape[0])
        return rho.reshape(dims).transpose(perm).reshape(-1)
    dims = _dims(dims, rho.shape[0])
    t = rho.reshape(dims + dims)
    t = t.transpose(perm + [n + p for p in perm])
    side = rho.shape[0]
    return t.reshape(side, side)


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Kept subsystems stay in their original relative order.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("partial_trace expects a square operator")
    dims = _dims(dims, rho.shape[0])
    n = len(dims)
    keep = _subset(keep, n)
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    # contract row and column index of each traced factor, highest first so
    # the remaining axis numbers stay valid
    for i in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + m)
    side = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(side, side)


def partial_transpose(rho: np.ndarray, dims: Sequence[int], subset: Iterable[int]) -> np.ndarray:
    """Transpose the row/column indices of the subsystems in ``subset``."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("partial_transpose expects a square operator")
    dims = _dims(dims, rho.shape[0])
    n = len(dims)
    subset = _subset(subset, n)
    axes = list(range(2 * n))
    for i in subset:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return rho.reshape(dims + dims).transpose(axes).reshape(rho.shape)


def hermitian_spectrum(a: np.ndarray, tol: float = TOL) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian operator."""
    a = np.asarray(a)
    if not is_hermitian(a, tol=max(tol, 1e-12) * max(1.0, float(np.abs(a).max(initial=0.0)))):
        raise ValueError("operator is not Hermitian within tolerance")
    return np.linalg.eigvalsh((a + a.conj().T) / 2)


def min_eig(a: np.ndarray) -> float:
    return float(hermitian_spectrum(a)[0])


def is_psd(a: np.ndarray, tol: float = TOL) -> bool:
    return min_eig(a) >= -tol


def is_state(rho: np.ndarray, tol: float = TOL) -> bool:
    rho = np.asarray(rho)
    return (
        is_hermitian(rho, tol)
        and abs(np.trace(rho) - 1) <= tol
        and min_eig(rho) >= -tol
    )


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Schmidt form ``psi = sum_i sqrt(coefficients[i]) |l_i>|r_i>``.

    ``coefficients`` are the squared singular values, non-increasing, and
    ``left_basis`` / ``right_basis`` hold the vectors as columns.
    """

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        s = np.sqrt(self.coefficients)
        return np.einsum("i,ai,bi->ab", s, self.left_basis, self.right_basis).reshape(-1)


def schmidt(psi: np.ndarray, dims: Sequence[int], bipartition: Iterable[int],
            tol: float = TOL) -> SchmidtDecomposition:
    """Schmidt decomposition of a pure state across ``bipartition | rest``.

    The reconstructed vector is in the subsystem order ``bipartition + rest``
    (identical to the input order when ``bipartition`` is a prefix).
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    dims = _dims(dims, psi.shape[0])
    if abs(np.linalg.norm(psi) - 1) > tol:
        raise ValueError("state vector is not normalized")
    n = len(dims)
    left = _subset(bipartition, n)
    right = [i for i in range(n) if i not in left]
    dl = int(np.prod([dims[i] for i in left])) if left else 1
    mat = psi.reshape(dims).transpose(left + right).reshape(dl, -1)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    keep = s > tol
    if not keep.any():
        keep[0] = True
    return SchmidtDecomposition(s[keep] ** 2, u[:, keep], vh[keep].T)


def sqrtm_psd(a: np.ndarray) -> np.ndarray:
    """Square root of a PSD operator; eigenvalues at rounding level are set to 0."""
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    floor = 1e3 * np.finfo(float).eps * max(1.0, float(np.abs(w).max(initial=0.0))) * len(w)
    w = np.where(w > floor, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray, tol: float = TOL) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    Evaluated as the squared trace norm of ``sqrt(rho) sqrt(sigma)``, which
    avoids a second matrix square root.
    """
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("states have different shapes")
    for m in (rho, sigma):
        if not is_state(m, tol=max(tol, 1e-8)):
            raise ValueError("fidelity needs two density operators")
    nuc = np.linalg.svd(sqrtm_psd(rho) @ sqrtm_psd(sigma), compute_uv=False).sum()
    return float(min(nuc ** 2, 1.0))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    return haar_unitary(d, rng)[:, 0]
