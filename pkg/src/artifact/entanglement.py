"""Entanglement witnesses, pure-state measures and biseparable decompositions.

Network witnesses (``lambda`` and ``triangle``) act on qubit pairs in *edge
order*: Lambda uses ``A1 B A2 C`` and the triangle ``A1 B1 A2 C1 B2 C2``.

Biseparable decompositions of isotropic networks are written in the basis
``{phi+, 1~}`` of each edge, where ``1~ = I/d^2``. A *block* is a set of edges
``B`` with weight ``v``, standing for ``v phi+^{⊗B} + (1-v) 1~^{⊗B}``; a
component is a convex mixture of products of blocks. Across a bipartition a
block is harmless when none of its edges cross the cut, and it is an
isotropic state of local dimension ``d^|B|`` when all of them do.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import states as S
from . import tensor as T

# =============================================================== witnesses


@dataclass(frozen=True)
class WitnessSplit:
    """One bipartition of a decomposable witness: ``op = P + Q^{Γ}``."""

    P: np.ndarray
    Q: np.ndarray
    transposed: tuple[int, ...]  # subsystems transposed by Γ_M


@dataclass(frozen=True)
class Witness:
    name: str
    op: np.ndarray
    dims: tuple[int, ...]
    party_grouping: tuple[tuple[int, ...], ...]
    decomposition: dict = field(default_factory=dict)
    free_set: str = "biseparable"  # or "fully_separable"


def _witness_dense(rho, w: Witness) -> np.ndarray:
    if isinstance(rho, S.NetworkState):
        rho = rho.edge_order()
    elif isinstance(rho, S.MultiState):
        rho = rho.rho
    rho = np.asarray(rho)
    if rho.ndim == 1:
        rho = T.proj(rho)
    if rho.shape != w.op.shape:
        raise ValueError(f"state of shape {rho.shape} does not match witness {w.op.shape}")
    return rho


def witness_value(w: Witness, rho) -> float:
    """tr(W rho). Network states are read in edge order."""
    val = np.trace(w.op @ _witness_dense(rho, w))
    if abs(val.imag) > 1e-9:
        raise ValueError("witness expectation has an imaginary part")
    return float(val.real)


def _lambda_witness() -> Witness:
    k = T.kron
    I, F, Pi = np.eye(4), S.phi_plus(2), S.flip(2)
    op = k(I, I) + 2 * k(I, F) + 2 * k(F, I) - 8 * k(F, F)
    Z = np.zeros_like(op)
    dec = {
        "A": WitnessSplit(2 * k(F, I - F) + 2 * k(I - F, F),
                          0.5 * (k(I - Pi, I + Pi) + k(I + Pi, I - Pi)), (0, 2)),
        "B": WitnessSplit(Z, k(I + Pi, I - F) + 3 * k(I - Pi, F), (1,)),
        "C": WitnessSplit(Z, k(I - F, I + Pi) + 3 * k(F, I - Pi), (3,)),
    }
    return Witness("lambda", op, (2,) * 4, ((0, 2), (1,), (3,)), dec)


def _triangle_witness() -> Witness:
    k = T.kron
    I, F, Pi = np.eye(4), S.phi_plus(2), S.flip(2)
    op = (k(I, I, F) + k(I, F, I) + k(F, I, I)
          - k(I, F, F) - k(F, F, I) - k(F, I, F) - 3 * k(F, F, F))
    swap_pair = 0.5 * (k(I - Pi, I + Pi) + k(I + Pi, I - Pi))
    dims = (2,) * 6
    # Q_B is written on A1 B1 B2 C2 A2 C1; move it back to the standard order
    order = [0, 1, 4, 5, 2, 3]
    q_b = T.permute_subsystems(k(swap_pair, F), dims, list(np.argsort(order)))
    dec = {
        "A": WitnessSplit(k(I, F, I - F) + k(F, I - F, I - F), k(swap_pair, F), (0, 2)),
        "B": WitnessSplit(k(I, I - F, F) + k(F, I - F, I - F), q_b, (1, 4)),
        "C": WitnessSplit(k(I - F, F, I) + k(I - F, I - F, F), k(F, swap_pair), (3, 5)),
    }
    return Witness("triangle", op, dims, ((0, 2), (1, 4), (3, 5)), dec)


def _ghz_robustness_witness() -> Witness:
    op = (2 / 3) * np.eye(8) - (8 / 3) * T.proj(S.ghz(3, 2)) + (4 / 3) * T.proj(S.ghz_minus())
    return Witness("ghz_robustness", op, (2, 2, 2), ((0,), (1,), (2,)), free_set="fully_separable")


def _w_robustness_witness() -> Witness:
    e = lambda i: T.proj(T.ket(i, 8))  # noqa: E731
    op = e(0) - 3 * T.proj(S.w_state()) + e(1) + e(2) + e(4) + 3 * T.proj(S.w_bar())
    return Witness("w_robustness", op, (2, 2, 2), ((0,), (1,), (2,)), free_set="fully_separable")


def _star_ghz_witness(n: int, d: int) -> Witness:
    op = np.eye(d ** n) / d - T.proj(S.ghz(n, d))
    return Witness(f"star_ghz({n},{d})", op, (d,) * n, tuple((i,) for i in range(n)))


def named_witness(kind: str, n: int = 3, d: int = 2) -> Witness:
    if kind == "lambda":
        return _lambda_witness()
    if kind == "triangle":
        return _triangle_witness()
    if kind == "ghz_robustness":
        return _ghz_robustness_witness()
    if kind == "w_robustness":
        return _w_robustness_witness()
    if kind == "star_ghz":
        return _star_ghz_witness(n, d)
    raise ValueError(f"unknown witness {kind!r}")


def w_witness_shifted() -> np.ndarray:
    """A - I/2, the traceless-correlation part of the W witness."""
    return _w_robustness_witness().op - np.eye(8) / 2


@dataclass(frozen=True)
class SplitCheck:
    bipartition: str
    reconstruction_error: float
    min_eig_P: float
    min_eig_Q: float

    def ok(self, tol: float = T.TOL) -> bool:
        return self.reconstruction_error < tol and self.min_eig_P > -tol and self.min_eig_Q > -tol


def verify_witness_decomposition(w: Witness) -> list[SplitCheck]:
    out = []
    for name, sp in w.decomposition.items():
        rec = sp.P + T.partial_transpose(sp.Q, w.dims, sp.transposed)
        out.append(SplitCheck(name, float(np.abs(rec - w.op).max()), T.min_eig(sp.P), T.min_eig(sp.Q)))
    return out


def random_free_state(w: Witness, rng: np.random.Generator) -> np.ndarray:
    """Random pure state from the witness's free set.

    Biseparable: a Haar-random pure state on each side of a random
    nonempty proper party bipartition. Fully separable: a product of
    Haar-random single-party states.
    """
    n = len(w.party_grouping)
    if w.free_set == "fully_separable":
        groups = [[k] for k in range(n)]
    else:
        size = int(rng.integers(1, n))
        side = sorted(rng.choice(n, size=size, replace=False).tolist())
        groups = [side, [k for k in range(n) if k not in side]]
    order, vecs = [], []
    for grp in groups:
        subs = [s for k in grp for s in w.party_grouping[k]]
        order += subs
        vecs.append(T.haar_vector(int(np.prod([w.dims[s] for s in subs])), rng))
    psi = T.kron(*vecs)
    # psi is laid out in ``order``; bring it to the witness's subsystem order
    return T.permute_subsystems(psi, [w.dims[s] for s in order], list(np.argsort(order)))


def soundness_scan(w: Witness, samples: int, seed: int = 0) -> tuple[float, float]:
    """Minimum and maximum of tr(W sigma) over random free pure states."""
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(samples):
        psi = random_free_state(w, rng)
        vals.append(float(np.real(psi.conj() @ w.op @ psi)))
    return min(vals), max(vals)


def symmetric_product(alpha: float, beta: float) -> np.ndarray:
    a = np.array([np.cos(alpha), np.exp(1j * beta) * np.sin(alpha)])
    return T.kron(a, a, a)


def w_robustness_states() -> tuple[np.ndarray, np.ndarray]:
    """The two symmetric mixtures eta, tau of |000>, |111>, W and W-bar that bound R_FS(W).

    They satisfy tau = (W + 2 eta) / 3.
    """
    e0, e7 = T.proj(T.ket(0, 8)), T.proj(T.ket(7, 8))
    W, Wb = T.proj(S.w_state()), T.proj(S.w_bar())
    eta = 9 / 16 * e0 + 3 / 16 * e7 + 1 / 16 * W + 3 / 16 * Wb
    tau = 3 / 8 * e0 + 1 / 8 * e7 + 3 / 8 * W + 1 / 8 * Wb
    return eta, tau


def w_robustness_certificate() -> dict:
    """PPT and permutation-symmetry checks for eta and tau.

    A permutation-symmetric three-qubit PPT state is fully separable, so the
    two checks certify the robustness upper bound 2 for the W state.
    """
    eta, tau = w_robustness_states()
    mix_err = float(np.abs(tau - (T.proj(S.w_state()) + 2 * eta) / 3).max())
    out = {"mixture_error": mix_err}
    perms = [(1, 0, 2), (0, 2, 1), (2, 1, 0)]
    for name, rho in (("eta", eta), ("tau", tau)):
        sym = max(float(np.abs(T.permute_subsystems(rho, [2, 2, 2], pm) - rho).max()) for pm in perms)
        ppt = min(T.min_eig(T.partial_transpose(rho, [2, 2, 2], [k])) for k in range(3))
        out[name] = {"symmetry_error": sym, "min_ppt_eig": ppt, "is_state": T.is_state(rho)}
    out["ok"] = (mix_err < T.TOL and all(out[n]["symmetry_error"] < T.TOL and out[n]["min_ppt_eig"] > -T.TOL
                                         and out[n]["is_state"] for n in ("eta", "tau")))
    return out


# ================================================================ measures


def _party_subsystems(party_dims: Sequence[int]) -> list[int]:
    return [int(d) for d in party_dims]


def geometric_measure_bs(psi: np.ndarray, party_dims: Sequence[int]) -> float:
    """1 - max over party bipartitions of the largest squared Schmidt coefficient."""
    dims = _party_subsystems(party_dims)
    n = len(dims)
    if n < 2:
        raise ValueError("need at least two parties")
    best = 0.0
    # each bipartition once: subsets that contain party 0
    for r in range(0, n - 1):
        for rest in itertools.combinations(range(1, n), r):
            side = (0,) + rest
            sd = T.schmidt(psi, dims, side)
            best = max(best, float(sd.coefficients[0]))
    return 1.0 - best


def robustness_pure_bipartite(psi: np.ndarray, dims: Sequence[int] | None = None) -> float:
    """(sum_i sqrt(lambda_i))^2 - 1 for a bipartite pure state."""
    psi = np.asarray(psi).reshape(-1)
    if dims is None:
        d = int(round(np.sqrt(psi.shape[0])))
        dims = (d, d)
    if len(dims) != 2:
        raise ValueError("robustness formula needs a bipartite state")
    lam = T.schmidt(psi, dims, [0]).coefficients
    return float(np.sqrt(lam).sum() ** 2 - 1)


def bsp_transform_feasible(g_source: float, r_target: float, tol: float = T.TOL) -> bool:
    """Necessary and sufficient condition r <= g/(1-g) for the BSP transformation."""
    if not 0 <= g_source < 1:
        raise ValueError("g_source must lie in [0,1)")
    return r_target <= g_source / (1 - g_source) + tol


# ============================================================== thresholds


def _lambda_bisep(d: int = 2) -> float:
    return ((1 + math.sqrt(2)) * d - 1) / (d * d + 2 * d - 1)


THRESHOLDS = {
    "lambda_bisep": lambda d=2: _lambda_bisep(d),
    "lambda_gme_uniform": lambda d=2: 1 / math.sqrt(3),
    "triangle_bisep": lambda d=2: 3 / (3 + 2 * d),
    "triangle_gme": lambda d=2: (2 * math.sqrt(5) - 3) / 3,
    "complete_graph_gme": lambda n: 1 - 4 / (3 * n),
    "bisep_fidelity_bound": lambda n: (n - 1) ** 2 / 2,
    "entanglement": lambda d=2: 1 / (d + 1),
    "steering": lambda d=2: (3 * d - 1) * (d - 1) ** (d - 1) / ((d + 1) * d ** d),
    "tree_min_edges": lambda p, d=2: math.ceil(d * p / (1 - p) - 1e-12),
    "polygon_min_edges": lambda p, d=2: polygon_min_edges(p, d),
}


def thresholds(query: str, **params) -> float:
    if query not in THRESHOLDS:
        raise ValueError(f"unknown threshold {query!r}; choose from {sorted(THRESHOLDS)}")
    return THRESHOLDS[query](**params)


def threshold_table(name: str = "lambdatriangle") -> dict[str, float]:
    if name != "lambdatriangle":
        raise ValueError(f"unknown table {name!r}")
    return {
        "lambda_bisep": thresholds("lambda_bisep", d=2),
        "lambda_gme": thresholds("lambda_gme_uniform", d=2),
        "triangle_bisep": thresholds("triangle_bisep", d=2),
        "triangle_gme": thresholds("triangle_gme", d=2),
    }


def complete_graph_fidelity_sum(n: int, p: float, d: int = 2) -> float:
    """Sum over all pairs of the fidelity of the shared edge state with phi+."""
    f = T.fidelity(S.isotropic(d, p), S.phi_plus(d))
    return n * (n - 1) / 2 * f


def complete_graph_gme_verdict(n: int, p: float) -> bool:
    """True when the pair-fidelity sum beats every biseparable state."""
    return complete_graph_fidelity_sum(n, p) > thresholds("bisep_fidelity_bound", n=n)


# =================================================== GHZ-symmetric geometry


def w_fs(x: float, y: float) -> float:
    return -x - math.sqrt(3) / 6 * y + 1 / 8


def w_bs(x: float, y: float) -> float:
    return -x - math.sqrt(3) / 2 * y + 3 / 8


def fsp_not_bsp_demo() -> dict:
    """Evaluate the measure-and-prepare map on its two extremal inputs.

    The map sends eta to tr(W eta) rho(5/16, sqrt3/4) + tr((1-W) eta)
    rho(-1/8, 0), with W the W-state projector.
    """
    hi = S.ghz_symmetric(S.GhzSymState.from_coords(5 / 16, math.sqrt(3) / 4))
    lo = S.ghz_symmetric(S.GhzSymState.from_coords(-1 / 8, 0.0))
    wproj = T.proj(S.w_state())

    def channel(eta):
        t = float(np.real(np.trace(wproj @ eta)))
        return t, t * hi + (1 - t) * lo

    a = np.array([math.sqrt(2 / 3), math.sqrt(1 / 3)])
    fs_input = T.proj(T.kron(a, a, a))  # product state with the largest W overlap
    bs_input = T.proj((T.ket([0, 0, 1], [2, 2, 2]) + T.ket([0, 1, 0], [2, 2, 2])) / math.sqrt(2))
    out = {}
    for label, eta in (("fs_input", fs_input), ("bs_input", bs_input)):
        t, sigma = channel(eta)
        x, y = S.ghz_sym_coords(sigma)
        out[label] = {"overlap": t, "x": x, "y": y, "W_FS": w_fs(x, y), "W_BS": w_bs(x, y)}
    return out


# ================================================ biseparable decompositions


@dataclass(frozen=True)
class Block:
    edges: tuple[int, ...]
    v: float


@dataclass(frozen=True)
class ProductTerm:
    coef: float
    blocks: tuple[Block, ...]


@dataclass(frozen=True)
class SeparabilityCertificate:
    kind: str  # isotropic_threshold | tensor_factor | explicit_product_mixture
    valid: bool
    detail: tuple = ()


@dataclass(frozen=True)
class BisepTerm:
    label: str
    weight: float
    parts: tuple[ProductTerm, ...]
    side: frozenset[int]
    certificate: SeparabilityCertificate | None = None


@dataclass(frozen=True)
class Infeasible:
    kind: str
    p: float
    d: int
    constraint: str
    values: dict

    def __bool__(self) -> bool:
        return False


@dataclass
class BisepDecomposition:
    kind: str
    p: float
    d: int
    graph: S.NetworkGraph
    terms: list[BisepTerm]

    def weight_sum(self) -> float:
        return float(sum(t.weight for t in self.terms))

    def coefficient_tensor(self) -> np.ndarray:
        K = self.graph.K
        acc = np.zeros((2,) * K)
        for t in self.terms:
            acc += t.weight * component_tensor(t, K)
        return acc

    def reconstruction_error(self) -> float:
        return float(np.abs(self.coefficient_tensor() - target_tensor(self.graph.K, self.p)).max())

    def dense_reconstruction_error(self, max_edges: int = 4) -> float | None:
        """Entrywise error of the rebuilt density operator (small networks only)."""
        if self.graph.K > max_edges:
            return None
        rho = tensor_to_operator(self.coefficient_tensor(), self.d)
        return float(np.abs(rho - S.edge_order_state(self.graph)).max())

    def certified(self) -> bool:
        return all(t.certificate is not None and t.certificate.valid for t in self.terms)

    def verify(self, tol: float = T.TOL) -> dict:
        dense = self.dense_reconstruction_error()
        report = {
            "weights_nonnegative": all(t.weight >= -tol for t in self.terms),
            "weight_sum_error": abs(self.weight_sum() - 1),
            "reconstruction_error": self.reconstruction_error(),
            "dense_reconstruction_error": dense,
            "certified": self.certified(),
            "n_terms": len(self.terms),
        }
        report["ok"] = (
            report["weights_nonnegative"]
            and report["weight_sum_error"] < tol
            and report["reconstruction_error"] < tol
            and (dense is None or dense < tol)
            and report["certified"]
        )
        return report


def block_tensor(block: Block) -> np.ndarray:
    t = np.zeros((2,) * len(block.edges))
    t[(0,) * len(block.edges)] += block.v
    t[(1,) * len(block.edges)] += 1 - block.v
    return t


def product_tensor(term: ProductTerm, K: int) -> np.ndarray:
    acc, order = np.ones(()), []
    for b in term.blocks:
        acc = np.multiply.outer(acc, block_tensor(b))
        order += list(b.edges)
    if sorted(order) != list(range(K)):
        raise ValueError(f"blocks {order} do not partition {K} edges")
    return acc.transpose(np.argsort(order))


def component_tensor(term: BisepTerm, K: int) -> np.ndarray:
    return sum(pt.coef * product_tensor(pt, K) for pt in term.parts)


def target_tensor(K: int, p: float) -> np.ndarray:
    edge = np.array([p, 1 - p])
    acc = np.ones(())
    for _ in range(K):
        acc = np.multiply.outer(acc, edge)
    return acc


def tensor_to_operator(coef: np.ndarray, d: int) -> np.ndarray:
    """Dense edge-order operator from a {phi+, 1~} coefficient tensor."""
    basis = (S.phi_plus(d), S.noise(d))
    K = coef.ndim
    out = np.zeros((d ** (2 * K), d ** (2 * K)), dtype=complex)
    for pattern in itertools.product((0, 1), repeat=K):
        c = coef[pattern]
        if c != 0:
            out += c * T.kron(*[basis[b] for b in pattern])
    return out


def component_operator(term: BisepTerm, K: int, d: int) -> np.ndarray:
    return tensor_to_operator(component_tensor(term, K), d)


def certify(term: BisepTerm, g: S.NetworkGraph, d: int, tol: float = T.TOL) -> SeparabilityCertificate:
    """Check that every block product of the term is separable across ``side``."""
    crossing = set(g.crossing(term.side))
    side = term.side
    if not side or len(side) == g.n_parties:
        return SeparabilityCertificate("explicit_product_mixture", False, ("trivial bipartition",))
    if any(pt.coef < -tol for pt in term.parts):
        return SeparabilityCertificate("explicit_product_mixture", False, ("negative mixture weight",))
    checks, valid = [], True
    for pt in term.parts:
        for b in pt.blocks:
            cross = [e in crossing for e in b.edges]
            if not (-tol <= b.v <= 1 + tol):
                checks.append(("visibility_range", b.edges, b.v, False))
                valid = False
            elif not any(cross):
                checks.append(("tensor_factor", b.edges, b.v, True))
            elif all(cross):
                bound = 1 / (d ** len(b.edges) + 1)
                ok = b.v <= bound + tol
                checks.append(("isotropic_threshold", b.edges, b.v, ok))
                valid &= ok
            else:
                checks.append(("mixed_block", b.edges, b.v, False))
                valid = False
    kinds = {c[0] for c in checks}
    kind = kinds.pop() if len(kinds) == 1 and len(pt.blocks) == 1 else "explicit_product_mixture"
    return SeparabilityCertificate(kind, bool(valid), tuple(checks))


def _finalize(kind, p, d, g, terms, tol) -> BisepDecomposition:
    terms = [BisepTerm(t.label, t.weight, t.parts, frozenset(t.side), certify(t, g, d, tol)) for t in terms]
    return BisepDecomposition(kind, p, d, g, terms)


def _uniform_spec(g: S.NetworkGraph) -> tuple[int, float]:
    specs = [e.state for e in g.edges]
    if not all(isinstance(s, S.IsotropicSpec) for s in specs):
        raise ValueError("decompositions need isotropic edge states")
    d, p = specs[0].d, specs[0].p
    if any(s.d != d or abs(s.p - p) > T.TOL for s in specs):
        raise ValueError("decompositions need the same isotropic state on every edge")
    return d, p


def _single(e: int, v: float) -> Block:
    return Block((e,), v)


def _lambda_decomposition(g, d, p, tol):
    if not (g.n_parties == 3 and g.K == 2):
        raise ValueError("lambda decomposition needs three parties and two edges")
    shared = {g.edges[0].i, g.edges[0].j} & {g.edges[1].i, g.edges[1].j}
    if len(shared) != 1:
        raise ValueError("lambda edges must share exactly one party")
    c = shared.pop()
    leaf = [e.j if e.i == c else e.i for e in g.edges]
    q_low = max(0.0, 1 - (1 - p) ** 2 / (p * p * d * d)) if p > 0 else 0.0
    q_high = min(1.0, (2 - 2 * p) / (p * d)) if p > 0 else 1.0
    values = {"q_lower": q_low, "q_upper": q_high}
    if q_low > q_high + tol:
        return Infeasible("lambda", p, d,
                          "no q with 1-(1-p)^2/(p^2 d^2) <= q <= (2-2p)/(p d)", values)
    q = min(q_low, q_high)
    w0 = (1 - q) * p * p + (1 - p) ** 2
    w1 = q * p * p / 2 + p * (1 - p)
    terms = []
    if w0 > 0:
        v0 = (1 - q) * p * p / w0
        terms.append(BisepTerm("sigma_0", w0, (ProductTerm(1.0, (Block((0, 1), v0),)),), {c}))
    if w1 > 0:
        v1 = (q * p * p / 2) / w1
        terms.append(BisepTerm("sigma_1", w1, (ProductTerm(1.0, (_single(0, 1.0), _single(1, v1))),),
                               {leaf[1]}))
        terms.append(BisepTerm("sigma_2", w1, (ProductTerm(1.0, (_single(0, v1), _single(1, 1.0))),),
                               {leaf[0]}))
    dec = _finalize("lambda", p, d, g, terms, tol)
    return dec


def _triangle_decomposition(g, d, p, tol):
    pairs = sorted(tuple(sorted(pq)) for pq in g.pairs())
    if not (g.n_parties == 3 and pairs == [(0, 1), (0, 2), (1, 2)]):
        raise ValueError("triangle decomposition needs the three edges of a triangle")
    v = 2 * p / (3 - p)
    if v > 1 / (d + 1) + tol:
        return Infeasible("triangle", p, d, "2p/(3-p) <= 1/(d+1)", {"visibility": v, "bound": 1 / (d + 1)})
    D = 3 - 3 * p + p * p
    ca = (3 - p) ** 2 / (4 * D)
    cb = 3 * (1 - p) ** 2 / (4 * D)
    c = p * (p * p - 3 * p + 3) / 3
    terms = []
    edges = list(range(3))
    for idx, k in enumerate(edges):
        # phi+ on edge k, the noisy pair tau on the other two edges, cut at the
        # party not touched by edge k
        others = [e for e in edges if e != k]
        vertex = ({0, 1, 2} - {g.edges[k].i, g.edges[k].j}).pop()
        parts = (
            ProductTerm(ca, (_single(k, 1.0), _single(others[0], v), _single(others[1], v))),
            ProductTerm(cb, (_single(k, 1.0), _single(others[0], 0.0), _single(others[1], 0.0))),
        )
        terms.append(BisepTerm(f"sigma_edge{k}", c, parts, {vertex}))
    noise_parts = (ProductTerm(1.0, tuple(_single(e, 0.0) for e in edges)),)
    terms.append(BisepTerm("noise", (1 - p) ** 3, noise_parts, {0}))
    return _finalize("triangle", p, d, g, terms, tol)


def _tree_decomposition(g, d, p, tol):
    if not g.is_tree():
        raise ValueError("tree decomposition needs a tree")
    K = g.K
    vis = (p / K) / (p / K + 1 - p) if p < 1 else 1.0
    if vis > 1 / (d + 1) + tol:
        return Infeasible("tree", p, d, "K >= d p/(1-p)",
                          {"K": K, "required_K": thresholds("tree_min_edges", p=p, d=d), "visibility": vis})
    cut = {k: g.components(skip=[k])[0] for k in range(K)}
    terms = []
    w = p ** K / K + p ** (K - 1) * (1 - p)
    for k in range(K):
        blocks = tuple(_single(e, vis if e == k else 1.0) for e in range(K))
        terms.append(BisepTerm(f"edge{k}", w, (ProductTerm(1.0, blocks),), cut[k]))
    for e, f in itertools.combinations(range(K), 2):
        blocks = []
        for h in range(K):
            if h in (e, f):
                blocks.append(_single(h, 0.0))
            elif h < f:
                blocks.append(_single(h, 1.0))
            else:
                blocks.append(_single(h, p))
        weight = p ** (f - 1) * (1 - p) ** 2  # phi+ on the f-1 edges below f other than e
        terms.append(BisepTerm(f"noise{e},{f}", weight, (ProductTerm(1.0, tuple(blocks)),), cut[e]))
    return _finalize("tree", p, d, g, terms, tol)


def polygon_fragment_visibilities(K: int, p: float) -> tuple[float, float]:
    """Visibilities of the two-edge blocks in the two polygon fragments."""
    a = p * p / K
    b = p * p / (K - 4) if K > 4 else math.inf
    q = (1 - p) ** 2
    v1 = a / (a + q) if a + q > 0 else 0.0
    v2 = (b / (b + q) if math.isfinite(b) else 1.0) if b + q > 0 else 0.0
    return v1, v2


def polygon_conditions(K: int, p: float, d: int) -> dict:
    v1, v2 = polygon_fragment_visibilities(K, p)
    bound = 1 / (d * d + 1)
    return {"K": K, "fragment1_visibility": v1, "fragment2_visibility": v2, "bound": bound,
            "fragment1": v1 <= bound + T.TOL, "fragment2": K > 4 and v2 <= bound + T.TOL}


def polygon_min_edges(p: float, d: int = 2, k_max: int = 10 ** 7) -> int:
    """Smallest K > 4 for which both fragment blocks are separable."""
    if not 0 <= p < 1:
        raise ValueError("polygon networks are biseparable only for p < 1")
    K = max(5, math.floor(4 + (d * p / (1 - p)) ** 2) - 1)
    while K <= k_max:
        c = polygon_conditions(K, p, d)
        if c["fragment1"] and c["fragment2"]:
            # step back in case the analytic start overshot
            while K > 5:
                prev = polygon_conditions(K - 1, p, d)
                if not (prev["fragment1"] and prev["fragment2"]):
                    break
                K -= 1
            return K
        K += 1
    raise ValueError("no polygon size found below the search limit")


def _polygon_decomposition(g, d, p, tol, max_materialize: int = 12):
    K = g.K
    cyc = [(k, (k + 1) % K) for k in range(K)]
    if not (g.n_parties == K and all({e.i, e.j} == set(c) for e, c in zip(g.edges, cyc))):
        raise ValueError("polygon decomposition needs edge k to join parties k and k+1")
    cond = polygon_conditions(K, p, d)
    if K <= 4:
        return Infeasible("polygon", p, d, "K > 4", cond)
    if not cond["fragment1"]:
        return Infeasible("polygon", p, d, "fragment 1 block separable (p^2 d^2/K <= (1-p)^2)",
                          dict(cond, required_K=polygon_min_edges(p, d)))
    if not cond["fragment2"]:
        return Infeasible("polygon", p, d, "fragment 2 block separable (p^2 d^2/(K-4) <= (1-p)^2)",
                          dict(cond, required_K=polygon_min_edges(p, d)))
    if K > max_materialize:
        return Infeasible("polygon", p, d, f"materialization limited to K <= {max_materialize}",
                          dict(cond, formula_level_only=True))
    v1, v2 = cond["fragment1_visibility"], cond["fragment2_visibility"]
    terms, consumed = [], set()
    nxt = lambda i: (i + 1) % K  # noqa: E731
    for i in range(K):
        # edges i and i+1 meet at party i+1
        blocks = [Block((i, nxt(i)), v1)] + [_single(e, 1.0) for e in range(K) if e not in (i, nxt(i))]
        weight = p ** (K - 2) * (p * p / K + (1 - p) ** 2)
        terms.append(BisepTerm(f"frag1_{i}", weight, (ProductTerm(1.0, tuple(blocks)),), {nxt(i)}))
        consumed.add(frozenset((i, nxt(i))))
    for i in range(K):
        for j in range(K):
            if j in (i, nxt(i), (i - 1) % K, (i - 2) % K):
                continue
            blocks = [_single(i, 0.0), Block((j, nxt(j)), v2)]
            blocks += [_single(e, 1.0) for e in range(K) if e not in (i, j, nxt(j))]
            weight = p ** (K - 3) * (1 - p) * (p * p / (K - 4) + (1 - p) ** 2)
            terms.append(BisepTerm(f"frag2_{i}_{j}", weight, (ProductTerm(1.0, tuple(blocks)),), {nxt(j)}))
            consumed.add(frozenset((i, j, nxt(j))))
    # every other pattern with noise on at least two edges is separable across
    # the arc cut between its first two noisy edges
    for pattern in itertools.product((0, 1), repeat=K):
        noisy = [e for e in range(K) if pattern[e]]
        if len(noisy) < 2 or frozenset(noisy) in consumed:
            continue
        a, b = noisy[0], noisy[1]
        arc = set(range(a + 1, b + 1))
        weight = p ** (K - len(noisy)) * (1 - p) ** len(noisy)
        blocks = tuple(_single(e, 0.0 if pattern[e] else 1.0) for e in range(K))
        terms.append(BisepTerm("pattern" + "".join(map(str, pattern)), weight,
                               (ProductTerm(1.0, blocks),), arc))
    return _finalize("polygon", p, d, g, terms, tol)


def bisep_decomposition(g: S.NetworkGraph, kind: str, tol: float = T.TOL):
    """Explicit biseparable decomposition of an isotropic network state.

    Returns a :class:`BisepDecomposition`, or :class:`Infeasible` naming the
    violated condition.
    """
    d, p = _uniform_spec(g)
    builders = {
        "lambda": _lambda_decomposition,
        "triangle": _triangle_decomposition,
        "tree": _tree_decomposition,
        "polygon": _polygon_decomposition,
    }
    if kind not in builders:
        raise ValueError(f"unknown decomposition {kind!r}")
    return builders[kind](g, d, p, tol)


def dense_ppt_check(dec: BisepDecomposition) -> list[float]:
    """Minimum eigenvalue of each component's partial transpose across its cut.

    An independent numerical check of the block certificates for small
    networks (uses the party-order particle layout).
    """
    g, K, d = dec.graph, dec.graph.K, dec.d
    ns_layout = S.network_state(S.NetworkGraph.uniform(g.n_parties, g.pairs(), d, 1.0))
    out = []
    for t in dec.terms:
        rho_edges = component_operator(t, K, d)
        rho = T.permute_subsystems(rho_edges, [d] * (2 * K), ns_layout.perm)
        subs = [s for v in sorted(t.side) for s in ns_layout.party_particles[v]]
        out.append(T.min_eig(T.partial_transpose(rho, ns_layout.dims, subs)))
    return out
