"""Boxes (conditional distributions), Bell functionals and their bounds.

A box on ``n`` parties is stored as an array of shape
``(o_1, ..., o_n, i_1, ..., i_n)`` holding ``P(a_1 ... a_n | x_1 ... x_n)``.
When a party holds several particles, its inputs and outputs are integers
whose binary digits refer to the individual particles, first particle most
significant.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from . import states as S
from . import tensor as T

STRATEGY_GUARD = 10 ** 8


# =================================================================== boxes


@dataclass(frozen=True)
class BoxN:
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim % 2:
            raise ValueError("box table needs one output and one input axis per party")
        object.__setattr__(self, "table", t)

    @property
    def n_parties(self) -> int:
        return self.table.ndim // 2

    @property
    def outputs(self) -> tuple[int, ...]:
        return self.table.shape[: self.n_parties]

    @property
    def inputs(self) -> tuple[int, ...]:
        return self.table.shape[self.n_parties:]

    def prob(self, a: Sequence[int], x: Sequence[int]) -> float:
        return float(self.table[tuple(a) + tuple(x)])

    def normalization_error(self) -> float:
        sums = self.table.sum(axis=tuple(range(self.n_parties)))
        return float(np.abs(sums - 1).max())

    def is_valid(self, tol: float = T.TOL) -> bool:
        return bool(self.table.min() >= -1e-12 and self.normalization_error() <= tol)

    def signalling_error(self) -> float:
        """Largest dependence of a marginal on the input of a traced-out party."""
        n, err = self.n_parties, 0.0
        for j in range(n):
            marg = self.table.sum(axis=j)  # drop output j; input j now at axis n-1+j
            ax = n - 1 + j
            ref = np.take(marg, [0], axis=ax)
            err = max(err, float(np.abs(marg - ref).max()))
        return err

    def is_nonsignalling(self, tol: float = T.TOL) -> bool:
        return self.signalling_error() <= tol

    def mix(self, other: "BoxN", w: float) -> "BoxN":
        """(1-w) self + w other."""
        return BoxN((1 - w) * self.table + w * other.table)

    def to_json(self) -> dict:
        n = self.n_parties
        flat = self.table.transpose(list(range(n, 2 * n)) + list(range(n))).reshape(-1)
        return {"parties": n, "outputs": list(self.outputs), "inputs": list(self.inputs),
                "table": [float(v) for v in flat]}

    @classmethod
    def from_json(cls, obj: dict) -> "BoxN":
        n, outs, ins = int(obj["parties"]), list(obj["outputs"]), list(obj["inputs"])
        if len(outs) != n or len(ins) != n:
            raise ValueError("outputs and inputs must list one size per party")
        flat = np.asarray(obj["table"], dtype=float)
        if flat.size != int(np.prod(outs + ins)):
            raise ValueError("table length does not match the declared sizes")
        t = flat.reshape(ins + outs).transpose(list(range(n, 2 * n)) + list(range(n)))
        return cls(t)


def deterministic_box(responses: Sequence[Sequence[int]], outputs: Sequence[int]) -> BoxN:
    """Product box where party k answers ``responses[k][x_k]``."""
    n = len(responses)
    ins = [len(r) for r in responses]
    t = np.zeros(tuple(outputs) + tuple(ins))
    for x in itertools.product(*[range(i) for i in ins]):
        t[tuple(responses[k][x[k]] for k in range(n)) + x] = 1.0
    return BoxN(t)


def uniform_box(outputs: Sequence[int], inputs: Sequence[int]) -> BoxN:
    return BoxN(np.full(tuple(outputs) + tuple(inputs), 1.0 / np.prod(outputs)))


def local_vertices(outputs: Sequence[int], inputs: Sequence[int]) -> list[tuple[tuple[int, ...], ...]]:
    per_party = [list(itertools.product(range(o), repeat=i)) for o, i in zip(outputs, inputs)]
    return list(itertools.product(*per_party))


def random_local_box(rng: np.random.Generator, outputs=(2, 2), inputs=(2, 2)) -> BoxN:
    """Random convex mixture of all deterministic product boxes."""
    verts = local_vertices(outputs, inputs)
    w = rng.dirichlet(np.ones(len(verts)))
    t = sum(wi * deterministic_box(v, outputs).table for wi, v in zip(w, verts))
    return BoxN(t)


def pr_box_table(convention: str = "xor") -> BoxN:
    """PR box. ``xor``: a⊕b = xy. ``correlated``: Bob relabels b ↦ b⊕y."""
    t = np.zeros((2, 2, 2, 2))
    for a, b, x, y in itertools.product(range(2), repeat=4):
        if convention == "xor":
            win = (a ^ b) == (x & y)
        elif convention == "correlated":
            win = (a ^ b ^ y) == (x & y)
        else:
            raise ValueError(f"unknown PR convention {convention!r}")
        t[a, b, x, y] = 0.5 if win else 0.0
    return BoxN(t)


# ============================================================ Born rule


def _check_povm(effects: Sequence[np.ndarray], tol: float = T.TOL) -> None:
    total = sum(effects)
    if not T.allclose(total, np.eye(total.shape[0]), tol):
        raise ValueError("POVM effects do not sum to the identity")
    for e in effects:
        if not T.is_psd(e, tol):
            raise ValueError("POVM effect is not positive semidefinite")


def born_box(rho, party_grouping: Sequence[Sequence[int]], povms, dims: Sequence[int] | None = None) -> BoxN:
    """P(a|x) = tr(⊗_k E^k_{a_k|x_k} rho).

    ``povms[k][x]`` is the list of effects of party ``k`` for input ``x``,
    acting on the tensor product of the party's subsystems (in the listed
    order).
    """
    if isinstance(rho, S.NetworkState):
        rho, dims = rho.rho, rho.dims
    elif isinstance(rho, S.MultiState):
        rho, dims = rho.rho, rho.dims
    rho = np.asarray(rho)
    if rho.ndim == 1:
        rho = T.proj(rho)
    if dims is None:
        dims = [rho.shape[0]]
    dims = list(dims)
    order = [s for grp in party_grouping for s in grp]
    if sorted(order) != list(range(len(dims))):
        raise ValueError("party grouping must use every subsystem once")
    rho = T.permute_subsystems(rho, dims, order)
    pdims = [int(np.prod([dims[s] for s in grp])) for grp in party_grouping]
    n = len(pdims)
    for k in range(n):
        for effects in povms[k]:
            if effects[0].shape != (pdims[k], pdims[k]):
                raise ValueError(f"party {k} effects do not match its dimension {pdims[k]}")
            _check_povm(effects)
    outs = [len(povms[k][0]) for k in range(n)]
    ins = [len(povms[k]) for k in range(n)]
    t = np.zeros(outs + ins)
    tensor = rho.reshape(pdims + pdims)
    for x in itertools.product(*[range(i) for i in ins]):
        for a in itertools.product(*[range(o) for o in outs]):
            # contract party by party: tr((E_1 ⊗ ... ⊗ E_n) rho)
            acc = tensor
            for k in range(n):
                E = povms[k][x[k]][a[k]]
                acc = np.tensordot(E, acc, axes=([1, 0], [0, n - k]))
            t[a + x] = float(np.real(acc))
    return BoxN(t)


def _normalized_proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return T.proj(v / np.linalg.norm(v))


def hardy_povms(lambda0: float, lambda1: float, alpha: float, delta: float = 0.0, d: int = 2):
    """Two-input two-output measurements producing the Hardy zeros.

    Returns ``[alice, bob]`` with ``alice[x] = [E_{0|x}, E_{1|x}]``. The
    rank-one effects are normalized projectors and their partners are the
    complements, so every pair is a projective measurement.
    """
    if lambda0 <= 0 or lambda1 <= 0:
        raise ValueError("Schmidt coefficients must be positive (state would be product)")
    if abs(lambda0 - lambda1) < 1e-12:
        raise ValueError("equal Schmidt coefficients (maximally entangled on this block)")
    if not 0 < alpha < math.pi / 2:
        raise ValueError("alpha must lie strictly between 0 and pi/2")
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    c, s, ph = math.cos(alpha), math.sin(alpha), np.exp(1j * delta)

    def vec(c0, c1):
        # a dual vector c0<0| + c1<1| corresponds to the ket conj(c0)|0> + conj(c1)|1>
        v = np.zeros(d, dtype=complex)
        v[0], v[1] = np.conj(c0), np.conj(c1)
        return v

    e00 = vec(c, ph * s)
    e11 = vec(lambda0 * c, lambda1 * ph * s)
    f00 = vec(lambda1 ** 1.5 * ph * s, -lambda0 ** 1.5 * c)
    f11 = vec(lambda1 ** 0.5 * ph * s, -lambda0 ** 0.5 * c)
    I = np.eye(d)
    upper = np.diag([0.0, 0.0] + [1.0] * (d - 2))  # identity on levels 2..d-1
    E00, E11, F00, F11 = (_normalized_proj(v) for v in (e00, e11, f00, f11))
    E11 = E11 + upper
    alice = [[E00, I - E00], [I - E11, E11]]
    bob = [[F00, I - F00], [I - F11, F11]]
    return [alice, bob]


def hardy_state(lambdas: Sequence[float]) -> np.ndarray:
    lam = np.asarray(lambdas, dtype=float)
    if abs(lam.sum() - 1) > T.TOL or (lam < 0).any():
        raise ValueError("Schmidt coefficients must be a probability vector")
    d = len(lam)
    psi = np.zeros(d * d, dtype=complex)
    for i, li in enumerate(lam):
        psi[i * d + i] = math.sqrt(li)
    return psi


def hardy_box(lambdas: Sequence[float], alpha: float = math.pi / 4, delta: float = 0.0) -> BoxN:
    d = len(lambdas)
    povms = hardy_povms(lambdas[0], lambdas[1], alpha, delta, d)
    return born_box(hardy_state(lambdas), [[0], [1]], povms, [d, d])


HARDY_ZEROS = (((0, 1), (0, 1)), ((1, 0), (1, 0)), ((0, 0), (1, 1)))


def hardy_zeros(box: BoxN) -> tuple[float, float, float]:
    """P(01|01), P(10|10), P(00|11)."""
    return tuple(box.prob(a, x) for a, x in HARDY_ZEROS)


def hardy_p0000_closed(lambda0: float, lambda1: float, alpha: float) -> float:
    """P(00|00) for the normalized Hardy projectors, in closed form."""
    s, c = math.sin(alpha), math.cos(alpha)
    num = (s * c * math.sqrt(lambda0 * lambda1) * (lambda1 - lambda0)) ** 2
    # |e_{0|0}> has unit norm; |f_{0|0}> is normalized by this factor
    return num / (lambda1 ** 3 * s * s + lambda0 ** 3 * c * c)


# ====================================================== Bell functionals


@dataclass(frozen=True)
class BellFunctional:
    coeffs: np.ndarray
    declared_bound: float = 0.0
    bound_kind: str = "local"
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if self.bound_kind not in ("local", "bilocal"):
            raise ValueError("bound_kind must be 'local' or 'bilocal'")

    @property
    def n_parties(self) -> int:
        return self.coeffs.ndim // 2

    @property
    def outputs(self) -> tuple[int, ...]:
        return self.coeffs.shape[: self.n_parties]

    @property
    def inputs(self) -> tuple[int, ...]:
        return self.coeffs.shape[self.n_parties:]

    def evaluate(self, box: BoxN) -> float:
        if box.table.shape != self.coeffs.shape:
            raise ValueError(f"box shape {box.table.shape} does not match functional {self.coeffs.shape}")
        return float((self.coeffs * box.table).sum())

    def terms(self) -> list[tuple[float, tuple[int, ...], tuple[int, ...]]]:
        """Nonzero coefficients as (c, outputs, inputs)."""
        n = self.n_parties
        return [(float(self.coeffs[idx]), idx[:n], idx[n:]) for idx in zip(*np.nonzero(self.coeffs))]


_SEED_TERMS = ((1.0, 0, 0, 0, 0), (-1.0, 0, 1, 0, 1), (-1.0, 1, 0, 1, 0), (-1.0, 0, 0, 1, 1))


def chsh_equiv() -> BellFunctional:
    """P(00|00) - P(01|01) - P(10|10) - P(00|11) <= 0."""
    c = np.zeros((2, 2, 2, 2))
    for w, a, b, x, y in _SEED_TERMS:
        c[a, b, x, y] += w
    return BellFunctional(c, 0.0, "local", "chsh_equiv")


def spanning_tree(g: S.NetworkGraph) -> list[int]:
    """Edge indices of a BFS spanning tree, rooted at party 0."""
    if not g.is_connected():
        raise ValueError("graph is not connected")
    seen, tree, frontier = {0}, [], [0]
    while frontier:
        nxt = []
        for v in frontier:
            for k in g.incident(v):
                e = g.edges[k]
                u = e.j if e.i == v else e.i
                if u not in seen:
                    seen.add(u)
                    tree.append(k)
                    nxt.append(u)
        frontier = nxt
    return sorted(tree)


@dataclass(frozen=True)
class LiftLayout:
    """Tree edges and the digit each party uses for them."""

    tree: tuple[int, ...]
    party_edges: tuple[tuple[int, ...], ...]

    def n_digits(self, party: int) -> int:
        return len(self.party_edges[party])

    def digit(self, party: int, edge: int) -> int:
        return self.party_edges[party].index(edge)


def lift_layout(g: S.NetworkGraph) -> LiftLayout:
    tree = spanning_tree(g)
    pe = tuple(tuple(k for k in tree if party in (g.edges[k].i, g.edges[k].j)) for party in range(g.n_parties))
    return LiftLayout(tuple(tree), pe)


def _digits_to_int(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = 2 * out + int(b)
    return out


def _lifted_entries(g, layout, k, ai, aj, xi, xj):
    """All (outputs, inputs) index tuples of one lifted seed term for edge k."""
    e = g.edges[k]
    n = g.n_parties
    inputs = [0] * n
    per_party_outputs = [[0] for _ in range(n)]
    for party, a_k, x_k in ((e.i, ai, xi), (e.j, aj, xj)):
        m = layout.n_digits(party)
        pos = layout.digit(party, k)
        bits_x = [0] * m
        bits_x[pos] = x_k
        inputs[party] = _digits_to_int(bits_x)
        outs = []
        for rest in itertools.product((0, 1), repeat=m - 1):
            bits = list(rest[:pos]) + [a_k] + list(rest[pos:])
            outs.append(_digits_to_int(bits))
        per_party_outputs[party] = outs
    for a in itertools.product(*per_party_outputs):
        yield tuple(a), tuple(inputs)


def lift_and_combine(g: S.NetworkGraph) -> BellFunctional:
    """Combine per-edge liftings of the CHSH-equivalent seed into one functional.

    The result is ``P(0|0) + sum_k (negative terms of I^k)``, i.e. the sum of
    the lifted ``I^k`` plus ``P(0|0)`` minus each lifted positive term.
    """
    layout = lift_layout(g)
    sizes = [2 ** layout.n_digits(v) for v in range(g.n_parties)]
    c = np.zeros(tuple(sizes) + tuple(sizes))
    for k in layout.tree:
        for w, ai, aj, xi, xj in _SEED_TERMS:
            for a, x in _lifted_entries(g, layout, k, ai, aj, xi, xj):
                c[a + x] += w
        for a, x in _lifted_entries(g, layout, k, 0, 0, 0, 0):
            c[a + x] -= 1.0
    c[(0,) * (2 * g.n_parties)] += 1.0
    return BellFunctional(c, 0.0, "bilocal", "lifted_network")


def lifted_edge_functional(g: S.NetworkGraph, k: int) -> BellFunctional:
    """The lifted seed inequality I^k for tree edge ``k`` alone."""
    layout = lift_layout(g)
    if k not in layout.tree:
        raise ValueError(f"edge {k} is not in the spanning tree")
    sizes = [2 ** layout.n_digits(v) for v in range(g.n_parties)]
    c = np.zeros(tuple(sizes) + tuple(sizes))
    for w, ai, aj, xi, xj in _SEED_TERMS:
        for a, x in _lifted_entries(g, layout, k, ai, aj, xi, xj):
            c[a + x] += w
    return BellFunctional(c, 0.0, "local", f"lifted_edge_{k}")


def product_boxes(boxes: Sequence[BoxN], maps: Sequence[Sequence[int]]) -> BoxN:
    """Product of boxes, merging factor parties into global parties.

    ``maps[f][i]`` is the global party of party ``i`` of factor ``f``. A
    global party's output (input) concatenates the digits of its factor
    parties in factor order, earliest factor most significant.
    """
    if len(boxes) != len(maps):
        raise ValueError("one party map per factor")
    for b, m in zip(boxes, maps):
        if len(m) != b.n_parties or len(set(m)) != len(m):
            raise ValueError("each factor party needs a distinct global party")
    N = max(max(m) for m in maps) + 1
    if sorted({v for m in maps for v in m}) != list(range(N)):
        raise ValueError("global parties must be 0..N-1 without gaps")
    members = [[(f, i) for f, m in enumerate(maps) for i, v in enumerate(m) if v == g] for g in range(N)]
    # build the tensor product with axes (outputs of every factor ..., inputs of every factor ...)
    acc = np.ones(())
    out_axes, in_axes = [], []
    offset = 0
    for f, b in enumerate(boxes):
        n = b.n_parties
        acc = np.multiply.outer(acc, b.table)
        out_axes += [offset + i for i in range(n)]
        in_axes += [offset + n + i for i in range(n)]
        offset += 2 * n
    flat_index = {}
    pos = 0
    for f, b in enumerate(boxes):
        for i in range(b.n_parties):
            flat_index[(f, i)] = pos
            pos += 1
    order = [out_axes[flat_index[fi]] for g in range(N) for fi in members[g]]
    order += [in_axes[flat_index[fi]] for g in range(N) for fi in members[g]]
    acc = acc.transpose(order)
    outs = [int(np.prod([boxes[f].outputs[i] for f, i in members[g]])) for g in range(N)]
    ins = [int(np.prod([boxes[f].inputs[i] for f, i in members[g]])) for g in range(N)]
    return BoxN(acc.reshape(outs + ins))


def product_box(p: BoxN, q: BoxN, party_merge: Sequence[Sequence[int]] | None = None) -> BoxN:
    """Product of two boxes; ``party_merge = (map_p, map_q)``, default no merging."""
    if party_merge is None:
        party_merge = (list(range(p.n_parties)), list(range(p.n_parties, p.n_parties + q.n_parties)))
    return product_boxes([p, q], party_merge)


def network_box(g: S.NetworkGraph, edge_boxes: Sequence[BoxN]) -> BoxN:
    """Assemble per-edge two-party boxes on the spanning tree of ``g``."""
    layout = lift_layout(g)
    maps = [[g.edges[k].i, g.edges[k].j] for k in layout.tree]
    return product_boxes([edge_boxes[k] for k in layout.tree], maps)


# ==================================================== deterministic bounds


@dataclass(frozen=True)
class DeterministicStrategy:
    """Response functions of a partition of the parties into groups.

    ``responses[g][x]`` is the joint output index of group ``groups[g]`` on
    joint input index ``x`` (mixed radix over the group's parties, first
    party most significant). Singleton groups are plain local strategies.
    """

    groups: tuple[tuple[int, ...], ...]
    responses: tuple[tuple[int, ...], ...]

    def box(self, outputs: Sequence[int], inputs: Sequence[int]) -> BoxN:
        n = len(outputs)
        t = np.zeros(tuple(outputs) + tuple(inputs))
        for x in itertools.product(*[range(i) for i in inputs]):
            a = [0] * n
            for grp, resp in zip(self.groups, self.responses):
                gin = np.ravel_multi_index(tuple(x[p] for p in grp), [inputs[p] for p in grp])
                gout = np.unravel_index(resp[int(gin)], [outputs[p] for p in grp])
                for p, o in zip(grp, gout):
                    a[p] = int(o)
            t[tuple(a) + x] = 1.0
        return BoxN(t)


@dataclass(frozen=True)
class BoundResult:
    value: float
    strategy: object
    mode: str
    per_bipartition: dict = field(default_factory=dict)


def _grouped(coeffs: np.ndarray, groups: Sequence[Sequence[int]]) -> tuple[np.ndarray, list[int], list[int]]:
    n = coeffs.ndim // 2
    outs, ins = coeffs.shape[:n], coeffs.shape[n:]
    order = [p for g in groups for p in g] + [n + p for g in groups for p in g]
    c = coeffs.transpose(order)
    go = [int(np.prod([outs[p] for p in g])) for g in groups]
    gi = [int(np.prod([ins[p] for p in g])) for g in groups]
    return c.reshape(go + gi), go, gi


def _max_over_groups(coeffs: np.ndarray, groups: Sequence[Sequence[int]], guard: int = STRATEGY_GUARD):
    """Exact maximum over deterministic strategies of the given groups.

    All groups except the one with the most strategies are enumerated; the
    remaining group then answers each of its inputs optimally.
    """
    C, go, gi = _grouped(coeffs, groups)
    m = len(groups)
    counts = [math.log(o) * i for o, i in zip(go, gi)]
    free = int(np.argmax(counts))
    fixed = [g for g in range(m) if g != free]
    total = math.prod(go[g] ** gi[g] for g in fixed)
    if total > guard:
        raise ValueError(f"{total} strategies exceed the enumeration guard {guard}")
    # move the free group's axes to the front: C[a_f, x_f, a_fixed..., x_fixed...]
    perm = [free, m + free] + [g for g in fixed] + [m + g for g in fixed]
    C = C.transpose(perm)
    spaces = [itertools.product(range(go[g]), repeat=gi[g]) for g in fixed]
    best, best_s = -math.inf, None
    nfix = len(fixed)
    for combo in itertools.product(*[list(sp) for sp in spaces]):
        acc = C
        # contract each fixed group with its response; the axes of fixed group
        # j sit at positions 2 (output) and 2 + (nfix - j) (input) after earlier removals
        for j, resp in enumerate(combo):
            n_left = nfix - j
            a_ax, x_ax = 2, 2 + n_left
            resp = np.asarray(resp)
            acc = np.moveaxis(acc, [a_ax, x_ax], [-2, -1])
            acc = acc[..., resp, np.arange(len(resp))].sum(axis=-1)
        val_table = acc  # shape (o_f, i_f)
        val = float(val_table.max(axis=0).sum())
        if val > best:
            best = val
            best_s = (combo, tuple(int(a) for a in val_table.argmax(axis=0)))
    combo, free_resp = best_s
    responses = [None] * m
    responses[free] = free_resp
    for g, resp in zip(fixed, combo):
        responses[g] = tuple(resp)
    return best, DeterministicStrategy(tuple(tuple(g) for g in groups), tuple(responses))


def bipartitions(n: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Every unordered nonempty bipartition of n parties (party 0 on the left)."""
    out = []
    for r in range(0, n - 1):
        for rest in itertools.combinations(range(1, n), r):
            left = (0,) + rest
            out.append((left, tuple(p for p in range(n) if p not in left)))
    return out


def _ns_constraints(outs: Sequence[int], ins: Sequence[int]):
    """Equality constraints (normalization and nonsignalling) for a group box."""
    shape = tuple(outs) + tuple(ins)
    m = len(outs)
    nvar = int(np.prod(shape))
    idx = np.arange(nvar).reshape(shape)
    rows = []
    for x in itertools.product(*[range(i) for i in ins]):
        r = np.zeros(nvar)
        r[idx[(...,) + x].reshape(-1)] = 1.0
        rows.append(r)
    for j in range(m):
        for x in itertools.product(*[range(i) for i in ins]):
            if x[j] == 0:
                continue
            x0 = list(x)
            x0[j] = 0
            others = [range(outs[p]) for p in range(m) if p != j]
            for a_rest in itertools.product(*others):
                r = np.zeros(nvar)
                for aj in range(outs[j]):
                    a = list(a_rest[:j]) + [aj] + list(a_rest[j:])
                    r[idx[tuple(a) + x]] += 1.0
                    r[idx[tuple(a) + tuple(x0)]] -= 1.0
                rows.append(r)
    A = np.array(rows)
    b = np.zeros(len(rows))
    b[: int(np.prod(ins))] = 1.0
    return A, b


def _ns_bilocal_max(f: BellFunctional, single: int):
    """Max over (deterministic party ``single``) x (nonsignalling box of the rest)."""
    n = f.n_parties
    rest = [p for p in range(n) if p != single]
    C, go, gi = _grouped(f.coeffs, [[single], rest])  # C[a_s, a_r, x_s, x_r]
    outs_r = [f.outputs[p] for p in rest]
    ins_r = [f.inputs[p] for p in rest]
    A, b = _ns_constraints(outs_r, ins_r)
    best, arg = -math.inf, None
    for resp in itertools.product(range(go[0]), repeat=gi[0]):
        eff = sum(C[resp[xs], :, xs, :] for xs in range(gi[0]))  # shape (a_r, x_r)
        c_vec = eff.reshape(outs_r + ins_r).reshape(-1)
        res = linprog(-c_vec, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        if res.status != 0:
            raise RuntimeError(f"nonsignalling LP failed: {res.message}")
        val = -res.fun
        if val > best:
            best, arg = val, (resp, res.x.reshape(outs_r + ins_r))
    return best, arg


def deterministic_max(f: BellFunctional, partition_mode: str = "fully_local",
                      guard: int = STRATEGY_GUARD) -> BoundResult:
    """Maximum of ``f`` over a set of bilocal-type strategies.

    ``fully_local``: one deterministic response per party.
    ``bilocal_all_bipartitions``: for each bipartition, deterministic joint
    responses of both groups (the Svetlichny hull); maximized over bipartitions.
    ``ns_bilocal``: for each bipartition, a deterministic singleton party times
    a nonsignalling box of the remaining group, solved as a linear program
    (every bipartition must have a singleton side, so n <= 3).
    """
    n = f.n_parties
    if partition_mode == "fully_local":
        v, s = _max_over_groups(f.coeffs, [[p] for p in range(n)], guard)
        return BoundResult(v, s, partition_mode)
    if partition_mode == "bilocal_all_bipartitions":
        per, best = {}, None
        for left, right in bipartitions(n):
            v, s = _max_over_groups(f.coeffs, [list(left), list(right)], guard)
            per[f"{left}|{right}"] = v
            if best is None or v > best[0]:
                best = (v, s)
        return BoundResult(best[0], best[1], partition_mode, per)
    if partition_mode == "ns_bilocal":
        if n > 3:
            raise ValueError("ns_bilocal needs a singleton side in every bipartition (n <= 3)")
        per, best = {}, None
        singles = range(n) if n > 2 else [1]
        for k in singles:
            v, arg = _ns_bilocal_max(f, k)
            rest = tuple(p for p in range(n) if p != k)
            per[f"{(k,)}|{rest}"] = v
            if best is None or v > best[0]:
                best = (v, {"party": k, "response": arg[0], "group_box": arg[1]})
        return BoundResult(best[0], best[1], partition_mode, per)
    raise ValueError(f"unknown partition mode {partition_mode!r}")


# ====================================================== EPR2 local weight


@dataclass(frozen=True)
class Epr2Result:
    local_weight: float
    local_part: tuple  # ((responses, weight), ...)
    local_box: BoxN | None
    ns_remainder: BoxN

    def reconstruct(self) -> BoxN:
        if self.local_box is None:
            return self.ns_remainder
        return self.local_box.mix(self.ns_remainder, 1 - self.local_weight)


def epr2_local_weight(p: BoxN, tol: float = T.TOL) -> Epr2Result:
    """Largest local weight p_L in P = p_L P_L + (1 - p_L) P_NS."""
    if p.n_parties != 2:
        raise ValueError("EPR2 decomposition is implemented for two parties")
    if max(p.outputs + p.inputs) > 4:
        raise ValueError("at most 4 inputs and outputs per party")
    verts = local_vertices(p.outputs, p.inputs)
    D = np.array([deterministic_box(v, p.outputs).table.reshape(-1) for v in verts]).T
    target = p.table.reshape(-1)
    res = linprog(-np.ones(len(verts)), A_ub=D, b_ub=target, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"EPR2 linear program failed: {res.message}")
    q = np.where(res.x > tol * 1e-3, res.x, 0.0)
    pl = float(min(1.0, q.sum()))
    local = D @ q
    parts = tuple((verts[i], float(q[i])) for i in np.nonzero(q)[0])
    local_box = BoxN((local / pl).reshape(p.table.shape)) if pl > 0 else None
    if 1 - pl > 1e-12:
        rem = np.clip(target - local, 0.0, None) / (1 - pl)
        remainder = BoxN(rem.reshape(p.table.shape))
    else:
        remainder = p
    return Epr2Result(pl, parts, local_box, remainder)
