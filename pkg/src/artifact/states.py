"""Named states, isotropic and GHZ-symmetric families, and network states.

Network conventions: parties are numbered ``0..n-1`` and edge ``k`` of a
:class:`NetworkGraph` joins ``edges[k].i`` and ``edges[k].j``. Two particle
orders are used:

* *edge order*: the plain tensor product ``edge_0 ⊗ edge_1 ⊗ ...`` with the
  ``i``-side particle of each edge first;
* *party order*: all particles of party 0, then party 1, ... and within a
  party, particles sorted by edge index.

:class:`NetworkState` stores the party-order operator together with the
permutation between the two orders.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import tensor as T

SQRT2 = np.sqrt(2.0)


# ---------------------------------------------------------------- vectors


def max_entangled(d: int = 2) -> np.ndarray:
    """|phi+_d> = sum_i |ii> / sqrt(d)."""
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    v = np.zeros(d * d, dtype=complex)
    v[[i * d + i for i in range(d)]] = 1 / np.sqrt(d)
    return v


def ghz(n: int = 3, d: int = 2) -> np.ndarray:
    """|GHZ(n,d)> = sum_i |i...i> / sqrt(d)."""
    if d < 2 or n < 2:
        raise ValueError("ghz needs n >= 2 and d >= 2")
    v = np.zeros(d ** n, dtype=complex)
    step = sum(d ** k for k in range(n))
    v[[i * step for i in range(d)]] = 1 / np.sqrt(d)
    return v


def ghz_minus() -> np.ndarray:
    """(|000> - |111>)/sqrt(2)."""
    v = np.zeros(8, dtype=complex)
    v[0], v[7] = 1 / SQRT2, -1 / SQRT2
    return v


def w_state() -> np.ndarray:
    """Three-qubit W state with the 1/sqrt(3) normalization."""
    v = np.zeros(8, dtype=complex)
    v[[1, 2, 4]] = 1 / np.sqrt(3)
    return v


def w_bar() -> np.ndarray:
    """Spin-flipped W state (|011> + |101> + |110>)/sqrt(3)."""
    v = np.zeros(8, dtype=complex)
    v[[3, 5, 6]] = 1 / np.sqrt(3)
    return v


def flip(d: int = 2) -> np.ndarray:
    """Swap operator Pi = sum_ij |ij><ji| on C^d ⊗ C^d."""
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    f = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            f[i * d + j, j * d + i] = 1.0
    return f


def named_state(kind: str, n: int = 3, d: int = 2) -> np.ndarray:
    """Look up a named state vector (or the flip operator) by name."""
    table = {
        "max_entangled": lambda: max_entangled(d),
        "ghz": lambda: ghz(n, d),
        "ghz_minus": ghz_minus,
        "w": w_state,
        "w_bar": w_bar,
        "flip": lambda: flip(d),
    }
    if kind not in table:
        raise ValueError(f"unknown state {kind!r}; choose from {sorted(table)}")
    return table[kind]()


def phi_plus(d: int = 2) -> np.ndarray:
    """Projector onto the maximally entangled state."""
    return T.proj(max_entangled(d))


def noise(d: int = 2) -> np.ndarray:
    """Normalized identity I/d^2 on two qudits."""
    return np.eye(d * d) / (d * d)


# ------------------------------------------------------------- isotropic


@dataclass(frozen=True)
class IsotropicSpec:
    d: int
    p: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("isotropic states need d >= 2")
        if not -T.TOL <= self.p <= 1 + T.TOL:
            raise ValueError(f"visibility must lie in [0,1], got {self.p}")

    @property
    def entangled(self) -> bool:
        return self.p > 1 / (self.d + 1)


def isotropic(spec: IsotropicSpec | int, p: float | None = None) -> np.ndarray:
    """p phi+_d + (1-p) I/d^2. Accepts a spec or ``(d, p)``."""
    if not isinstance(spec, IsotropicSpec):
        spec = IsotropicSpec(int(spec), float(p))
    return spec.p * phi_plus(spec.d) + (1 - spec.p) * noise(spec.d)


# --------------------------------------------------------- GHZ-symmetric


@dataclass(frozen=True)
class GhzSymState:
    """lambda_plus GHZ + lambda_minus GHZ_- + (lambda/6) sum_{001..110} |i><i|."""

    lambda_plus: float
    lambda_minus: float
    lam: float

    def __post_init__(self):
        vals = (self.lambda_plus, self.lambda_minus, self.lam)
        if min(vals) < -T.TOL or abs(sum(vals) - 1) > T.TOL:
            raise ValueError(f"weights must be a probability vector, got {vals}")

    @property
    def fully_separable(self) -> bool:
        return abs(self.lambda_plus - self.lambda_minus) <= self.lam / 3 + T.TOL

    @classmethod
    def from_coords(cls, x: float, y: float) -> "GhzSymState":
        s = np.sqrt(3) * y + 0.25
        lp, lm = (s + 2 * x) / 2, (s - 2 * x) / 2
        return cls(lp, lm, 1 - lp - lm)


def ghz_symmetric(s: GhzSymState) -> np.ndarray:
    rho = s.lambda_plus * T.proj(ghz(3, 2)) + s.lambda_minus * T.proj(ghz_minus())
    rho = rho + np.diag([0] + [s.lam / 6] * 6 + [0])
    return rho


def ghz_sym_coords(rho: np.ndarray) -> tuple[float, float]:
    """(x, y) coordinates from the GHZ and GHZ_- overlaps of a 3-qubit state."""
    rho = np.asarray(rho)
    if rho.shape != (8, 8):
        raise ValueError("coordinates are defined for three-qubit states only")
    gp = np.real(ghz(3, 2).conj() @ rho @ ghz(3, 2))
    gm = np.real(ghz_minus().conj() @ rho @ ghz_minus())
    return float((gp - gm) / 2), float((gp + gm - 0.25) / np.sqrt(3))


# ----------------------------------------------------------- multistates


@dataclass(frozen=True)
class MultiState:
    """Density operator together with its subsystem dimensions."""

    rho: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        if int(np.prod(self.dims)) != self.rho.shape[0]:
            raise ValueError("dims do not match the operator")

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "re": np.real(self.rho).ravel().tolist(),
            "im": np.imag(self.rho).ravel().tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MultiState":
        dims = tuple(int(d) for d in obj["dims"])
        side = int(np.prod(dims))
        rho = (np.asarray(obj["re"]) + 1j * np.asarray(obj["im"])).reshape(side, side)
        return cls(rho, dims)


# -------------------------------------------------------------- networks

EdgeState = Union[IsotropicSpec, np.ndarray]


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    state: EdgeState
    dims: tuple[int, int] | None = None  # required for pure vectors with unequal sides

    def local_dims(self) -> tuple[int, int]:
        if isinstance(self.state, IsotropicSpec):
            return (self.state.d, self.state.d)
        if self.dims is not None:
            return tuple(self.dims)
        d = int(round(np.sqrt(np.asarray(self.state).shape[0])))
        return (d, d)

    def density(self) -> np.ndarray:
        if isinstance(self.state, IsotropicSpec):
            return isotropic(self.state)
        v = np.asarray(self.state, dtype=complex).reshape(-1)
        if v.shape[0] != int(np.prod(self.local_dims())):
            raise ValueError("edge vector does not match its dimensions")
        if abs(np.linalg.norm(v) - 1) > T.TOL:
            raise ValueError("edge vector is not normalized")
        return T.proj(v)


@dataclass(frozen=True)
class NetworkGraph:
    n_parties: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        for e in self.edges:
            if e.i == e.j or not (0 <= e.i < self.n_parties and 0 <= e.j < self.n_parties):
                raise ValueError(f"invalid edge ({e.i}, {e.j})")

    @property
    def K(self) -> int:
        return len(self.edges)

    def pairs(self) -> list[tuple[int, int]]:
        return [(e.i, e.j) for e in self.edges]

    def incident(self, party: int) -> list[int]:
        return [k for k, e in enumerate(self.edges) if party in (e.i, e.j)]

    def components(self, skip: Sequence[int] = ()) -> list[set[int]]:
        """Connected components, optionally ignoring the edges in ``skip``."""
        adj = {v: set() for v in range(self.n_parties)}
        for k, e in enumerate(self.edges):
            if k not in skip:
                adj[e.i].add(e.j)
                adj[e.j].add(e.i)
        seen, comps = set(), []
        for v in range(self.n_parties):
            if v in seen:
                continue
            stack, comp = [v], set()
            while stack:
                u = stack.pop()
                if u in comp:
                    continue
                comp.add(u)
                stack.extend(adj[u] - comp)
            seen |= comp
            comps.append(comp)
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def is_tree(self) -> bool:
        return self.is_connected() and self.K == self.n_parties - 1

    def crossing(self, side: set[int] | frozenset[int]) -> list[int]:
        """Edges with exactly one endpoint in ``side``."""
        return [k for k, e in enumerate(self.edges) if (e.i in side) != (e.j in side)]

    @classmethod
    def uniform(cls, n: int, pairs: Sequence[tuple[int, int]], d: int, p: float) -> "NetworkGraph":
        spec = IsotropicSpec(d, p)
        return cls(n, tuple(Edge(i, j, spec) for i, j in pairs))


def lambda_graph(d: int, p1: float, p2: float | None = None) -> NetworkGraph:
    """A-B and A-C edges with isotropic states (A is party 0)."""
    p2 = p1 if p2 is None else p2
    return NetworkGraph(3, (Edge(0, 1, IsotropicSpec(d, p1)), Edge(0, 2, IsotropicSpec(d, p2))))


def triangle_graph(d: int, p: float) -> NetworkGraph:
    return NetworkGraph.uniform(3, [(0, 1), (0, 2), (1, 2)], d, p)


def path_graph(K: int, d: int, p: float) -> NetworkGraph:
    return NetworkGraph.uniform(K + 1, [(k, k + 1) for k in range(K)], d, p)


def star_graph(K: int, d: int, p: float) -> NetworkGraph:
    return NetworkGraph.uniform(K + 1, [(0, k + 1) for k in range(K)], d, p)


def polygon_graph(K: int, d: int, p: float) -> NetworkGraph:
    return NetworkGraph.uniform(K, [(k, (k + 1) % K) for k in range(K)], d, p)


def complete_graph(n: int, d: int, p: float) -> NetworkGraph:
    return NetworkGraph.uniform(n, list(itertools.combinations(range(n), 2)), d, p)


@dataclass(frozen=True)
class NetworkState:
    """Party-ordered network state.

    ``perm`` maps party order to edge order: particle ``k`` of the party
    order is particle ``perm[k]`` of the edge order. ``particle_map[e]``
    gives the party-order positions of the two particles of edge ``e``.
    """

    rho: np.ndarray
    dims: tuple[int, ...]
    party_particles: tuple[tuple[int, ...], ...]
    particle_map: tuple[tuple[int, int], ...]
    perm: tuple[int, ...]
    graph: NetworkGraph = field(repr=False, compare=False, default=None)

    @property
    def party_dims(self) -> tuple[int, ...]:
        return tuple(int(np.prod([self.dims[k] for k in ps])) for ps in self.party_particles)

    def edge_order(self) -> np.ndarray:
        """The same operator with particles in edge order."""
        inverse = list(np.argsort(self.perm))
        return T.permute_subsystems(self.rho, self.dims, inverse)

    def as_multistate(self) -> MultiState:
        return MultiState(self.rho, self.dims)


def _layout(g: NetworkGraph):
    edge_dims, owner = [], []
    for k, e in enumerate(g.edges):
        di, dj = e.local_dims()
        edge_dims += [di, dj]
        owner += [(e.i, k), (e.j, k)]
    # sort particles by (party, edge index) to obtain the party order
    perm = sorted(range(len(owner)), key=lambda t: owner[t])
    dims = tuple(edge_dims[t] for t in perm)
    parties = tuple(tuple(pos for pos, t in enumerate(perm) if owner[t][0] == v)
                    for v in range(g.n_parties))
    where = {t: pos for pos, t in enumerate(perm)}
    pmap = tuple((where[2 * k], where[2 * k + 1]) for k in range(g.K))
    return tuple(edge_dims), dims, tuple(perm), parties, pmap


def network_state(g: NetworkGraph) -> NetworkState:
    """Tensor product of the edge states, regrouped party by party."""
    edge_dims, dims, perm, parties, pmap = _layout(g)
    rho_edges = T.kron(*[e.density() for e in g.edges])
    rho = T.permute_subsystems(rho_edges, edge_dims, perm)
    return NetworkState(rho, dims, parties, pmap, perm, g)


def edge_order_state(g: NetworkGraph) -> np.ndarray:
    """The plain tensor product of edge states, without regrouping."""
    return T.kron(*[e.density() for e in g.edges])


def apply_local_filter(ns: NetworkState, ops: Sequence[np.ndarray | None]) -> tuple[MultiState, float]:
    """Apply ``⊗_i A_i`` (one operator per party, ``None`` = identity).

    Rectangular operators are allowed; the output subsystem of party ``i``
    then has dimension ``A_i.shape[0]``. Returns the normalized state (one
    subsystem per party) and the trace of the unnormalized output.
    """
    if len(ops) != len(ns.party_particles):
        raise ValueError("need one operator per party")
    full = []
    for op, d in zip(ops, ns.party_dims):
        op = np.eye(d) if op is None else np.asarray(op)
        if op.shape[1] != d:
            raise ValueError(f"filter with {op.shape[1]} columns on a party of dimension {d}")
        full.append(op)
    a = T.kron(*full)
    out = a @ ns.rho @ a.conj().T
    norm = float(np.real(np.trace(out)))
    if norm <= T.TOL:
        raise ValueError("filter annihilates the state")
    return MultiState(out / norm, tuple(op.shape[0] for op in full)), norm


def star_filter(n: int, d: int) -> np.ndarray:
    """Rectangular filter sum_i |i><i...i| (d x d^(n-1)) for the star centre."""
    a = np.zeros((d, d ** (n - 1)))
    for i in range(d):
        a[i, int(np.ravel_multi_index((i,) * (n - 1), (d,) * (n - 1)))] = 1.0
    return a


def star_network(n: int, d: int, p: float) -> NetworkGraph:
    """Centre 0 shares isotropic(d,p) with party 1 and phi+ with parties 2..n-1."""
    edges = [Edge(0, 1, IsotropicSpec(d, p))]
    edges += [Edge(0, k, IsotropicSpec(d, 1.0)) for k in range(2, n)]
    return NetworkGraph(n, tuple(edges))


# ---------------------------------------------------------- teleportation


def teleport_through(source: IsotropicSpec, channel: IsotropicSpec) -> IsotropicSpec:
    """Teleporting half of an isotropic pair through an isotropic channel."""
    if source.d != channel.d:
        raise ValueError("source and channel must have the same local dimension")
    return IsotropicSpec(source.d, source.p * channel.p)


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def simulate_teleportation(source: np.ndarray, channel: np.ndarray) -> np.ndarray:
    """Qubit teleportation circuit applied to the second half of ``source``.

    Register order is ``R S A B``: ``source`` lives on R,S and ``channel`` on
    A,B. Alice applies CNOT(S->A) and H on S, measures S and A in the
    computational basis, and Bob applies Z^m_S X^m_A. Returns the state of
    R,B averaged over the four branches.
    """
    rho = np.kron(source, channel)
    dims = [2, 2, 2, 2]
    u = T.kron(np.eye(2), _CNOT, np.eye(2))
    u = T.kron(np.eye(2), _H, np.eye(4)) @ u
    rho = u @ rho @ u.conj().T
    out = np.zeros((4, 4), dtype=complex)
    for ms, ma in itertools.product((0, 1), repeat=2):
        proj_ = T.kron(np.eye(2), T.proj(T.ket(ms, 2)), T.proj(T.ket(ma, 2)), np.eye(2))
        branch = proj_ @ rho @ proj_
        corr = np.linalg.matrix_power(_Z, ms) @ np.linalg.matrix_power(_X, ma)
        fix = T.kron(np.eye(8), corr)
        branch = fix @ branch @ fix.conj().T
        out += T.partial_trace(branch, dims, keep=[0, 3])
    return out
