"""Agreement and disagreement between two agents sharing a box.

Alice (input x, output a) and Bob (input y, output b) observe the outcome of
input pair (0, 0) and reason about the perfectly correlated events "a = 1 at
x = 1" and "b = 1 at y = 1". Tables are written with rows ``xy = 00, 01,
10, 11`` and columns ``ab = 00, 01, 10, 11``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .boxes import BoxN, pr_box_table

BOUNDARY_FACTOR = 1e3


class NotApplicable(ValueError):
    """Raised when a conditional probability conditions on a null event."""


def table_to_box(rows) -> BoxN:
    """4x4 table (rows xy, columns ab) to a 2x2x2x2 box."""
    rows = np.asarray(rows, dtype=float)
    if rows.shape != (4, 4):
        raise ValueError("table must be 4x4")
    t = np.zeros((2, 2, 2, 2))
    for (x, y), (a, b) in itertools.product(itertools.product(range(2), repeat=2), repeat=2):
        t[a, b, x, y] = rows[2 * x + y, 2 * a + b]
    return BoxN(t)


def box_to_table(box: BoxN) -> np.ndarray:
    t = box.table
    return np.array([[t[a, b, x, y] for a in range(2) for b in range(2)]
                     for x in range(2) for y in range(2)])


def nsccd_table(r: float, s: float, t: float, u: float) -> np.ndarray:
    return np.array([
        [r, 0, 0, 1 - r],
        [r - s, s, -r + t + s, 1 - t - s],
        [t - u, u, r - t + u, 1 - r - u],
        [t, 0, 0, 1 - t],
    ])


def nssd_table(r: float, s: float, t: float, u: float) -> np.ndarray:
    return np.array([
        [s, t, 1 - s - u - t, u],
        [0, s + t, r, 1 - s - t - r],
        [1 - u - t, u + t + r - 1, 0, 1 - r],
        [r, 0, 0, 1 - r],
    ])


def table_valid(rows, tol: float = 1e-12) -> bool:
    rows = np.asarray(rows)
    return bool(rows.min() >= -tol and np.allclose(rows.sum(axis=1), 1, atol=1e-12))


def nsccd_expected(r, s, t, u, tol: float = T.TOL) -> bool:
    """Parameter region on which the disagreement characterization applies."""
    return r > tol and abs((s - u) - (r - t)) > tol


def nssd_expected(r, s, t, u, tol: float = T.TOL) -> bool:
    return s > tol and abs(s + t) > tol and abs(u + t - 1) > tol


# ---------------------------------------------------------------- the box


def _cond(box: BoxN, x: int, y: int, event, given) -> float:
    """P(event | given, x, y); both are predicates on (a, b)."""
    num = den = 0.0
    for a, b in itertools.product(range(box.outputs[0]), range(box.outputs[1])):
        p = box.table[a, b, x, y]
        if given(a, b):
            den += p
            if event(a, b):
                num += p
    if den <= T.TOL:
        raise NotApplicable(f"conditioning event has probability {den:.3g} at input ({x},{y})")
    return num / den


@dataclass(frozen=True)
class AgreementBox:
    box: BoxN

    def __post_init__(self):
        b = self.box
        if b.n_parties != 2 or min(b.inputs) < 2 or min(b.outputs) < 2:
            raise ValueError("agreement boxes need two parties with inputs and outputs 0 and 1")

    @property
    def q_A(self) -> float:
        return _cond(self.box, 0, 1, lambda a, b: b == 1, lambda a, b: a == 0)

    @property
    def q_B(self) -> float:
        return _cond(self.box, 1, 0, lambda a, b: a == 1, lambda a, b: b == 0)

    def perfect_correlation_error(self) -> float:
        """Mass on outcomes where exactly one of a = 1, b = 1 holds at input (1, 1)."""
        t = self.box.table[:, :, 1, 1]
        err = 0.0
        for a, b in itertools.product(range(t.shape[0]), range(t.shape[1])):
            if (a == 1) != (b == 1):
                err += t[a, b]
        return float(err)

    @property
    def perfectly_correlated(self) -> bool:
        return self.perfect_correlation_error() <= T.TOL

    def correlators(self) -> np.ndarray:
        """c[x, y] = P(a = b) - P(a != b) (two-output boxes)."""
        t = self.box.table
        c = np.zeros((2, 2))
        for x, y in itertools.product(range(2), repeat=2):
            same = sum(t[a, a, x, y] for a in range(min(t.shape[:2])))
            c[x, y] = 2 * same - t[:, :, x, y].sum()
        return c


def from_table(rows) -> AgreementBox:
    return AgreementBox(table_to_box(rows))


def pr_box(convention: str = "xor") -> AgreementBox:
    return AgreementBox(pr_box_table(convention))


# ---------------------------------------------------------- certainty sets


@dataclass(frozen=True)
class CertaintySets:
    alpha: tuple[frozenset[int], ...]
    beta: tuple[frozenset[int], ...]
    fixpoint_index: int
    q_A: float
    q_B: float

    @property
    def alpha_N(self) -> frozenset[int]:
        return self.alpha[-1]

    @property
    def beta_N(self) -> frozenset[int]:
        return self.beta[-1]


def _support(box: BoxN, party: int, x: int, y: int) -> list[int]:
    t = box.table[:, :, x, y]
    marg = t.sum(axis=1 - party)
    return [o for o in range(len(marg)) if marg[o] > T.TOL]


def certainty_sets(ab: AgreementBox, tol: float = T.TOL, max_iter: int = 64) -> CertaintySets:
    """Iterate the sets of outputs at which each agent is certain of the other's assignment."""
    box = ab.box
    if not ab.perfectly_correlated:
        raise ValueError("outputs at input (1,1) are not perfectly correlated")
    qa, qb = ab.q_A, ab.q_B
    alpha = frozenset(a for a in _support(box, 0, 0, 1)
                      if abs(_cond(box, 0, 1, lambda _a, b: b == 1, lambda a_, _b, a=a: a_ == a) - qa) <= tol)
    beta = frozenset(b for b in _support(box, 1, 1, 0)
                     if abs(_cond(box, 1, 0, lambda a, _b: a == 1, lambda _a, b_, b=b: b_ == b) - qb) <= tol)
    alphas, betas = [alpha], [beta]
    sup_a, sup_b = set(_support(box, 0, 0, 0)), set(_support(box, 1, 0, 0))
    for _ in range(max_iter):
        A, B = alphas[-1], betas[-1]
        # outputs never seen at (0,0) cannot carry a certainty statement there
        new_a = frozenset(a for a in A if a in sup_a and
                          abs(_cond(box, 0, 0, lambda _a, b: b in B, lambda a_, _b, a=a: a_ == a) - 1) <= tol)
        new_b = frozenset(b for b in B if b in sup_b and
                          abs(_cond(box, 0, 0, lambda a, _b: a in A, lambda _a, b_, b=b: b_ == b) - 1) <= tol)
        if new_a == A and new_b == B:
            break
        alphas.append(new_a)
        betas.append(new_b)
    return CertaintySets(tuple(alphas), tuple(betas), len(alphas) - 1, qa, qb)


@dataclass(frozen=True)
class Verdict:
    value: bool
    applicable: bool = True
    boundary: bool = False
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.value


def _near(x: float, tol: float) -> bool:
    """True when a tested difference sits close to the tolerance on either side."""
    return tol / BOUNDARY_FACTOR < abs(x) < tol * BOUNDARY_FACTOR


def common_certainty_of_disagreement(ab: AgreementBox, tol: float = T.TOL) -> Verdict:
    try:
        if not ab.perfectly_correlated:
            return Verdict(False, False, details={"reason": "input (1,1) not perfectly correlated"})
        if ab.box.table[0, 0, 0, 0] <= tol:
            return Verdict(False, False, details={"reason": "P(00|00) = 0"})
        cs = certainty_sets(ab, tol)
    except NotApplicable as exc:
        return Verdict(False, False, details={"reason": str(exc)})
    gap = cs.q_A - cs.q_B
    member = 0 in cs.alpha_N and 0 in cs.beta_N
    value = abs(gap) > tol and member
    return Verdict(bool(value), True, _near(gap, tol),
                   {"q_A": cs.q_A, "q_B": cs.q_B, "alpha_N": sorted(cs.alpha_N),
                    "beta_N": sorted(cs.beta_N), "N": cs.fixpoint_index})


def singular_disagreement(ab: AgreementBox, tol: float = T.TOL) -> Verdict:
    try:
        if not ab.perfectly_correlated:
            return Verdict(False, False, details={"reason": "input (1,1) not perfectly correlated"})
        if ab.box.table[0, 0, 0, 0] <= tol:
            return Verdict(False, False, details={"reason": "P(00|00) = 0"})
        qa, qb = ab.q_A, ab.q_B
    except NotApplicable as exc:
        return Verdict(False, False, details={"reason": str(exc)})
    value = abs(qa - 1) <= tol and abs(qb) <= tol
    return Verdict(bool(value), True, _near(qa - 1, tol) or _near(qb, tol), {"q_A": qa, "q_B": qb})


def tsirelson_reject(ab: AgreementBox, tol: float = T.TOL) -> Verdict:
    """True means "not quantum realizable" by the correlator identity c01 = c10."""
    c = ab.correlators()
    pre = abs(c[0, 0] - 1) <= tol and abs(c[1, 1] - 1) <= tol
    gap = c[0, 1] - c[1, 0]
    value = pre and abs(gap) > tol
    return Verdict(bool(value), bool(pre), pre and _near(gap, tol), {"c": c.tolist(), "c01_minus_c10": gap})


VOID_ZEROS_REQUIRED = 4


def quantum_void_pattern(ab: AgreementBox, tol: float = T.TOL) -> Verdict:
    """Zeros pattern of a quantum void after relabeling x -> x⊕1.

    True when at least four of the eight entries with a⊕b⊕1 = xy vanish.
    """
    t = ab.box.table
    zeros = []
    for a, b, x, y in itertools.product(range(2), repeat=4):
        if (a ^ b ^ 1) == (x & y) and t[a, b, x ^ 1, y] < tol:
            zeros.append((a, b, x, y))
    return Verdict(len(zeros) >= VOID_ZEROS_REQUIRED, details={"zeros": zeros})


# ----------------------------------------------------- ontological models


def instruction_sets() -> list[tuple[int, int, int, int]]:
    """omega = (a_0, a_1, b_0, b_1): outputs for every input."""
    return list(itertools.product(range(2), repeat=4))


def ont_matrix() -> np.ndarray:
    """M[(x, y, a, b), omega] = [a_x(omega) = a][b_y(omega) = b]."""
    omegas = instruction_sets()
    M = np.zeros((16, 16))
    for row, (x, y, a, b) in enumerate(itertools.product(range(2), repeat=4)):
        for col, w in enumerate(omegas):
            M[row, col] = float(w[x] == a and w[2 + y] == b)
    return M


def _box_vector(box: BoxN) -> np.ndarray:
    t = box.table
    return np.array([t[a, b, x, y] for x, y, a, b in itertools.product(range(2), repeat=4)])


@dataclass(frozen=True)
class OntModel2x2:
    quasi_prob: np.ndarray
    omegas: tuple = field(default_factory=lambda: tuple(instruction_sets()))

    def A(self, a: int, x: int) -> list[int]:
        """Instruction sets in which Alice answers a to x."""
        return [k for k, w in enumerate(self.omegas) if w[x] == a]

    def B(self, b: int, y: int) -> list[int]:
        return [k for k, w in enumerate(self.omegas) if w[2 + y] == b]


@dataclass(frozen=True)
class RankMismatch:
    rank_M: int
    rank_augmented: int

    def __bool__(self) -> bool:
        return False


def ont_model_from_box(box: BoxN, tol: float = 1e-9) -> OntModel2x2 | RankMismatch:
    if box.table.shape != (2, 2, 2, 2):
        raise ValueError("ontological models are built for 2-input 2-output boxes")
    M, c = ont_matrix(), _box_vector(box)
    rank_m = np.linalg.matrix_rank(M, tol=tol)
    rank_aug = np.linalg.matrix_rank(np.column_stack([M, c]), tol=tol)
    if rank_aug > rank_m:
        return RankMismatch(int(rank_m), int(rank_aug))
    q, *_ = np.linalg.lstsq(M, c, rcond=None)
    return OntModel2x2(q)


def box_from_ont_model(model: OntModel2x2) -> BoxN:
    vec = ont_matrix() @ model.quasi_prob
    t = np.zeros((2, 2, 2, 2))
    for k, (x, y, a, b) in enumerate(itertools.product(range(2), repeat=4)):
        t[a, b, x, y] = vec[k]
    return BoxN(t)


def signalling_perturbation(box: BoxN, rng: np.random.Generator, size: float = 0.1) -> BoxN:
    """Add ``size`` to one random entry and renormalize that input pair only."""
    t = box.table.copy()
    a, b, x, y = (int(rng.integers(0, n)) for n in t.shape)
    t[a, b, x, y] += size
    t[:, :, x, y] /= t[:, :, x, y].sum()
    return BoxN(t)


def random_ns_box(rng: np.random.Generator) -> BoxN:
    """Random mixture of the 16 local vertices and the 8 PR-type vertices."""
    verts = []
    for a0, a1, b0, b1 in instruction_sets():
        t = np.zeros((2, 2, 2, 2))
        for x, y in itertools.product(range(2), repeat=2):
            t[(a0, a1)[x], (b0, b1)[y], x, y] = 1.0
        verts.append(t)
    for al, be, ga in itertools.product(range(2), repeat=3):
        t = np.zeros((2, 2, 2, 2))
        for a, b, x, y in itertools.product(range(2), repeat=4):
            if (a ^ b) == ((x & y) ^ (al & x) ^ (be & y) ^ ga):
                t[a, b, x, y] = 0.5
        verts.append(t)
    w = rng.dirichlet(np.ones(len(verts)))
    return BoxN(sum(wi * v for wi, v in zip(w, verts)))


# ---------------------------------------------------------- reduction map


def reduce_box(p: BoxN, alpha_set, beta_set) -> BoxN:
    """Coarse-grain a two-party box to inputs {0,1} and outputs {0,1}.

    For input 0 the new output is 0 exactly when the old one lies in the
    given set; for input 1 the new output is 1 exactly when the old one is 1.
    """
    alpha_set, beta_set = set(alpha_set), set(beta_set)
    if not alpha_set or not beta_set:
        raise ValueError("output sets must be nonempty")
    if p.n_parties != 2 or min(p.inputs) < 2:
        raise ValueError("need a two-party box with at least inputs 0 and 1")
    oa, ob = p.outputs

    def new_a(a, x):
        return (0 if a in alpha_set else 1) if x == 0 else int(a == 1)

    def new_b(b, y):
        return (0 if b in beta_set else 1) if y == 0 else int(b == 1)

    t = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product(range(2), repeat=2):
        for a, b in itertools.product(range(oa), range(ob)):
            t[new_a(a, x), new_b(b, y), x, y] += p.table[a, b, x, y]
    return BoxN(t)


def split_output(p: BoxN, party: int = 0, output: int = 0) -> BoxN:
    """Split one output of one party into two equal halves (old index and a new last index)."""
    t = p.table
    shape = list(t.shape)
    shape[party] += 1
    out = np.zeros(shape)
    out[tuple(slice(0, n) for n in t.shape)] = t
    idx_old = [slice(None)] * t.ndim
    idx_old[party] = output
    idx_new = [slice(None)] * t.ndim
    idx_new[party] = shape[party] - 1
    out[tuple(idx_old)] = t[tuple(idx_old)] / 2
    out[tuple(idx_new)] = t[tuple(idx_old)] / 2
    return BoxN(out)


def analyze(ab: AgreementBox, tol: float = T.TOL) -> dict:
    """All detectors in one record."""
    rec = {"ns": ab.box.is_nonsignalling(tol), "perfectly_correlated": ab.perfectly_correlated}
    for name, fn in (("q_A", lambda: ab.q_A), ("q_B", lambda: ab.q_B)):
        try:
            rec[name] = fn()
        except NotApplicable:
            rec[name] = None
    ccd = common_certainty_of_disagreement(ab, tol)
    sd = singular_disagreement(ab, tol)
    ts = tsirelson_reject(ab, tol)
    rec.update({"ccd": ccd.value, "singular": sd.value, "tsirelson": ts.value,
                "void_pattern": quantum_void_pattern(ab, tol).value,
                "boundary": ccd.boundary or sd.boundary or ts.boundary})
    return rec


def random_correlated_local_box(rng: np.random.Generator) -> BoxN:
    """Random mixture of deterministic boxes whose outputs agree at input (1,1).

    Each sample mixes a random nonempty subset of the eight admissible
    instruction sets, so boundary cases with many zeros are common.
    """
    admissible = [w for w in instruction_sets() if w[1] == w[3]]
    k = int(rng.integers(1, len(admissible) + 1))
    chosen = rng.choice(len(admissible), size=k, replace=False)
    weights = rng.dirichlet(np.ones(k))
    t = np.zeros((2, 2, 2, 2))
    for wi, idx in zip(weights, chosen):
        a0, a1, b0, b1 = admissible[idx]
        for x, y in itertools.product(range(2), repeat=2):
            t[(a0, a1)[x], (b0, b1)[y], x, y] += wi
    return BoxN(t)
