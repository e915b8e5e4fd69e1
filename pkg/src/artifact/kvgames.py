"""The Khot-Vishnoi game at small v and its star-network extension.

Bit strings in ``{0,1}^v`` are stored as integers whose bit ``i`` is the
string's entry ``i``. Questions are cosets of the Hadamard code; an answer is
the position of the chosen string within the (sorted) question coset.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .boxes import BellFunctional, BoxN, deterministic_max, product_boxes


def _is_power_of_two(v: int) -> bool:
    return v >= 1 and (v & (v - 1)) == 0


def hadamard_code(v: int) -> list[int]:
    """Codewords (a·x mod 2)_x for every a in {0,1}^{log v}."""
    words = []
    for a in range(v):
        w = 0
        for x in range(v):
            if bin(a & x).count("1") % 2:
                w |= 1 << x
        words.append(w)
    return sorted(words)


@dataclass(frozen=True)
class KVGame:
    v: int
    eta: float
    hadamard_subgroup: tuple[int, ...]
    cosets: tuple[tuple[int, ...], ...]

    @property
    def n_questions(self) -> int:
        return len(self.cosets)

    def coset_of(self, s: int) -> int:
        for k, c in enumerate(self.cosets):
            if s in c:
                return k
        raise ValueError("string outside the group")

    def noise_prob(self, z: int) -> float:
        w = bin(z).count("1")
        return self.eta ** w * (1 - self.eta) ** (self.v - w)

    def coefficients(self) -> np.ndarray:
        """G[a, b, X, Y] with a, b positions inside cosets X, Y."""
        v, C = self.v, self.n_questions
        G = np.zeros((v, v, C, C))
        pref = v / 2 ** v
        for X, Y in itertools.product(range(C), repeat=2):
            for ia, a in enumerate(self.cosets[X]):
                for ib, b in enumerate(self.cosets[Y]):
                    G[ia, ib, X, Y] = pref * self.noise_prob(a ^ b)
        return G

    def functional(self) -> BellFunctional:
        return BellFunctional(self.coefficients(), kv_classical_bound(self.v, self.eta), "local", "kv")


def kv_game(v: int, eta: float) -> KVGame:
    if not _is_power_of_two(v) or v < 2:
        raise ValueError("v must be a power of two, at least 2")
    if v > 16:
        raise ValueError("v is limited to 16")
    if not 0 <= eta <= 0.5:
        raise ValueError("eta must lie in [0, 1/2]")
    H = hadamard_code(v)
    seen, cosets = set(), []
    for s in range(2 ** v):
        if s in seen:
            continue
        c = tuple(sorted(s ^ h for h in H))
        seen.update(c)
        cosets.append(c)
    return KVGame(v, float(eta), tuple(H), tuple(cosets))


def kv_classical_bound(v: int, eta: float) -> float:
    """Classical winning bound v / v^{1/(1-eta)} = v^{-eta/(1-eta)}."""
    return v ** (-eta / (1 - eta))


def normalization(coeffs: np.ndarray) -> float:
    """Sum over question tuples of the largest coefficient."""
    n = coeffs.ndim // 2
    return float(coeffs.max(axis=tuple(range(n))).sum())


@dataclass(frozen=True)
class KVLocalResult:
    value: float
    alice: tuple[int, ...]
    bob: tuple[int, ...]
    approximate: bool


def kv_local_max(g: KVGame, approximate: bool = False, restarts: int = 20, seed: int = 0) -> KVLocalResult:
    """Best deterministic local strategy.

    Exact enumeration for v <= 4. Larger games need ``approximate=True``,
    which runs alternating best responses from random starts and returns a
    lower bound on the maximum. The first start is the representative
    strategy, so the result never falls below it.
    """
    G = g.coefficients()
    if g.v <= 4:
        res = deterministic_max(BellFunctional(G), "fully_local")
        a, b = res.strategy.responses
        return KVLocalResult(res.value, tuple(a), tuple(b), False)
    if not approximate:
        raise ValueError("exact enumeration is limited to v <= 4; pass approximate=True")
    rng = np.random.default_rng(seed)
    C = g.n_questions
    best = None
    for r in range(restarts):
        a = np.zeros(C, dtype=int) if r == 0 else rng.integers(0, g.v, size=C)
        prev = -1.0
        while True:
            # Bob's best response to Alice, then Alice's to Bob
            eff_b = G[a, :, np.arange(C), :].sum(axis=0)  # (b, Y)
            b = eff_b.argmax(axis=0)
            eff_a = G[:, b, :, np.arange(C)].sum(axis=0)  # (a, X)
            a = eff_a.argmax(axis=0)
            val = float(eff_a.max(axis=0).sum())
            if val <= prev + 1e-15:
                break
            prev = val
        if best is None or val > best.value:
            best = KVLocalResult(val, tuple(int(i) for i in a), tuple(int(i) for i in b), True)
    return best


def strategy_value(g: KVGame, alice, bob) -> float:
    G = g.coefficients()
    C = g.n_questions
    return float(sum(G[alice[X], bob[Y], X, Y] for X in range(C) for Y in range(C)))


def representative_strategy_value(g: KVGame) -> float:
    """Both players answer the first element of their coset."""
    zeros = (0,) * g.n_questions
    return strategy_value(g, zeros, zeros)


def star_kv(g: KVGame, K: int, max_entries: int = 10 ** 7) -> BellFunctional:
    """Alice plays one copy of the game with each of K Bobs; coefficients multiply."""
    if K < 1:
        raise ValueError("K must be at least 1")
    G = g.coefficients()
    size = G.size ** K
    if size > max_entries:
        raise ValueError(f"star game with {size} coefficients exceeds the size guard")
    factors = [BoxN(G)] * K
    maps = [[0, i + 1] for i in range(K)]
    coeffs = product_boxes(factors, maps).table
    return BellFunctional(coeffs, kv_classical_bound(g.v, g.eta), "bilocal", f"star_kv(K={K})")


@dataclass(frozen=True)
class RatioReport:
    """Quantum-to-bilocal ratio with the universal constants left symbolic.

    The ratio equals ``D**K / C * numeric_factor``.
    """

    F: float
    L: int
    d: int
    K: int
    numeric_factor: float
    expression: str = "D^K / (C * L^(2K) * ln^(2K) d) * F^L * d^L"


def superactivation_ratio(F: float, L: int, d: int, K: int) -> RatioReport:
    if d < 2 or L < 1 or K < 1:
        raise ValueError("need d >= 2, L >= 1, K >= 1")
    factor = (F * d) ** L / (L ** (2 * K) * math.log(d) ** (2 * K))
    return RatioReport(F, L, d, K, factor)
