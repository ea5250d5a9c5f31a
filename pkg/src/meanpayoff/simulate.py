"""Monte-Carlo runs of a finite-memory strategy.

This is an independent check on :mod:`meanpayoff.analysis`. The product
chain is sampled directly and no floating point comparison is ever made
against a probability. Each location's successor distribution is stored as
integer cumulative weights over a common denominator ``D``. A step draws a
64-bit word ``u`` and rejects it when ``u`` falls in the incomplete last
block of ``2**64 mod D`` values. Otherwise ``u mod D`` is uniform on
``[0, D)`` and picks the successor exactly.

Run ``k`` uses its own PCG64 stream seeded by ``SeedSequence([seed, k])``.
The result of a run never depends on how many other runs are simulated or
in which order, so batches could be split across workers freely.

Averages are taken over the second half of the horizon only (the last
``ceil(horizon / 2)`` steps) to damp the transient prefix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .analysis import ProductChain, product_chain
from .model import Mdp, ModelError, Query, Variant, fmt
from .strategy import FiniteStrategy

WORD = 1 << 64
BLOCK = 2048


@dataclass
class SimulationReport:
    runs: int
    horizon: int
    seed: int
    window: int
    empirical_action_frequency: dict[str, float]
    empirical_expectation: tuple[float, ...]
    empirical_sat_rate: tuple[float, ...] | None = None
    empirical_joint_sat_rate: float | None = None
    sat_threshold: tuple[Fraction, ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "runs": self.runs,
            "horizon": self.horizon,
            "seed": self.seed,
            "window": f"last {self.window} steps of each run",
            "empirical_action_frequency": self.empirical_action_frequency,
            "empirical_expectation": list(self.empirical_expectation),
            "empirical_sat_rate": None if self.empirical_sat_rate is None else list(self.empirical_sat_rate),
            "empirical_joint_sat_rate": self.empirical_joint_sat_rate,
            "sat_threshold": None if self.sat_threshold is None else [fmt(x) for x in self.sat_threshold],
        }


class _Sampler:
    """Exact categorical sampling for every location of a product chain."""

    def __init__(self, dists: list[dict[int, Fraction]]):
        width = max(len(d) for d in dists)
        n = len(dists)
        self.denominator = np.zeros(n, dtype=np.uint64)
        self.limit = np.zeros(n, dtype=np.uint64)  # accept u < limit; 0 means accept everything
        self.cumulative = np.zeros((n, width), dtype=np.uint64)
        self.target = np.zeros((n, width), dtype=np.int64)
        for i, dist in enumerate(dists):
            items = sorted(dist.items())
            den = math.lcm(*(p.denominator for _, p in items))
            if den >= WORD:
                raise ModelError(f"probability denominator {den} does not fit in 64 bits")
            acc = 0
            for k, (j, p) in enumerate(items):
                acc += p.numerator * (den // p.denominator)
                self.cumulative[i, k] = acc
                self.target[i, k] = j
            # padding columns can never be selected: r < den <= cumulative
            self.cumulative[i, len(items):] = den
            self.target[i, len(items):] = items[-1][0]
            self.denominator[i] = den
            self.limit[i] = WORD - WORD % den if WORD % den else 0

    def pick(self, loc: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Successors for accepted draws and the mask of accepted draws."""
        lim = self.limit[loc]
        ok = (lim == 0) | (u < lim)
        r = u % self.denominator[loc]
        k = (r[:, None] >= self.cumulative[loc]).sum(axis=1)
        return self.target[loc, k], ok


class _Streams:
    """One buffered PCG64 stream per run; draws are consumed strictly in order."""

    def __init__(self, seed: int, runs: int):
        self.gens = [np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, k]))) for k in range(runs)]
        self.buf = np.empty((runs, BLOCK), dtype=np.uint64)
        for k, g in enumerate(self.gens):
            self.buf[k] = g.bit_generator.random_raw(BLOCK)
        self.ptr = np.zeros(runs, dtype=np.int64)

    def draw(self, who: np.ndarray) -> np.ndarray:
        empty = who[self.ptr[who] == BLOCK]
        for k in empty:
            self.buf[k] = self.gens[k].bit_generator.random_raw(BLOCK)
            self.ptr[k] = 0
        u = self.buf[who, self.ptr[who]]
        self.ptr[who] += 1
        return u


def _step(sampler: _Sampler, streams: _Streams, loc: np.ndarray) -> np.ndarray:
    who = np.arange(len(loc))
    out = np.empty_like(loc)
    while len(who):
        nxt, ok = sampler.pick(loc[who], streams.draw(who))
        out[who[ok]] = nxt[ok]
        who = who[~ok]
    return out


def simulate(
    m: Mdp,
    sigma: FiniteStrategy,
    runs: int,
    horizon: int,
    seed: int,
    query: Query | None = None,
    slack: Fraction | None = None,
) -> SimulationReport:
    """Sample ``runs`` independent runs of ``horizon`` steps each.

    Satisfaction rates are reported when ``query`` is given. A run satisfies
    dimension ``i`` when its window average is at least ``sat_i - slack``.
    The comparison is done on integers. ``slack`` defaults to the strategy's
    epsilon so that the rates line up with :func:`meanpayoff.analysis.verify`.
    """
    if runs < 1 or horizon < 1:
        raise ValueError("runs and horizon must be positive")
    chain: ProductChain = product_chain(m, sigma)
    n_loc = len(chain.locations)
    # location -1 (index n_loc) is a virtual start whose successors are the initial locations
    sampler = _Sampler(chain.transitions + [chain.initial])
    streams = _Streams(int(seed), runs)
    loc = _step(sampler, streams, np.full(runs, n_loc, dtype=np.int64))
    window = horizon - horizon // 2
    counts = np.zeros((runs, n_loc), dtype=np.int64)
    rows = np.arange(runs)
    for t in range(horizon):
        if t >= horizon - window:
            counts[rows, loc] += 1
        if t + 1 < horizon:
            loc = _step(sampler, streams, loc)

    n = m.dimension
    rewards = [m.action(a).reward for _, _, a in chain.locations]
    scale = math.lcm(*(r[d].denominator for r in rewards for d in range(n)))
    int_rewards = np.array([[int(r[d] * scale) for d in range(n)] for r in rewards], dtype=object)
    totals = counts.astype(object) @ int_rewards  # exact window sums times `scale`, shape (runs, n)
    expectation = tuple(float(Fraction(int(sum(totals[:, d])), runs * window * scale)) for d in range(n))

    names = m.action_names
    freq = {a: 0.0 for a in names}
    visits = counts.sum(axis=0)
    for i, (_, _, a) in enumerate(chain.locations):
        freq[a] += float(visits[i]) / (runs * window)

    sat_rate = joint_rate = thresholds = None
    if query is not None:
        eps = sigma.epsilon if slack is None else Fraction(slack)
        thresholds = tuple(s - eps for s in query.sat)

        def meets(target: tuple[Fraction, ...]) -> np.ndarray:
            need = [Fraction(x) * window * scale for x in target]
            return np.array([[totals[k, d] >= need[d] for d in range(n)] for k in range(runs)], dtype=bool)

        per_dim = meets(thresholds)
        sat_rate = tuple(float(x) for x in per_dim.mean(axis=0))
        if query.variant is Variant.JOINT:
            joint_rate = float(per_dim.all(axis=1).mean())
        elif query.variant is Variant.CONJUNCTIVE_JOINT:
            joint_rate = float(meets(tuple(s - eps for s in query.joint_sat)).all(axis=1).mean())
    return SimulationReport(runs, horizon, int(seed), window, freq, expectation, sat_rate, joint_rate, thresholds)
