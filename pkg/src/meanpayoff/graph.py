"""Maximal end components (MECs) of an MDP."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .model import Action, Mdp, ModelError


@dataclass(frozen=True)
class Mec:
    states: tuple[str, ...]
    actions: tuple[str, ...]

    def __contains__(self, item: str) -> bool:
        return item in self.states or item in self.actions


@dataclass(frozen=True)
class MecDecomposition:
    mecs: tuple[Mec, ...]
    state_to_mec: dict[str, int | None]
    non_mec_actions: tuple[str, ...]

    def mec_of_action(self, m: Mdp, name: str) -> int | None:
        idx = self.state_to_mec[m.action(name).source]
        if idx is None or name not in self.mecs[idx].actions:
            return None
        return idx


def strongly_connected_labels(n: int, edges: list[tuple[int, int]]) -> np.ndarray:
    """Label each of ``n`` nodes with the index of its strongly connected component."""
    if n == 0:
        return np.zeros(0, dtype=int)
    if edges:
        rows, cols = zip(*edges)
    else:
        rows, cols = (), ()
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="strong")
    return labels


def mec_decomposition(m: Mdp) -> MecDecomposition:
    """Iterated SCC refinement: drop actions leaving their SCC until nothing changes."""
    alive = {a.name for a in m.actions}
    idx = {s: i for i, s in enumerate(m.states)}
    while True:
        edges = [
            (idx[a.source], idx[t]) for a in m.actions if a.name in alive for t in a.successors()
        ]
        labels = strongly_connected_labels(len(m.states), edges)
        dropped = {
            a.name
            for a in m.actions
            if a.name in alive and any(labels[idx[t]] != labels[idx[a.source]] for t in a.successors())
        }
        if not dropped:
            break
        alive -= dropped

    groups: dict[int, list[str]] = {}
    for s in m.states:
        if any(a.name in alive for a in m.act(s)):
            groups.setdefault(int(labels[idx[s]]), []).append(s)
    mecs = []
    for members in sorted(groups.values(), key=lambda g: idx[g[0]]):
        member_set = set(members)
        acts = tuple(a.name for a in m.actions if a.name in alive and a.source in member_set)
        mecs.append(Mec(states=tuple(members), actions=acts))
    state_to_mec: dict[str, int | None] = {s: None for s in m.states}
    for i, mec in enumerate(mecs):
        for s in mec.states:
            state_to_mec[s] = i
    in_mec = {a for mec in mecs for a in mec.actions}
    non_mec = tuple(a.name for a in m.actions if a.name not in in_mec)
    return MecDecomposition(tuple(mecs), state_to_mec, non_mec)


def restrict(m: Mdp, mec: Mec, initial: str | None = None) -> Mdp:
    """The strongly connected sub-MDP induced by ``mec``."""
    if mec not in mec_decomposition(m).mecs:
        raise ModelError("not a maximal end component of the model")
    start = mec.states[0] if initial is None else initial
    if start not in mec.states:
        raise ModelError(f"initial state {start!r} lies outside the MEC")
    actions = []
    for name in mec.actions:
        a = m.action(name)
        actions.append(Action(a.name, a.source, {t: p for t, p in a.delta.items() if p > 0}, a.reward))
    return Mdp(
        states=mec.states,
        actions=tuple(actions),
        initial=start,
        dimension=m.dimension,
    )


def is_strongly_connected(m: Mdp) -> bool:
    """True iff the whole of ``m`` is a single end component."""
    d = mec_decomposition(m)
    return len(d.mecs) == 1 and len(d.mecs[0].states) == len(m.states) and not d.non_mec_actions
