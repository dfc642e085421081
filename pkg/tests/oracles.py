"""Exhaustive trajectory enumeration used as an exact oracle for IS estimators."""
import itertools

import numpy as np


def enumerate_branches(P, behavioral, start, H):
    """All length-``H`` (state, action) paths from ``start`` and their probabilities.

    Returns ``(probs, states, actions)`` with arrays shaped ``(n_paths,)`` and
    ``(n_paths, H)``; zero-probability paths are dropped.
    """
    S, A = P.shape[:2]
    probs, all_states, all_actions = [], [], []
    for actions in itertools.product(range(A), repeat=H):
        for nxt in itertools.product(range(S), repeat=H - 1):
            states = (start,) + nxt
            p = 1.0
            for t in range(H):
                p *= behavioral.table[states[t], actions[t]]
                if t + 1 < H:
                    p *= P[states[t], actions[t], states[t + 1]]
            if p > 0.0:
                probs.append(p)
                all_states.append(states)
                all_actions.append(actions)
    return np.array(probs), np.array(all_states, dtype=np.int64), np.array(all_actions, dtype=np.int64)


def random_tabular(rng, n_states, n_actions):
    """Random transition table with some exact zeros, plus rewards in [0, 1]."""
    P = rng.dirichlet(np.ones(n_states), size=(n_states, n_actions))
    P[rng.uniform(size=P.shape) < 0.2] = 0.0
    for s, a in itertools.product(range(n_states), range(n_actions)):
        if P[s, a].sum() == 0.0:
            P[s, a, rng.integers(n_states)] = 1.0
    P /= P.sum(axis=-1, keepdims=True)
    return P, rng.uniform(0.0, 1.0, size=(n_states, n_actions))
