"""Trajectory sampling from the pre-dropout system and empirical visit frequencies.

Randomness comes from SplitMix64 streams: every trajectory owns a 64-bit
seed derived from ``(master_seed, start_state, trajectory_index)`` and draws
its uniforms from positions ``0, 1, 2, ...`` of that seed's stream. Streams
are pure functions of their seed, so whole datasets are generated in one
vectorized pass and any single trajectory can be regenerated on its own.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidModelError, PolicyDimensionError
from .mdp_core import DropoutMask, FactoredMdp, JointIndexer, TabularPolicy, induced_chain, masked_reward

# start-state slot reserved for the long visit-frequency trajectory
STATIONARY_STREAM = 2**32

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 output function (Stafford variant 13)."""
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


def stream_uniforms(seeds: np.ndarray, positions: np.ndarray | int) -> np.ndarray:
    """Uniforms in [0, 1) at ``positions`` of the SplitMix64 streams ``seeds``.

    Broadcasts ``seeds[..., None]`` against ``positions``.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    pos = np.asarray(positions, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = seeds[..., None] + (pos + np.uint64(1)) * _GOLDEN
        bits = _mix64(state)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def derive_seeds(master_seed: int, start: int, count: int) -> np.ndarray:
    """Per-trajectory seeds ``hash(master_seed, start, index)`` for ``index < count``."""
    key = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(start)]).generate_state(
        1, dtype=np.uint64
    )[0]
    with np.errstate(over="ignore"):
        return _mix64(np.uint64(key) ^ _mix64(np.arange(count, dtype=np.uint64) * _GOLDEN + _GOLDEN))


def _cdf(rows: np.ndarray) -> np.ndarray:
    """Row-wise CDF whose last entry is exactly 1 and flat over zero-mass entries."""
    cum = np.cumsum(rows, axis=-1)
    return cum / cum[..., -1:]


def _inverse_cdf(cdf_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    return (cdf_rows <= u[..., None]).sum(axis=-1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """``steps`` of ``(state, joint action, reward)`` starting at ``start_state``."""

    start_state: int
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    seed: int
    policy_id: str = ""

    @property
    def horizon(self) -> int:
        return len(self.states)

    @property
    def steps(self) -> list[tuple[int, int, float]]:
        return [(int(s), int(a), float(r)) for s, a, r in zip(self.states, self.actions, self.rewards)]

    def discounted_return(self, gamma: float) -> float:
        return float(np.sum(gamma ** np.arange(self.horizon) * self.rewards))


@dataclass(frozen=True, eq=False)
class Dataset:
    """|D| trajectories of length H from each start state, stored as arrays.

    ``states[i, d, t]`` is the state at step ``t`` of trajectory ``d`` from
    ``starts[i]``; ``actions`` and ``rewards`` share that layout.
    """

    starts: np.ndarray
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    seeds: np.ndarray
    master_seed: int
    policy_id: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return self.states.shape[2]

    @property
    def n_per_start(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.states.shape[0] * self.states.shape[1]

    def trajectory(self, i: int, d: int) -> Trajectory:
        return Trajectory(
            int(self.starts[i]),
            self.states[i, d].copy(),
            self.actions[i, d].copy(),
            self.rewards[i, d].copy(),
            int(self.seeds[i, d]),
            self.policy_id,
        )

    def trajectories(self):
        for i in range(self.states.shape[0]):
            for d in range(self.states.shape[1]):
                yield self.trajectory(i, d)

    # -- text format ---------------------------------------------------
    def header(self) -> dict:
        return {
            "kind": "dataset",
            "horizon": self.horizon,
            "n_per_start": self.n_per_start,
            "starts": [int(s) for s in self.starts],
            "master_seed": int(self.master_seed),
            "policy_id": self.policy_id,
            **self.meta,
        }

    def save(self, path: str | Path) -> None:
        """Write ``# {header}``, then per trajectory a ``# {...}`` line and ``t state action reward`` lines."""
        lines = ["# " + json.dumps(self.header(), sort_keys=True)]
        for i, start in enumerate(self.starts):
            for d in range(self.n_per_start):
                lines.append("# " + json.dumps({"start": int(start), "index": d, "seed": int(self.seeds[i, d])}))
                for t in range(self.horizon):
                    lines.append(
                        f"{t} {int(self.states[i, d, t])} {int(self.actions[i, d, t])} {float(self.rewards[i, d, t])!r}"
                    )
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Dataset":
        lines = Path(path).read_text().splitlines()
        if not lines or not lines[0].startswith("# "):
            raise InvalidModelError(f"{path}: missing dataset header")
        head = json.loads(lines[0][2:])
        H, D = int(head["horizon"]), int(head["n_per_start"])
        starts = np.array(head["starts"], dtype=np.int64)
        n = len(starts)
        states = np.zeros((n, D, H), dtype=np.int64)
        actions = np.zeros((n, D, H), dtype=np.int64)
        rewards = np.zeros((n, D, H))
        seeds = np.zeros((n, D), dtype=np.uint64)
        pos = {int(s): k for k, s in enumerate(starts)}
        i = d = -1
        for line in lines[1:]:
            if line.startswith("# "):
                rec = json.loads(line[2:])
                i, d = pos[int(rec["start"])], int(rec["index"])
                seeds[i, d] = np.uint64(int(rec["seed"]))
                continue
            t, s, a, r = line.split()
            states[i, d, int(t)] = int(s)
            actions[i, d, int(t)] = int(a)
            rewards[i, d, int(t)] = float(r)
        known = {"kind", "horizon", "n_per_start", "starts", "master_seed", "policy_id"}
        return cls(
            starts, states, actions, rewards, seeds, int(head["master_seed"]), head.get("policy_id", ""),
            {k: v for k, v in head.items() if k not in known},
        )


def _step_tables(mdp: FactoredMdp, policy: TabularPolicy) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if policy.table.shape != (mdp.n_states, mdp.n_actions):
        raise PolicyDimensionError(
            f"policy shape {policy.table.shape} does not match system {(mdp.n_states, mdp.n_actions)}"
        )
    P = mdp.transition()
    R = masked_reward(mdp, DropoutMask.all_active(mdp.n_agents))
    return _cdf(policy.table), _cdf(P.reshape(-1, mdp.n_states)), R


def _rollout(cdf_pi, cdf_P, R, n_actions, starts, seeds, H):
    """Vectorized rollouts; ``starts`` and ``seeds`` share a shape."""
    shape = seeds.shape
    u = stream_uniforms(seeds, np.arange(2 * H))  # (..., 2H)
    states = np.zeros(shape + (H,), dtype=np.int64)
    actions = np.zeros(shape + (H,), dtype=np.int64)
    x = np.broadcast_to(np.asarray(starts, dtype=np.int64), shape).copy()
    for t in range(H):
        a = _inverse_cdf(cdf_pi[x], u[..., 2 * t])
        states[..., t] = x
        actions[..., t] = a
        x = _inverse_cdf(cdf_P[x * n_actions + a], u[..., 2 * t + 1])
    return states, actions, R[states, actions]


def sample_trajectory(
    mdp: FactoredMdp, policy: TabularPolicy, start: int, H: int, seed: int, policy_id: str = ""
) -> Trajectory:
    """One trajectory of length ``H`` driven by the SplitMix64 stream ``seed``.

    Step ``t`` consumes stream positions ``2t`` (action) and ``2t + 1`` (next state).
    """
    if H < 1:
        raise ValueError("H must be at least 1")
    cdf_pi, cdf_P, R = _step_tables(mdp, policy)
    seeds = np.array([seed], dtype=np.uint64)
    s, a, r = _rollout(cdf_pi, cdf_P, R, mdp.n_actions, np.array([start]), seeds, H)
    return Trajectory(int(start), s[0], a[0], r[0], int(seed), policy_id)


def sample_dataset(
    mdp: FactoredMdp,
    policy: TabularPolicy,
    n_per_start: int,
    H: int,
    master_seed: int,
    starts: Sequence[int] | None = None,
    policy_id: str = "",
) -> Dataset:
    """``n_per_start`` independent trajectories of length ``H`` from each start state.

    Every joint state is a start state unless ``starts`` is given.
    """
    if H < 1 or n_per_start < 1:
        raise ValueError("H and n_per_start must be positive")
    starts = np.arange(mdp.n_states) if starts is None else np.asarray(starts, dtype=np.int64)
    if starts.size == 0:
        raise ValueError("no start states")
    cdf_pi, cdf_P, R = _step_tables(mdp, policy)
    seeds = np.stack([derive_seeds(master_seed, int(s), n_per_start) for s in starts])
    start_grid = np.broadcast_to(starts[:, None], seeds.shape)
    s, a, r = _rollout(cdf_pi, cdf_P, R, mdp.n_actions, start_grid, seeds, H)
    return Dataset(starts, s, a, r, seeds, int(master_seed), policy_id)


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Visit counts over joint states and their frequencies ``count / H_mu``."""

    counts: np.ndarray
    frequencies: np.ndarray
    horizon: int
    indexer: JointIndexer | None = None

    @classmethod
    def from_counts(cls, counts: np.ndarray, indexer: JointIndexer | None = None) -> "EmpiricalDistribution":
        counts = np.asarray(counts)
        total = int(counts.sum())
        return cls(counts, counts / total, total, indexer)

    @classmethod
    def from_distribution(cls, mu: np.ndarray, indexer: JointIndexer | None = None) -> "EmpiricalDistribution":
        """Wrap an exact distribution; ``counts`` then hold the probabilities and ``horizon`` is 0."""
        mu = np.asarray(mu, dtype=float)
        return cls(mu.copy(), mu / mu.sum(), 0, indexer)

    def __len__(self) -> int:
        return len(self.frequencies)


def simulate_chain(P_pi: np.ndarray, start: np.ndarray, length: int, seeds: np.ndarray) -> np.ndarray:
    """Visited states ``x_1..x_length`` after ``start`` for a batch of chains."""
    cdf = _cdf(P_pi)
    x = np.asarray(start, dtype=np.int64).copy()
    out = np.zeros(x.shape + (length,), dtype=np.int64)
    block = 4096
    for b0 in range(0, length, block):
        u = stream_uniforms(seeds, np.arange(1 + b0, 1 + min(length, b0 + block)))
        for j in range(u.shape[-1]):
            x = _inverse_cdf(cdf[x], u[..., j])
            out[..., b0 + j] = x
    return out


def empirical_stationary(
    mdp: FactoredMdp,
    policy: TabularPolicy,
    H_mu: int,
    seed: int,
    burn_in: int = 0,
    start: int | None = None,
) -> EmpiricalDistribution:
    """Visit frequencies of one trajectory ``x_1, ..., x_{H_mu}`` under ``policy``.

    The chain starts at ``start`` (default: drawn uniformly from stream
    position 0) and the first ``burn_in`` states are discarded. No
    ergodicity check is made here.
    """
    if H_mu < 1:
        raise ValueError("H_mu must be at least 1")
    P_pi = induced_chain(mdp.transition(), policy)
    seeds = derive_seeds(seed, STATIONARY_STREAM, 1)
    if start is None:
        start = int(stream_uniforms(seeds, 0)[0, 0] * mdp.n_states)
    path = simulate_chain(P_pi, np.array([start]), burn_in + H_mu, seeds)[0, burn_in:]
    return EmpiricalDistribution.from_counts(np.bincount(path, minlength=mdp.n_states), mdp.indexer)


def marginalize_empirical(dist: EmpiricalDistribution, mask: DropoutMask, indexer: JointIndexer | None = None) -> np.ndarray:
    """Distribution over the dropped agents' joint substate.

    Indexed by the mixed-radix joint state of the dropped agents; a single
    entry of 1 when nobody dropped.
    """
    indexer = indexer or dist.indexer
    if indexer is None:
        raise ValueError("an indexer is needed to marginalize")
    if len(mask) != indexer.n_agents:
        raise PolicyDimensionError("mask length does not match the indexer")
    s_minus = indexer.project_states(mask.dropped)
    size = indexer.sub_indexer(mask.dropped).n_states
    return np.bincount(s_minus, weights=dist.frequencies, minlength=size)
