"""Factored multi-agent MDPs, dropout masks and policy tables.

Joint states and joint actions are mixed-radix integers with agent 0 as the
most significant digit, so ``(x_1, x_2)`` orders lexicographically.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    InvalidModelError,
    MaskCapExceededError,
    PolicyDimensionError,
    StateSpaceTooLargeError,
)

PROB_ATOL = 1e-12
RENORMALIZE_ATOL = 1e-9
MAX_MASK_AGENTS = 20
# (|X| * |A| * |X|) float64 entries allowed in a dense joint transition table
MAX_JOINT_ENTRIES = 2**28


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_stochastic(table: np.ndarray, what: str) -> np.ndarray:
    """Validate rows of ``table`` (last axis) and renormalize tiny drift."""
    if not np.all(np.isfinite(table)) or np.any(table < 0):
        raise InvalidModelError(f"{what}: entries must be finite and nonnegative")
    sums = table.sum(axis=-1)
    err = np.abs(sums - 1.0)
    if np.all(err <= PROB_ATOL):
        return table
    if np.all(err <= RENORMALIZE_ATOL):
        return table / sums[..., None]
    bad = np.unravel_index(int(np.argmax(err)), err.shape)
    raise InvalidModelError(f"{what}: row {bad} sums to {sums[bad]!r}, not 1")


@dataclass(frozen=True)
class JointIndexer:
    """Mixed-radix encoding between per-agent tuples and joint indices."""

    substate_sizes: tuple[int, ...]
    action_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "substate_sizes", tuple(int(s) for s in self.substate_sizes))
        object.__setattr__(self, "action_sizes", tuple(int(a) for a in self.action_sizes))
        limit = np.iinfo(np.int64).max
        for sizes in (self.substate_sizes, self.action_sizes):
            total = 1
            for s in sizes:
                total *= s
            if total > limit:
                raise StateSpaceTooLargeError(f"joint space of size {total} overflows int64")

    @property
    def n_agents(self) -> int:
        return len(self.substate_sizes)

    @cached_property
    def n_states(self) -> int:
        return int(np.prod(self.substate_sizes, dtype=np.int64)) if self.substate_sizes else 1

    @cached_property
    def n_actions(self) -> int:
        return int(np.prod(self.action_sizes, dtype=np.int64)) if self.action_sizes else 1

    def encode_state(self, substates: Sequence[int]) -> int:
        if not self.substate_sizes:
            return 0
        return int(np.ravel_multi_index(tuple(substates), self.substate_sizes))

    def decode_state(self, index: int) -> tuple[int, ...]:
        if not self.substate_sizes:
            return ()
        return tuple(int(i) for i in np.unravel_index(index, self.substate_sizes))

    def encode_action(self, actions: Sequence[int]) -> int:
        if not self.action_sizes:
            return 0
        return int(np.ravel_multi_index(tuple(actions), self.action_sizes))

    def decode_action(self, index: int) -> tuple[int, ...]:
        if not self.action_sizes:
            return ()
        return tuple(int(i) for i in np.unravel_index(index, self.action_sizes))

    @cached_property
    def state_digits(self) -> np.ndarray:
        """(n_states, N) array of per-agent substates for every joint state."""
        if not self.substate_sizes:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.unravel_index(np.arange(self.n_states), self.substate_sizes)
        return np.stack(grids, axis=1)

    @cached_property
    def action_digits(self) -> np.ndarray:
        """(n_actions, N) array of per-agent actions for every joint action."""
        if not self.action_sizes:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.unravel_index(np.arange(self.n_actions), self.action_sizes)
        return np.stack(grids, axis=1)

    def sub_indexer(self, agents: Sequence[int]) -> "JointIndexer":
        return JointIndexer(
            tuple(self.substate_sizes[n] for n in agents),
            tuple(self.action_sizes[n] for n in agents),
        )

    def project_states(self, agents: Sequence[int]) -> np.ndarray:
        """Index of each joint state within the joint space of ``agents`` only."""
        agents = list(agents)
        if not agents:
            return np.zeros(self.n_states, dtype=np.int64)
        sizes = tuple(self.substate_sizes[n] for n in agents)
        return np.ravel_multi_index(tuple(self.state_digits[:, agents].T), sizes)

    def project_actions(self, agents: Sequence[int]) -> np.ndarray:
        agents = list(agents)
        if not agents:
            return np.zeros(self.n_actions, dtype=np.int64)
        sizes = tuple(self.action_sizes[n] for n in agents)
        return np.ravel_multi_index(tuple(self.action_digits[:, agents].T), sizes)


@dataclass(frozen=True)
class DropoutMask:
    """Realization ``W``: ``flags[n]`` is True when agent ``n`` stays."""

    flags: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "flags", tuple(bool(f) for f in self.flags))

    @classmethod
    def all_active(cls, n_agents: int) -> "DropoutMask":
        return cls((True,) * n_agents)

    @classmethod
    def from_string(cls, text: str) -> "DropoutMask":
        text = text.strip().replace(",", "")
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"mask must be a 0/1 string, got {text!r}")
        return cls(tuple(c == "1" for c in text))

    def __len__(self) -> int:
        return len(self.flags)

    def __str__(self) -> str:
        return "".join("1" if f else "0" for f in self.flags)

    @property
    def active(self) -> tuple[int, ...]:
        return tuple(n for n, f in enumerate(self.flags) if f)

    @property
    def dropped(self) -> tuple[int, ...]:
        return tuple(n for n, f in enumerate(self.flags) if not f)

    @property
    def n_active(self) -> int:
        return sum(self.flags)


@dataclass(frozen=True)
class DropoutModel:
    """Per-agent survival probabilities ``B = (beta_1, ..., beta_N)``."""

    survival_probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(b) for b in self.survival_probs)
        for b in probs:
            if not 0.0 <= b <= 1.0:
                raise InvalidModelError(f"survival probability {b} outside [0, 1]")
        object.__setattr__(self, "survival_probs", probs)

    @classmethod
    def identical(cls, beta: float, n_agents: int) -> "DropoutModel":
        return cls((beta,) * n_agents)

    def __len__(self) -> int:
        return len(self.survival_probs)

    @property
    def identical_beta(self) -> float | None:
        probs = set(self.survival_probs)
        return probs.pop() if len(probs) == 1 else None


@dataclass(frozen=True, eq=False)
class FactoredMdp:
    """Pre-dropout system with per-agent transition factors and rewards.

    Parameters
    ----------
    substate_sizes, action_sizes : sequence of int
        ``|X_n|`` (identical across agents) and ``|A_n|``.
    factors : sequence of ndarray
        ``factors[n][p, a, x']`` is ``P(x_n' = x' | x_pa(n) = p, alpha_n = a)``
        where ``p`` is the mixed-radix index of the parents' substates.
    rewards : sequence of ndarray
        ``rewards[n][x_n, a_n]``, nonnegative and finite.
    discount : float
        ``gamma`` in (0, 1).
    parent_sets : sequence of sequence of int, optional
        Defaults to every agent being a parent of every agent.
    """

    substate_sizes: tuple[int, ...]
    action_sizes: tuple[int, ...]
    factors: tuple[np.ndarray, ...]
    rewards: tuple[np.ndarray, ...]
    discount: float
    parent_sets: tuple[tuple[int, ...], ...] | None = None
    survival_probs: tuple[float, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.substate_sizes)
        if n < 1:
            raise InvalidModelError("need at least one agent")
        sizes = tuple(int(s) for s in self.substate_sizes)
        actions = tuple(int(a) for a in self.action_sizes)
        if len(actions) != n or len(self.factors) != n or len(self.rewards) != n:
            raise InvalidModelError("per-agent lists must all have length n_agents")
        if min(sizes) < 1 or min(actions) < 1:
            raise InvalidModelError("substate and action sizes must be positive")
        if len(set(sizes)) != 1:
            raise InvalidModelError(f"substate sizes must be identical, got {sizes}")
        if not 0.0 < float(self.discount) < 1.0:
            raise InvalidModelError(f"discount {self.discount} outside (0, 1)")
        if self.parent_sets is None:
            parents = tuple(tuple(range(n)) for _ in range(n))
        else:
            parents = tuple(tuple(sorted(int(p) for p in ps)) for ps in self.parent_sets)
            if len(parents) != n or any(p < 0 or p >= n for ps in parents for p in ps):
                raise InvalidModelError("parent sets must index agents 0..N-1")
            if any(len(set(ps)) != len(ps) for ps in parents):
                raise InvalidModelError("parent sets must not repeat agents")
        factors = []
        for k, f in enumerate(self.factors):
            f = np.asarray(f, dtype=float)
            n_parent = int(np.prod([sizes[p] for p in parents[k]], dtype=np.int64))
            if f.shape != (n_parent, actions[k], sizes[k]):
                raise InvalidModelError(
                    f"factor {k} has shape {f.shape}, expected {(n_parent, actions[k], sizes[k])}"
                )
            factors.append(_frozen(_check_stochastic(f, f"factor {k}")))
        rewards = []
        for k, r in enumerate(self.rewards):
            r = np.asarray(r, dtype=float)
            if r.shape != (sizes[k], actions[k]):
                raise InvalidModelError(f"reward {k} has shape {r.shape}")
            if not np.all(np.isfinite(r)) or np.any(r < 0):
                raise InvalidModelError(f"reward {k} must be finite and nonnegative")
            rewards.append(_frozen(r))
        object.__setattr__(self, "substate_sizes", sizes)
        object.__setattr__(self, "action_sizes", actions)
        object.__setattr__(self, "parent_sets", parents)
        object.__setattr__(self, "factors", tuple(factors))
        object.__setattr__(self, "rewards", tuple(rewards))
        object.__setattr__(self, "discount", float(self.discount))
        if self.survival_probs is not None:
            probs = DropoutModel(self.survival_probs).survival_probs
            if len(probs) != n:
                raise InvalidModelError("survival_probs length must equal n_agents")
            object.__setattr__(self, "survival_probs", probs)
        # validates index ranges
        self.indexer

    @property
    def n_agents(self) -> int:
        return len(self.substate_sizes)

    @cached_property
    def indexer(self) -> JointIndexer:
        return JointIndexer(self.substate_sizes, self.action_sizes)

    @property
    def n_states(self) -> int:
        return self.indexer.n_states

    @property
    def n_actions(self) -> int:
        return self.indexer.n_actions

    @property
    def has_local_parents(self) -> bool:
        """True when every agent's transition depends on its own substate at most."""
        return all(set(ps) <= {n} for n, ps in enumerate(self.parent_sets))

    @property
    def r_max(self) -> float:
        return float(sum(r.max() for r in self.rewards))

    @property
    def dropout_model(self) -> DropoutModel | None:
        return None if self.survival_probs is None else DropoutModel(self.survival_probs)

    def parent_index(self, agent: int) -> np.ndarray:
        """Row of ``factors[agent]`` used by every joint state."""
        return self.indexer.project_states(self.parent_sets[agent])

    def transition(self) -> np.ndarray:
        """Cached dense joint transition table, see :func:`build_joint_transition`."""
        if "P" not in self._cache:
            P = build_joint_transition(self)
            P.setflags(write=False)
            self._cache["P"] = P
        return self._cache["P"]

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        d = {
            "n_agents": self.n_agents,
            "substate_sizes": list(self.substate_sizes),
            "action_sizes": list(self.action_sizes),
            "parent_sets": [list(ps) for ps in self.parent_sets],
            "factors": [f.tolist() for f in self.factors],
            "rewards": [r.tolist() for r in self.rewards],
            "discount": self.discount,
        }
        if self.survival_probs is not None:
            d["survival_probs"] = list(self.survival_probs)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FactoredMdp":
        try:
            n = int(d["n_agents"])
            mdp = cls(
                substate_sizes=tuple(d["substate_sizes"]),
                action_sizes=tuple(d["action_sizes"]),
                factors=tuple(np.array(f, dtype=float) for f in d["factors"]),
                rewards=tuple(np.array(r, dtype=float) for r in d["rewards"]),
                discount=float(d["discount"]),
                parent_sets=d.get("parent_sets"),
                survival_probs=d.get("survival_probs"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidModelError(f"malformed system document: {exc}") from exc
        if mdp.n_agents != n:
            raise InvalidModelError("n_agents does not match per-agent lists")
        return mdp

    def save(self, path: str | Path) -> None:
        # json writes floats with repr(), which round-trips exactly
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "FactoredMdp":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise InvalidModelError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(d)


@dataclass(frozen=True, eq=False)
class TabularPolicy:
    """Stochastic policy ``table[s, a]`` over a joint state/action space.

    ``agent_tables`` is set for per-agent product policies, where
    ``agent_tables[n][x_n, a_n]`` is agent ``n``'s local distribution.
    """

    table: np.ndarray
    agent_tables: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 2:
            raise PolicyDimensionError(f"policy table must be 2-D, got shape {t.shape}")
        object.__setattr__(self, "table", _frozen(_check_stochastic(t, "policy")))
        if self.agent_tables is not None:
            object.__setattr__(
                self, "agent_tables", tuple(_frozen(a) for a in self.agent_tables)
            )

    @property
    def kind(self) -> str:
        return "joint" if self.agent_tables is None else "per-agent-product"

    @property
    def n_states(self) -> int:
        return self.table.shape[0]

    @property
    def n_actions(self) -> int:
        return self.table.shape[1]

    @classmethod
    def uniform(cls, indexer: JointIndexer) -> "TabularPolicy":
        tables = [np.full((s, a), 1.0 / a) for s, a in zip(indexer.substate_sizes, indexer.action_sizes)]
        return cls.from_agent_tables(indexer, tables)

    @classmethod
    def deterministic(cls, actions: Sequence[int], n_actions: int) -> "TabularPolicy":
        actions = np.asarray(actions, dtype=np.int64)
        table = np.zeros((len(actions), n_actions))
        table[np.arange(len(actions)), actions] = 1.0
        return cls(table)

    @classmethod
    def from_agent_tables(cls, indexer: JointIndexer, tables: Sequence[np.ndarray]) -> "TabularPolicy":
        tables = [_check_stochastic(np.asarray(t, dtype=float), f"agent policy {n}") for n, t in enumerate(tables)]
        if len(tables) != indexer.n_agents:
            raise PolicyDimensionError("one local table per agent is required")
        table = np.ones((indexer.n_states, indexer.n_actions))
        sd, ad = indexer.state_digits, indexer.action_digits
        for n, t in enumerate(tables):
            if t.shape != (indexer.substate_sizes[n], indexer.action_sizes[n]):
                raise PolicyDimensionError(f"agent table {n} has shape {t.shape}")
            table *= t[sd[:, n][:, None], ad[:, n][None, :]]
        return cls(table, tuple(tables))

    def is_deterministic(self) -> bool:
        return bool(np.all((self.table == 0.0) | (self.table == 1.0)))


def random_policy(indexer: JointIndexer, rng: np.random.Generator, product: bool = True) -> TabularPolicy:
    """Dirichlet(1) random policy, per-agent product by default."""
    if product:
        tables = [rng.dirichlet(np.ones(a), size=s) for s, a in zip(indexer.substate_sizes, indexer.action_sizes)]
        return TabularPolicy.from_agent_tables(indexer, tables)
    return TabularPolicy(rng.dirichlet(np.ones(indexer.n_actions), size=indexer.n_states))


# -- operations ---------------------------------------------------------

def build_joint_transition(mdp: FactoredMdp, max_entries: int = MAX_JOINT_ENTRIES) -> np.ndarray:
    """Dense ``P[s, a, s']`` as the product of the per-agent factors."""
    S, A = mdp.n_states, mdp.n_actions
    if S * A * S > max_entries:
        raise StateSpaceTooLargeError(
            f"joint transition table would need {S * A * S} entries (limit {max_entries})"
        )
    N = mdp.n_agents
    # axes: s, a_1..a_N, x'_1..x'_N
    P = np.ones((S,) + mdp.action_sizes + mdp.substate_sizes)
    for n in range(N):
        local = mdp.factors[n][mdp.parent_index(n)]  # (S, A_n, X_n)
        shape = [S] + [1] * (2 * N)
        shape[1 + n] = mdp.action_sizes[n]
        shape[1 + N + n] = mdp.substate_sizes[n]
        P = P * local.reshape(shape)
    return P.reshape(S, A, S)


def masked_reward(mdp: FactoredMdp, mask: DropoutMask) -> np.ndarray:
    """``r(x, alpha | W)[s, a]``: only surviving agents are rewarded."""
    if len(mask) != mdp.n_agents:
        raise PolicyDimensionError(f"mask has {len(mask)} flags for {mdp.n_agents} agents")
    return weighted_reward(mdp, [1.0 if f else 0.0 for f in mask.flags])


def robust_reward(mdp: FactoredMdp, model: DropoutModel) -> np.ndarray:
    """``r^R[s, a] = sum_n beta_n r_n(x_n, alpha_n)``."""
    if len(model) != mdp.n_agents:
        raise PolicyDimensionError(f"model has {len(model)} probabilities for {mdp.n_agents} agents")
    return weighted_reward(mdp, model.survival_probs)


def weighted_reward(mdp: FactoredMdp, weights: Sequence[float]) -> np.ndarray:
    """``sum_n weights[n] r_n(x_n, alpha_n)`` as an ``(S, A)`` table."""
    idx = mdp.indexer
    sd, ad = idx.state_digits, idx.action_digits
    R = np.zeros((idx.n_states, idx.n_actions))
    for n, w in enumerate(weights):
        if w != 0.0:
            R += w * mdp.rewards[n][sd[:, n][:, None], ad[:, n][None, :]]
    return R


def augment_policy(reduced: TabularPolicy, mask: DropoutMask, mdp: FactoredMdp) -> TabularPolicy:
    """Lift a survivors-only policy to the full system.

    Dropped agents act uniformly at random; ``reduced`` is indexed by the
    survivors' joint state and joint action.
    """
    if len(mask) != mdp.n_agents:
        raise PolicyDimensionError(f"mask has {len(mask)} flags for {mdp.n_agents} agents")
    idx = mdp.indexer
    sub = idx.sub_indexer(mask.active)
    if reduced.table.shape != (sub.n_states, sub.n_actions):
        raise PolicyDimensionError(
            f"reduced policy has shape {reduced.table.shape}, survivors of mask {mask} "
            f"need {(sub.n_states, sub.n_actions)}"
        )
    if not mask.dropped:
        return reduced
    s_bar = idx.project_states(mask.active)
    a_bar = idx.project_actions(mask.active)
    n_dropped_actions = int(np.prod([mdp.action_sizes[n] for n in mask.dropped]))
    table = reduced.table[s_bar[:, None], a_bar[None, :]] / n_dropped_actions
    agent_tables = None
    if reduced.agent_tables is not None:
        it = iter(reduced.agent_tables)
        agent_tables = [
            next(it) if f else np.full((mdp.substate_sizes[n], mdp.action_sizes[n]), 1.0 / mdp.action_sizes[n])
            for n, f in enumerate(mask.flags)
        ]
    return TabularPolicy(table, None if agent_tables is None else tuple(agent_tables))


def uniformize_dropped(policy: TabularPolicy, mask: DropoutMask, mdp: FactoredMdp) -> TabularPolicy:
    """Keep the survivors' action marginal of a full policy, dropped agents uniform.

    Unlike :func:`augment_policy` the survivors' marginal may still depend
    on the dropped agents' substates.
    """
    idx = mdp.indexer
    a_bar = idx.project_actions(mask.active)
    n_bar = idx.sub_indexer(mask.active).n_actions
    marginal = np.zeros((idx.n_states, n_bar))
    for a in range(idx.n_actions):
        marginal[:, a_bar[a]] += policy.table[:, a]
    n_dropped_actions = idx.n_actions // n_bar
    table = marginal[:, a_bar] / n_dropped_actions
    agent_tables = None
    if policy.agent_tables is not None:
        agent_tables = tuple(
            t if f else np.full_like(t, 1.0 / t.shape[1]) for t, f in zip(policy.agent_tables, mask.flags)
        )
    return TabularPolicy(table, agent_tables)


def restrict_policy(policy: TabularPolicy, mask: DropoutMask, mdp: FactoredMdp) -> TabularPolicy:
    """Survivors-only policy induced by a full policy.

    Product policies restrict to the product of the survivors' tables. A
    joint policy restricts only if the survivors' action marginal does not
    depend on the dropped agents' substates.
    """
    idx = mdp.indexer
    sub = idx.sub_indexer(mask.active)
    if policy.agent_tables is not None:
        tables = [policy.agent_tables[n] for n in mask.active]
        if not tables:
            return TabularPolicy(np.ones((1, 1)))
        return TabularPolicy.from_agent_tables(sub, tables)
    a_bar = idx.project_actions(mask.active)
    s_bar = idx.project_states(mask.active)
    marginal = np.zeros((idx.n_states, sub.n_actions))
    for a in range(idx.n_actions):
        marginal[:, a_bar[a]] += policy.table[:, a]
    reduced = np.zeros((sub.n_states, sub.n_actions))
    reduced[s_bar] = marginal
    if not np.allclose(reduced[s_bar], marginal, atol=1e-12, rtol=0):
        raise PolicyDimensionError(
            f"policy's survivor marginal depends on the substates of dropped agents {mask.dropped}"
        )
    return TabularPolicy(reduced)


def mask_probability(mask: DropoutMask, model: DropoutModel) -> float:
    """``prod_n beta_n^{w_n} (1 - beta_n)^{1 - w_n}``.

    Survivor factors are multiplied first, then dropped factors, each in
    agent order; with identical probabilities this matches
    :func:`identical_mask_probability` bit for bit.
    """
    if len(mask) != len(model):
        raise PolicyDimensionError("mask and dropout model lengths differ")
    p_alive = 1.0
    p_dropped = 1.0
    for w, b in zip(mask.flags, model.survival_probs):
        if w:
            p_alive *= b
        else:
            p_dropped *= 1.0 - b
    return p_alive * p_dropped


def identical_mask_probability(n_active: int, n_dropped: int, beta: float) -> float:
    """``beta^{|W=1|} (1 - beta)^{|W=0|}`` by repeated multiplication."""
    p_alive = 1.0
    for _ in range(n_active):
        p_alive *= beta
    p_dropped = 1.0
    q = 1.0 - beta
    for _ in range(n_dropped):
        p_dropped *= q
    return p_alive * p_dropped


def enumerate_masks(n_agents: int, cap: int = MAX_MASK_AGENTS) -> list[DropoutMask]:
    """All ``2^N`` masks in lexicographic order of their flag vectors."""
    if n_agents > cap:
        raise MaskCapExceededError(
            f"{n_agents} agents give 2^{n_agents} masks, above the cap of 2^{cap}; "
            "sample masks by Monte Carlo instead"
        )
    return [DropoutMask(bits) for bits in itertools.product((False, True), repeat=n_agents)]


def induced_chain(P: np.ndarray, policy: TabularPolicy) -> np.ndarray:
    """State-to-state matrix ``P_pi[s, s'] = sum_a pi(a|s) P[s, a, s']``."""
    return np.einsum("sa,sat->st", policy.table, P)


def policy_reward(R: np.ndarray, policy: TabularPolicy) -> np.ndarray:
    return np.einsum("sa,sa->s", policy.table, R)
