"""Importance-sampling evaluation of post-dropout policies from pre-dropout data.

One dataset serves every realization: logged states and actions are reused,
while rewards are recomputed from the reward table of the realization (or
of the robust system) being evaluated.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal, Mapping

import numpy as np

from .errors import PolicyDimensionError, SupportViolationError
from .exact_solver import ValueTable, broadcast_reduced
from .mdp_core import (
    DropoutMask,
    DropoutModel,
    FactoredMdp,
    TabularPolicy,
    enumerate_masks,
    identical_mask_probability,
    mask_probability,
)
from .simulator import Dataset, EmpiricalDistribution, Trajectory, marginalize_empirical

Variant = Literal["ordinary", "per-decision", "weighted", "doubly-robust"]
VARIANTS: tuple[str, ...] = ("ordinary", "per-decision", "weighted", "doubly-robust")


@dataclass(frozen=True, eq=False)
class ISEstimate:
    """Per-start-state estimates of the discounted ``H``-step return.

    ``j_max`` is a deterministic upper bound on every ordinary or
    per-decision estimate from this dataset/policy pair.
    """

    starts: np.ndarray
    values: np.ndarray
    variant: str
    horizon: int
    n_per_start: int
    gamma: float
    j_max: float
    v_max: float

    def full_table(self, n_states: int) -> np.ndarray:
        """Estimates indexed by joint state; raises if any state has no estimate."""
        missing = sorted(set(range(n_states)) - {int(s) for s in self.starts})
        if missing:
            raise ValueError(f"no estimate for start states {missing}")
        out = np.empty(n_states)
        out[self.starts] = self.values
        return out

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "horizon": self.horizon,
            "n_per_start": self.n_per_start,
            "gamma": self.gamma,
            "j_max": self.j_max,
            "v_max": self.v_max,
            "starts": [int(s) for s in self.starts],
            "values": [float(v) for v in self.values],
        }


@dataclass(frozen=True, eq=False)
class ModelEstimate:
    """Empirical transition frequencies ``P_hat[s, a, s']`` and visit counts."""

    transition: np.ndarray
    counts: np.ndarray
    visited: np.ndarray
    rewards: np.ndarray


def _log_step_ratios(
    states: np.ndarray, actions: np.ndarray, behavioral: TabularPolicy, target: TabularPolicy
) -> np.ndarray:
    """``log target(a|x) - log behavioral(a|x)`` per logged step (``-inf`` where target is 0)."""
    if behavioral.table.shape != target.table.shape:
        raise PolicyDimensionError("behavioral and target policies have different shapes")
    pb = behavioral.table[states, actions]
    pt = target.table[states, actions]
    bad = (pb == 0.0) & (pt > 0.0)
    if np.any(bad):
        where = tuple(int(i) for i in np.argwhere(bad)[0])
        raise SupportViolationError(
            f"support violation at step {where[-1]} (index {where}): state {int(states[where])}, "
            f"action {int(actions[where])} has target probability {pt[where]:.3g} "
            "but behavioral probability 0"
        )
    with np.errstate(divide="ignore"):
        return np.log(pt) - np.log(np.where(pb > 0, pb, 1.0))


def is_ratio(traj: Trajectory, behavioral: TabularPolicy, target: TabularPolicy) -> float:
    """``prod_t target(a_t|x_t) / behavioral(a_t|x_t)`` along ``traj``."""
    lr = _log_step_ratios(traj.states, traj.actions, behavioral, target)
    return float(np.exp(lr.sum()))


def max_step_ratio(states, actions, behavioral: TabularPolicy, target: TabularPolicy) -> float:
    """Largest realized per-step ratio, floored at 1."""
    lr = _log_step_ratios(states, actions, behavioral, target)
    return float(max(1.0, np.exp(lr.max()))) if lr.size else 1.0


def v_max_horizon(reward_fn: np.ndarray, gamma: float, H: int) -> float:
    """``(1 - gamma^H) / (1 - gamma) * max reward``."""
    return (1.0 - gamma**H) / (1.0 - gamma) * float(np.max(reward_fn))


def learn_model(dataset: Dataset, n_states: int, n_actions: int, first_visit: bool = True) -> ModelEstimate:
    """Frequency model of the transitions in ``dataset``.

    With ``first_visit`` each trajectory contributes, for each ``(x, a)``,
    only the transition following its first occurrence. The last logged
    step has no observed successor and is not counted. Rows without a
    counted transition are zero and flagged in ``visited``.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    H = dataset.horizon
    x = dataset.states.reshape(-1, H)
    sa = x * n_actions + dataset.actions.reshape(-1, H)
    n_traj = len(x)
    n_sa = n_states * n_actions
    if first_visit:
        key = (np.arange(n_traj)[:, None] * n_sa + sa).ravel()
        _, first = np.unique(key, return_index=True)
        rows, cols = np.divmod(first, H)
    else:
        rows, cols = np.divmod(np.arange(n_traj * H), H)
    keep = cols < H - 1
    rows, cols = rows[keep], cols[keep]
    src, dst = sa[rows, cols], x[rows, cols + 1]
    counts = np.bincount(src * n_states + dst, minlength=n_sa * n_states).astype(float)
    counts = counts.reshape(n_states, n_actions, n_states)
    totals = counts.sum(axis=2)
    visited = totals > 0
    P_hat = np.divide(counts, totals[..., None], out=np.zeros_like(counts), where=visited[..., None])
    R_obs = np.zeros(n_sa)
    R_obs[sa.ravel()] = dataset.rewards.ravel()
    return ModelEstimate(P_hat, counts, visited, R_obs.reshape(n_states, n_actions))


def _dr_baselines(model: ModelEstimate, reward_fn: np.ndarray, gamma: float, target: TabularPolicy, H: int):
    """Horizon-indexed ``Q_hat[h]`` and ``V_hat[h]`` (``h`` steps to go) on the learned model."""
    S, A = reward_fn.shape
    Q = np.zeros((H + 1, S, A))
    V = np.zeros((H + 1, S))
    for h in range(1, H + 1):
        q = reward_fn + gamma * (model.transition @ V[h - 1])
        Q[h] = np.where(model.visited, q, 0.0)
        V[h] = np.einsum("sa,sa->s", target.table, Q[h])
    return Q, V


def per_trajectory_estimates(
    states: np.ndarray,
    actions: np.ndarray,
    behavioral: TabularPolicy,
    target: TabularPolicy,
    reward_fn: np.ndarray,
    gamma: float,
    variant: str,
    baselines: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trajectory terms and log ratios for arrays shaped ``(..., H)``.

    Returns ``(terms, log_rho)``; ``weighted`` returns the plain discounted
    returns as terms, to be self-normalized by the caller.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown estimator variant {variant!r}; expected one of {VARIANTS}")
    H = states.shape[-1]
    lr = _log_step_ratios(states, actions, behavioral, target)
    cum = np.cumsum(lr, axis=-1)
    rho_t = np.exp(cum)
    disc = gamma ** np.arange(H)
    r = reward_fn[states, actions]
    log_rho = cum[..., -1]
    if variant == "ordinary":
        return np.exp(log_rho) * (r * disc).sum(axis=-1), log_rho
    if variant == "weighted":
        return (r * disc).sum(axis=-1), log_rho
    if variant == "per-decision":
        return (disc * rho_t * r).sum(axis=-1), log_rho
    Q, V = baselines
    steps_to_go = H - np.arange(H)
    q = Q[steps_to_go, states, actions]
    v = V[steps_to_go, states]
    rho_prev = np.concatenate([np.ones(rho_t.shape[:-1] + (1,)), rho_t[..., :-1]], axis=-1)
    terms = disc * (rho_t * (r - q) + rho_prev * v)
    return terms.sum(axis=-1), log_rho


def estimate_J(
    dataset: Dataset,
    behavioral: TabularPolicy,
    target: TabularPolicy,
    reward_fn: np.ndarray,
    gamma: float,
    variant: Variant = "ordinary",
    model: ModelEstimate | None = None,
) -> ISEstimate:
    """IS estimate of the ``H``-step discounted return of ``target`` from each start state.

    Parameters
    ----------
    reward_fn : ndarray
        ``(S, A)`` reward table evaluated at the logged pairs; logged rewards are ignored.
    variant : {"ordinary", "per-decision", "weighted", "doubly-robust"}
        ``weighted`` is the self-normalized ordinary estimator (0 when every
        ratio vanishes). ``doubly-robust`` uses the stepwise control variate
        with ``Q_hat`` from backward induction on ``model`` (learned from
        ``dataset`` with first-visit counts if omitted).
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    S, A = reward_fn.shape
    H = dataset.horizon
    baselines = None
    if variant == "doubly-robust":
        model = model or learn_model(dataset, S, A)
        baselines = _dr_baselines(model, reward_fn, gamma, target, H)
    terms, log_rho = per_trajectory_estimates(
        dataset.states, dataset.actions, behavioral, target, reward_fn, gamma, variant, baselines
    )
    if variant == "weighted":
        # rescale by the row maximum; ratios only matter relative to each other
        with np.errstate(invalid="ignore"):
            rho = np.exp(log_rho - log_rho.max(axis=1, keepdims=True))
        rho = np.nan_to_num(rho, nan=0.0)
        den = rho.sum(axis=1)
        values = np.divide((rho * terms).sum(axis=1), den, out=np.zeros(len(den)), where=den > 0)
    else:
        values = terms.mean(axis=1)
    v_max = v_max_horizon(reward_fn, gamma, H)
    rho_max = max_step_ratio(dataset.states, dataset.actions, behavioral, target)
    with np.errstate(over="ignore"):
        j_max = float(np.exp(H * np.log(rho_max)) * v_max)
    return ISEstimate(dataset.starts.copy(), values, variant, H, dataset.n_per_start, gamma, j_max, v_max)


def estimate_realization_value(
    J_hat: ISEstimate, mu_hat: EmpiricalDistribution, mask: DropoutMask, mdp: FactoredMdp
) -> ValueTable:
    """``V_hat(xbar | W) = sum_{x_-} mu_hat(x_-) J_hat(xbar, x_-)`` on survivors' states."""
    idx = mdp.indexer
    J = J_hat.full_table(idx.n_states)
    if not mask.dropped:
        return ValueTable(J, J_hat.horizon, f"masked({mask})")
    mu_minus = marginalize_empirical(mu_hat, mask, idx)
    s_bar = idx.project_states(mask.active)
    s_minus = idx.project_states(mask.dropped)
    n_bar = idx.sub_indexer(mask.active).n_states
    return ValueTable(
        np.bincount(s_bar, weights=mu_minus[s_minus] * J, minlength=n_bar), J_hat.horizon, f"masked({mask})"
    )


def estimate_robust_value(
    per_mask: Mapping[DropoutMask, np.ndarray], model: DropoutModel, mdp: FactoredMdp
) -> np.ndarray:
    """``sum_W p(W) V_hat(xbar_W | W)`` on joint states.

    Masks are visited in lexicographic order. With identical survival
    probabilities the mask weight is ``beta^|W=1| (1 - beta)^|W=0|``, which
    reproduces the general product exactly.
    """
    beta = model.identical_beta
    total = np.zeros(mdp.n_states)
    for mask in enumerate_masks(mdp.n_agents):
        if beta is not None:
            p = identical_mask_probability(mask.n_active, len(mask) - mask.n_active, beta)
        else:
            p = mask_probability(mask, model)
        if p == 0.0:
            continue
        if mask not in per_mask:
            raise KeyError(f"no estimate for mask {mask} with probability {p}")
        total += p * broadcast_reduced(mdp, mask, np.asarray(per_mask[mask]))
    return total


def estimate_report(estimate: ISEstimate, H_mu: int, bound: Mapping | None = None) -> str:
    """JSON record of an estimate and the bound parameters that go with it."""
    d = estimate.to_dict()
    d["H_mu"] = H_mu
    if bound is not None:
        d["bound"] = dict(bound)
    return json.dumps(d)
