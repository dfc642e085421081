"""Exact dynamic programming on joint tables.

Value iteration, exact policy evaluation, stationary distributions and
mixing times, plus the dropout-specific quantities built on them: values of
a realized post-dropout system, the robust (dropout-expected) system and the
optimality gap of the robust policy.

Realized systems are handled through the *fictitious* system: the full
state and action space with the true transitions, zero reward for dropped
agents and uniformly random actions for them. Values on the survivors'
states are obtained by averaging over the dropped agents' substates with the
exact stationary distribution of that chain.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import BoundViolationError, ConvergenceError, ErgodicityError, PolicyDimensionError
from .mdp_core import (
    DropoutMask,
    DropoutModel,
    FactoredMdp,
    TabularPolicy,
    augment_policy,
    enumerate_masks,
    induced_chain,
    mask_probability,
    masked_reward,
    policy_reward,
    restrict_policy,
    robust_reward,
    uniformize_dropped,
    weighted_reward,
)

VI_TOL = 1e-10
STATIONARY_TOL = 1e-12
MAX_ITER = 10**6


@dataclass(frozen=True, eq=False)
class ValueTable:
    """State values with the horizon and reward variant that produced them.

    ``horizon`` is ``None`` for the infinite discounted horizon.
    """

    values: np.ndarray
    horizon: int | None = None
    reward_variant: str = "pre-dropout"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of value iteration."""

    values: np.ndarray
    policy: np.ndarray
    iterations: int
    residual: float
    converged: bool
    residuals: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    local_values: tuple[np.ndarray, ...] | None = None

    def greedy_policy(self, n_actions: int) -> TabularPolicy:
        return TabularPolicy.deterministic(self.policy, n_actions)

    def to_dict(self) -> dict:
        return {
            "values": [float(v) for v in self.values],
            "policy": [int(a) for a in self.policy],
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "converged": bool(self.converged),
        }

    def to_json(self) -> str:
        # repr() of a float is its shortest round-tripping form (<= 17 digits)
        return json.dumps(self.to_dict())


# -- generic tabular routines --------------------------------------------

def bellman_q(P: np.ndarray, R: np.ndarray, gamma: float, V: np.ndarray) -> np.ndarray:
    return R + gamma * (P @ V)


def value_iteration(
    P: np.ndarray,
    R: np.ndarray,
    gamma: float,
    tol: float = VI_TOL,
    max_iter: int = MAX_ITER,
    V0: np.ndarray | None = None,
) -> SolveReport:
    """Optimal values of ``(P[s, a, s'], R[s, a], gamma)`` by value iteration.

    Stops once the sup-norm change between sweeps is at most ``tol``; the
    returned ``V`` then satisfies ``||TV - V|| <= gamma * tol``. Greedy
    actions break ties toward the lowest joint-action index.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"discount {gamma} outside (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    V = np.zeros(P.shape[0]) if V0 is None else np.array(V0, dtype=float)
    history = []
    residual = np.inf
    it = 0
    while it < max_iter:
        V_new = bellman_q(P, R, gamma, V).max(axis=1)
        residual = float(np.max(np.abs(V_new - V))) if V.size else 0.0
        history.append(residual)
        V = V_new
        it += 1
        if residual <= tol:
            break
    Q = bellman_q(P, R, gamma, V)
    return SolveReport(
        values=V,
        policy=np.argmax(Q, axis=1),
        iterations=it,
        residual=residual,
        converged=residual <= tol,
        residuals=np.array(history),
    )


def policy_evaluation_exact(
    P: np.ndarray, R: np.ndarray, gamma: float, policy: TabularPolicy
) -> ValueTable:
    """Solve ``V = r_pi + gamma P_pi V`` directly."""
    _check_policy_shape(policy, P)
    P_pi = induced_chain(P, policy)
    r_pi = policy_reward(R, policy)
    V = np.linalg.solve(np.eye(len(r_pi)) - gamma * P_pi, r_pi)
    residual = np.max(np.abs(r_pi + gamma * P_pi @ V - V))
    if not np.isfinite(residual) or residual > 1e-10 * max(1.0, np.max(np.abs(V))):
        raise ConvergenceError(f"linear policy evaluation residual {residual:.3g}")
    return ValueTable(V)


def policy_evaluation_finite(
    P: np.ndarray, R: np.ndarray, gamma: float, policy: TabularPolicy, horizon: int
) -> ValueTable:
    """``V_H(x) = E[sum_{t=0}^{H-1} gamma^t r_t | x_0 = x]`` by backward induction."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    _check_policy_shape(policy, P)
    P_pi = induced_chain(P, policy)
    r_pi = policy_reward(R, policy)
    V = np.zeros(len(r_pi))
    for _ in range(horizon):
        V = r_pi + gamma * (P_pi @ V)
    return ValueTable(V, horizon=horizon)


def finite_horizon_q(
    P: np.ndarray, R: np.ndarray, gamma: float, policy: TabularPolicy, horizon: int
) -> np.ndarray:
    """``Q[h, s, a]``: value of taking ``a`` with ``h`` steps to go, then following ``policy``.

    ``Q[0]`` is zero; shape is ``(horizon + 1, S, A)``.
    """
    S, A = R.shape
    Q = np.zeros((horizon + 1, S, A))
    V = np.zeros(S)
    for h in range(1, horizon + 1):
        Q[h] = R + gamma * (P @ V)
        V = np.einsum("sa,sa->s", policy.table, Q[h])
    return Q


def _check_policy_shape(policy: TabularPolicy, P: np.ndarray) -> None:
    if policy.table.shape != P.shape[:2]:
        raise PolicyDimensionError(
            f"policy shape {policy.table.shape} does not match system {P.shape[:2]}"
        )


def _has_unique_aperiodic_class(P: np.ndarray) -> bool:
    """True when some state is reachable from every state in exactly ``m`` steps
    for a large ``m``, i.e. one closed class and it is aperiodic."""
    n = P.shape[0]
    B = (P > 0).astype(np.float64)
    power = 1
    target = max(1, (n - 1) ** 2 + 1)
    while power < target:
        B = ((B @ B) > 0).astype(np.float64)
        power *= 2
    return bool(np.any(B.min(axis=0) > 0))


def stationary_distribution(
    P_pi: np.ndarray, tol: float = STATIONARY_TOL, max_iter: int = MAX_ITER
) -> np.ndarray:
    """Stationary distribution by power iteration from the uniform start.

    Raises
    ------
    ErgodicityError
        If the chain is periodic or has several closed classes (checked on
        the support pattern first, since a periodic chain may already be at
        its stationary point when started uniformly), or if power iteration
        does not settle within ``max_iter`` steps.
    """
    n = P_pi.shape[0]
    if not _has_unique_aperiodic_class(P_pi):
        raise ErgodicityError("ergodicity violated: chain is periodic or reducible")
    mu = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = mu @ P_pi
        nxt /= nxt.sum()
        if np.abs(nxt - mu).sum() <= tol:
            return nxt
        mu = nxt
    raise ErgodicityError(f"ergodicity violated: power iteration did not settle in {max_iter} steps")


def tv_distance(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Total-variation distance along the last axis."""
    return 0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum(axis=-1)


def mixing_time(P_pi: np.ndarray, mu: np.ndarray, threshold: float = 0.25, cap: int = MAX_ITER) -> int:
    """Smallest ``t >= 1`` with ``max_x TV(P^t(x, .), mu) <= threshold``."""
    Pt = np.array(P_pi, dtype=float)
    for t in range(1, cap + 1):
        if tv_distance(Pt, mu[None, :]).max() <= threshold:
            return t
        Pt = Pt @ P_pi
    raise ConvergenceError(f"mixing time exceeds cap {cap}")


# -- factored and dropout-specific quantities ------------------------------

def factored_value_iteration(mdp: FactoredMdp, tol: float = VI_TOL, max_iter: int = MAX_ITER) -> SolveReport:
    """Optimal values from per-agent local value iteration.

    With separable rewards and agents whose transitions depend only on their
    own substate, the joint optimum is the sum of the agents' local optima.
    Each local problem runs to ``tol / N`` so the sum meets ``tol``.
    """
    if not mdp.has_local_parents:
        raise ValueError(
            "factored value iteration is exact only when every agent's parents are itself "
            f"(parent sets {mdp.parent_sets}); use value_iteration on the joint table"
        )
    N = mdp.n_agents
    idx = mdp.indexer
    local_values, local_policies, iters, residual, converged = [], [], 0, 0.0, True
    for n in range(N):
        T = mdp.factors[n]
        if T.shape[0] == 1:
            T = np.broadcast_to(T, (mdp.substate_sizes[n],) + T.shape[1:])
        rep = value_iteration(T, mdp.rewards[n], mdp.discount, tol=tol / N, max_iter=max_iter)
        local_values.append(rep.values)
        local_policies.append(rep.policy)
        iters = max(iters, rep.iterations)
        residual += rep.residual
        converged &= rep.converged
    sd = idx.state_digits
    V = sum(local_values[n][sd[:, n]] for n in range(N))
    actions = np.stack([local_policies[n][sd[:, n]] for n in range(N)], axis=1)
    policy = np.ravel_multi_index(tuple(actions.T), mdp.action_sizes)
    return SolveReport(
        values=V,
        policy=np.asarray(policy),
        iterations=iters,
        residual=residual,
        converged=converged,
        local_values=tuple(local_values),
    )


def marginalize_values(mdp: FactoredMdp, mask: DropoutMask, J: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """``V(xbar) = sum_{x_-} mu(x_-) J(xbar, x_-)`` on the survivors' joint states."""
    idx = mdp.indexer
    s_bar = idx.project_states(mask.active)
    s_minus = idx.project_states(mask.dropped)
    n_bar = idx.sub_indexer(mask.active).n_states
    mu_minus = np.bincount(s_minus, weights=mu, minlength=idx.n_states // n_bar)
    return np.bincount(s_bar, weights=mu_minus[s_minus] * J, minlength=n_bar)


def _evaluate(mdp: FactoredMdp, R: np.ndarray, policy: TabularPolicy, horizon: int | None) -> np.ndarray:
    P = mdp.transition()
    if horizon is None:
        return policy_evaluation_exact(P, R, mdp.discount, policy).values
    return policy_evaluation_finite(P, R, mdp.discount, policy, horizon).values


def realization_value_full(
    mdp: FactoredMdp,
    mask: DropoutMask,
    policy: TabularPolicy,
    horizon: int | None = None,
    mu: np.ndarray | None = None,
) -> ValueTable:
    """Realized value of a policy over the *full* state space.

    Dropped agents' actions are replaced by uniform ones while the
    survivors keep their action marginal, which may depend on the whole
    joint state in the fictitious system.
    """
    return _realization_from_full(mdp, mask, uniformize_dropped(policy, mask, mdp), horizon, mu)


def realization_value(
    mdp: FactoredMdp,
    mask: DropoutMask,
    reduced_policy: TabularPolicy,
    horizon: int | None = None,
    mu: np.ndarray | None = None,
) -> ValueTable:
    """Value of a survivors-only policy on realization ``mask``.

    Parameters
    ----------
    reduced_policy : TabularPolicy
        Policy over the survivors' joint states and actions.
    horizon : int, optional
        Finite horizon ``H``; infinite discounted horizon when omitted.
    mu : ndarray, optional
        Joint-state distribution used to average out dropped substates.
        Defaults to the exact stationary distribution of the full chain under
        the augmented policy.

    Returns
    -------
    ValueTable
        Values indexed by the survivors' mixed-radix joint state.
    """
    return _realization_from_full(mdp, mask, augment_policy(reduced_policy, mask, mdp), horizon, mu)


def _realization_from_full(mdp, mask, full_policy, horizon, mu) -> ValueTable:
    J = _evaluate(mdp, masked_reward(mdp, mask), full_policy, horizon)
    variant = f"masked({mask})"
    if not mask.dropped:
        return ValueTable(J, horizon, variant)
    if mu is None:
        mu = stationary_distribution(induced_chain(mdp.transition(), full_policy))
    return ValueTable(marginalize_values(mdp, mask, J, np.asarray(mu, dtype=float)), horizon, variant)


def robust_value(
    mdp: FactoredMdp, model: DropoutModel, policy: TabularPolicy, horizon: int | None = None
) -> ValueTable:
    """Value of ``policy`` on the robust system (rewards scaled by survival odds).

    This is the dropout-expected value of the pre-dropout controller at
    every joint state. :func:`expected_realization_value` computes the same
    quantity mask by mask; the two agree whenever every agent's transition
    depends on its own substate only and the policy is a per-agent product.
    """
    return ValueTable(_evaluate(mdp, robust_reward(mdp, model), policy, horizon), horizon, "robust")


def broadcast_reduced(mdp: FactoredMdp, mask: DropoutMask, reduced_values: np.ndarray) -> np.ndarray:
    """Lift survivor-state values to the joint states that share those substates."""
    return np.asarray(reduced_values)[mdp.indexer.project_states(mask.active)]


def expected_realization_value(
    mdp: FactoredMdp, model: DropoutModel, policy: TabularPolicy, horizon: int | None = None
) -> ValueTable:
    """``sum_W p(W) V(xbar_W | W)`` by enumerating masks.

    Each realization uses the policy's restriction to the survivors, so the
    policy must be a per-agent product or otherwise not depend on dropped
    agents' substates. Masks with zero probability are skipped.
    """
    total = np.zeros(mdp.n_states)
    for mask in enumerate_masks(mdp.n_agents):
        p = mask_probability(mask, model)
        if p == 0.0:
            continue
        reduced = restrict_policy(policy, mask, mdp)
        vbar = realization_value(mdp, mask, reduced, horizon).values
        total += p * broadcast_reduced(mdp, mask, vbar)
    return ValueTable(total, horizon, "expected-realization")


def _survivor_action_transition(mdp: FactoredMdp, mask: DropoutMask) -> np.ndarray:
    """``P[s, abar, s']`` with the dropped agents' actions averaged out."""
    P = mdp.transition()
    S = mdp.n_states
    P = P.reshape((S,) + mdp.action_sizes + (S,))
    axes = tuple(1 + n for n in mask.dropped)
    if axes:
        P = P.mean(axis=axes)
    return P.reshape(S, -1, S)


def _survivor_reward(mdp: FactoredMdp, weights) -> np.ndarray:
    active = [n for n, w in enumerate(weights) if w != 0.0]
    R = weighted_reward(mdp, weights)
    S = mdp.n_states
    R = R.reshape((S,) + mdp.action_sizes)
    dropped = tuple(1 + n for n in range(mdp.n_agents) if n not in active)
    return R.mean(axis=dropped).reshape(S, -1) if dropped else R.reshape(S, -1)


@dataclass(frozen=True, eq=False)
class RealizationOptimum:
    """Optimal control of one realization, computed on the fictitious system."""

    mask: DropoutMask
    values: ValueTable  # survivors' states, marginalized
    full_values: np.ndarray  # fictitious-system optimum on joint states
    policy: TabularPolicy  # full-space policy, dropped agents uniform
    survivor_actions: np.ndarray  # greedy survivor joint action per joint state
    mu: np.ndarray | None


def realization_optimal(
    mdp: FactoredMdp, mask: DropoutMask, tol: float = VI_TOL, max_iter: int = MAX_ITER
) -> RealizationOptimum:
    """Optimal value of realization ``mask``.

    Survivors maximize over their joint action while dropped agents act
    uniformly; the resulting joint-state optimum is averaged over dropped
    substates with the stationary distribution of the optimally controlled
    chain.
    """
    idx = mdp.indexer
    P_bar = _survivor_action_transition(mdp, mask)
    R_bar = _survivor_reward(mdp, [1.0 if f else 0.0 for f in mask.flags])
    rep = value_iteration(P_bar, R_bar, mdp.discount, tol=tol, max_iter=max_iter)
    a_bar = idx.project_actions(mask.active)
    n_dropped_actions = idx.n_actions // P_bar.shape[1]
    table = (a_bar[None, :] == rep.policy[:, None]) / n_dropped_actions
    full = TabularPolicy(table)
    if not mask.dropped:
        return RealizationOptimum(mask, ValueTable(rep.values, None, f"masked({mask})"), rep.values, full, rep.policy, None)
    mu = stationary_distribution(induced_chain(mdp.transition(), full))
    vbar = marginalize_values(mdp, mask, rep.values, mu)
    return RealizationOptimum(mask, ValueTable(vbar, None, f"masked({mask})"), rep.values, full, rep.policy, mu)


CertainDropout = Literal["greedy", "uniform"]


def robust_optimal(
    mdp: FactoredMdp,
    model: DropoutModel,
    tol: float = VI_TOL,
    max_iter: int = MAX_ITER,
    certain_dropout: CertainDropout = "greedy",
) -> SolveReport:
    """Optimal policy and value of the robust system.

    Parameters
    ----------
    certain_dropout : {"greedy", "uniform"}
        ``"greedy"`` runs plain value iteration on the robust rewards.
        ``"uniform"`` instead fixes every agent with zero survival odds to
        uniformly random actions and optimizes the rest; with all odds zero
        this is the uniform policy. ``policy`` then holds full joint-action
        indices of the lowest surviving completion and ``table`` the exact
        stochastic policy.
    """
    if certain_dropout == "greedy":
        return value_iteration(mdp.transition(), robust_reward(mdp, model), mdp.discount, tol, max_iter)
    if certain_dropout != "uniform":
        raise ValueError(f"unknown certain_dropout option {certain_dropout!r}")
    mask = DropoutMask(tuple(b > 0.0 for b in model.survival_probs))
    P_bar = _survivor_action_transition(mdp, mask)
    R_bar = _survivor_reward(mdp, model.survival_probs)
    rep = value_iteration(P_bar, R_bar, mdp.discount, tol, max_iter)
    return rep


def robust_optimal_policy(
    mdp: FactoredMdp, model: DropoutModel, certain_dropout: CertainDropout = "greedy"
) -> TabularPolicy:
    """Stochastic table of :func:`robust_optimal`'s policy."""
    rep = robust_optimal(mdp, model, certain_dropout=certain_dropout)
    if certain_dropout == "greedy":
        return TabularPolicy.deterministic(rep.policy, mdp.n_actions)
    mask = DropoutMask(tuple(b > 0.0 for b in model.survival_probs))
    a_bar = mdp.indexer.project_actions(mask.active)
    n_dropped_actions = mdp.n_actions // (int(a_bar.max()) + 1)
    return TabularPolicy((a_bar[None, :] == rep.policy[:, None]) / n_dropped_actions)


def marginalized_reduced_policy(
    mdp: FactoredMdp, mask: DropoutMask, policy: TabularPolicy, mu: np.ndarray
) -> TabularPolicy:
    """Survivors-only policy ``sum_{x_-} mu(x_- | xbar) pi(abar | xbar, x_-)``.

    States ``xbar`` with zero mass fall back to a plain average over
    dropped completions.
    """
    idx = mdp.indexer
    sub = idx.sub_indexer(mask.active)
    s_bar = idx.project_states(mask.active)
    s_minus = idx.project_states(mask.dropped)
    a_bar = idx.project_actions(mask.active)
    marginal = np.zeros((idx.n_states, sub.n_actions))
    for a in range(idx.n_actions):
        marginal[:, a_bar[a]] += policy.table[:, a]
    mu_minus = np.bincount(s_minus, weights=mu, minlength=idx.n_states // sub.n_states)
    w = mu_minus[s_minus]
    num = np.zeros((sub.n_states, sub.n_actions))
    np.add.at(num, s_bar, w[:, None] * marginal)
    den = np.bincount(s_bar, weights=w, minlength=sub.n_states)
    flat = np.zeros_like(num)
    np.add.at(flat, s_bar, marginal)
    counts = np.bincount(s_bar, minlength=sub.n_states)
    table = np.where(den[:, None] > 0, num / np.where(den > 0, den, 1.0)[:, None], flat / counts[:, None])
    return TabularPolicy(table)


def mixture_robust_policy(mdp: FactoredMdp, model: DropoutModel) -> TabularPolicy:
    """Dropout-weighted mixture of the realizations' optimal policies.

    For each realization the optimal survivor policy is averaged over the
    dropped agents' substates with its stationary distribution, lifted back
    with uniform dropped actions and weighted by the mask probability.
    """
    table = np.zeros((mdp.n_states, mdp.n_actions))
    for mask in enumerate_masks(mdp.n_agents):
        p = mask_probability(mask, model)
        if p == 0.0:
            continue
        opt = realization_optimal(mdp, mask)
        if mask.dropped:
            reduced = marginalized_reduced_policy(mdp, mask, opt.policy, opt.mu)
            full = augment_policy(reduced, mask, mdp)
        else:
            full = opt.policy
        table += p * full.table
    return TabularPolicy(table)


def expected_optimal_value(mdp: FactoredMdp, model: DropoutModel) -> np.ndarray:
    """``sum_W p(W) V*(xbar_W | W)`` on joint states, one solve per mask."""
    total = np.zeros(mdp.n_states)
    for mask in enumerate_masks(mdp.n_agents):
        p = mask_probability(mask, model)
        if p == 0.0:
            continue
        total += p * broadcast_reduced(mdp, mask, realization_optimal(mdp, mask).values.values)
    return total


@dataclass(frozen=True, eq=False)
class GapReport:
    beta: float
    bound: np.ndarray
    gap: np.ndarray
    optimal: np.ndarray
    uniform: np.ndarray
    robust: np.ndarray


def opt_gap_bound(mdp: FactoredMdp, beta: float, slack: float = 1e-9) -> GapReport:
    """Loss of the robust-optimal policy on the intact system, and its bound.

    With identical survival odds ``beta`` the loss ``V* - V^{pi_R*}`` on the
    pre-dropout system is at most ``(1 - beta^N) (V* - V^{pi_U})``. At
    ``beta = 0`` the robust policy is the uniform one, so the bound is tight.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta {beta} outside [0, 1]")
    P, gamma = mdp.transition(), mdp.discount
    R = masked_reward(mdp, DropoutMask.all_active(mdp.n_agents))
    v_star = value_iteration(P, R, gamma).values
    v_unif = policy_evaluation_exact(P, R, gamma, TabularPolicy.uniform(mdp.indexer)).values
    model = DropoutModel.identical(beta, mdp.n_agents)
    pi_r = robust_optimal_policy(mdp, model, certain_dropout="uniform")
    v_rob = policy_evaluation_exact(P, R, gamma, pi_r).values
    bound = (1.0 - beta**mdp.n_agents) * (v_star - v_unif)
    gap = v_star - v_rob
    if np.any(gap > bound + slack):
        worst = int(np.argmax(gap - bound))
        raise BoundViolationError(
            f"optimality gap {gap[worst]:.3g} exceeds bound {bound[worst]:.3g} at state {worst}"
        )
    return GapReport(beta, bound, gap, v_star, v_unif, v_rob)


def expected_greedy_policy(
    mdp: FactoredMdp,
    model: DropoutModel,
    optima: dict[DropoutMask, RealizationOptimum] | None = None,
) -> TabularPolicy:
    """Deterministic robust policy greedy against the dropout-expected optimum.

    Acts greedily on ``r^R(x, a) + gamma E[V(x') | x, a]`` where
    ``V = sum_W p(W) V*(xbar_W | W)`` is assembled from the realizations'
    marginalized optimal values. With identical survival odds the robust
    system's own greedy policy equals the pre-dropout optimum; this one
    instead reflects how each realization is controlled once agents leave.

    ``optima`` may carry precomputed :func:`realization_optimal` results.
    """
    V = np.zeros(mdp.n_states)
    for mask in enumerate_masks(mdp.n_agents):
        p = mask_probability(mask, model)
        if p == 0.0:
            continue
        opt = optima[mask] if optima is not None and mask in optima else realization_optimal(mdp, mask)
        V += p * broadcast_reduced(mdp, mask, opt.values.values)
    Q = bellman_q(mdp.transition(), robust_reward(mdp, model), mdp.discount, V)
    return TabularPolicy.deterministic(np.argmax(Q, axis=1), mdp.n_actions)
