"""Random system generation and the four dropout experiments.

Every run returns a :class:`Table` (columns, rows, metadata and named
pass/fail checks) that the CLI writes as CSV or JSON. Tables are pure
functions of their config, so reruns are byte-identical.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bounds as bd
from .exact_solver import (
    expected_greedy_policy,
    mixing_time,
    mixture_robust_policy,
    opt_gap_bound,
    realization_optimal,
    realization_value_full,
    robust_optimal_policy,
    stationary_distribution,
    value_iteration,
)
from .mdp_core import (
    DropoutMask,
    DropoutModel,
    FactoredMdp,
    TabularPolicy,
    enumerate_masks,
    induced_chain,
    mask_probability,
    masked_reward,
    robust_reward,
    uniformize_dropped,
)
from .policy_is import estimate_J, estimate_realization_value, estimate_robust_value
from .simulator import (
    EmpiricalDistribution,
    derive_seeds,
    empirical_stationary,
    sample_dataset,
    stream_uniforms,
    _cdf,
    _inverse_cdf,
)

OUT_DIR_ENV = "DROPOUT_MDP_OUT_DIR"


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "results"))


# -- systems ---------------------------------------------------------------

def gen_random_system(
    n_agents: int,
    substate_size: int,
    action_size: int,
    gamma: float,
    seed: int,
    eps_smooth: float = 0.1,
    parents: str = "full",
    survival_probs: Sequence[float] | None = None,
) -> FactoredMdp:
    """Random factored system.

    Each factor row is a Dirichlet(1) draw mixed with the uniform row,
    ``(1 - eps_smooth) * dirichlet + eps_smooth / |X_n|``, so every entry is
    at least ``eps_smooth / |X_n|`` and the chain is ergodic under any
    policy. Rewards are uniform on [0, 1].

    Parameters
    ----------
    parents : {"full", "local"}
        Every agent's transition depends on all agents' substates, or only
        on its own.
    """
    if not 0.0 < eps_smooth <= 1.0:
        raise ValueError("eps_smooth must be in (0, 1]")
    if parents not in ("full", "local"):
        raise ValueError("parents must be 'full' or 'local'")
    rng = np.random.default_rng(seed)
    parent_sets = [tuple(range(n_agents)) if parents == "full" else (n,) for n in range(n_agents)]
    factors, rewards = [], []
    for n in range(n_agents):
        n_rows = substate_size ** len(parent_sets[n])
        draw = rng.dirichlet(np.ones(substate_size), size=(n_rows, action_size))
        factors.append((1.0 - eps_smooth) * draw + eps_smooth / substate_size)
        rewards.append(rng.uniform(0.0, 1.0, size=(substate_size, action_size)))
    return FactoredMdp(
        (substate_size,) * n_agents,
        (action_size,) * n_agents,
        tuple(factors),
        tuple(rewards),
        gamma,
        tuple(parent_sets),
        None if survival_probs is None else tuple(survival_probs),
    )


def soften(policy: TabularPolicy, epsilon: float) -> TabularPolicy:
    """``(1 - epsilon) policy + epsilon uniform``."""
    n_actions = policy.table.shape[1]
    return TabularPolicy((1.0 - epsilon) * policy.table + epsilon / n_actions)


def optimal_policy(mdp: FactoredMdp) -> TabularPolicy:
    R = masked_reward(mdp, DropoutMask.all_active(mdp.n_agents))
    return TabularPolicy.deterministic(value_iteration(mdp.transition(), R, mdp.discount).policy, mdp.n_actions)


def named_policy(mdp: FactoredMdp, name: str, model: DropoutModel | None = None, epsilon: float = 0.2) -> TabularPolicy:
    """Policies addressable from the command line.

    ``optimal``, ``uniform``, ``soft-optimal`` (optimal mixed with uniform by
    ``epsilon``), ``robust`` (:func:`expected_greedy_policy`) and
    ``robust-mdp`` (greedy on the robust rewards).
    """
    if name == "optimal":
        return optimal_policy(mdp)
    if name == "uniform":
        return TabularPolicy.uniform(mdp.indexer)
    if name == "soft-optimal":
        return soften(optimal_policy(mdp), epsilon)
    if name in ("robust", "robust-mdp"):
        if model is None:
            raise ValueError(f"policy {name!r} needs survival probabilities")
        if name == "robust":
            return expected_greedy_policy(mdp, model)
        return robust_optimal_policy(mdp, model)
    raise ValueError(f"unknown policy {name!r}")


# -- output tables ---------------------------------------------------------

@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    meta: dict
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows])

    def to_csv(self) -> str:
        lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in self.meta.items()]
        lines += [f"# check {k}: {'pass' if v else 'FAIL'}" for k, v in self.checks.items()]
        lines.append(",".join(self.columns))
        lines += [",".join(_fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {"meta": self.meta, "checks": self.checks, "columns": self.columns, "rows": self.rows},
            sort_keys=True,
        )

    def write(self, path: str | Path, fmt: str = "csv") -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv() if fmt == "csv" else self.to_json() + "\n")
        return path


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _py(v):
    """Plain Python scalars for JSON output."""
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


# -- configs ---------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Parameters shared by the four experiments; unused fields are ignored."""

    experiment: str = "fig3"
    n_agents: int = 5
    substate_size: int = 2
    action_size: int = 2
    gamma: float = 0.9
    seed: int = 0
    eps_smooth: float = 0.1
    parents: str = "full"
    betas: tuple[float, ...] = ()
    n_systems: int = 50
    n_per_start: int = 100
    horizon: int = 50
    H_mu: int = 5000
    variant: str = "doubly-robust"
    t_drop: int = 500
    t_total: int = 1000
    mask: str = ""
    n_seeds: int = 50
    behavior_epsilon: float = 0.2
    n_reps_C: int = 20
    B_IS: float = 0.0
    workers: int = 1

    def __post_init__(self):
        positive = ("n_agents", "substate_size", "action_size", "n_systems", "n_per_start", "horizon",
                    "H_mu", "n_seeds", "workers")
        for name in positive:
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        self.betas = tuple(float(b) for b in self.betas)

    def meta(self) -> dict:
        d = asdict(self)
        d["betas"] = list(self.betas)
        d.pop("workers")
        return d

    def system(self, seed_offset: int = 0) -> FactoredMdp:
        return gen_random_system(
            self.n_agents, self.substate_size, self.action_size, self.gamma,
            self.seed + seed_offset, self.eps_smooth, self.parents,
        )


FIG_DEFAULTS = {
    "fig1": dict(n_agents=4, substate_size=2, action_size=2, mask="1100", betas=(0.5,), t_drop=500,
                 t_total=1000, n_seeds=50, seed=5),
    "fig2": dict(n_agents=4, substate_size=3, action_size=3, betas=tuple(k / 10 for k in range(11)), seed=1),
    "fig3": dict(n_agents=5, substate_size=2, action_size=2, n_systems=50),
    "fig4": dict(n_agents=2, substate_size=2, action_size=2, n_per_start=100, horizon=50, H_mu=5000,
                 betas=(0.5,), parents="local", seed=4),
}

PAPER_SCALE = {
    "fig3": dict(n_systems=1000),
    "fig4": dict(horizon=500, H_mu=5000, n_per_start=100, gamma=0.99),
    "fig1": dict(t_drop=500, t_total=1000),
}


def make_config(experiment: str, paper_scale: bool = False, **overrides) -> ExperimentConfig:
    params = dict(FIG_DEFAULTS[experiment])
    if paper_scale:
        params.update(PAPER_SCALE.get(experiment, {}))
    params.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(experiment=experiment, **params)


# -- fig1: running return through a dropout event --------------------------

def _switching_rollout(
    mdp: FactoredMdp,
    before: TabularPolicy,
    after: TabularPolicy,
    mask: DropoutMask,
    t_drop: int,
    t_total: int,
    seeds: np.ndarray,
    starts: np.ndarray,
) -> np.ndarray:
    """Per-step rewards of ``before`` up to ``t_drop``, then ``after`` on realization ``mask``.

    After the switch dropped agents act uniformly and earn nothing.
    """
    n_actions = mdp.n_actions
    cdf_P = _cdf(mdp.transition().reshape(-1, mdp.n_states))
    pre = (_cdf(before.table), masked_reward(mdp, DropoutMask.all_active(mdp.n_agents)))
    post = (_cdf(uniformize_dropped(after, mask, mdp).table), masked_reward(mdp, mask))
    x = starts.copy()
    out = np.zeros((len(seeds), t_total))
    for b0 in range(0, t_total, 256):
        b1 = min(t_total, b0 + 256)
        u = stream_uniforms(seeds, np.arange(2 * b0, 2 * b1))
        for t in range(b0, b1):
            cdf_pi, R = pre if t < t_drop else post
            a = _inverse_cdf(cdf_pi[x], u[:, 2 * (t - b0)])
            out[:, t] = R[x, a]
            x = _inverse_cdf(cdf_P[x * n_actions + a], u[:, 2 * (t - b0) + 1])
    return out


def run_fig1(config: ExperimentConfig, mdp: FactoredMdp | None = None) -> Table:
    """Running average reward of three controllers through a dropout event.

    All three follow the pre-dropout optimum until ``t_drop``. Afterwards
    one keeps it, one switches to the realization's optimum and one to the
    robust policy computed for the configured survival odds. Curves are
    normalized by the pre-dropout running average at ``t_drop``. ``mdp``
    replaces the configured random system.
    """
    mdp = mdp or config.system()
    N = mdp.n_agents
    mask = DropoutMask.from_string(config.mask) if config.mask else DropoutMask.all_active(N)
    if len(mask) != N:
        raise ValueError(f"mask {mask} does not have {N} flags")
    betas = config.betas or (0.5,)
    model = DropoutModel(betas if len(betas) == N else (betas[0],) * N)
    pi_pre = optimal_policy(mdp)
    pi_post = realization_optimal(mdp, mask).policy
    pi_rob = expected_greedy_policy(mdp, model)
    seeds = derive_seeds(config.seed, 0, config.n_seeds)
    starts = np.minimum((stream_uniforms(seeds, 2 * config.t_total + 1)[:, 0] * mdp.n_states).astype(np.int64),
                        mdp.n_states - 1)
    curves = {
        name: _switching_rollout(mdp, pi_pre, pol, mask, config.t_drop, config.t_total, seeds, starts)
        for name, pol in (("pre_optimal", pi_pre), ("post_optimal", pi_post), ("robust", pi_rob))
    }
    steps = np.arange(1, config.t_total + 1)
    running = {k: np.cumsum(v.mean(axis=0)) / steps for k, v in curves.items()}
    t_norm = max(1, min(config.t_drop, config.t_total))
    norm = running["pre_optimal"][t_norm - 1]
    norm = norm if norm > 0 else 1.0
    names = ("pre_optimal", "post_optimal", "robust")
    columns = ["t"] + [f"reward_{k}" for k in names] + [f"running_{k}" for k in names]
    rows = []
    for t in range(config.t_total):
        rows.append([t] + [float(curves[k][:, t].mean()) for k in names] + [float(running[k][t] / norm) for k in names])
    # per-seed post-dropout mean rewards for the ordering check
    post = {k: v[:, config.t_drop:].mean(axis=1) for k, v in curves.items()} if config.t_drop < config.t_total else None
    checks, summary = {}, {}
    if post is not None:
        def slack(a, b):
            d = a - b
            return 1.96 * d.std(ddof=1) / math.sqrt(len(d)) if len(d) > 1 else 0.0

        p, r, q = post["post_optimal"], post["robust"], post["pre_optimal"]
        checks["post_optimal_ge_robust"] = bool(p.mean() >= r.mean() - slack(p, r))
        checks["robust_ge_pre_optimal"] = bool(r.mean() >= q.mean() - slack(r, q))
        summary = {k: float(v.mean() / norm) for k, v in post.items()}
    meta = {"config": config.meta(), "system": {"n_states": mdp.n_states, "n_actions": mdp.n_actions},
            "post_dropout_mean_normalized": summary}
    return Table(columns, rows, meta, checks)


# -- fig2: optimality gap of the robust policy -----------------------------

def run_fig2(config: ExperimentConfig, mdp: FactoredMdp | None = None) -> Table:
    """Exact gap ``V* - V^{pi_R*}`` on the intact system against its bound, per state and beta."""
    mdp = mdp or config.system()
    betas = config.betas or tuple(k / 10 for k in range(11))
    columns = ["beta", "state", "gap", "bound", "optimal", "uniform"]
    rows, ok = [], True
    for beta in betas:
        try:
            rep = opt_gap_bound(mdp, beta)
        except AssertionError:
            ok = False
            continue
        for s in range(mdp.n_states):
            rows.append([beta, s, float(rep.gap[s]), float(rep.bound[s]), float(rep.optimal[s]), float(rep.uniform[s])])
    gap = np.array([r[2] for r in rows])
    bound = np.array([r[3] for r in rows])
    checks = {"gap_le_bound": ok and bool(np.all(gap <= bound + 1e-9))}
    return Table(columns, rows, {"config": config.meta()}, checks)


# -- fig3: realization losses over random systems ---------------------------

def _relative_loss(v_opt: np.ndarray, v: np.ndarray) -> float:
    total = float(v_opt.sum())
    return float((v_opt.sum() - v.sum()) / total) if total > 0 else 0.0


def fig3_system(mdp: FactoredMdp) -> dict:
    """Losses of the compared policies on every realization of one system.

    Each policy's realized value uses the same stationary distribution as
    the realization's optimum, so losses are nonnegative up to solver
    tolerance.
    """
    N = mdp.n_agents
    masks = enumerate_masks(N)
    optima = {m: realization_optimal(mdp, m) for m in masks}
    full = DropoutMask.all_active(N)
    pi_star = optima[full].policy
    out = {"k": [], "per_mask": {}, "pre_robust": {}, "min_state_loss": np.inf}
    for k in range(N):
        beta = 1.0 - k / N
        model = DropoutModel.identical(beta, N)
        policies = {
            "pre_optimal": pi_star,
            "robust": expected_greedy_policy(mdp, model, optima),
            "robust_mdp": robust_optimal_policy(mdp, model),
            "mixture": mixture_robust_policy(mdp, model),
        }
        losses = {name: [] for name in policies}
        for m in masks:
            if len(m.dropped) != k:
                continue
            opt = optima[m]
            v_opt = opt.values.values
            for name, pol in policies.items():
                v = realization_value_full(mdp, m, pol, mu=opt.mu).values
                losses[name].append(_relative_loss(v_opt, v))
                out["min_state_loss"] = min(out["min_state_loss"], float((v_opt - v).min()))
        out["per_mask"][k] = losses
        v_full = optima[full].values.values
        out["pre_robust"][k] = {
            name: _relative_loss(v_full, realization_value_full(mdp, full, pol).values)
            for name, pol in policies.items()
        }
    return out


def _fig3_one(args) -> dict:
    config, offset = args
    return fig3_system(config.system(offset))


def run_fig3(config: ExperimentConfig) -> Table:
    """Mean/min/max realization losses per dropped-agent count, averaged over systems.

    ``beta = 1 - k/N`` for ``k`` dropped agents. Losses are relative to the
    realization's optimal value summed over survivor states. ``k = N``
    is left out: every realized value is then zero.
    """
    jobs = [(config, i) for i in range(config.n_systems)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_fig3_one, jobs))
    else:
        results = [_fig3_one(j) for j in jobs]
    N = config.n_agents
    names = ("pre_optimal", "robust", "robust_mdp", "mixture")
    columns = ["k_dropped", "beta", "n_masks"]
    for n in names:
        columns += [f"{n}_mean", f"{n}_min", f"{n}_max"]
    columns += [f"{n}_on_pre_dropout" for n in names]
    rows = []
    means = {}
    for k in range(N):
        row = [k, 1.0 - k / N, len(results[0]["per_mask"][k]["robust"])]
        for n in names:
            per = np.array([r["per_mask"][k][n] for r in results])  # (systems, masks)
            row += [float(per.mean(axis=1).mean()), float(per.min(axis=1).mean()), float(per.max(axis=1).mean())]
            means[(k, n)] = float(per.mean(axis=1).mean())
        row += [float(np.mean([r["pre_robust"][k][n] for r in results])) for n in names]
        rows.append(row)
    high = [k for k in range(N) if k / N >= 0.5]
    pre_loss = np.mean([r["pre_robust"][k]["robust"] for r in results for k in range(1, N)])
    checks = {
        "robust_beats_pre_optimal_when_half_dropped": all(
            means[(k, "robust")] < means[(k, "pre_optimal")] for k in high
        ),
        "robust_on_pre_dropout_loss_le_15pct": bool(pre_loss <= 0.15),
        # value iteration stops at 1e-10, so values carry up to ~1e-9 error at gamma = 0.9
        "losses_nonnegative": bool(min(r["min_state_loss"] for r in results) >= -1e-8),
    }
    meta = {"config": config.meta(), "robust_on_pre_dropout_mean_loss": float(pre_loss),
            "min_state_loss": float(min(r["min_state_loss"] for r in results))}
    return Table(columns, rows, meta, checks)


# -- fig4: IS estimate of a robust candidate -------------------------------

def robust_is_pipeline(
    mdp: FactoredMdp,
    model: DropoutModel,
    behavioral: TabularPolicy,
    candidate: TabularPolicy,
    n_per_start: int,
    H: int,
    H_mu: int,
    seed: int,
    variant: str = "doubly-robust",
    mu_policy: str = "behavioral",
    exact_mu: bool = False,
) -> dict:
    """Estimate every realization's value of ``candidate`` and their dropout average.

    One dataset from ``behavioral`` on the intact system serves all masks.
    For each mask the target is the candidate with dropped agents acting
    uniformly, and dropped substates are averaged out with visit frequencies
    of a separate ``H_mu``-step trajectory under the equally augmented
    ``behavioral`` (or ``candidate``) policy, or the exact stationary
    distribution when ``exact_mu`` is set.
    """
    data = sample_dataset(mdp, behavioral, n_per_start, H, seed)
    per_mask, estimates = {}, {}
    for i, mask in enumerate(enumerate_masks(mdp.n_agents)):
        if mask_probability(mask, model) == 0.0:
            continue
        target = uniformize_dropped(candidate, mask, mdp)
        est = estimate_J(data, behavioral, target, masked_reward(mdp, mask), mdp.discount, variant)
        source = uniformize_dropped(behavioral if mu_policy == "behavioral" else candidate, mask, mdp)
        if exact_mu:
            mu = EmpiricalDistribution.from_distribution(
                stationary_distribution(induced_chain(mdp.transition(), source)), mdp.indexer
            )
        else:
            mu = empirical_stationary(mdp, source, H_mu, seed + 7919 * (i + 1))
        per_mask[mask] = estimate_realization_value(est, mu, mask, mdp).values
        estimates[mask] = est
    return {"per_mask": per_mask, "robust": estimate_robust_value(per_mask, model, mdp), "estimates": estimates}


def exact_expected_value(mdp: FactoredMdp, model: DropoutModel, policy: TabularPolicy, horizon=None) -> np.ndarray:
    total = np.zeros(mdp.n_states)
    for mask in enumerate_masks(mdp.n_agents):
        p = mask_probability(mask, model)
        if p:
            v = realization_value_full(mdp, mask, policy, horizon).values
            total += p * v[mdp.indexer.project_states(mask.active)]
    return total


def run_fig4(config: ExperimentConfig, mdp: FactoredMdp | None = None) -> Table:
    """IS estimate of a robust candidate against its exact value and direct execution."""
    mdp = mdp or config.system()
    N = mdp.n_agents
    betas = config.betas or (0.5,)
    model = DropoutModel(betas if len(betas) == N else (betas[0],) * N)
    behavioral = soften(optimal_policy(mdp), config.behavior_epsilon)
    candidate = expected_greedy_policy(mdp, model)
    res = robust_is_pipeline(mdp, model, behavioral, candidate, config.n_per_start, config.horizon,
                             config.H_mu, config.seed, config.variant)
    exact = exact_expected_value(mdp, model, candidate)
    est = res["robust"]

    # bound at the 90% level: split 5% to each error source
    v_max_H = bd.v_max(mdp, model, config.horizon)
    j_max = max(e.j_max for e in res["estimates"].values())
    t_mix, C = 1, 0.0
    for mask in res["per_mask"]:
        if mask.dropped:
            chain = induced_chain(mdp.transition(), uniformize_dropped(behavioral, mask, mdp))
            t_mix = max(t_mix, mixing_time(chain, stationary_distribution(chain)))
            c = bd.estimate_C(None, None, config.H_mu, config.n_reps_C, config.seed, P_pi=chain)
            C = max(C, c.C)
    delta_h = bd.hoeffding_delta(config.n_per_start, j_max, 0.05)
    delta_m = 2 * mdp.n_states * v_max_H * (C + math.sqrt(4.5 * t_mix * math.log(2 / 0.05) / config.H_mu))
    inputs = bd.BoundInputs(
        delta=max(delta_h, delta_m), H=config.horizon, H_mu=config.H_mu, n_per_start=config.n_per_start,
        t_mix=t_mix, j_max=j_max, r_max=float(robust_reward(mdp, model).max()), gamma=mdp.discount,
        substate_size=mdp.substate_sizes[0], n_active=N, sum_J=v_max_H, C=C, B_IS=config.B_IS,
    )
    bound = bd.robust_bound(inputs, mdp.n_states, v_max_H)

    # direct execution: running discounted robust return of the candidate from every state
    steps = max(config.horizon, int(math.ceil(math.log(1e-3) / math.log(mdp.discount))))
    seeds = derive_seeds(config.seed, 1, config.n_seeds * mdp.n_states)
    starts = np.repeat(np.arange(mdp.n_states), config.n_seeds)
    cdf_pi, cdf_P = _cdf(candidate.table), _cdf(mdp.transition().reshape(-1, mdp.n_states))
    R = robust_reward(mdp, model)
    x = starts.copy()
    running = np.zeros(steps)
    acc = np.zeros(len(seeds))
    u = stream_uniforms(seeds, np.arange(2 * steps))
    for t in range(steps):
        a = _inverse_cdf(cdf_pi[x], u[:, 2 * t])
        acc += mdp.discount**t * R[x, a]
        running[t] = acc.mean()
        x = _inverse_cdf(cdf_P[x * mdp.n_actions + a], u[:, 2 * t + 1])
    target_value = float(exact.mean())
    normalized = running / target_value if target_value > 0 else running
    reach = np.nonzero(normalized >= 0.95)[0]
    steps_to_95 = int(reach[0] + 1) if len(reach) else -1
    err = float(np.max(np.abs(est - exact)))
    columns = ["t", "direct_running_return", "is_estimate", "exact_value"]
    is_norm = float(est.mean() / target_value) if target_value > 0 else float(est.mean())
    rows = [[t + 1, float(normalized[t]), is_norm, 1.0] for t in range(steps)]
    meta = {
        "config": config.meta(),
        "is_estimate_per_state": [float(v) for v in est],
        "exact_value_per_state": [float(v) for v in exact],
        "max_abs_error": err,
        "steps_to_95pct": steps_to_95,
        "bound": {k: _py(v) for k, v in bound.record().items()},
    }
    checks = {
        "bound_level_90pct": bound.probability <= 0.1,
        "error_within_epsilon_total": err <= bound.epsilon_total,
    }
    return Table(columns, rows, meta, checks)


RUNNERS = {"fig1": run_fig1, "fig2": run_fig2, "fig3": run_fig3, "fig4": run_fig4}
