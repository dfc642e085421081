"""Confidence bounds for the IS estimates of realized and robust values.

Each bound splits the error into the truncation/bias term ``eps'``, an IS
concentration term (Hoeffding) and an empirical-marginalization term driven
by the chain's mixing time. Probabilities are clamped to ``[0, 1]``; a
bound whose inner margin is not positive is reported as vacuous (1).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .exact_solver import stationary_distribution, tv_distance
from .mdp_core import DropoutModel, FactoredMdp, TabularPolicy, induced_chain, robust_reward
from .simulator import derive_seeds, simulate_chain, stream_uniforms


@dataclass(frozen=True)
class BoundInputs:
    """Everything the composite bounds consume.

    Attributes
    ----------
    delta : float
        Slack ``delta`` on the estimation error.
    sum_J : float
        ``sum_{x_-} J_H(x)`` over the dropped agents' completions of the state.
    C : float
        Bound on the expected TV distance between the empirical and exact
        stationary distributions at length ``H_mu``.
    B_IS : float
        Bias bound of the estimator (0 for ordinary and per-decision).
    """

    delta: float
    H: int
    H_mu: int
    n_per_start: int
    t_mix: int
    j_max: float
    r_max: float
    gamma: float
    substate_size: int
    n_active: int
    sum_J: float
    C: float = 0.0
    B_IS: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        for name in ("delta", "H", "H_mu", "n_per_start", "t_mix", "j_max", "r_max",
                     "substate_size", "n_active", "sum_J", "C", "B_IS"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class BoundResult:
    epsilon_total: float
    probability: float
    epsilon_prime: float
    marginalization: float
    hoeffding: float
    inputs: BoundInputs

    def record(self) -> dict:
        """Flat record of inputs and outputs for self-describing output files."""
        out = asdict(self.inputs)
        out.update(
            epsilon_total=self.epsilon_total,
            probability=self.probability,
            epsilon_prime=self.epsilon_prime,
            marginalization=self.marginalization,
            hoeffding=self.hoeffding,
        )
        return out


def v_max(mdp: FactoredMdp, model: DropoutModel, H: int) -> float:
    """``(1 - gamma^H) / (1 - gamma) * max r^R``, an upper bound on every ``J_H``."""
    if H < 1:
        raise ValueError("H must be at least 1")
    g = mdp.discount
    return (1.0 - g**H) / (1.0 - g) * float(robust_reward(mdp, model).max())


def hoeffding_term(n_per_start: int, delta: float, j_max: float) -> float:
    """``2 exp(-|D| delta^2 / (4 J_max^2))`` (not clamped)."""
    if j_max <= 0:
        raise ValueError("j_max must be positive")
    if math.isinf(j_max):
        return 2.0
    return 2.0 * math.exp(-n_per_start * delta**2 / (4.0 * j_max**2))


def _marginalization(inputs: BoundInputs, denominator: float, split: float) -> float:
    if denominator == 0.0:
        # nothing to average: marginalization cannot err
        return 0.0
    inner = inputs.delta / (split * denominator) - inputs.C
    if inner <= 0.0 or inputs.t_mix == 0:
        return 1.0
    return min(1.0, 2.0 * math.exp(-(inner**2) * inputs.H_mu / (4.5 * inputs.t_mix)))


def realization_denominator(inputs: BoundInputs) -> float:
    return float(inputs.substate_size) ** inputs.n_active * inputs.sum_J


def marginalization_term(inputs: BoundInputs) -> float:
    """``2 exp(-(delta / (|X_n|^|W=1| sum_J) - C)^2 H_mu / (4.5 t_mix))``, clamped; 1 when vacuous."""
    return _marginalization(inputs, realization_denominator(inputs), 1.0)


def epsilon_prime(inputs: BoundInputs) -> float:
    """Truncation ``gamma^H r_max / (1 - gamma)`` plus the estimator bias bound."""
    return inputs.gamma**inputs.H * inputs.r_max / (1.0 - inputs.gamma) + inputs.B_IS


def _compose(inputs: BoundInputs, denominator: float) -> BoundResult:
    marg = _marginalization(inputs, denominator, 2.0)
    hoeff = hoeffding_term(inputs.n_per_start, inputs.delta, inputs.j_max)
    eps = epsilon_prime(inputs)
    return BoundResult(inputs.delta + eps, min(1.0, marg + hoeff), eps, marg, hoeff, inputs)


def realization_bound(inputs: BoundInputs) -> BoundResult:
    """``P(|V(x|W) - V_hat_H(x|W)| >= delta + eps')`` for one realization.

    The marginalization part uses ``delta / 2`` in place of ``delta``, the
    split between the two error sources.
    """
    return _compose(inputs, realization_denominator(inputs))


def robust_bound(inputs: BoundInputs, n_states: int, v_max_H: float) -> BoundResult:
    """As :func:`realization_bound` with the denominator ``|X| V_max_H``."""
    return _compose(inputs, float(n_states) * v_max_H)


def hoeffding_delta(n_per_start: int, j_max: float, probability: float) -> float:
    """Smallest ``delta`` with ``hoeffding_term(|D|, delta, J_max) <= probability``."""
    return 2.0 * j_max * math.sqrt(math.log(2.0 / probability) / n_per_start)


@dataclass(frozen=True)
class CEstimate:
    estimate: float
    half_width: float

    @property
    def C(self) -> float:
        return self.estimate + self.half_width


def estimate_C(
    mdp: FactoredMdp | None,
    policy: TabularPolicy | None,
    H_mu: int,
    n_reps: int,
    seed: int,
    P_pi: np.ndarray | None = None,
) -> CEstimate:
    """Monte Carlo estimate of ``E[TV(mu_hat, mu)]`` at trajectory length ``H_mu``.

    Each replicate starts from a draw of the exact stationary distribution.
    The returned ``C`` adds a 95% normal half-width to the mean. Pass
    ``P_pi`` directly to skip building the chain from ``mdp`` and ``policy``.
    """
    if n_reps < 2:
        raise ValueError("n_reps must be at least 2 for a half-width")
    if P_pi is None:
        P_pi = induced_chain(mdp.transition(), policy)
    mu = stationary_distribution(P_pi)
    seeds = derive_seeds(seed, 0, n_reps)
    u0 = stream_uniforms(seeds, 0)[:, 0]
    cdf = np.cumsum(mu) / mu.sum()
    starts = np.minimum((cdf[None, :] <= u0[:, None]).sum(axis=1), len(mu) - 1)
    paths = simulate_chain(P_pi, starts, H_mu, seeds)
    n = len(mu)
    counts = np.zeros((n_reps, n))
    for r in range(n_reps):
        counts[r] = np.bincount(paths[r], minlength=n)
    tv = tv_distance(counts / H_mu, mu[None, :])
    return CEstimate(float(tv.mean()), float(1.96 * tv.std(ddof=1) / math.sqrt(n_reps)))


def with_delta(inputs: BoundInputs, delta: float) -> BoundInputs:
    return replace(inputs, delta=delta)
