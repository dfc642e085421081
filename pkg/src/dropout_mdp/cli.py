"""Command-line front end: ``dropout-mdp <command> [options]``.

Exit status is 0 on success, 1 on bad input (missing files, malformed
systems, invalid parameters) and 2 when ``--assert`` is given and a check
fails.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as bd
from .errors import DropoutMdpError
from .exact_solver import (
    broadcast_reduced,
    expected_optimal_value,
    realization_optimal,
    realization_value_full,
    robust_optimal,
    stationary_distribution,
)
from .experiments import (
    RUNNERS,
    Table,
    default_out_dir,
    exact_expected_value,
    gen_random_system,
    make_config,
    named_policy,
)
from .mdp_core import (
    DropoutMask,
    DropoutModel,
    FactoredMdp,
    enumerate_masks,
    induced_chain,
    mask_probability,
    masked_reward,
    uniformize_dropped,
)
from .policy_is import VARIANTS, estimate_J, estimate_realization_value, estimate_robust_value
from .simulator import Dataset, EmpiricalDistribution, empirical_stationary, sample_dataset

EXIT_OK, EXIT_INPUT, EXIT_ASSERT = 0, 1, 2
POLICIES = ("optimal", "uniform", "soft-optimal", "robust", "robust-mdp")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class _CheckFailed(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p: argparse.ArgumentParser, system: bool = True) -> None:
    if system:
        p.add_argument("--system", type=Path, required=True, help="system JSON written by 'gen'")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=None,
                   help="output file (default: a file under $DROPOUT_MDP_OUT_DIR or ./results)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--assert", dest="check", action="store_true", help="exit 2 if any check fails")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dropout-mdp", description="Factored multi-agent MDPs under agent dropout.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random factored system")
    _common(p, system=False)
    p.add_argument("--agents", type=int, default=3)
    p.add_argument("--substates", type=int, default=2)
    p.add_argument("--actions", type=int, default=2)
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--eps-smooth", type=float, default=0.1)
    p.add_argument("--parents", choices=("full", "local"), default="full")
    p.add_argument("--beta", type=_floats, default=None, help="survival probabilities (one or one per agent)")

    p = sub.add_parser("solve", help="optimal values of the intact system or one realization")
    _common(p)
    p.add_argument("--mask", default=None, help="survivor mask such as 1101 (default: all survive)")

    p = sub.add_parser("robust", help="robust optimum and expected post-dropout optimum")
    _common(p)
    p.add_argument("--beta", type=_floats, default=None)

    p = sub.add_parser("simulate", help="sample a trajectory dataset")
    _common(p)
    p.add_argument("--policy", choices=POLICIES, default="soft-optimal")
    p.add_argument("--epsilon", type=float, default=0.2, help="uniform weight of soft-optimal")
    p.add_argument("--beta", type=_floats, default=None)
    p.add_argument("--n-per-start", type=int, default=100)
    p.add_argument("--horizon", type=int, default=50)

    p = sub.add_parser("evaluate", help="IS estimate of realized or robust values from a dataset")
    _common(p)
    p.add_argument("--data", type=Path, required=True, help="dataset written by 'simulate'")
    p.add_argument("--behavioral", choices=POLICIES, default="soft-optimal")
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--target", choices=POLICIES, default="robust")
    p.add_argument("--variant", choices=VARIANTS, default="doubly-robust")
    p.add_argument("--beta", type=_floats, default=None)
    p.add_argument("--mask", default=None, help="evaluate one realization instead of the dropout average")
    p.add_argument("--H-mu", dest="H_mu", type=int, default=5000)
    p.add_argument("--mu-policy", choices=("behavioral", "target"), default="behavioral",
                   help="policy driving the stationary-distribution trajectory")
    p.add_argument("--exact-mu", action="store_true", help="use the exact stationary distribution")

    p = sub.add_parser("bounds", help="evaluate the realization or robust confidence bound")
    _common(p, system=False)
    for name, kind in (("delta", float), ("H", int), ("H-mu", int), ("n-per-start", int), ("t-mix", int),
                       ("j-max", float), ("r-max", float), ("gamma", float), ("substate-size", int),
                       ("n-active", int), ("sum-J", float)):
        p.add_argument(f"--{name}", dest=name.replace("-", "_"), type=kind, required=True)
    p.add_argument("--C", type=float, default=0.0)
    p.add_argument("--B-IS", dest="B_IS", type=float, default=0.0)
    p.add_argument("--n-states", type=int, default=None, help="with --v-max-H: robust bound")
    p.add_argument("--v-max-H", dest="v_max_H", type=float, default=None)

    for name in RUNNERS:
        p = sub.add_parser(name, help=f"regenerate {name} data")
        _common(p, system=False)
        p.add_argument("--paper-scale", action="store_true")
        p.add_argument("--agents", type=int, default=None)
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--beta", type=_floats, default=None)
        p.add_argument("--systems", type=int, default=None)
        p.add_argument("--seeds", type=int, default=None, help="number of seeded runs")
        p.add_argument("--n-per-start", type=int, default=None)
        p.add_argument("--horizon", type=int, default=None)
        p.add_argument("--H-mu", dest="H_mu", type=int, default=None)
        p.add_argument("--variant", choices=VARIANTS, default=None)
        p.add_argument("--mask", default=None)
    return parser


# -- helpers ---------------------------------------------------------------

def _model(mdp: FactoredMdp, beta) -> DropoutModel:
    if beta is None:
        if mdp.dropout_model is None:
            raise ValueError("no survival probabilities: pass --beta or generate the system with --beta")
        return mdp.dropout_model
    if len(beta) == 1:
        return DropoutModel.identical(beta[0], mdp.n_agents)
    return DropoutModel(beta)


def _mask(mdp: FactoredMdp, text: str | None) -> DropoutMask:
    if text is None:
        return DropoutMask.all_active(mdp.n_agents)
    mask = DropoutMask.from_string(text)
    if len(mask) != mdp.n_agents:
        raise ValueError(f"mask {text!r} has {len(mask)} entries for {mdp.n_agents} agents")
    return mask


def _policy(mdp, name, beta, epsilon=0.2):
    model = None
    if name in ("robust", "robust-mdp"):
        model = _model(mdp, beta)
    return named_policy(mdp, name, model, epsilon)


def _emit(args, table: Table, stem: str) -> Path:
    path = args.out or default_out_dir() / f"{stem}.{args.format}"
    table.write(path, args.format)
    print(path)
    return path


def _state_rows(mdp: FactoredMdp, states, *cols) -> list[list]:
    return [[int(s), str(mdp.indexer.decode_state(int(s))).replace(" ", "")] + [_cell(c[k]) for c in cols]
            for k, s in enumerate(states)]


def _cell(v):
    return int(v) if isinstance(v, (np.integer, int)) else float(v)


# -- commands --------------------------------------------------------------

def cmd_gen(args) -> Table | None:
    mdp = gen_random_system(args.agents, args.substates, args.actions, args.gamma,
                            0 if args.seed is None else args.seed, args.eps_smooth, args.parents)
    if args.beta is not None:
        mdp = FactoredMdp.from_dict({**mdp.to_dict(), "survival_probs": list(_model(mdp, args.beta).survival_probs)})
    path = args.out or default_out_dir() / "system.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    mdp.save(path)
    print(path)
    return None


def cmd_solve(args) -> Table:
    mdp = FactoredMdp.load(args.system)
    mask = _mask(mdp, args.mask)
    opt = realization_optimal(mdp, mask)
    realized = broadcast_reduced(mdp, mask, opt.values.values)
    meta = {"system": str(args.system), "mask": str(mask), "discount": mdp.discount}
    columns = ["state", "substates", "fictitious_value", "survivor_action", "realized_value"]
    return Table(columns, _state_rows(mdp, np.arange(mdp.n_states), opt.full_values, opt.survivor_actions,
                                      realized), meta)


def cmd_robust(args) -> Table:
    mdp = FactoredMdp.load(args.system)
    model = _model(mdp, args.beta)
    rep = robust_optimal(mdp, model)
    expected = expected_optimal_value(mdp, model)
    states = np.arange(mdp.n_states)
    meta = {"system": str(args.system), "survival_probs": list(model.survival_probs),
            "iterations": rep.iterations, "residual": rep.residual}
    columns = ["state", "substates", "robust_value", "robust_action", "expected_optimal_value"]
    return Table(columns, _state_rows(mdp, states, rep.values, rep.policy, expected), meta)


def cmd_simulate(args) -> None:
    mdp = FactoredMdp.load(args.system)
    policy = _policy(mdp, args.policy, args.beta, args.epsilon)
    seed = 0 if args.seed is None else args.seed
    data = sample_dataset(mdp, policy, args.n_per_start, args.horizon, seed, policy_id=args.policy)
    path = args.out or default_out_dir() / "dataset.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    data.save(path)
    print(path)


def cmd_evaluate(args) -> Table:
    mdp = FactoredMdp.load(args.system)
    data = Dataset.load(args.data)
    seed = data.master_seed if args.seed is None else args.seed
    behavioral = _policy(mdp, args.behavioral, args.beta, args.epsilon)
    target = _policy(mdp, args.target, args.beta, args.epsilon)
    if args.mask is not None:
        masks, model = [_mask(mdp, args.mask)], None
    else:
        model = _model(mdp, args.beta)
        masks = [m for m in enumerate_masks(mdp.n_agents) if mask_probability(m, model) > 0.0]

    per_mask, exact, j_max = {}, {}, 0.0
    for i, mask in enumerate(masks):
        aug_target = uniformize_dropped(target, mask, mdp)
        est = estimate_J(data, behavioral, aug_target, masked_reward(mdp, mask), mdp.discount, args.variant)
        j_max = max(j_max, est.j_max)
        source = uniformize_dropped(behavioral if args.mu_policy == "behavioral" else target, mask, mdp)
        if args.exact_mu:
            mu = stationary_distribution(induced_chain(mdp.transition(), source))
            mu_hat = EmpiricalDistribution.from_distribution(mu, mdp.indexer)
        else:
            mu_hat = empirical_stationary(mdp, source, args.H_mu, seed + 7919 * (i + 1))
        per_mask[mask] = estimate_realization_value(est, mu_hat, mask, mdp).values
        exact[mask] = realization_value_full(mdp, mask, target, data.horizon).values

    meta = {"system": str(args.system), "data": str(args.data), "variant": args.variant,
            "behavioral": args.behavioral, "target": args.target, "horizon": data.horizon,
            "n_per_start": data.n_per_start, "H_mu": args.H_mu, "mu_policy": args.mu_policy,
            "exact_mu": args.exact_mu, "j_max": j_max}
    if args.mask is not None:
        mask = masks[0]
        meta["mask"] = str(mask)
        states = np.arange(len(per_mask[mask]))
        rows = [[int(s), float(per_mask[mask][s]), float(exact[mask][s])] for s in states]
        return Table(["state", "estimate", "exact_horizon_value"], rows, meta)
    est = estimate_robust_value(per_mask, model, mdp)
    ref = exact_expected_value(mdp, model, target, data.horizon)
    meta["survival_probs"] = list(model.survival_probs)
    return Table(["state", "substates", "estimate", "exact_horizon_value"],
                 _state_rows(mdp, np.arange(mdp.n_states), est, ref), meta)


def cmd_bounds(args) -> Table:
    inputs = bd.BoundInputs(
        delta=args.delta, H=args.H, H_mu=args.H_mu, n_per_start=args.n_per_start, t_mix=args.t_mix,
        j_max=args.j_max, r_max=args.r_max, gamma=args.gamma, substate_size=args.substate_size,
        n_active=args.n_active, sum_J=args.sum_J, C=args.C, B_IS=args.B_IS,
    )
    if (args.n_states is None) != (args.v_max_H is None):
        raise ValueError("--n-states and --v-max-H go together")
    if args.n_states is None:
        result, kind = bd.realization_bound(inputs), "realization"
    else:
        result, kind = bd.robust_bound(inputs, args.n_states, args.v_max_H), "robust"
    record = result.record()
    return Table(list(record), [[record[k] for k in record]], {"bound": kind})


def cmd_figure(args) -> Table:
    overrides = dict(
        n_agents=args.agents, gamma=args.gamma, seed=args.seed, betas=args.beta, n_systems=args.systems,
        n_seeds=args.seeds, n_per_start=args.n_per_start, horizon=args.horizon, H_mu=args.H_mu,
        variant=args.variant, mask=args.mask, workers=args.workers,
    )
    config = make_config(args.command, args.paper_scale, **overrides)
    table = RUNNERS[args.command](config)
    table.meta["paper_scale"] = bool(args.paper_scale)
    return table


COMMANDS = {
    "gen": cmd_gen, "solve": cmd_solve, "robust": cmd_robust, "simulate": cmd_simulate,
    "evaluate": cmd_evaluate, "bounds": cmd_bounds, **{name: cmd_figure for name in RUNNERS},
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "workers", 1) < 1:
            raise ValueError("--workers must be positive")
        table = COMMANDS[args.command](args)
        if table is not None:
            _emit(args, table, args.command)
            for name, ok in table.checks.items():
                print(f"{'pass' if ok else 'FAIL'}: {name}")
            if args.check and not table.passed:
                raise _CheckFailed(", ".join(k for k, v in table.checks.items() if not v))
    except _CheckFailed as exc:
        print(f"dropout-mdp: failed checks: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except AssertionError as exc:
        print(f"dropout-mdp: assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except (DropoutMdpError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"dropout-mdp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
