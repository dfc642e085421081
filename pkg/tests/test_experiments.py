import json

import numpy as np
import pytest

from dropout_mdp.experiments import (
    ExperimentConfig,
    Table,
    fig3_system,
    gen_random_system,
    make_config,
    optimal_policy,
    robust_is_pipeline,
    run_fig1,
    run_fig2,
    run_fig4,
    soften,
)
from dropout_mdp.mdp_core import DropoutMask, DropoutModel, FactoredMdp


# -- random systems --------------------------------------------------------

def test_full_smoothing_gives_uniform_rows():
    mdp = gen_random_system(2, 3, 2, 0.9, seed=0, eps_smooth=1.0)
    for f in mdp.factors:
        np.testing.assert_allclose(f, 1 / 3, atol=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_transition_entries_bounded_below(seed):
    mdp = gen_random_system(3, 3, 2, 0.9, seed, eps_smooth=0.1)
    assert mdp.transition().min() >= (0.1 / 3) ** 3 - 1e-15
    for f in mdp.factors:
        assert f.min() >= 0.1 / 3 - 1e-15
    for r in mdp.rewards:
        assert r.min() >= 0 and r.max() <= 1


def test_seeds_reproduce_and_differ():
    for seed in range(100):
        a = gen_random_system(2, 2, 2, 0.9, seed)
        b = gen_random_system(2, 2, 2, 0.9, seed)
        c = gen_random_system(2, 2, 2, 0.9, seed + 100)
        assert all(np.array_equal(x, y) for x, y in zip(a.factors + a.rewards, b.factors + b.rewards))
        assert any(not np.array_equal(x, y) for x, y in zip(a.factors + a.rewards, c.factors + c.rewards))


def test_generator_validation():
    with pytest.raises(ValueError):
        gen_random_system(2, 2, 2, 0.9, 0, eps_smooth=0.0)
    with pytest.raises(ValueError):
        gen_random_system(2, 2, 2, 0.9, 0, parents="ring")
    local = gen_random_system(3, 2, 2, 0.9, 0, parents="local")
    assert local.has_local_parents


# -- tables and configs ----------------------------------------------------

def test_table_csv_has_metadata_and_checks(tmp_path):
    t = Table(["a", "b"], [[1, 0.1], [2, 1 / 3]], {"config": {"seed": 3}}, {"ok": True, "bad": False})
    text = t.to_csv()
    assert text.splitlines()[0] == '# config: {"seed": 3}'
    assert "# check bad: FAIL" in text and "a,b" in text
    assert float(text.splitlines()[-1].split(",")[1]) == 1 / 3
    assert not t.passed
    path = t.write(tmp_path / "x" / "t.json", "json")
    assert json.loads(path.read_text())["rows"][1][1] == 1 / 3


def test_make_config_scales_and_overrides():
    desk = make_config("fig3")
    big = make_config("fig3", paper_scale=True)
    assert desk.n_systems == 50 and big.n_systems == 1000
    assert make_config("fig4", paper_scale=True).horizon == 500
    assert make_config("fig4", seed=9, horizon=None).seed == 9
    with pytest.raises(ValueError):
        ExperimentConfig(n_agents=0)
    with pytest.raises(ValueError):
        ExperimentConfig(gamma=1.0)


# -- fig1 ------------------------------------------------------------------

def test_fig1_curves_coincide_without_dropout():
    cfg = make_config("fig1", betas=(1.0,), mask="1111", t_drop=20, t_total=60, n_seeds=5)
    t = run_fig1(cfg)
    np.testing.assert_array_equal(t.column("running_pre_optimal"), t.column("running_post_optimal"))
    np.testing.assert_array_equal(t.column("running_pre_optimal"), t.column("running_robust"))


def test_fig1_zero_reward_gives_zero_curves():
    base = gen_random_system(2, 2, 2, 0.9, seed=0)
    mdp = FactoredMdp(base.substate_sizes, base.action_sizes, base.factors,
                      tuple(np.zeros_like(r) for r in base.rewards), 0.9)
    cfg = make_config("fig1", n_agents=2, mask="10", t_drop=10, t_total=30, n_seeds=4)
    t = run_fig1(cfg, mdp)
    for name in t.columns[1:]:
        np.testing.assert_array_equal(t.column(name), 0.0)


def test_fig1_default_ordering():
    t = run_fig1(make_config("fig1", t_drop=200, t_total=400, n_seeds=50))
    assert t.passed, t.checks
    assert len(t.rows) == 400


def test_fig1_rejects_bad_mask():
    with pytest.raises(ValueError):
        run_fig1(make_config("fig1", mask="10", t_total=10, t_drop=5, n_seeds=2))


# -- fig2 ------------------------------------------------------------------

def test_fig2_endpoints():
    mdp = gen_random_system(3, 2, 2, 0.9, seed=2)
    t = run_fig2(make_config("fig2", betas=(0.0, 1.0)), mdp)
    beta = t.column("beta")
    gap, bound = t.column("gap"), t.column("bound")
    one = beta == 1.0
    np.testing.assert_array_equal(bound[one], 0.0)
    np.testing.assert_allclose(gap[one], 0.0, atol=1e-9)
    zero = beta == 0.0
    np.testing.assert_array_equal(bound[zero], (t.column("optimal") - t.column("uniform"))[zero])
    assert t.passed


# -- fig3 ------------------------------------------------------------------

def test_fig3_single_system_sanity():
    mdp = gen_random_system(3, 2, 2, 0.9, seed=4)
    res = fig3_system(mdp)
    assert res["per_mask"][0]["pre_optimal"][0] == pytest.approx(0.0, abs=1e-9)
    for name, losses in res["per_mask"][0].items():
        assert losses[0] == pytest.approx(res["pre_robust"][0][name], abs=1e-12)
    assert res["min_state_loss"] >= -1e-8
    for k, per in res["per_mask"].items():
        for losses in per.values():
            assert len(losses) == {0: 1, 1: 3, 2: 3}[k]
            assert min(losses) >= -1e-8


# -- fig4 ------------------------------------------------------------------

def test_pipeline_with_candidate_equal_behavioral_is_monte_carlo():
    mdp = gen_random_system(2, 2, 2, 0.9, seed=4, parents="local")
    behavioral = soften(optimal_policy(mdp), 0.2)
    res = robust_is_pipeline(mdp, DropoutModel((1.0, 1.0)), behavioral, behavioral, 40, 10, 500, seed=1,
                             variant="ordinary")
    from dropout_mdp.simulator import sample_dataset
    data = sample_dataset(mdp, behavioral, 40, 10, 1)
    mc = (data.rewards * 0.9 ** np.arange(10)).sum(axis=-1).mean(axis=1)
    np.testing.assert_allclose(res["robust"], mc, rtol=1e-13)
    assert list(res["per_mask"]) == [DropoutMask((True, True))]


def test_fig4_desk_scale_within_bound():
    t = run_fig4(make_config("fig4"))
    assert t.checks["bound_level_90pct"]
    assert t.checks["error_within_epsilon_total"]
    assert t.meta["max_abs_error"] <= t.meta["bound"]["epsilon_total"]
    assert t.meta["steps_to_95pct"] > 0
    assert t.meta["config"]["horizon"] == 50 and t.meta["config"]["n_per_start"] == 100


def test_fig4_accepts_paper_scale_config():
    cfg = make_config("fig4", paper_scale=True)
    assert cfg.meta()["horizon"] == 500 and cfg.meta()["H_mu"] == 5000
