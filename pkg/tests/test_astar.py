"""Tree-search engine: cost models, expansion mechanics, termination."""

import numpy as np
import pytest

from treepursuit.astar import (
    AompConfig,
    AuditError,
    aomp_recover,
    cost_amul,
    cost_mul,
    default_config,
    expand,
    hybrid_recover,
    init_search,
    load_config,
    select_best_incomplete,
    write_default_config,
)
from treepursuit.baselines import omp_recover
from treepursuit.results import REASON_ALL_COMPLETE, REASON_BUDGET, REASON_RESIDUE
from treepursuit.siggen import derive_seed, gen_problem


# fixed-decay cost: alpha^(kmax-l) * ||r_l||, here 0.8^(10-8) * 1.0
def test_cost_mul_frozen_value():
    norms = (4.0,) + (1.0,) * 8
    assert cost_mul(norms, 10, 0.8) == pytest.approx(0.64, abs=1e-15)


# adaptive decay: (alpha * 0.4 / 0.5)^(6-4) * 0.4
def test_cost_amul_frozen_value():
    norms = (1.0, 0.9, 0.7, 0.5, 0.4)
    assert cost_amul(norms, 6, 0.97) == pytest.approx(0.2408704, abs=1e-12)


def test_cost_model_domains():
    with pytest.raises(ValueError):
        cost_mul((1.0, 0.5), 5, 1.0)
    with pytest.raises(ValueError):
        cost_mul((1.0,) * 7, 5, 0.8)  # path longer than kmax
    with pytest.raises(ValueError):
        cost_amul((1.0,), 5, 0.97)  # needs one selected atom
    with pytest.raises(ValueError):
        cost_amul((1.0, 0.5), 5, 1.5)
    # a path that already annihilated the residue costs nothing
    assert cost_amul((1.0, 0.0, 0.0), 5, 0.97) == 0.0


def test_cost_prefers_shorter_when_equal_norms():
    # same residue norm, longer path -> smaller lookahead discount -> costlier
    short = cost_mul((1.0, 0.5), 10, 0.8)
    long = cost_mul((1.0, 0.8, 0.5), 10, 0.8)
    assert short < long


def test_config_validation():
    with pytest.raises(ValueError):
        AompConfig(initial_paths=0).validate()
    with pytest.raises(ValueError):
        AompConfig(max_paths=2, initial_paths=3).validate()
    with pytest.raises(ValueError):
        AompConfig(cost_model="sum").validate()
    with pytest.raises(ValueError):
        AompConfig(termination="never").validate()
    with pytest.raises(ValueError):
        AompConfig(cost_model="mul", alpha_mul=1.0).validate()
    AompConfig().validate()


def test_config_round_trip_and_unknown_keys(tmp_path):
    cfg = AompConfig(branch=3, kmax=17, cost_model="mul")
    again = AompConfig.from_dict(cfg.to_dict())
    assert again == cfg
    with pytest.raises(ValueError):
        AompConfig.from_dict({"brnch": 3})
    path = tmp_path / "cfg.json"
    write_default_config(path)
    assert load_config(path) == default_config()


def test_sparsity_preset_floors_epsilon():
    cfg = AompConfig.sparsity_based(8, epsilon=0.0)
    assert cfg.kmax == 8
    assert cfg.termination == "sparsity"
    assert cfg.alpha_mul == 0.8
    assert cfg.effective_epsilon() == 1e-6


def test_single_path_search_equals_omp():
    # with one seed path, one branch and one slot the search degenerates to
    # plain orthogonal matching pursuit, selection for selection
    for t in range(30):
        seed = derive_seed(11, "red", t)
        k = 2 + t % 6
        ens, inst = gen_problem(24, 48, k, ["gaussian", "uniform", "cars"][t % 3], seed)
        cfg = AompConfig.sparsity_based(k, initial_paths=1, branch=1, max_paths=1)
        mine = aomp_recover(ens.phi, inst.y, cfg)
        ref = omp_recover(ens.phi, inst.y, max_iter=k)
        assert list(mine.support) == list(ref.support)


def test_exact_recovery_and_reason_on_easy_instances():
    hits = 0
    for seed in range(20):
        ens, inst = gen_problem(32, 64, 5, "gaussian", seed)
        out = aomp_recover(ens.phi, inst.y, AompConfig(kmax=12))
        rel = np.linalg.norm(inst.x - out.xhat) / np.linalg.norm(inst.x)
        if out.reason == REASON_RESIDUE:
            hits += 1
            assert rel < 1e-6
            assert out.residual_norm <= 1e-6 * np.linalg.norm(inst.y)
    assert hits >= 19


def test_reason_matches_residue_invariant():
    # reason must be residue_met exactly when the final residual clears the
    # effective threshold, whatever route ended the search
    for seed in range(15):
        ens, inst = gen_problem(16, 64, 10, "gaussian", seed)
        for cfg in (
            AompConfig(kmax=12, epsilon=1e-6),
            AompConfig.sparsity_based(10),
            AompConfig(kmax=12, max_iterations=3),
        ):
            out = aomp_recover(ens.phi, inst.y, cfg)
            met = out.residual_norm <= cfg.effective_epsilon() * np.linalg.norm(inst.y)
            assert (out.reason == REASON_RESIDUE) == met


def test_budget_exhaustion_reported():
    ens, inst = gen_problem(16, 64, 10, "gaussian", 3)
    out = aomp_recover(ens.phi, inst.y, AompConfig(kmax=12, max_iterations=2))
    assert out.converged is False
    assert out.reason == REASON_BUDGET
    assert out.iterations == 2


def test_sparsity_termination_caps_path_length():
    ens, inst = gen_problem(20, 50, 4, "gaussian", 8)
    out = aomp_recover(ens.phi, inst.y, AompConfig.sparsity_based(4))
    assert len(out.support) <= 4
    hard = gen_problem(10, 60, 8, "gaussian", 5)
    out = aomp_recover(hard[0].phi, hard[1].y, AompConfig.sparsity_based(8))
    assert len(out.support) <= 8
    if out.reason != REASON_RESIDUE:
        assert out.reason == REASON_ALL_COMPLETE


def test_determinism_under_replay():
    ens, inst = gen_problem(24, 96, 12, "uniform", 101)
    cfg = AompConfig(kmax=18, audit=True)
    a = aomp_recover(ens.phi, inst.y, cfg)
    b = aomp_recover(ens.phi, inst.y, cfg)
    assert a.to_dict(include_times=False) == b.to_dict(include_times=False)
    assert a.iterations == b.iterations
    assert a.nodes_expanded == b.nodes_expanded
    assert a.paths_opened == b.paths_opened


def test_audit_mode_accepts_seeded_batch():
    # the audited invariants: live-path cap, distinct supports, fresh costs,
    # monotone residue histories, disjoint expansion candidates
    for seed in range(25):
        k = 4 + seed % 8
        ens, inst = gen_problem(20, 60, k, ["gaussian", "cars"][seed % 2], seed)
        cfg = AompConfig(kmax=16, max_paths=20, audit=True)
        aomp_recover(ens.phi, inst.y, cfg)  # raises AuditError on violation


def test_custom_priorities_still_recover():
    ens, inst = gen_problem(30, 60, 6, "gaussian", 17)
    reversed_priorities = list(range(59, -1, -1))
    out = aomp_recover(ens.phi, inst.y, AompConfig(kmax=12), priorities=reversed_priorities)
    assert out.reason == REASON_RESIDUE
    rel = np.linalg.norm(inst.x - out.xhat) / np.linalg.norm(inst.x)
    assert rel < 1e-8


def test_select_among_all_legacy_mode():
    ens, inst = gen_problem(32, 64, 6, "gaussian", 23)
    cfg = AompConfig(kmax=12, select_among_all=True)
    out = aomp_recover(ens.phi, inst.y, cfg)
    assert out.reason == REASON_RESIDUE


def test_zero_measurement_short_circuits():
    phi = np.random.default_rng(0).normal(size=(10, 20))
    out = aomp_recover(phi, np.zeros(10), AompConfig(kmax=5))
    assert out.support == ()
    assert out.reason == REASON_RESIDUE
    assert np.all(out.xhat == 0)


def test_shape_validation():
    with pytest.raises(ValueError):
        aomp_recover(np.zeros((4, 8)), np.zeros(5), AompConfig(kmax=3))


def test_expansion_round_post_conditions():
    # scripted single rounds: the expanded path either terminates the
    # search, is consumed by its first accepted child, or is exhausted
    for seed in range(20):
        ens, inst = gen_problem(18, 40, 6, "gaussian", derive_seed(31, "exp", seed))
        cfg = AompConfig(kmax=10, initial_paths=2, branch=3, max_paths=4)
        trie, done = init_search(ens.phi, inst.y, cfg)
        if done is not None:
            continue
        for _ in range(12):
            best = select_best_incomplete(trie, cfg)
            if best is None:
                break
            before = trie.live_count
            report = expand(trie, best, ens.phi, inst.y, cfg)
            assert trie.live_count <= cfg.max_paths
            if report.terminated is not None:
                break
            if report.consumed:
                assert best.node is None  # replaced by its first child
                assert trie.live_count >= before
            else:
                assert best.exhausted and best.complete(cfg.kmax)
            assert report.children_evaluated <= cfg.branch


def test_init_search_seeds_top_correlated_atoms():
    ens, inst = gen_problem(20, 40, 5, "gaussian", 77)
    cfg = AompConfig(kmax=8, initial_paths=3)
    trie, done = init_search(ens.phi, inst.y, cfg)
    scores = np.abs(ens.phi.T @ inst.y)
    want = set(np.argsort(-scores)[:3])
    got = {p.support[0] for p in trie.paths()}
    assert got == want
    for p in trie.paths():
        assert p.length == 1
        assert p.cost > 0


def test_equivalent_paths_are_pruned_not_duplicated():
    # wide searches on hard instances must eventually revisit a support
    # set; the trie memory reports those as hits instead of duplicating
    hits = 0
    for seed in range(10):
        ens, inst = gen_problem(14, 24, 9, "gaussian", derive_seed(5, "eq", seed))
        cfg = AompConfig(kmax=12, initial_paths=3, branch=3, max_paths=50, audit=True)
        out = aomp_recover(ens.phi, inst.y, cfg)
        hits += out.equivalent_hits
    assert hits > 0


def test_hybrid_returns_first_stage_when_greedy_suffices():
    ens, inst = gen_problem(32, 64, 4, "gaussian", 12)
    ref = omp_recover(ens.phi, inst.y, max_iter=4)
    assert ref.reason == REASON_RESIDUE  # easy instance, OMP nails it
    out = hybrid_recover(ens.phi, inst.y, AompConfig(kmax=10), 4)
    assert out.solver == "hybrid"
    assert out.hybrid_stage == "omp"
    assert list(out.support) == list(ref.support)


def test_hybrid_falls_back_to_search_on_greedy_failure():
    fell_back = 0
    for seed in range(60):
        ens, inst = gen_problem(100, 256, 30, "gaussian", derive_seed(9, "hy", seed))
        omp = omp_recover(ens.phi, inst.y, max_iter=30)
        if omp.reason == REASON_RESIDUE:
            continue
        fell_back += 1
        out = hybrid_recover(ens.phi, inst.y, AompConfig(kmax=60), 30)
        assert out.hybrid_stage == "astar"
        rel = np.linalg.norm(inst.x - out.xhat) / np.linalg.norm(inst.x)
        assert rel < 1e-6
        break
    assert fell_back == 1, "no greedy failure found in 60 seeds"


def test_hybrid_validates_k():
    ens, inst = gen_problem(10, 20, 3, "gaussian", 1)
    with pytest.raises(ValueError):
        hybrid_recover(ens.phi, inst.y, AompConfig(kmax=5), 0)
    with pytest.raises(ValueError):
        hybrid_recover(ens.phi, inst.y, AompConfig(kmax=5), 11)
