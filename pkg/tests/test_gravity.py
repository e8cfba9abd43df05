from pathlib import Path

import numpy as np
import pytest

from examini.core.errors import ConfigError, DegenerateDomain, HsmlNoConvergence, OutOfDomain
from examini.gravity.hilbert import cell_coords, hilbert_index, hilbert_key, hilbert_sort
from examini.gravity.models import Bodies, GravityConfig, KeyDomain, SphParams, WalkParams
from examini.gravity.services import get_gravity_service, make_bodies, run_gravity
from examini.gravity.sph import find_hsml, kernel_w, sph_density
from examini.gravity.tree import audit_tree, build_tree, locate
from examini.gravity.walks import bh_force, direct_sum, grouped_walk_force, in_input_order, relative_error


def _cloud(n=200, seed=11):
    return make_bodies(GravityConfig(n_bodies=n, seed=seed))


def _lattice(n=8, spacing=0.1, mass=1.0):
    axis = np.arange(n) * spacing
    pos = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    return Bodies(pos, np.full(len(pos), mass))


def test_hilbert_curve_visits_neighbouring_cells():
    side = 4
    coords = np.array([(i, j, k) for i in range(side) for j in range(side) for k in range(side)])
    keys = hilbert_index(coords, order=2)
    assert sorted(keys.tolist()) == list(range(side ** 3))
    path = coords[np.argsort(keys)]
    steps = np.abs(np.diff(path, axis=0)).sum(axis=1)
    assert np.all(steps == 1)


def test_positions_in_one_cell_share_a_key():
    domain = KeyDomain(np.zeros(3), 1.0)
    keys = hilbert_key(np.array([[0.01, 0.01, 0.01], [0.1, 0.1, 0.1], [0.9, 0.1, 0.1]]), domain, order=3)
    assert keys[0] == keys[1]
    assert keys[0] != keys[2]


def test_out_of_domain_position():
    domain = KeyDomain(np.zeros(3), 1.0)
    with pytest.raises(OutOfDomain) as info:
        cell_coords(np.array([[0.5, 0.5, 0.5], [1.5, 0.5, 0.5]]), domain, 4)
    assert info.value.index == 1


def test_degenerate_domain():
    with pytest.raises(DegenerateDomain):
        KeyDomain.around(np.ones((3, 3)))
    lone = KeyDomain.around(np.array([[2.0, 2.0, 2.0]]))
    assert lone.size == 1.0


def test_hilbert_sort_keeps_ids():
    bodies = _cloud(50)
    ordered = hilbert_sort(bodies, KeyDomain.around(bodies.pos))
    assert np.all(np.diff(ordered.keys.astype(np.int64)) >= 0)
    assert sorted(ordered.ids.tolist()) == list(range(50))
    assert np.array_equal(ordered.pos, bodies.pos[ordered.ids])


def test_nonpositive_mass_is_rejected():
    with pytest.raises(ConfigError):
        Bodies(np.zeros((2, 3)), np.array([1.0, 0.0]))


def test_single_body_tree():
    tree = build_tree(Bodies(np.array([[0.3, 0.2, 0.1]]), 2.0))
    assert tree.nodes == 1
    assert tree.leaf[0]
    assert tree.mass[0] == 2.0
    assert np.allclose(tree.com[0], [0.3, 0.2, 0.1])


def test_symmetric_pair_centre_of_mass():
    tree = build_tree(Bodies(np.array([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]), 1.0), leaf_capacity=1)
    assert tree.mass[0] == 2.0
    assert np.allclose(tree.com[0], 0.0, atol=1e-15)


def test_tree_audit_and_leaf_capacity():
    bodies = _cloud(300)
    tree = build_tree(bodies, leaf_capacity=4)
    audit = audit_tree(tree, bodies)
    assert audit["status"] == "ok", audit["problems"]
    assert tree.mass[0] == pytest.approx(bodies.mass.sum(), rel=1e-12)
    assert np.all(tree.end[tree.leaves()] - tree.start[tree.leaves()] <= 4)


def test_locate_finds_owning_leaf():
    tree = build_tree(_cloud(100), leaf_capacity=4)
    for k in (0, 17, 63, 99):
        leaf = locate(tree, tree.bodies.pos[k])
        assert tree.leaf[leaf]
        assert tree.start[leaf] <= k < tree.end[leaf]
    assert locate(tree, [10.0, 10.0, 10.0]) == -1


def test_direct_sum_pair():
    bodies = Bodies(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]), 1.0)
    acc = direct_sum(bodies)
    assert np.allclose(acc, [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], atol=1e-15)


def test_direct_sum_symmetric_square_cancels():
    pos = np.array([[1.0, 1.0, 0.0], [-1.0, 1.0, 0.0], [-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, 0.0]])
    acc = direct_sum(Bodies(pos, 1.0), softening=0.01)
    assert np.all(np.abs(acc[4]) < 1e-13)


def test_zero_opening_angle_matches_direct_sum():
    tree = build_tree(_cloud(120))
    params = WalkParams(theta=0.0, softening=1e-3)
    exact = direct_sum(tree.bodies, params.softening)
    walked = bh_force(tree, tree.bodies, params)
    assert np.max(relative_error(walked, exact)) < 1e-12


def test_groups_of_one_reproduce_classic_walk():
    tree = build_tree(_cloud(120))
    classic = bh_force(tree, tree.bodies, WalkParams(theta=0.6))
    grouped = grouped_walk_force(tree, tree.bodies, WalkParams(theta=0.6, group_size=1))
    assert np.allclose(grouped, classic, rtol=1e-13, atol=1e-13)


def test_grouped_walk_accuracy_and_counters():
    bodies = _cloud(400)
    tree = build_tree(bodies)
    params = WalkParams(theta=0.5, softening=1e-3, group_size=16)
    counters = []
    acc = grouped_walk_force(tree, tree.bodies, params, counters=counters)
    exact = direct_sum(tree.bodies, params.softening)
    assert np.median(relative_error(acc, exact)) < 1e-2
    assert sum(size for _, size in counters) == 400
    assert all(length > 0 for length, _ in counters)


def test_conservative_grouping_is_not_less_accurate():
    tree = build_tree(_cloud(400, seed=4))
    exact = direct_sum(tree.bodies, 1e-3)
    classic = bh_force(tree, tree.bodies, WalkParams(theta=0.5))
    grouped = grouped_walk_force(tree, tree.bodies, WalkParams(theta=0.5, group_size=32))
    assert relative_error(grouped, exact).max() <= relative_error(classic, exact).max() + 1e-12


def test_grouped_walk_on_a_contiguous_run_of_bodies():
    tree = build_tree(_cloud(200, seed=8))
    params = WalkParams(theta=0.5, group_size=16)
    full = grouped_walk_force(tree, tree.bodies, params)
    head = grouped_walk_force(tree, tree.bodies.take(np.arange(64)), params)
    assert head.shape == (64, 3)
    assert np.array_equal(head, full[:64])


def _shared_ancestor_rate(pos, domain, depth):
    cells = cell_coords(pos, domain, depth)
    return float(np.mean(np.all(cells[1:] == cells[:-1], axis=1)))


def test_hilbert_order_keeps_neighbours_in_shared_cells():
    rng = np.random.default_rng(21)
    bodies = Bodies(rng.random((1000, 3)), 1.0)
    domain = KeyDomain.around(bodies.pos)
    ordered = hilbert_sort(bodies, domain)
    shuffled = ordered.pos[rng.permutation(1000)]
    for depth in (1, 2, 3):
        assert _shared_ancestor_rate(ordered.pos, domain, depth) > _shared_ancestor_rate(shuffled, domain, depth)
    assert _shared_ancestor_rate(ordered.pos, domain, 2) > 0.9


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_median_error_shrinks_with_opening_angle(seed):
    tree = build_tree(_cloud(1000, seed=seed))
    exact = direct_sum(tree.bodies, 1e-3)
    medians = [np.median(relative_error(bh_force(tree, tree.bodies, WalkParams(theta=theta, softening=1e-3)), exact))
               for theta in (0.8, 0.5, 0.3)]
    assert medians[0] >= medians[1] >= medians[2]


def test_inactive_bodies_get_no_force():
    bodies = _cloud(60)
    bodies.active[::2] = False
    tree = build_tree(bodies)
    acc = bh_force(tree, tree.bodies, WalkParams())
    assert np.all(acc[~tree.bodies.active] == 0.0)
    grouped = grouped_walk_force(tree, tree.bodies, WalkParams())
    assert np.all(grouped[~tree.bodies.active] == 0.0)


def test_input_order_restores_ids():
    bodies = _cloud(40)
    tree = build_tree(bodies)
    acc = direct_sum(tree.bodies)
    assert np.allclose(in_input_order(tree, acc, bodies), direct_sum(bodies), rtol=1e-12, atol=1e-12)


def test_kernel_is_compact():
    assert kernel_w(0.0, 0.5) == pytest.approx(8.0 / (np.pi * 0.125))
    assert kernel_w(0.5, 0.5) == 0.0
    assert kernel_w(0.7, 0.5) == 0.0


def test_isolated_particle_density():
    lone = Bodies(np.array([[0.0, 0.0, 0.0]]), 3.0)
    rho = sph_density(lone, np.array([0.5]))
    assert rho[0] == pytest.approx(3.0 * 8.0 / (np.pi * 0.125))


def test_sph_params_validation():
    with pytest.raises(ConfigError):
        SphParams(n_ngb=10).validate()
    with pytest.raises(ConfigError):
        find_hsml(_cloud(20), SphParams(n_ngb=32))


def test_lattice_smoothing_lengths_and_density():
    spacing, mass = 0.1, 2.0
    bodies = _lattice(8, spacing, mass)
    sph = SphParams(n_ngb=64)
    h = find_hsml(bodies, sph)
    rho = sph_density(bodies, h)

    index = np.arange(8)
    centre = np.isin(np.rint(bodies.pos / spacing).astype(int), index[3:5]).all(axis=1)
    expected_h = spacing * (3.0 * sph.n_ngb / (4.0 * np.pi)) ** (1.0 / 3.0)
    assert np.all(np.abs(h[centre] - expected_h) < 0.1 * expected_h)
    assert np.all(np.abs(rho[centre] - mass / spacing ** 3) < 0.05 * mass / spacing ** 3)
    assert np.all(h[~centre] >= h[centre].min() * (1 - 1e-3))


def test_smoothing_length_iteration_limit():
    with pytest.raises(HsmlNoConvergence):
        find_hsml(_lattice(6), SphParams(n_ngb=40, max_iterations=1))


def test_gravity_config_validation():
    with pytest.raises(ConfigError):
        GravityConfig(walk="fmm").validate()
    with pytest.raises(ConfigError):
        GravityConfig(key_order=22).validate()
    with pytest.raises(ConfigError):
        GravityConfig(params=WalkParams(theta=-1.0)).validate()


def test_rank_split_keeps_accuracy():
    config = GravityConfig(n_bodies=200, seed=3, params=WalkParams(group_size=8))
    single = run_gravity(config, ranks=1)
    split = run_gravity(config, ranks=2)
    assert len(split.errors) == 200
    assert split.audit["status"] == "ok"
    assert set(split.counters["rank"]) == {0, 1}
    assert split.error_summary()["median"] < 1e-2
    assert np.array_equal(split.bodies.ids, single.bodies.ids)
    assert np.allclose(split.reference, single.reference, rtol=1e-12, atol=1e-12)


def test_timing_runs_skip_reference():
    result = run_gravity(GravityConfig(n_bodies=64, walk="bh"), reference=False)
    assert result.errors.empty
    assert len(result.counters) == 64


def test_gravity_service_writes_outputs(tmp_path):
    config = GravityConfig(n_bodies=128, sph=SphParams(n_ngb=32))
    summary = get_gravity_service(tmp_path).run(config, stem="g")
    assert summary["status"] == "completed"
    assert summary["bodies"] == 128
    assert summary["mean_list_length"] > 0
    assert set(summary["paths"]) == {"errors", "interactions", "trace", "sph"}
    for path in summary["paths"].values():
        assert Path(path).exists()
