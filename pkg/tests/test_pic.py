from pathlib import Path

import numpy as np
import pytest

from examini.core.errors import ConfigError, GmresNoConvergence
from examini.pic.fields import ImplicitFieldSolver, explicit_cfl, field_solve
from examini.pic.gmres import gmres
from examini.pic.models import KERNELS, FieldGrid, Moments, ParticleSet, PicConfig
from examini.pic.moments import gather_moments, gather_species, total_momentum
from examini.pic.mover import gyro_angle, particle_mover
from examini.pic.particles import init_maxwellian
from examini.pic.services import get_pic_service, run_pic


def _particle(x, y, v, qom=-1.0, q=1.0):
    return ParticleSet(np.array([x]), np.array([y]), np.array(v, dtype=float).reshape(3, 1), np.array([q]), qom)


def test_quiet_start_cancels_momentum():
    particles, fields = init_maxwellian(PicConfig(cells=(8, 8), extent=(0.8, 0.8), ppc=8))
    for p in particles:
        assert np.all(np.abs(total_momentum(p)) < 1e-12)
    assert np.all(fields.e == 0.0)


def test_particle_count():
    particles, _ = init_maxwellian(PicConfig(cells=(8, 8), extent=(0.8, 0.8), ppc=4))
    assert sum(len(p) for p in particles) == 512


def test_initialization_depends_only_on_seed():
    first, _ = init_maxwellian(PicConfig(cells=(4, 4), extent=(0.4, 0.4), ppc=2, seed=7))
    second, _ = init_maxwellian(PicConfig(cells=(4, 4), extent=(0.4, 0.4), ppc=2, seed=7))
    assert np.array_equal(first[0].x, second[0].x)
    assert np.array_equal(first[1].v, second[1].v)


def test_odd_ppc_with_quiet_start_is_rejected():
    with pytest.raises(ConfigError):
        PicConfig(ppc=3).validate()


def test_free_streaming():
    fields = FieldGrid.zeros((8, 8), (0.1, 0.1))
    p = _particle(0.3, 0.4, (0.1, 0.2, 0.0))
    moved = particle_mover(p, fields, 0.1)
    assert np.array_equal(moved.x, p.x + 0.1 * p.v[0])
    assert np.array_equal(moved.y, p.y + 0.1 * p.v[1])
    assert np.array_equal(moved.v, p.v)


def test_gyration_in_uniform_field():
    fields = FieldGrid.zeros((8, 8), (0.1, 0.1))
    fields.b[2] = 2.0
    p = _particle(0.4, 0.4, (1.0, 0.0, 0.0))
    moved = particle_mover(p, fields, 0.1)
    v0, v1 = p.v[:, 0], moved.v[:, 0]
    assert np.linalg.norm(v1) == pytest.approx(1.0, abs=1e-13)
    angle = np.arccos(np.clip(np.dot(v0, v1), -1.0, 1.0))
    assert angle == pytest.approx(abs(gyro_angle(-1.0, 2.0, 0.1)), abs=1e-12)


def test_uniform_electric_acceleration():
    fields = FieldGrid.zeros((8, 8), (0.1, 0.1))
    fields.e[0] = 0.5
    p = _particle(0.4, 0.4, (0.1, 0.0, 0.0), qom=2.0)
    moved = particle_mover(p, fields, 0.1)
    assert moved.v[0, 0] == pytest.approx(0.1 + 2.0 * 0.5 * 0.1, abs=1e-15)


def test_deposit_on_a_node():
    p = _particle(0.5, 0.75, (0, 0, 0), q=2.0)
    rho, _, _ = gather_species(p, (8, 8), (0.25, 0.25))
    assert rho[2, 3] == pytest.approx(2.0 / 0.0625)
    assert np.count_nonzero(rho) == 1


def test_deposit_at_cell_centre_splits_evenly():
    p = _particle(0.625, 0.875, (0, 0, 0), q=1.0)
    rho, _, _ = gather_species(p, (8, 8), (0.25, 0.25))
    quarter = 0.25 / 0.0625
    for node in [(2, 3), (3, 3), (2, 4), (3, 4)]:
        assert rho[node] == pytest.approx(quarter)
    assert rho.sum() == pytest.approx(1.0 / 0.0625)


def test_random_cloud_deposit_matches_scalar_resummation():
    rng = np.random.default_rng(12)
    cells, spacing = (8, 8), (0.25, 0.25)
    n = 500
    charges = (0.5 + rng.random(n)) / n
    p = ParticleSet(rng.random(n) * 2.0, rng.random(n) * 2.0, rng.standard_normal((3, n)), charges, -1.0)
    rho, j, _ = gather_species(p, cells, spacing)

    volume = spacing[0] * spacing[1]
    expected_rho = np.zeros(cells)
    expected_jx = np.zeros(cells)
    for k in range(n):
        fx, fy = p.x[k] / spacing[0], p.y[k] / spacing[1]
        i, jj = int(np.floor(fx)), int(np.floor(fy))
        tx, ty = fx - i, fy - jj
        for di, dj, w in ((0, 0, (1 - tx) * (1 - ty)), (1, 0, tx * (1 - ty)), (0, 1, (1 - tx) * ty), (1, 1, tx * ty)):
            node = ((i + di) % cells[0], (jj + dj) % cells[1])
            expected_rho[node] += p.q[k] * w / volume
            expected_jx[node] += p.q[k] * p.v[0, k] * w / volume

    assert rho.sum() * volume == pytest.approx(p.q.sum(), rel=0, abs=1e-12)
    assert np.allclose(rho, expected_rho, rtol=0, atol=1e-12)
    assert np.allclose(j[0], expected_jx, rtol=0, atol=1e-12)


def test_zero_sources_keep_fields_zero():
    fields = FieldGrid.zeros((8, 8), (0.1, 0.1))
    moments = gather_moments([_particle(0.3, 0.3, (0, 0, 0), q=0.0)], (8, 8), (0.1, 0.1))
    out = field_solve(fields, moments, dt=0.1, theta=0.5, qoms=[-1.0])
    assert np.all(out.e == 0.0) and np.all(out.b == 0.0)


def test_field_solve_matches_dense_operator():
    rng = np.random.default_rng(5)
    cells, spacing = (8, 8), (0.2, 0.2)
    fields = FieldGrid(rng.standard_normal((3,) + cells), rng.standard_normal((3,) + cells), spacing)
    moments = Moments(rho=np.abs(rng.standard_normal((1,) + cells)), j=rng.standard_normal((1, 3) + cells),
                      p=rng.standard_normal((1, 6) + cells))
    solver = ImplicitFieldSolver([0.5], dt=0.1, theta=0.5)
    apply = solver.operator(fields, moments)
    size = 3 * cells[0] * cells[1]
    matrix = np.column_stack([apply(col) for col in np.eye(size)])
    expected = np.linalg.solve(matrix, solver.source(fields, moments).ravel())

    _, theta_fields, record = solver.solve(fields, moments, tolerance=1e-13, restart=60, max_iters=600)
    assert np.allclose(theta_fields.e.ravel(), expected, atol=1e-10)
    assert record.residual <= 1e-13


def test_gmres_identity():
    rhs = np.arange(1.0, 6.0)
    result = gmres(lambda x: x, rhs)
    assert np.allclose(result.x, rhs)
    assert result.iterations == 1


def test_gmres_nonsymmetric_system():
    a = np.array([[4.0, 1.0, 0.0, 0.5], [0.2, 3.0, 1.0, 0.0], [0.0, -1.0, 5.0, 1.0], [1.0, 0.0, 0.3, 2.0]])
    b = np.array([1.0, 2.0, 3.0, 4.0])
    result = gmres(lambda x: a @ x, b, tolerance=1e-14)
    assert np.allclose(result.x, np.linalg.solve(a, b), atol=1e-12)


def test_gmres_exact_initial_guess():
    a = np.diag([1.0, 2.0, 3.0])
    x = np.array([1.0, -1.0, 2.0])
    result = gmres(lambda v: a @ v, a @ x, x0=x)
    assert result.iterations == 0
    assert result.residual <= 1e-8


def test_gmres_reports_non_convergence():
    a = np.random.default_rng(6).standard_normal((20, 20)) + 5.0 * np.eye(20)
    with pytest.raises(GmresNoConvergence) as info:
        gmres(lambda v: a @ v, np.ones(20), tolerance=1e-14, restart=2, max_iters=2)
    assert info.value.iterations == 2


def test_zero_cycles_returns_initial_state():
    config = PicConfig(cells=(4, 4), extent=(0.4, 0.4), ppc=2)
    result = run_pic(config, cycles=0)
    initial, _ = init_maxwellian(config)
    assert len(result.history) == 1
    assert np.array_equal(result.particles[0].x, initial[0].x)
    assert result.timings.empty


def test_rank_count_must_divide_cells():
    with pytest.raises(ConfigError):
        run_pic(PicConfig(cells=(6, 6), extent=(0.6, 0.6), ppc=2), ranks=4, cycles=0)


@pytest.mark.slow
def test_eight_ranks_reproduce_single_rank_moments():
    config = PicConfig(cells=(16, 16), extent=(1.6, 1.6), ppc=4, cycles=2)
    single = run_pic(config, ranks=1)
    split = run_pic(config, ranks=8)
    assert np.allclose(split.moments.rho, single.moments.rho, rtol=0, atol=1e-12)
    assert np.allclose(split.moments.j, single.moments.j, rtol=0, atol=1e-12)
    assert sum(len(p) for p in split.particles) == sum(len(p) for p in single.particles)


@pytest.mark.slow
def test_total_energy_drift_over_a_hundred_cycles():
    result = run_pic(PicConfig(cycles=100))
    total = result.history["total_energy"]
    assert len(total) == 101
    assert np.max(np.abs(total - total.iloc[0])) / total.iloc[0] < 5e-3


@pytest.mark.slow
def test_ten_times_the_explicit_limit_stays_bounded():
    config = PicConfig(cycles=200)
    config.dt = 10.0 * explicit_cfl(config.spacing)
    history = run_pic(config).history
    initial_total = history["total_energy"].iloc[0]
    assert np.all(np.isfinite(history["total_energy"]))
    assert history["field_energy"].max() < 2.0 * initial_total
    assert history["total_energy"].max() < 2.0 * initial_total


def test_pic_service_writes_outputs(tmp_path):
    config = PicConfig(cells=(4, 4), extent=(0.4, 0.4), ppc=2, cycles=1)
    summary = get_pic_service(tmp_path).run(config, stem="pic")
    assert summary["status"] == "completed"
    assert summary["cycles"] == 1
    assert summary["particles"] == 64
    assert {row["kernel"] for row in summary["kernel_summary"]} == set(KERNELS)
    for path in summary["paths"].values():
        assert Path(path).exists()
