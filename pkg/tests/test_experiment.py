import numpy as np
import pytest

from viscosolve import (
    ExperimentConfig,
    Simplex,
    benchmark_schedule,
    build_benchmark_problem,
    emit_report,
    emit_tables,
    emit_trace,
    norm,
    reference_solution,
    run_experiment,
)


@pytest.fixture(scope="module")
def small_report():
    cfg = ExperimentConfig(thetas=(0.4, 0.9), seeds=(1, 2, 3), n_max=300,
                           epsilons=(0.5, 0.1, 1e-9))
    return run_experiment(cfg)


def test_benchmark_problem_pieces(problem):
    assert problem.nu == pytest.approx(0.1, abs=1e-15)
    assert isinstance(problem.reference_set_omega, Simplex)
    assert problem.reference_set_omega.total == 2.6
    q = reference_solution(problem, tol=1e-12)
    assert abs(q[0] - 0.9647) < 5e-5 and abs(q[1] - 1.6353) < 5e-5


def test_benchmark_schedule_defaults(problem):
    s = benchmark_schedule(0.9, problem=problem)
    assert s.lam.value == pytest.approx(0.1, abs=1e-15)
    assert s.bounds == (0.1, 0.1)


def test_cells_cover_grid(small_report):
    assert len(small_report.cells) == 6
    assert {(c.theta, c.seed) for c in small_report.cells} == {
        (t, s) for t in (0.4, 0.9) for s in (1, 2, 3)
    }
    for c in small_report.cells:
        assert c.error is None
        assert c.trace.k.size == 300


def test_min_rel_err_matches_trace(small_report):
    for c in small_report.cells:
        assert c.min_rel_err == c.trace.min_rel_err()
        # running minimum is nonincreasing by construction
        running = np.minimum.accumulate(c.trace.rel_err)
        assert np.all(np.diff(running) <= 0)


def test_first_hit_consistency(small_report):
    # looser thresholds are hit no later; ND absorbs
    for c in small_report.cells:
        hits = c.first_hit
        eps_sorted = sorted(hits, reverse=True)
        for e1, e2 in zip(eps_sorted, eps_sorted[1:]):
            if hits[e2] is None:
                continue
            assert hits[e1] is not None and hits[e1] <= hits[e2]
        # definition check at the hit index
        for eps, k in hits.items():
            if k is not None:
                rel = c.trace.rel_err
                assert rel[k - 1] <= eps
                assert np.all(rel[: k - 1] > eps)


def test_never_hit_is_nd(small_report):
    grid = small_report.first_hit_grid()
    assert grid[1e-9] == {0.4: None, 0.9: None}


def test_perturbed_iterates_feasible(small_report):
    for c in small_report.cells:
        assert np.all(c.trace.x >= 0.0)


def test_deterministic_mode_single_cell_per_theta():
    cfg = ExperimentConfig(thetas=(0.9,), seeds=(1, 2, 3), n_max=200, deterministic=True)
    rep = run_experiment(cfg)
    assert len(rep.cells) == 1
    assert rep.cells[0].seed == 0
    assert rep.cells[0].trace.e_norm.max() == 0.0


def test_emit_report_layout(tmp_path, small_report):
    out = emit_report(small_report, tmp_path / "exp")
    assert (out / "report.csv").exists()
    assert (out / "meta.txt").exists()
    assert (out / "traces" / "theta_0.4_seed_1.csv").exists()
    assert (out / "traces" / "theta_0.9_seed_3.csv").exists()
    report_lines = (out / "report.csv").read_text().strip().split("\n")
    assert report_lines[0].startswith("theta,seed,min_rel_err,hit_0.5,hit_0.1,hit_1e-09")
    assert len(report_lines) == 7
    trace_lines = (out / "traces" / "theta_0.9_seed_1.csv").read_text().strip().split("\n")
    assert len(trace_lines) == 301  # header + one line per iterate
    meta = (out / "meta.txt").read_text()
    assert "prng: numpy-pcg64" in meta
    assert "config_digest:" in meta


def test_emit_tables_shapes(tmp_path, small_report):
    out = tmp_path / "tables"
    written = emit_tables(small_report, out)
    names = {p.name for p in written}
    assert names == {"table1.csv", "table1.txt", "table2.csv", "table2.txt",
                     "table3.csv", "table3.txt"}
    t1 = (out / "table1.csv").read_text().strip().split("\n")
    assert t1[0] == "theta,median_min_rel_err,min,max,n_seeds"
    assert len(t1) == 2  # only theta = 0.4
    t3 = (out / "table3.csv").read_text().strip().split("\n")
    assert t3[0] == "eps,theta_0.4,theta_0.9"
    assert t3[-1].endswith("ND,ND")  # eps = 1e-9 unreachable in 300 steps


def test_emit_tables_without_epsilons(tmp_path):
    cfg = ExperimentConfig(thetas=(0.9,), seeds=(1,), n_max=100, epsilons=())
    rep = run_experiment(cfg)
    written = emit_tables(rep, tmp_path)
    assert {p.name for p in written} == {"table2.csv", "table2.txt"}


def test_emit_trace_row_count(tmp_path, small_report):
    trace = small_report.cells[0].trace
    path = emit_trace(trace, tmp_path / "t.csv")
    lines = path.read_text().strip().split("\n")
    assert len(lines) == 301


def test_deterministic_rerun_is_byte_identical(tmp_path):
    cfg = ExperimentConfig(thetas=(0.6,), seeds=(1,), n_max=150, deterministic=True)
    outs = []
    for name in ("a", "b"):
        rep = run_experiment(cfg)
        out = emit_report(rep, tmp_path / name)
        emit_tables(rep, out)
        outs.append(out)
    for rel in ("report.csv", "meta.txt", "table2.csv", "traces/theta_0.6_seed_0.csv"):
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes()


def test_seeded_rerun_is_byte_identical(tmp_path):
    cfg = ExperimentConfig(thetas=(0.9,), seeds=(42,), n_max=150)
    blobs = []
    for name in ("a", "b"):
        rep = run_experiment(cfg)
        out = emit_report(rep, tmp_path / name)
        blobs.append((out / "traces" / "theta_0.9_seed_42.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_aggregate_median_and_spread(small_report):
    agg = small_report.aggregate()
    for theta in (0.4, 0.9):
        values = sorted(c.min_rel_err for c in small_report.cells_for(theta))
        med, lo, hi = agg[theta]
        assert lo == values[0] and hi == values[-1]
        assert med == values[1]  # median of three


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(thetas=())
    with pytest.raises(ValueError):
        ExperimentConfig(thetas=(0.9,), n_max=0)


def test_cell_failure_recorded_without_aborting_sweep():
    # an exploding relaxation step on an unbounded set diverges; the sweep
    # keeps going and records the failure in the cell
    from viscosolve import Ball, ConstantAnchor, Hyperplane, Identity, LeastSquaresGradient, ProblemSpec

    anchor = [1.0, -1.0]
    prob = ProblemSpec(
        set_Q=Hyperplane(normal=[1.0, 1.0], offset=0.0),
        map_S=Identity(2),
        map_A=LeastSquaresGradient(B=np.eye(2), b=[0.0, 0.0]),
        map_f=ConstantAnchor(anchor),
        reference_set_omega=Ball(center=anchor, radius=1e-9),
    )
    cfg = ExperimentConfig(
        thetas=(0.5,), seeds=(1,), n_max=400, epsilons=(0.5,),
        problem=prob, x1=[2.0, -2.0], lam=50.0,
    )
    with pytest.warns(Warning):
        rep = run_experiment(cfg)
    assert len(rep.cells) == 1
    cell = rep.cells[0]
    assert cell.error is not None and "non-finite" in cell.error
    assert np.isnan(cell.min_rel_err)
    assert rep.aggregate() == {}
