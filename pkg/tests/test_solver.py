"""Initial data construction, stepping, conservation, and persistence."""

from __future__ import annotations

import math

import numpy as np
import numpy.testing as npt
import pytest

from euler_align import (
    FracOrderError,
    InitialDataSpec,
    ShapeSpec,
    SolverConfig,
    SolverError,
    SpectralWorkspace,
    as_field,
    build_grid,
    evaluate_shape,
    evolved_profile_density,
    integrate,
    load_trajectory,
    make_initial_state,
    run,
    save_trajectory,
    step,
    write_field_csv,
)
from euler_align.solver import SUMMARY_COLUMNS


def _gaussian_proportional(**overrides) -> SolverConfig:
    base = dict(
        alpha=0.5,
        n=512,
        half_width=10.0,
        t_end=0.5,
        initial=InitialDataSpec(
            rho0=ShapeSpec(kind="gaussian", mass=1.0, width=0.6),
            mode="proportional",
            g_coef=1.0,
        ),
        flux_scheme="spectral",
    )
    base.update(overrides)
    return SolverConfig(**base)


class TestShapes:
    def test_unknown_kind_rejected(self):
        with pytest.raises(SolverError, match="unknown shape kind"):
            ShapeSpec(kind="triangle")

    def test_parameter_validation(self):
        with pytest.raises(SolverError):
            ShapeSpec(kind="gaussian", mass=-1.0)
        with pytest.raises(SolverError):
            ShapeSpec(kind="bump", width=0.0)
        with pytest.raises(SolverError):
            ShapeSpec(kind="getoor", amplitude=0.0)
        with pytest.raises(SolverError, match="path"):
            ShapeSpec(kind="csv")

    def test_gaussian_mass_and_center(self):
        grid = build_grid(1024, 12.0)
        vals = evaluate_shape(ShapeSpec(kind="gaussian", mass=2.5, width=0.7, center=1.0), grid, 0.5)
        assert integrate(as_field(grid, vals)) == pytest.approx(2.5, rel=1e-10)
        assert grid.x[int(np.argmax(vals))] == pytest.approx(1.0, abs=grid.spacing)

    def test_bump_is_normalized_on_grid(self):
        grid = build_grid(512, 8.0)
        vals = evaluate_shape(ShapeSpec(kind="bump", mass=3.0, width=1.5), grid, 0.5)
        assert integrate(as_field(grid, vals)) == pytest.approx(3.0, rel=1e-13)
        assert np.all(vals[np.abs(grid.x) >= 1.5] == 0.0)

    def test_getoor_shape_scales_amplitude(self):
        from euler_align import getoor_profile

        grid = build_grid(256, 4.0)
        vals = evaluate_shape(ShapeSpec(kind="getoor", amplitude=2.0), grid, 0.25)
        npt.assert_allclose(vals, 2.0 * getoor_profile(0.25, grid.x), atol=0)

    def test_csv_shape_round_trips(self, tmp_path):
        grid = build_grid(128, 5.0)
        ref = np.exp(-grid.x**2)
        path = tmp_path / "field.csv"
        write_field_csv(path, as_field(grid, ref))
        vals = evaluate_shape(ShapeSpec(kind="csv", path=str(path)), grid, 0.5)
        npt.assert_array_equal(vals, ref)


class TestInitialData:
    def test_mode_validation(self):
        rho = ShapeSpec(kind="gaussian")
        with pytest.raises(SolverError, match="unknown initial mode"):
            InitialDataSpec(rho0=rho, mode="sideways")
        with pytest.raises(SolverError, match="g_coef"):
            InitialDataSpec(rho0=rho, mode="proportional", g_coef=-1.0)
        with pytest.raises(SolverError, match="b_coef <= g_coef <= a_coef"):
            InitialDataSpec(rho0=rho, mode="proportional", g_coef=1.0, b_coef=2.0)
        with pytest.raises(SolverError, match="requires a g0 shape"):
            InitialDataSpec(rho0=rho, mode="independent")

    def test_proportional_report(self):
        grid = build_grid(512, 10.0)
        spec = InitialDataSpec(
            rho0=ShapeSpec(kind="gaussian", mass=1.5, width=0.6), mode="proportional", g_coef=0.7
        )
        state, report = make_initial_state(spec, grid, 0.5)
        assert report.sandwich_holds and report.b == 0.7 and report.a == 0.7
        assert report.mass_rho == pytest.approx(1.5, rel=1e-10)
        assert report.mass_g == pytest.approx(0.7 * 1.5, rel=1e-10)
        npt.assert_allclose(state.g.values, 0.7 * state.rho.values, atol=0)
        assert state.t == 0.0

    def test_widened_sandwich_coefficients(self):
        grid = build_grid(512, 10.0)
        spec = InitialDataSpec(
            rho0=ShapeSpec(kind="gaussian", width=0.6),
            mode="proportional",
            g_coef=1.0,
            b_coef=0.25,
            a_coef=4.0,
        )
        _, report = make_initial_state(spec, grid, 0.5)
        assert (report.b, report.a) == (0.25, 4.0)

    def test_zero_g_mode(self):
        grid = build_grid(512, 8.0)
        spec = InitialDataSpec(rho0=ShapeSpec(kind="getoor"), mode="zero_G")
        state, report = make_initial_state(spec, grid, 0.5)
        assert np.all(state.g.values == 0.0)
        assert (report.b, report.a) == (0.0, 0.0) and report.sandwich_holds

    def test_independent_mode_measures_sandwich(self):
        grid = build_grid(1024, 10.0)
        spec = InitialDataSpec(
            rho0=ShapeSpec(kind="bump", mass=1.0, width=2.0),
            mode="independent",
            g0=ShapeSpec(kind="bump", mass=0.7, width=2.0),
        )
        state, report = make_initial_state(spec, grid, 0.5)
        assert report.sandwich_holds
        assert report.b == pytest.approx(0.7, rel=1e-12)
        assert report.a == pytest.approx(0.7, rel=1e-12)

    def test_independent_mode_detects_unsandwichable_g(self):
        grid = build_grid(1024, 10.0)
        spec = InitialDataSpec(
            rho0=ShapeSpec(kind="bump", mass=1.0, width=0.8),
            mode="independent",
            g0=ShapeSpec(kind="bump", mass=1.0, width=0.8, center=3.0),
        )
        _, report = make_initial_state(spec, grid, 0.5)
        assert not report.sandwich_holds
        assert math.isnan(report.b) and math.isnan(report.a)

    def test_rejects_negative_density(self, tmp_path):
        grid = build_grid(128, 6.0)
        vals = np.exp(-grid.x**2)
        vals[10] = -0.05
        path = tmp_path / "neg.csv"
        write_field_csv(path, as_field(grid, vals))
        spec = InitialDataSpec(rho0=ShapeSpec(kind="csv", path=str(path)), mode="zero_G")
        with pytest.raises(SolverError, match="negative"):
            make_initial_state(spec, grid, 0.5)

    def test_rejects_support_violation(self):
        grid = build_grid(256, 3.0)
        spec = InitialDataSpec(rho0=ShapeSpec(kind="gaussian", width=0.6), mode="zero_G")
        with pytest.raises(SolverError, match="support extends"):
            make_initial_state(spec, grid, 0.5)

    def test_rejects_trivial_proportional_density(self, tmp_path):
        grid = build_grid(128, 6.0)
        path = tmp_path / "zero.csv"
        write_field_csv(path, as_field(grid, np.zeros(grid.n)))
        spec = InitialDataSpec(rho0=ShapeSpec(kind="csv", path=str(path)), mode="proportional")
        with pytest.raises(SolverError, match="nontrivial"):
            make_initial_state(spec, grid, 0.5)


class TestConfig:
    def test_validation(self):
        initial = InitialDataSpec(rho0=ShapeSpec(kind="gaussian"))
        with pytest.raises(SolverError, match="t_end"):
            _gaussian_proportional(t_end=-1.0)
        with pytest.raises(SolverError, match="cfl"):
            _gaussian_proportional(cfl=0.0)
        with pytest.raises(SolverError, match="cfl"):
            _gaussian_proportional(cfl=1.5)
        with pytest.raises(SolverError, match="flux_scheme"):
            _gaussian_proportional(flux_scheme="weno")
        with pytest.raises(SolverError, match="epsilon"):
            _gaussian_proportional(epsilon=-0.1)
        with pytest.raises(SolverError, match="strictly increasing"):
            _gaussian_proportional(output_times=(0.0, 0.4, 0.2))
        with pytest.raises(SolverError, match="inside"):
            _gaussian_proportional(output_times=(0.0, 0.9))
        with pytest.raises(FracOrderError):
            SolverConfig(alpha=1.5, n=256, half_width=8.0, t_end=1.0, initial=initial)

    def test_effective_epsilon(self):
        cfg = _gaussian_proportional()
        assert cfg.effective_epsilon(0.03) == 0.03
        cfg2 = _gaussian_proportional(epsilon=1e-3)
        assert cfg2.effective_epsilon(0.03) == 1e-3


class TestStep:
    def test_dt_validation(self):
        cfg = _gaussian_proportional()
        grid = cfg.make_grid()
        ws = SpectralWorkspace(grid, cfg.alpha)
        state, _ = make_initial_state(cfg.initial, grid, cfg.alpha, ws=ws)
        with pytest.raises(SolverError, match="dt"):
            step(state, 0.0, cfg, ws)
        with pytest.raises(SolverError, match="dt"):
            step(state, math.inf, cfg, ws)

    def test_grid_mismatch(self):
        cfg = _gaussian_proportional()
        grid = cfg.make_grid()
        ws = SpectralWorkspace(grid, cfg.alpha)
        state, _ = make_initial_state(cfg.initial, grid, cfg.alpha, ws=ws)
        other = SpectralWorkspace(build_grid(256, 10.0), cfg.alpha)
        with pytest.raises(SolverError, match="grids differ"):
            step(state, 1e-4, cfg, other)

    @pytest.mark.parametrize("scheme", ["spectral", "upwind"])
    def test_cfl_violation_raises(self, scheme):
        cfg = _gaussian_proportional(flux_scheme=scheme)
        grid = cfg.make_grid()
        ws = SpectralWorkspace(grid, cfg.alpha)
        state, _ = make_initial_state(cfg.initial, grid, cfg.alpha, ws=ws)
        with pytest.raises(SolverError, match="CFL violation"):
            step(state, 10.0, cfg, ws)

    @pytest.mark.parametrize("scheme", ["spectral", "upwind"])
    def test_time_stepping_is_second_order(self, scheme):
        cfg = _gaussian_proportional(
            n=1024, half_width=14.0, initial=InitialDataSpec(
                rho0=ShapeSpec(kind="gaussian", mass=1.0, width=1.0),
                mode="proportional",
                g_coef=1.0,
            ),
            flux_scheme=scheme,
            epsilon=0.01,
        )
        grid = cfg.make_grid()
        ws = SpectralWorkspace(grid, cfg.alpha)
        state0, _ = make_initial_state(cfg.initial, grid, cfg.alpha, ws=ws)
        horizon = 0.004

        def advance(nsteps: int) -> np.ndarray:
            s = state0
            for _ in range(nsteps):
                s = step(s, horizon / nsteps, cfg, ws)
            return s.rho.values

        ref = advance(16)
        errs = [float(np.abs(advance(k) - ref).max()) for k in (1, 2, 4)]
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert min(orders) >= 1.8, f"{scheme} observed orders {orders}"


class TestRun:
    def test_zero_horizon_returns_initial_state(self):
        traj = run(_gaussian_proportional(t_end=0.0))
        assert traj.steps == 0
        assert len(traj.states) == 1 and traj.states[0].t == 0.0
        assert traj.summary["t"].shape == (1,)

    @pytest.mark.parametrize("scheme", ["spectral", "upwind"])
    def test_mass_conservation(self, scheme):
        traj = run(_gaussian_proportional(flux_scheme=scheme, t_end=0.5))
        for key in ("mass_rho", "mass_G"):
            series = traj.summary[key]
            drift = np.abs(series - series[0]).max() / abs(series[0])
            assert drift <= 1e-12, f"{scheme} {key} drift {drift:.2e}"

    @pytest.mark.parametrize("scheme", ["spectral", "upwind"])
    def test_proportional_structure_is_preserved(self, scheme):
        c = 0.7
        cfg = _gaussian_proportional(
            flux_scheme=scheme,
            t_end=0.5,
            initial=InitialDataSpec(
                rho0=ShapeSpec(kind="gaussian", mass=1.0, width=0.6),
                mode="proportional",
                g_coef=c,
            ),
        )
        final = run(cfg).states[-1]
        peak = float(np.abs(final.rho.values).max())
        assert np.abs(final.g.values - c * final.rho.values).max() <= 1e-13 * peak

    def test_upwind_positivity_and_max_principle(self):
        cfg = _gaussian_proportional(flux_scheme="upwind", t_end=1.0)
        traj = run(cfg)
        peak0 = float(traj.summary["rho_linf"][0])
        for state in traj.states:
            assert float(state.rho.values.min()) >= -1e-13 * peak0
        u = traj.summary["u_linf"]
        assert u.max() <= u[0] * (1.0 + 1e-9)

    def test_output_times_snapshots(self):
        times = (0.0, 0.1, 0.25, 0.4)
        traj = run(_gaussian_proportional(t_end=0.4, output_times=times))
        assert traj.output_times == times
        assert tuple(s.t for s in traj.states) == times
        # The t=0 snapshot is the initial data itself.
        first = traj.states[0]
        grid = first.rho.grid
        expected = evaluate_shape(ShapeSpec(kind="gaussian", mass=1.0, width=0.6), grid, 0.5)
        npt.assert_array_equal(first.rho.values, expected)

    def test_summary_matches_columns_and_steps(self):
        traj = run(_gaussian_proportional(t_end=0.2))
        assert set(traj.summary) == set(SUMMARY_COLUMNS)
        for series in traj.summary.values():
            assert series.shape == (traj.steps + 1,)
        assert traj.summary["t"][0] == 0.0
        assert traj.summary["t"][-1] == pytest.approx(0.2, abs=1e-9)
        assert np.all(np.diff(traj.summary["t"]) > 0)

    def test_margin_abort_when_support_reaches_boundary(self):
        cfg = SolverConfig(
            alpha=0.5,
            n=256,
            half_width=3.0,
            t_end=10.0,
            initial=InitialDataSpec(
                rho0=ShapeSpec(kind="gaussian", mass=1.0, width=0.2),
                mode="proportional",
                g_coef=4.0,
            ),
            flux_scheme="upwind",
        )
        with pytest.raises(SolverError, match="boundary margin"):
            run(cfg)

    def test_zero_g_evolution_tracks_exact_solution(self):
        errors = {}
        for n in (512, 1024):
            cfg = SolverConfig(
                alpha=0.5,
                n=n,
                half_width=8.0,
                t_end=1.0,
                initial=InitialDataSpec(rho0=ShapeSpec(kind="getoor", amplitude=1.0), mode="zero_G"),
                epsilon=0.0,
                flux_scheme="upwind",
            )
            final = run(cfg).states[-1]
            grid = final.rho.grid
            exact = evolved_profile_density(0.5, 1.0, grid.x, final.t)
            errors[n] = float(grid.spacing * np.abs(final.rho.values - exact).sum())
        assert errors[1024] <= 0.08
        assert errors[1024] < errors[512]


class TestPersistence:
    @pytest.mark.parametrize("scheme", ["spectral", "upwind"])
    def test_save_load_round_trip_is_exact(self, tmp_path, scheme):
        cfg = _gaussian_proportional(flux_scheme=scheme, t_end=0.3, output_times=(0.0, 0.15, 0.3))
        traj = run(cfg)
        outdir = tmp_path / scheme
        manifest = save_trajectory(traj, outdir)
        assert (outdir / "manifest.json").exists()
        names = {p.name for p in outdir.iterdir()}
        assert {entry["file"] for entry in manifest["states"]} <= names
        assert manifest["summary_file"] in names

        loaded = load_trajectory(outdir)
        assert loaded.config == traj.config
        assert loaded.output_times == traj.output_times
        assert loaded.initial_report == traj.initial_report
        for a, b in zip(loaded.states, traj.states):
            assert a.t == b.t
            npt.assert_array_equal(a.rho.values, b.rho.values)
            npt.assert_array_equal(a.g.values, b.g.values)
            npt.assert_array_equal(a.u.values, b.u.values)
        for key in SUMMARY_COLUMNS:
            npt.assert_array_equal(loaded.summary[key], traj.summary[key])

    def test_load_rejects_missing_manifest(self, tmp_path):
        with pytest.raises(SolverError):
            load_trajectory(tmp_path)
