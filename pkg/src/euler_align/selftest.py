"""Operator-identity self-test suite.

Every check here validates a mathematical identity that the discrete
operators must satisfy, against either an exact closed form (Fourier modes,
the Getoor profile) or an independent numerical route (adaptive singular
quadrature).  Each check produces a :class:`CheckRecord` with the measured
maximum error and the tolerance it was held to; :func:`run_selftest` bundles
them into a JSON-serializable :class:`SelfTestReport`.

The suite is the backing for the ``selftest`` CLI subcommand and doubles as
the source of seeded random test fields for the acceptance tests
(:func:`random_bump_field`).

The ``inject_hilbert_sign_error`` knob deliberately corrupts the Hilbert
transform's sign before comparison.  It exists purely as a negative control:
a healthy suite must *fail* when the sign convention is wrong, proving the
checks are direction-sensitive rather than magnitude-only.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .closedform import getoor_profile, velocity_profile_U
from .fracops import (
    SpectralWorkspace,
    antiderivative_fraclap,
    derivative,
    fractional_laplacian_quadrature,
    fractional_laplacian_spectral,
    gagliardo_nirenberg_check,
    hilbert_transform,
    riesz_potential,
    singular_kernel_constant,
    stroock_varopoulos_check,
)
from .grid import Field, Grid1D, as_field, build_grid

__all__ = [
    "CheckRecord",
    "SelfTestReport",
    "TOLERANCE_PROFILES",
    "cross_validation_errors",
    "random_bump_field",
    "run_selftest",
]

ALPHAS = (0.25, 0.5, 0.75)

# Tolerances per check.  "default" mirrors the acceptance gates; "strict" is
# tightened to roughly twice the measured headroom of the current
# implementation, for catching accuracy regressions during development.
TOLERANCE_PROFILES: dict[str, dict[str, float]] = {
    "default": {
        "kernel_constant": 1e-12,
        "getoor_spectral": 2e-2,
        "getoor_quadrature": 1e-2,
        "cross_validation": 5e-2,
        "hilbert_sine": 1e-12,
        "hilbert_involution": 1e-12,
        "fraclap_semigroup": 1e-11,
        "riesz_inverse": 1e-11,
        "antiderivative_consistency": 1e-11,
        "closedform_velocity": 1e-6,
        "stroock_varopoulos": 1e-6,
        "gagliardo_nirenberg": 5e-2,
    },
    "strict": {
        "kernel_constant": 1e-12,
        "getoor_spectral": 3e-3,
        "getoor_quadrature": 5e-3,
        "cross_validation": 1e-3,
        "hilbert_sine": 1e-13,
        "hilbert_involution": 1e-13,
        "fraclap_semigroup": 1e-12,
        "riesz_inverse": 1e-12,
        "antiderivative_consistency": 1e-12,
        "closedform_velocity": 1e-7,
        "stroock_varopoulos": 1e-8,
        "gagliardo_nirenberg": 5e-2,
    },
}


@dataclass(frozen=True)
class CheckRecord:
    """Outcome of a single identity check."""

    check: str
    alpha: float | None
    n: int
    max_error: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class SelfTestReport:
    """Aggregated result of :func:`run_selftest`."""

    passed: bool
    seed: int
    profile: str
    records: tuple[CheckRecord, ...]
    wall_time: float

    def to_jsonable(self) -> dict[str, object]:
        return {
            "passed": self.passed,
            "seed": self.seed,
            "profile": self.profile,
            "wall_time": self.wall_time,
            "records": [asdict(r) for r in self.records],
        }


# ---------------------------------------------------------------------------
# Seeded field generators


def _bump_params(
    rng: np.random.Generator, half_width: float, n_bumps: int
) -> list[tuple[float, float, float]]:
    """Draw (amplitude, center, width) triples for a sum-of-Gaussians field."""
    return [
        (
            float(rng.uniform(0.5, 2.0)),
            float(rng.uniform(-half_width / 4.0, half_width / 4.0)),
            float(rng.uniform(0.3, 1.0)),
        )
        for _ in range(n_bumps)
    ]


def _bump_values(
    x: np.ndarray, params: list[tuple[float, float, float]], dilation: float = 1.0
) -> np.ndarray:
    """Evaluate the bump sum under the mass-preserving dilation v -> s*v(s*x)."""
    s = float(dilation)
    vals = np.zeros_like(x)
    for amp, center, width in params:
        vals += s * amp * np.exp(-0.5 * ((s * x - center) / width) ** 2)
    return vals


def random_bump_field(
    grid: Grid1D, rng: np.random.Generator, n_bumps: int = 3
) -> Field:
    """Seeded nonnegative smooth test field: a sum of Gaussian bumps.

    Centers stay within the middle half of the domain and widths within
    [0.3, 1], so the field is both well resolved and comfortably inside the
    support margin at the default geometries.
    """
    return as_field(grid, _bump_values(grid.x, _bump_params(rng, grid.half_width, n_bumps)))


# ---------------------------------------------------------------------------
# Individual checks


def _record(check: str, alpha: float | None, n: int, err: float, tol: float) -> CheckRecord:
    return CheckRecord(check, alpha, n, float(err), float(tol), bool(err <= tol))


def _check_kernel_constant(tol: float) -> CheckRecord:
    # Exact special value at alpha = 1/2: Gamma(-1/4) = -4*Gamma(3/4) collapses
    # the constant to 1/(2*sqrt(2*pi)).  Near alpha = 1 the constant approaches
    # 1/pi, the classical Hilbert-derivative normalization.
    err = abs(singular_kernel_constant(0.5) - 1.0 / (2.0 * np.sqrt(2.0 * np.pi)))
    err = max(err, abs(singular_kernel_constant(1.0 - 1e-12) - 1.0 / np.pi))
    return _record("kernel_constant", 0.5, 0, err, tol)


def _check_getoor_spectral(alpha: float, tol: float, n: int = 8192, half_width: float = 8.0) -> CheckRecord:
    grid = build_grid(n, half_width)
    ws = SpectralWorkspace(grid, alpha)
    phi = as_field(grid, getoor_profile(alpha, grid.x))
    lam = fractional_laplacian_spectral(phi, ws, image_correction=True)
    inner = np.abs(grid.x) <= 0.9
    err = float(np.abs(lam.values[inner] - 1.0).max())
    return _record("getoor_spectral", alpha, n, err, tol)


def _check_getoor_quadrature(alpha: float, tol: float, n: int = 4096, half_width: float = 8.0) -> CheckRecord:
    grid = build_grid(n, half_width)
    phi = as_field(grid, getoor_profile(alpha, grid.x))
    probes = grid.x[np.abs(grid.x) <= 0.9][:: max(1, n // 256)]
    vals = fractional_laplacian_quadrature(phi, alpha, probes)
    err = float(np.abs(vals - 1.0).max())
    return _record("getoor_quadrature", alpha, n, err, tol)


def cross_validation_errors(
    alpha: float,
    rng: np.random.Generator,
    trials: int = 20,
    n: int = 1024,
    half_width: float = 8.0,
    n_probes: int = 64,
) -> tuple[np.ndarray, np.ndarray]:
    """Spectral-vs-quadrature disagreement on seeded bumps at n and 2n.

    Returns two arrays of per-trial sup errors at probe points, normalized by
    the field's sup norm.  The two routes share nothing but the field samples:
    one is a corrected Fourier multiplier, the other adaptive singular
    quadrature of the difference kernel, so agreement validates both.
    """
    coarse = np.empty(trials)
    fine = np.empty(trials)
    for trial in range(trials):
        params = _bump_params(rng, half_width, n_bumps=3)
        for out, m in ((coarse, n), (fine, 2 * n)):
            grid = build_grid(m, half_width)
            f = as_field(grid, _bump_values(grid.x, params))
            ws = SpectralWorkspace(grid, alpha)
            spec = fractional_laplacian_spectral(f, ws, image_correction=True)
            probes = grid.x[np.abs(grid.x) <= 0.75 * half_width][:: max(1, m // n_probes)]
            quad = fractional_laplacian_quadrature(f, alpha, probes)
            spec_at = np.interp(probes, grid.x, spec.values)
            out[trial] = np.abs(spec_at - quad).max() / np.abs(f.values).max()
    return coarse, fine


def _check_cross_validation(
    alpha: float, rng: np.random.Generator, tol: float, trials: int = 6, n: int = 1024
) -> CheckRecord:
    coarse, fine = cross_validation_errors(alpha, rng, trials=trials, n=n)
    err = float(max(coarse.max(), fine.max()))
    decreasing = bool(fine.max() < coarse.max())
    rec = _record("cross_validation", alpha, n, err, tol)
    return CheckRecord(rec.check, rec.alpha, rec.n, rec.max_error, rec.tolerance, rec.passed and decreasing)


def _check_hilbert_sine(tol: float, inject_sign_error: bool, n: int = 2048, half_width: float = 8.0) -> CheckRecord:
    grid = build_grid(n, half_width)
    ws = SpectralWorkspace(grid, 0.5)
    err = 0.0
    for k in (1, 5, 17):
        xi = np.pi * k / half_width
        f = as_field(grid, np.sin(xi * grid.x))
        h = hilbert_transform(f, ws).values
        if inject_sign_error:
            h = -h
        err = max(err, float(np.abs(h - (-np.cos(xi * grid.x))).max()))
    return _record("hilbert_sine", None, n, err, tol)


def _check_hilbert_involution(rng: np.random.Generator, tol: float, n: int = 2048, half_width: float = 8.0) -> CheckRecord:
    grid = build_grid(n, half_width)
    ws = SpectralWorkspace(grid, 0.5)
    f = random_bump_field(grid, rng)
    mean_free = as_field(grid, f.values - f.values.mean())
    twice = hilbert_transform(hilbert_transform(mean_free, ws), ws)
    err = np.abs(twice.values + mean_free.values).max() / np.abs(mean_free.values).max()
    return _record("hilbert_involution", None, n, err, tol)


def _check_fraclap_semigroup(rng: np.random.Generator, tol: float, n: int = 2048, half_width: float = 8.0) -> CheckRecord:
    grid = build_grid(n, half_width)
    f = random_bump_field(grid, rng)
    ws_a = SpectralWorkspace(grid, 0.25)
    ws_b = SpectralWorkspace(grid, 0.5)
    ws_ab = SpectralWorkspace(grid, 0.75)
    composed = fractional_laplacian_spectral(
        fractional_laplacian_spectral(f, ws_a), ws_b
    ).values
    direct = fractional_laplacian_spectral(f, ws_ab).values
    err = np.abs(composed - direct).max() / np.abs(direct).max()
    return _record("fraclap_semigroup", 0.75, n, err, tol)


def _check_riesz_inverse(alpha: float, rng: np.random.Generator, tol: float, n: int = 2048, half_width: float = 8.0) -> CheckRecord:
    grid = build_grid(n, half_width)
    ws = SpectralWorkspace(grid, alpha)
    f = random_bump_field(grid, rng)
    back = fractional_laplacian_spectral(riesz_potential(f, alpha, ws), ws).values
    target = f.values - f.values.mean()
    err = np.abs(back - target).max() / np.abs(target).max()
    return _record("riesz_inverse", alpha, n, err, tol)


def _check_antiderivative_consistency(
    alpha: float, rng: np.random.Generator, tol: float, n: int = 2048, half_width: float = 8.0
) -> CheckRecord:
    grid = build_grid(n, half_width)
    ws = SpectralWorkspace(grid, alpha)
    f = random_bump_field(grid, rng)
    rebuilt = derivative(antiderivative_fraclap(f, ws), ws).values
    direct = fractional_laplacian_spectral(f, ws).values
    err = np.abs(rebuilt - direct).max() / np.abs(direct).max()
    return _record("antiderivative_consistency", alpha, n, err, tol)


def _check_closedform_velocity(alpha: float, tol: float) -> CheckRecord:
    interior = np.array([-0.9, -0.5, 0.0, 0.3, 0.9])
    err = float(np.abs(velocity_profile_U(alpha, interior) - interior).max())
    # Continuity across the support edge: the tail branch must rejoin the
    # interior value U(1) = 1 (the tail integral is exactly 1).
    err = max(err, abs(velocity_profile_U(alpha, 1.0 + 1e-12) - 1.0))
    tail = velocity_profile_U(alpha, np.array([1.0, 2.0, 8.0, 100.0]))
    monotone = bool(np.all(np.diff(tail) < 0.0) and tail[-1] > 0.0)
    rec = _record("closedform_velocity", alpha, 0, err, tol)
    return CheckRecord(rec.check, rec.alpha, rec.n, rec.max_error, rec.tolerance, rec.passed and monotone)


def _check_stroock_varopoulos(
    alpha: float, rng: np.random.Generator, tol: float, n_fields: int = 5, n: int = 2048, half_width: float = 16.0
) -> CheckRecord:
    grid = build_grid(n, half_width)
    ws = SpectralWorkspace(grid, alpha)
    worst = 0.0
    ok = True
    for _ in range(n_fields):
        v = random_bump_field(grid, rng)
        for p in (1.5, 2.0, 3.0):
            lhs, rhs, holds = stroock_varopoulos_check(v, p, ws, tol=tol)
            ok = ok and holds
            worst = max(worst, (rhs - lhs) / abs(rhs))
    return CheckRecord("stroock_varopoulos", alpha, n, float(worst), float(tol), bool(ok))


def _check_gagliardo_nirenberg(
    alpha: float, rng: np.random.Generator, tol: float, n: int = 4096, half_width: float = 16.0
) -> CheckRecord:
    grid = build_grid(n, half_width)
    ws = SpectralWorkspace(grid, alpha)
    params = _bump_params(rng, half_width, n_bumps=3)
    ratios = []
    for s in (1.0, 2.0, 4.0):
        v = as_field(grid, _bump_values(grid.x, params, dilation=s))
        ratios.append(gagliardo_nirenberg_check(v, r=3.0, q=2.0, ws=ws)[2])
    err = float(np.abs(np.asarray(ratios) / ratios[0] - 1.0).max())
    return _record("gagliardo_nirenberg", alpha, n, err, tol)


# ---------------------------------------------------------------------------
# Suite driver


def run_selftest(
    *,
    seed: int = 0,
    profile: str = "default",
    inject_hilbert_sign_error: bool = False,
) -> SelfTestReport:
    """Run every identity check and return the aggregated report.

    ``profile`` selects a tolerance column from :data:`TOLERANCE_PROFILES`.
    ``inject_hilbert_sign_error`` flips the sign of the computed Hilbert
    transform inside the sine check (negative control; see module docstring).
    """
    if profile not in TOLERANCE_PROFILES:
        raise ValueError(f"unknown tolerance profile {profile!r}; expected one of {sorted(TOLERANCE_PROFILES)}")
    tols = TOLERANCE_PROFILES[profile]
    rng = np.random.default_rng(seed)
    start = time.perf_counter()

    records: list[CheckRecord] = [_check_kernel_constant(tols["kernel_constant"])]
    for alpha in ALPHAS:
        records.append(_check_getoor_spectral(alpha, tols["getoor_spectral"]))
        records.append(_check_getoor_quadrature(alpha, tols["getoor_quadrature"]))
        records.append(_check_closedform_velocity(alpha, tols["closedform_velocity"]))
    records.append(_check_hilbert_sine(tols["hilbert_sine"], inject_hilbert_sign_error))
    records.append(_check_hilbert_involution(rng, tols["hilbert_involution"]))
    records.append(_check_fraclap_semigroup(rng, tols["fraclap_semigroup"]))
    for alpha in ALPHAS:
        records.append(_check_riesz_inverse(alpha, rng, tols["riesz_inverse"]))
        records.append(_check_antiderivative_consistency(alpha, rng, tols["antiderivative_consistency"]))
        records.append(_check_cross_validation(alpha, rng, tols["cross_validation"]))
        records.append(_check_stroock_varopoulos(alpha, rng, tols["stroock_varopoulos"]))
        records.append(_check_gagliardo_nirenberg(alpha, rng, tols["gagliardo_nirenberg"]))

    wall = time.perf_counter() - start
    return SelfTestReport(
        passed=all(r.passed for r in records),
        seed=seed,
        profile=profile,
        records=tuple(records),
        wall_time=wall,
    )
