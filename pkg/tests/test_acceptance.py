"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

from __future__ import annotations

import time

import numpy as np
import pytest

from qwplanes.cli import main
from qwplanes.coins import CoinParams, ReducedCoinParams, random_coin
from qwplanes.genfunc import lambda_eval, quadratic_residual, simulator_grid, transfer_path_sum
from qwplanes.lattice import Mode, build_walk, parity_violation, trajectory
from qwplanes.limits import (
    empirical_rescaled_stats,
    f_H_density,
    f_H_integral,
    site_mass_series,
    time_averaged_probability,
)
from qwplanes.reduction import InitialPsi, case_mapping_deviation, event_table, contraction_deviation
from qwplanes.tree import tree_projection_check

from _util import random_unit

MODELS = {"plane": (1,), "quarter": (1,), "joined": (1, 2, 3, 4), "reduced-star": (1, 2, 3, 4)}


@pytest.fixture
def report(capsys):
    def emit(n: int, passed: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {n}: {detail}")
        assert passed, detail

    return emit


@pytest.fixture(scope="module")
def six_coins():
    rng = np.random.default_rng(2024)
    return [CoinParams.hadamard()] + [random_coin(rng) for _ in range(5)]


def test_c01_unitarity(report, six_coins):
    t0 = time.perf_counter()
    worst = 0.0
    for model, ks in MODELS.items():
        for k in ks:
            for p in six_coins:
                for s in trajectory(build_walk(model, p, k, "unitarized"), 200):
                    worst = max(worst, abs(s.norm2 - 1))
    dt = time.perf_counter() - t0
    report(1, worst <= 1e-10 and dt < 60, f"max | |Psi_t|^2 - 1 | = {worst:.2e} over t<=200, {dt:.1f}s")


def test_c02_parity(report):
    t0 = time.perf_counter()
    worst = 0.0
    p = CoinParams.hadamard()
    for mode in ("unitarized", "literal"):
        for model, ks in MODELS.items():
            for k in ks:
                spec = build_walk(model, p, k, mode, require_normalized=mode == "unitarized")
                for s in trajectory(spec, 200):
                    worst = max(worst, parity_violation(s))
    dt = time.perf_counter() - t0
    report(2, worst == 0.0 and dt < 30, f"largest wrong-parity mass {worst!r}, {dt:.1f}s")


def test_c03_contraction(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for k in (1, 2, 3, 4):
        for _ in range(10):
            p = random_coin(rng)
            psi = InitialPsi(random_unit(rng, k), p.ctilde)
            worst = max(worst, float(contraction_deviation(p, psi, 50, Mode.LITERAL).max()))
    dt = time.perf_counter() - t0
    report(3, worst < 1e-10 and dt < 120, f"max site deviation {worst:.2e}, {dt:.1f}s")


def test_c04_event_identities(report):
    rng = np.random.default_rng(4)
    mass = case = route = 0.0
    p = CoinParams.hadamard()
    for k in (1, 2, 3, 4):
        psi = InitialPsi(random_unit(rng, k), p.ctilde)
        table = event_table(p, psi, 50, Mode.UNITARIZED)
        mass = max(mass, max(abs(m - 1) for m in table.total_mass))
        route = max(route, table.max_route_deviation)
        spec = build_walk("joined", p, k, "unitarized", psi.psi)
        case = max(case, max(case_mapping_deviation(s) for s in trajectory(spec, 50)))
    ok = mass < 1e-10 and case < 1e-10 and route < 1e-10
    report(4, ok, f"total-mass dev {mass:.2e}, case-mapping dev {case:.2e}, two-route dev {route:.2e}")


def test_c05_tree_projection(report):
    lines = []
    best = np.inf
    for k in (2, 3):
        for f in tree_projection_check(k, 6, CoinParams.hadamard(), letter="inner"):
            best = min(best, f.max_deviation)
            lines.append(f"k={k} {f.reading}: {f.max_deviation:.3g}")
    report(5, best < 1e-6, f"best deviation {best:.3g} ({'; '.join(lines)})")


def test_c06_transfer_vs_simulator(report, six_coins):
    t0 = time.perf_counter()
    worst = 0.0
    sites = [(x, s - x) for s in range(7) for x in range(s + 1)]
    for k in (1, 2, 3, 4):
        for p in six_coins:
            r = ReducedCoinParams.grover_default(k)
            for a, b in zip(transfer_path_sum(p, r, 30), simulator_grid(p, r, 30)):
                for x, y in sites:
                    va = a[x, y] if max(x, y) < a.shape[0] else 0
                    vb = b[x, y] if max(x, y) < b.shape[0] else 0
                    worst = max(worst, float(np.max(np.abs(va - vb))))
    dt = time.perf_counter() - t0
    report(6, worst <= 1e-12 and dt < 120, f"max amplitude difference {worst:.2e}, {dt:.1f}s")


def test_c07_lambda(report, six_coins):
    rng = np.random.default_rng(7)
    zs = 0.3 * np.sqrt(rng.uniform(0, 1, 100)) * np.exp(2j * np.pi * rng.uniform(0, 1, 100))
    resid = max(quadratic_residual(z, lambda_eval(z, p), p) for p in six_coins for z in zs)
    lim = max(abs(lambda_eval(1e-4 * np.exp(1j * th), p) / (1e-4 * np.exp(1j * th)) - p.c) for p in six_coins for th in (0, 1, 2))
    report(7, resid < 1e-12 and lim < 1e-6, f"quadratic residual {resid:.2e}, |lambda/z - c| at 1e-4 = {lim:.2e}")


def test_c08_f_H(report):
    mods = (0.3, 1 / np.sqrt(2), 0.9)
    mass = max(abs(f_H_integral(a) - 0.5) for a in mods)
    at0 = max(abs(f_H_density(0.0, a) - np.sqrt(1 - a * a) / (np.pi * a)) for a in mods)
    report(8, mass < 1e-6 and at0 < 1e-12, f"|integral - 0.5| = {mass:.2e}, |f_H(0) - closed form| = {at0:.2e}")


def test_c09_localization(report):
    t0 = time.perf_counter()
    spec = build_walk("joined", CoinParams.hadamard(), 2, "unitarized", [1, 0])
    hood = [(r, x, y) for r in range(2) for (x, y) in ((0, 0), (1, 0), (0, 1))]
    ser = site_mass_series(spec, hood, 300)
    a = time_averaged_probability(spec, hood, (100, 200), ser)
    b = time_averaged_probability(spec, hood, (200, 300), ser)
    dt = time.perf_counter() - t0
    stable = all(abs(y - x) <= 0.1 * x for x, y in ((a.even, b.even), (a.odd, b.odd)))
    ok = min(a.even, a.odd) > 0.01 and stable and dt < 180
    report(
        9,
        ok,
        f"even {a.even:.5f} -> {b.even:.5f}, odd {a.odd:.5f} -> {b.odd:.5f}, {dt:.1f}s",
    )


def test_c10_weak_limit(report):
    t0 = time.perf_counter()
    p = CoinParams.hadamard()
    a_mod = abs(p.a)
    spec = build_walk("joined", p, 2, "unitarized", [1, 0])
    stats = {}
    for s in trajectory(spec, 500):
        if s.t in (100, 500):
            stats[s.t] = [empirical_rescaled_stats(s, r, a_mod) for r in range(2)]
    dt = time.perf_counter() - t0
    inside = min(e.inside_fraction for e in stats[500])
    shrinks = all(
        late.ks_x < early.ks_x and late.ks_y < early.ks_y for early, late in zip(stats[100], stats[500])
    )
    ks = ", ".join(
        f"r={e.copy} ks_x {e.ks_x:.5f}->{l.ks_x:.5f} ks_y {e.ks_y:.5f}->{l.ks_y:.5f}" for e, l in zip(stats[100], stats[500])
    )
    report(10, inside >= 0.99 and shrinks and dt < 300, f"inside fraction {inside:.4f}; {ks}; {dt:.1f}s")


CLI_RUNS = [
    ["simulate", "--k", "2", "--steps", "20"],
    ["simulate", "--model", "reduced-star", "--k", "3", "--steps", "10", "--format", "jsonl"],
    ["simulate", "--k", "3", "--steps", "10", "--format", "json", "--mode", "literal"],
    ["reduce-check", "--k", "2", "--steps", "10", "--samples", "2", "--seed", "5"],
    ["tree-check", "--k", "2", "--tmax", "4"],
    ["genfunc-check", "--k", "2", "--tmax", "10", "--max-sum", "3", "--order", "16"],
    ["theorem1", "--window", "20", "40", "--max-sum", "2"],
    ["theorem2", "--times", "20", "40"],
    ["theorem2", "--format", "csv"],
]


def test_c11_determinism(report, tmp_path, capsys):
    differing = []
    for i, argv in enumerate(CLI_RUNS):
        outs = []
        path = tmp_path / f"run{i}.out"
        for _ in range(2):
            code = main(argv + ["--output", str(path)])
            outs.append((code, path.read_bytes()))
        if outs[0] != outs[1]:
            differing.append(" ".join(argv))
    capsys.readouterr()
    report(11, not differing, f"{len(CLI_RUNS)} CLI runs repeated; differing: {differing or 'none'}")
