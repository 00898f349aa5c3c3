"""Command-line entry point.

Exit codes: 0 ok, 1 a hard invariant failed, 2 usage or configuration
error, 3 a resource guard tripped. Discrepancies against printed formulas are
reported in the output and never change the exit code.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from .coins import CoinError, CoinParams, ReducedCoinParams
from .genfunc import (
    GenfuncError,
    genfunc_check,
    lambda_eval,
    quadratic_residual,
    radius_r0,
    radius_r1,
)
from .io import csv_text, distribution_rows, dumps_json, snapshot_lines
from .lattice import Mode, Model, ResourceLimit, WalkError, build_walk, distribution, trajectory
from .limits import (
    LimitError,
    empirical_rescaled_stats,
    f_H_density,
    site_mass_series,
    localization_asymptotic,
    limit_params,
    weak_limit_density,
    weak_limit_total_mass,
    time_averaged_probability,
)
from .reduction import (
    InitialPsi,
    ReductionError,
    case_mapping_deviation,
    event_table,
    contraction_deviation,
)
from .tree import TreeError, tree_projection_check

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
INVARIANT_TOL = 1e-10
SUBCOMMANDS = ("simulate", "reduce-check", "tree-check", "genfunc-check", "theorem1", "theorem2")
ALIASES = {"theorem1": ["localization"], "theorem2": ["weak-limit"]}


@dataclass
class RunConfig:
    command: str = "simulate"
    k: int = 2
    model: str = "joined"
    coin: str = "hadamard"
    coin_entries: list | None = None
    ctilde_phase: float = 0.0
    psi: list | None = None
    steps: int = 100
    every: int = 1
    mode: str = "unitarized"
    boundary: str = "wall-pair"
    order: int = 64
    tmax: int = 30
    max_sum: int = 6
    window: list | None = None
    times: list | None = None
    samples: int = 10
    seed: int = 0
    letter: str = "inner"
    threshold: float = 0.0
    format: str | None = None
    output: str = "-"
    eta_pm: str = "delta_pm"
    mu_variant: str = "printed"
    theta_choice: str = "phi"

    # -- resolution helpers

    def coin_params(self) -> CoinParams:
        ct = complex(np.exp(1j * self.ctilde_phase)) if self.ctilde_phase else 1.0
        if self.coin == "hadamard":
            return CoinParams.hadamard(ct)
        if self.coin == "explicit":
            if not self.coin_entries or len(self.coin_entries) != 4:
                raise CoinError("explicit coin needs four entries a b c d")
            return CoinParams(*[_complex(v) for v in self.coin_entries], ctilde=ct)
        raise CoinError(f"unknown coin {self.coin!r}")

    def psi_vector(self, length: int) -> np.ndarray:
        if self.psi is None:
            v = np.zeros(length, dtype=complex)
            v[0] = 1.0
            return v
        v = np.array([_complex(x) for x in self.psi], dtype=complex)
        if v.size != length:
            raise WalkError(f"psi has {v.size} entries, expected {length}")
        return v

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("psi", "coin_entries"):
            if d[key] is not None:
                d[key] = [[_complex(v).real, _complex(v).imag] for v in d[key]]
        return d


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="JSON file of flat key/value settings; flags override it")
    common.add_argument("--dump-config", action="store_true", help="print the resolved configuration and exit")
    common.add_argument("--k", type=int, help="number of joined quarter planes")
    common.add_argument("--model", choices=[m.value for m in Model if m is not Model.OWN_OTHER])
    common.add_argument("--coin", choices=["hadamard", "explicit"])
    common.add_argument("--coin-entries", nargs=4, metavar=("A", "B", "C", "D"), help="complex entries, e.g. 0.6 0.8j")
    common.add_argument("--ctilde-phase", type=float, help="phase angle of the origin factor, radians")
    common.add_argument("--psi", nargs="+", help="initial amplitudes (complex literals)")
    common.add_argument("--steps", type=int)
    common.add_argument("--every", type=int, help="write every n-th time step")
    common.add_argument("--mode", choices=[m.value for m in Mode])
    common.add_argument("--boundary", choices=["wall-pair", "bounce"])
    common.add_argument("--order", type=int, help="power series order")
    common.add_argument("--tmax", type=int)
    common.add_argument("--max-sum", type=int, help="largest x + y compared")
    common.add_argument("--window", nargs=2, type=int, metavar=("T0", "T1"))
    common.add_argument("--times", nargs="+", type=int)
    common.add_argument("--samples", type=int, help="random initial vectors per check")
    common.add_argument("--seed", type=int)
    common.add_argument("--letter", choices=["inner", "outer"], help="tree letter that picks the copy")
    common.add_argument("--threshold", type=float, help="omit probabilities at or below this value")
    common.add_argument("--format", choices=["csv", "json", "jsonl"])
    common.add_argument("--output", help="output path, '-' for stdout")
    common.add_argument("--eta-pm", choices=["delta_pm"])
    common.add_argument("--mu-variant", choices=["printed", "delta"])
    common.add_argument("--theta-choice", choices=["phi", "zero"])

    parser = argparse.ArgumentParser(prog="qwplanes", description="Quantum walks on joined quarter planes.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "evolve a walk and write its distribution",
        "reduce-check": "check the enlarged-walk reduction and event identities",
        "tree-check": "compare the projected tree walk with the joined walk",
        "genfunc-check": "compare the series route, the path-sum oracle and the simulator",
        "theorem1": "localization report",
        "theorem2": "weak-limit report",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], argument_default=S, aliases=ALIASES.get(name, []))
    return parser


def resolve_config(argv) -> tuple[RunConfig, bool]:
    ns = vars(build_parser().parse_args(argv))
    values: dict = {}
    path = ns.pop("config", None)
    dump = ns.pop("dump_config", False)
    if path:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    values.update(ns)
    return RunConfig(**values), dump


# ---------------------------------------------------------------- commands


@dataclass
class Outcome:
    text: str
    ok: bool = True


def _random_psi(rng: np.random.Generator, k: int) -> np.ndarray:
    v = rng.normal(size=k) + 1j * rng.normal(size=k)
    return v / np.linalg.norm(v)


def cmd_simulate(cfg: RunConfig) -> Outcome:
    p = cfg.coin_params()
    model = Model(cfg.model)
    k = 1 if model in (Model.QUARTER, Model.PLANE) else cfg.k
    n_init = 4 if model in (Model.PLANE, Model.REDUCED_STAR) else k
    spec = build_walk(model, p, k, cfg.mode, cfg.psi_vector(n_init), cfg.boundary)
    fmt = cfg.format or "csv"
    rows, norms, parity = [], [], 0.0
    final = None
    for s in trajectory(spec, cfg.steps):
        norms.append(s.norm2)
        dist = distribution(s)
        for site, pr in dist.items():
            if (site.x + site.y - s.t) % 2 and pr > 0:
                parity = max(parity, pr)
        if s.t % cfg.every == 0 or s.t == cfg.steps:
            rows.extend(r for r in distribution_rows(s.t, dist) if r[4] > cfg.threshold)
        final = s
    ok = True
    if Mode(cfg.mode) is Mode.UNITARIZED:
        ok = max(abs(n - 1) for n in norms) <= INVARIANT_TOL
    if cfg.boundary == "wall-pair":
        ok = ok and parity == 0.0
    if fmt == "csv":
        text = csv_text(("t", "copy", "x", "y", "probability"), rows)
    elif fmt == "jsonl":
        text = snapshot_lines(final, cfg.threshold)
    else:
        text = dumps_json(
            {
                "config": cfg.to_dict(),
                "norms": norms,
                "final_norm": norms[-1],
                "parity_violation": parity,
                "distribution": [dict(zip(("t", "copy", "x", "y", "probability"), r)) for r in rows],
            }
        )
    return Outcome(text, ok)


def cmd_reduce_check(cfg: RunConfig) -> Outcome:
    p = cfg.coin_params()
    rng = np.random.default_rng(cfg.seed)
    devs = []
    for _ in range(cfg.samples):
        psi = InitialPsi(_random_psi(rng, cfg.k), p.ctilde)
        devs.append(float(contraction_deviation(p, psi, cfg.steps, Mode.LITERAL).max()))
    psi = InitialPsi(cfg.psi_vector(cfg.k), p.ctilde)
    table = event_table(p, psi, cfg.steps, Mode.UNITARIZED, threshold=cfg.threshold)
    spec = build_walk(Model.JOINED, p, cfg.k, Mode.UNITARIZED, psi.psi, cfg.boundary)
    case = max(case_mapping_deviation(s) for s in trajectory(spec, cfg.steps))
    mass = max(abs(m - 1) for m in table.total_mass)
    ok = max(devs) < INVARIANT_TOL and table.max_route_deviation < INVARIANT_TOL
    ok = ok and mass < INVARIANT_TOL and case < INVARIANT_TOL
    if (cfg.format or "json") == "csv":
        return Outcome(csv_text(("t", "r", "x", "y", "p"), table.rows), ok)
    report = {
        "config": cfg.to_dict(),
        "contraction_max_deviation": max(devs),
        "contraction_per_sample": devs,
        "contraction_passed": max(devs) < INVARIANT_TOL,
        "event_route_max_deviation": table.max_route_deviation,
        "event_total_mass_max_deviation": mass,
        "case_mapping_max_deviation": case,
        "psi_prime": psi.psi_prime,
    }
    return Outcome(dumps_json(report), ok)


def cmd_tree_check(cfg: RunConfig) -> Outcome:
    p = cfg.coin_params()
    psi = cfg.psi_vector(cfg.k) if cfg.psi is not None else None
    found = tree_projection_check(cfg.k, cfg.tmax, p, psi, cfg.letter, (Mode.LITERAL, Mode.UNITARIZED))
    tree_ok = all(abs(m - 1) < INVARIANT_TOL for f in found for m in f.tree_mass)
    report = {
        "config": cfg.to_dict(),
        "tree_mass_conserved": tree_ok,
        "any_reading_matches_1e-6": any(f.matches(1e-6) for f in found),
        "findings": [asdict(f) for f in found],
    }
    return Outcome(dumps_json(report), tree_ok)


def cmd_genfunc_check(cfg: RunConfig) -> Outcome:
    p = cfg.coin_params()
    r = ReducedCoinParams.grover_default(cfg.k)
    rep = genfunc_check(p, r, cfg.tmax, cfg.max_sum, cfg.order, boundary=cfg.boundary)
    grid = [0.3 * np.exp(2j * np.pi * j / 10) * (i + 1) / 10 for i in range(10) for j in range(10)]
    lam_resid = max(quadratic_residual(z, lambda_eval(z, p), p) for z in grid)
    small = 1e-4
    rep["lambda"] = {
        "quadratic_residual_max": lam_resid,
        "lambda_over_z_at_1e-4": lambda_eval(small, p) / small,
        "c": p.c,
        "r0": radius_r0(p),
        "r1": radius_r1(p),
    }
    rep["config"] = cfg.to_dict()
    ok = rep["transfer_vs_simulator"] <= 1e-12 and rep["renewal_vs_transfer"] <= 1e-12
    return Outcome(dumps_json(rep), ok)


def _neighbourhood(k: int) -> list[tuple[int, int, int]]:
    return [(r, x, y) for r in range(k) for (x, y) in ((0, 0), (1, 0), (0, 1))]


def cmd_localization(cfg: RunConfig) -> Outcome:
    p = cfg.coin_params()
    psi = InitialPsi(cfg.psi_vector(cfg.k), p.ctilde)
    tp = limit_params(p, psi)
    t0, t1 = cfg.window or (100, 200)
    spec = build_walk(Model.JOINED, p, cfg.k, cfg.mode, psi.psi, cfg.boundary)
    sites = [(r, x, s - x) for r in range(cfg.k) for s in range(cfg.max_sum + 1) for x in range(s + 1)]
    hood_sites = _neighbourhood(cfg.k)
    series = site_mass_series(spec, sites + [h for h in hood_sites if h not in sites], t1)
    findings = []
    for site in sites:
        r, x, y = site
        avg = time_averaged_probability(spec, site, (t0, t1), series)
        formula = {par: localization_asymptotic(par, r, x, y, tp) for par in (0, 1)}
        for par, sim in (("even", avg.even), ("odd", avg.odd)):
            f = formula[0 if par == "even" else 1]
            findings.append(
                {
                    "quantity": f"P(X_r={x},Y_r={y}) r={r} t {par}",
                    "printed_formula_value": f.value,
                    "simulated_value": sim,
                    "assumption_flags": list(f.assumption_flags),
                    "tolerance_class": "finding",
                }
            )
    hood = time_averaged_probability(spec, hood_sites, (t0, t1), series)
    report = {
        "config": cfg.to_dict(),
        "window": [t0, t1],
        "parameters": {
            "phi": tp.phi,
            "K_plus": tp.K_plus,
            "K_minus": tp.K_minus,
            "K_cross": tp.K_cross,
            "theta1": tp.theta1,
            "theta2": tp.theta2,
            "theta3": tp.theta3,
        },
        "origin_neighbourhood": asdict(hood),
        "parity_violation": series.parity_violation,
        "findings": findings,
    }
    ok = series.parity_violation == 0.0 or cfg.boundary != "wall-pair"
    return Outcome(dumps_json(report), ok)


def cmd_weak_limit(cfg: RunConfig) -> Outcome:
    p = cfg.coin_params()
    a_mod = abs(p.a)
    psi = InitialPsi(cfg.psi_vector(cfg.k), p.ctilde)
    tp = limit_params(p, psi)
    times = sorted(set(cfg.times or [cfg.steps]))
    if (cfg.format or "json") == "csv":
        xs = np.linspace(0, 1, 101)[:-1]
        rows = []
        for x in xs:
            v = weak_limit_density(x, 0.0, 0, tp, a_mod, cfg.theta_choice)
            fh = f_H_density(x, a_mod)
            rows.append((float(x), fh, v.C_d_x, v.C_d_x * fh))
        return Outcome(csv_text(("x", "f_H", "C_d", "rho_w"), rows))
    spec = build_walk(Model.JOINED, p, cfg.k, cfg.mode, psi.psi, cfg.boundary)
    stats = []
    ok = True
    for s in trajectory(spec, times[-1]):
        if s.t not in times:
            continue
        for r in range(cfg.k):
            e = empirical_rescaled_stats(s, r, a_mod)
            ok = ok and 0 <= e.origin_mass <= 1 + INVARIANT_TOL and 0 <= e.inside_fraction <= 1 + INVARIANT_TOL
            stats.append(
                {
                    "t": e.t,
                    "copy": r,
                    "origin_mass": e.origin_mass,
                    "off_origin_mass": e.off_origin_mass,
                    "inside_fraction": e.inside_fraction,
                    "quantiles_x": e.quantiles,
                    "ks_x": e.ks_x,
                    "ks_y": e.ks_y,
                }
            )
    formula = [
        {
            "quantity": f"rho_w mass r={r}",
            "printed_formula_value": weak_limit_total_mass(r, tp, a_mod, cfg.theta_choice),
            "assumption_flags": [f"theta={cfg.theta_choice}"] + list(tp.assumption_flags),
            "tolerance_class": "finding",
        }
        for r in range(cfg.k)
    ]
    report = {"config": cfg.to_dict(), "empirical": stats, "findings": formula}
    return Outcome(dumps_json(report), ok)


COMMANDS = {
    "simulate": cmd_simulate,
    "reduce-check": cmd_reduce_check,
    "tree-check": cmd_tree_check,
    "genfunc-check": cmd_genfunc_check,
    "theorem1": cmd_localization,
    "theorem2": cmd_weak_limit,
    "localization": cmd_localization,
    "weak-limit": cmd_weak_limit,
}


def _write(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv=None) -> int:
    try:
        cfg, dump = resolve_config(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if dump:
        _write(dumps_json(cfg.to_dict()), cfg.output)
        return EXIT_OK
    try:
        out = COMMANDS[cfg.command](cfg)
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (CoinError, WalkError, ReductionError, LimitError, GenfuncError, TreeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write(out.text, cfg.output)
    if not out.ok:
        print("invariant violation; see report", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
