"""Command-line front end: JSON run configurations dispatched to verifiers.

Usage:
    horopoisson --config run.json [--output DIR] [--seed N]
    horopoisson --list-commands

Each run writes ``report.json`` and one or more ``trace_*.csv`` files into
the output directory. Exit status: 0 if every assertion passed, 1 if any
failed (numerical errors surface as failed assertions), 2 for invalid
configurations. The only environment override honored is ``OUTPUT_DIR``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field as _dc_field

import numpy as np

from . import bergman as bg
from . import crownprobe as cp
from . import extension as ex
from . import poisson as po
from .builtins import central_mask, make_builtin
from .errors import ConfigError, HoropoissonError
from .field import SpectralGrid, norm as field_norm, read_binary
from .poisson import Params
from .reporting import Report, write_trace_csv

COMMANDS = (
    "transform",
    "slice",
    "delta-asymptotics",
    "admissibility",
    "isometry",
    "banach-norm",
    "norm-limit",
    "extension",
    "crown-probe",
    "specfun-selftest",
)

_DEFAULT_GRIDS = {1: 1024, 2: 256, 3: 64}


@dataclass
class RunConfig:
    """Validated run configuration."""

    command: str
    n: int = 1
    lam: complex = 1.0
    alpha: float = 1.0
    grid_extent: float = 16.0
    grid_points: int | None = None
    input_spec: dict = _dc_field(default_factory=lambda: {"builtin": "gaussian"})
    a_values: list = _dc_field(default_factory=list)
    t_levels: list = _dc_field(default_factory=list)
    y: list = _dc_field(default_factory=list)
    gammas: list = _dc_field(default_factory=list)
    crown: dict = _dc_field(default_factory=dict)
    seed: int = 0
    output_dir: str = "out"

    def params(self) -> Params:
        return Params(self.n, self.lam)

    def grid(self) -> SpectralGrid:
        pts = self.grid_points or _DEFAULT_GRIDS[self.n]
        return SpectralGrid(self.n, self.grid_extent, pts)


def _parse_lambda(raw, errors: list) -> complex:
    if isinstance(raw, (int, float)):
        lam = complex(raw)
    elif isinstance(raw, dict) and set(raw) <= {"re", "im"}:
        lam = complex(float(raw.get("re", 0.0)), float(raw.get("im", 0.0)))
    else:
        errors.append(f"lambda: expected number or {{re, im}}, got {raw!r}")
        return 1.0
    if lam.real <= 0:
        errors.append(f"lambda: Re(lambda) must be > 0 (got {lam}); the transform "
                      "is only defined for positive real part")
    return lam


def validate(config_text: str) -> RunConfig:
    """Parse and validate a JSON configuration; raise ConfigError with all problems."""
    try:
        raw = json.loads(config_text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}"])
    if not isinstance(raw, dict):
        raise ConfigError(["top-level configuration must be a JSON object"])
    errors: list[str] = []
    command = raw.get("command")
    if command not in COMMANDS:
        errors.append(f"command: {command!r} is not one of {', '.join(COMMANDS)}")
        raise ConfigError(errors)

    cfg = RunConfig(command=command)
    if "n" in raw:
        if raw["n"] not in (1, 2, 3):
            errors.append(f"n: must be 1, 2 or 3, got {raw['n']}")
        else:
            cfg.n = int(raw["n"])
    if "lambda" in raw:
        cfg.lam = _parse_lambda(raw["lambda"], errors)
    if "alpha" in raw:
        try:
            cfg.alpha = float(raw["alpha"])
            if cfg.alpha <= 0:
                errors.append("alpha: must be positive")
        except (TypeError, ValueError):
            errors.append(f"alpha: expected number, got {raw['alpha']!r}")
    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        errors.append("grid: expected object with extent/points")
    else:
        if "extent" in grid:
            cfg.grid_extent = float(grid["extent"])
            if cfg.grid_extent <= 0:
                errors.append("grid.extent: must be positive")
        if "points" in grid:
            m = int(grid["points"])
            if m < 2 or m & (m - 1):
                errors.append(f"grid.points: must be a power of two, got {m}")
            else:
                cfg.grid_points = m
    if "input" in raw:
        spec = raw["input"]
        if not isinstance(spec, dict) or not ({"builtin", "path"} & set(spec)):
            errors.append("input: expected object with 'builtin' or 'path'")
        else:
            cfg.input_spec = spec
    for key in ("a_values", "t_levels", "y", "gammas"):
        if key in raw:
            try:
                setattr(cfg, key, [float(v) for v in raw[key]])
            except (TypeError, ValueError):
                errors.append(f"{key}: expected list of numbers")
    if "crown" in raw:
        if not isinstance(raw["crown"], dict):
            errors.append("crown: expected object")
        else:
            cfg.crown = raw["crown"]
    if "seed" in raw:
        cfg.seed = int(raw["seed"])
    if "output_dir" in raw:
        cfg.output_dir = str(raw["output_dir"])

    required = {
        "delta-asymptotics": ["gammas"],
        "extension": ["t_levels"],
        "crown-probe": ["crown"],
    }
    for key in required.get(command, []):
        if not getattr(cfg, key if key != "crown" else "crown"):
            errors.append(f"{key}: required for command {command!r}")
    if command == "crown-probe" and isinstance(cfg.crown, dict):
        if "Y" not in cfg.crown:
            errors.append("crown.Y: required (row-major strictly upper-triangular matrix)")
    if errors:
        raise ConfigError(errors)
    return cfg


def _load_input(cfg: RunConfig):
    if "path" in cfg.input_spec:
        return read_binary(cfg.input_spec["path"])
    grid = cfg.grid()
    spec = dict(cfg.input_spec)
    if spec.get("builtin") == "random-bandlimited":
        spec.setdefault("seed", cfg.seed)
    return make_builtin(grid, spec)


def _run_transform(cfg: RunConfig) -> Report:
    p = cfg.params()
    f = _load_input(cfg)
    a_values = cfg.a_values or [1.0]
    rep = Report(command="transform", params={"n": cfg.n, "lam": cfg.lam, "a_values": a_values},
                 convention="normalized transform", seed=cfg.seed)
    rows = []
    for a in a_values:
        u1 = po.poisson_transform(f, a, p, method="fft")
        u2 = po.poisson_transform(f, a, p, method="quadrature")
        rel = field_norm(u1.with_values(u1.values - u2.values)) / field_norm(u1)
        rows.append((a, rel))
        rep.check(f"dual-path-agreement(a={a})", rel, 0.0, 1e-6,
                  kind="quadrature-oracle", relative=False)
    rep.values["trace"] = rows
    rep.values["trace_header"] = ["a", "dual_path_rel_l2"]
    return rep


def _run_slice(cfg: RunConfig) -> Report:
    p = cfg.params()
    f = _load_input(cfg)
    a = cfg.a_values[0] if cfg.a_values else 1.0
    y = np.asarray(cfg.y or [0.5 * a] + [0.0] * (cfg.n - 1))
    rep = Report(command="slice", params={"n": cfg.n, "lam": cfg.lam, "a": a, "y": y.tolist()},
                 convention="normalized transform", seed=cfg.seed)
    s1 = po.tube_slice(f, a, y, p, method="fft")
    s2 = po.tube_slice(f, a, y, p, method="quadrature")
    rel = field_norm(s1.with_values(s1.values - s2.values)) / field_norm(s1)
    rep.check("slice-dual-path", rel, 0.0, 1e-6, kind="quadrature-oracle", relative=False)
    # Slice L2 bound by the delta kernel norm at the rescaled offset.
    lhs = field_norm(s1)
    bound = (a ** (p.n / 2.0 - p.s)) * po.delta_l1(y / a, p) * field_norm(f)
    rep.flag("slice-l2-bound", lhs <= bound * (1 + 1e-9), kind="analytic",
             detail={"slice_l2": lhs, "bound": bound})
    rep.values["trace"] = [(a, lhs, bound)]
    rep.values["trace_header"] = ["a", "slice_l2", "bound"]
    return rep


def _run_delta_asymptotics(cfg: RunConfig) -> Report:
    rep = po.delta_asymptotics(cfg.params(), cfg.gammas)
    rep.seed = cfg.seed
    rep.values["trace"] = list(zip(rep.values["gammas"], rep.values["l1_norms"]))
    rep.values["trace_header"] = ["gamma", "delta_l1"]
    return rep


def _run_admissibility(cfg: RunConfig) -> Report:
    p = cfg.params()
    w = bg.WeightSpec(cfg.alpha, "spatial", p)
    rep = bg.admissibility(w)
    rep.seed = cfg.seed
    rep.values["trace"] = list(zip(rep.values["node_counts"], rep.values["values"]))
    rep.values["trace_header"] = ["radial_nodes", "integral_value"]
    return rep


def _run_isometry(cfg: RunConfig) -> Report:
    p = cfg.params()
    w = bg.WeightSpec(cfg.alpha, "spatial", p)
    f = _load_input(cfg)
    a_values = cfg.a_values or [0.25, 0.5, 1.0, 2.0, 4.0]
    rep = Report(command="isometry",
                 params={"n": cfg.n, "lam": cfg.lam, "alpha": cfg.alpha, "a_values": a_values},
                 convention="normalized transform", seed=cfg.seed)
    ratios = []
    rows = []
    for a in a_values:
        tube = bg.bergman_norm(f, a, w, method="tube-quadrature").value
        raw = bg.fourier_side_raw(f, a, w)
        ratios.append(tube / raw)
        rows.append((a, tube, raw, tube / raw))
    ratios = np.asarray(ratios)
    spread = float((ratios.max() - ratios.min()) / np.median(ratios))
    tol = 1e-5 if cfg.n == 1 else 1e-4
    rep.check("ratio-spread", spread, 0.0, tol, kind="calibration", relative=False)
    rep.values["frozen_constant"] = float(np.median(ratios))
    if p.lam.imag == 0.0:
        rep.check("constant-vs-candidate", float(np.median(ratios)),
                  bg.level_isometry_constant_candidate(w), 1e-6, kind="closed-form")
    rep.values["trace"] = rows
    rep.values["trace_header"] = ["a", "tube_quadrature", "fourier_raw", "ratio"]
    return rep


def _run_banach_norm(cfg: RunConfig) -> Report:
    p = cfg.params()
    w = bg.WeightSpec(cfg.alpha, "spatial", p)
    f = _load_input(cfg)
    a_grid = cfg.a_values or list(np.geomspace(0.01, 4.0, 25))
    rep = bg.banach_norm(f, w, a_grid)
    rep.seed = cfg.seed
    rep.values["trace"] = list(zip(rep.values["a"], rep.values["trace"]))
    rep.values["trace_header"] = ["a", "scaled_bergman_trace"]
    return rep


def _run_norm_limit(cfg: RunConfig) -> Report:
    p = cfg.params()
    w = bg.WeightSpec(cfg.alpha, "spatial", p)
    f = _load_input(cfg)
    a_ray = cfg.a_values or [1.0, 0.7, 0.5, 0.35, 0.25, 0.18, 0.12, 0.09, 0.07, 0.05]
    rep = bg.norm_limit(f, w, a_ray)
    rep.seed = cfg.seed
    l2 = rep.values["input_l2"]
    rep.values["trace"] = [
        (a, v, l2, d)
        for a, v, d in zip(rep.values["a"], rep.values["trace"], rep.values["deviation"])
    ]
    rep.values["trace_header"] = ["a", "value", "reference", "deviation"]
    return rep


def _run_extension(cfg: RunConfig) -> Report:
    p = cfg.params()
    f = _load_input(cfg)
    psi = ex.extend(f, cfg.t_levels, p)
    rep = ex.ode_residual(psi, p)
    rep.seed = cfg.seed
    mask = central_mask(f.grid)
    wgt = f.grid.spacing ** f.grid.n
    ref = math.sqrt(float(np.sum(np.abs(f.values[mask]) ** 2) * wgt))
    errs = []
    for t, s in zip(psi.t_levels, psi.slices):
        diff = s.values - f.values
        errs.append(math.sqrt(float(np.sum(np.abs(diff[mask]) ** 2) * wgt)) / ref)
    rep.values["boundary_recovery_error"] = errs
    rep.flag("recovery-improves-toward-boundary", errs[-1] == min(errs),
             kind="self-convergence", detail=errs)
    rep.values["trace"] = list(zip(psi.t_levels, errs))
    rep.values["trace_header"] = ["t", "central_recovery_error"]
    return rep


def _run_crown_probe(cfg: RunConfig) -> Report:
    n = int(cfg.crown.get("n", 2))
    y_flat = np.asarray(cfg.crown["Y"], dtype=float)
    y = cp.UpperNilpotent(n, y_flat.reshape(n, n))
    rep = cp.tube_probe(
        y,
        sample_count=int(cfg.crown.get("sample_count", 512)),
        seed=cfg.seed,
        radius=float(cfg.crown.get("radius", 5.0)),
    )
    inv = cp.invariance_report(n, seed=cfg.seed)
    rep.assertions.extend(inv.assertions)
    rep.values["trace"] = list(zip(rep.values["tau"], rep.values["min_abs_fk"]))
    rep.values["trace_header"] = ["tau", "min_abs_fk"]
    return rep


def _run_specfun_selftest(cfg: RunConfig) -> Report:
    from . import specfun as sf

    rep = Report(command="specfun-selftest", seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    # Gamma recurrence on random points in the test strip.
    worst = 0.0
    for _ in range(1000):
        z = complex(rng.uniform(-20, 20), rng.uniform(-20, 20))
        if abs(z - round(z.real)) < 1e-3 and round(z.real) <= 1:
            continue
        worst = max(worst, abs(sf.gamma(z + 1) - z * sf.gamma(z)) / abs(sf.gamma(z + 1)))
    rep.check("gamma-recurrence", worst, 0.0, 1e-11, relative=False)
    # Reflection formula away from integers.
    worst = 0.0
    for _ in range(300):
        z = complex(rng.uniform(0.1, 0.9) + rng.integers(-10, 10), rng.uniform(-10, 10))
        val = sf.gamma(z) * sf.gamma(1 - z) * np.sin(np.pi * z) / np.pi
        worst = max(worst, abs(val - 1.0))
    rep.check("gamma-reflection", worst, 0.0, 1e-10, relative=False)
    # Monotonicity: K decreasing, I increasing.
    r = np.geomspace(0.1, 30, 40)
    kv = sf.bessel_k(1.3, r)
    iv = sf.bessel_i(1.3, r)
    rep.flag("macdonald-decreasing", bool(np.all(np.diff(kv) < 0)))
    rep.flag("bessel-i-increasing", bool(np.all(np.diff(iv) > 0)))
    # Small-argument limit of r^s K_s(r); the correction term is O(r^{2s}),
    # so s = 0.3 needs a smaller checkpoint to sit below 1e-4.
    worst = 0.0
    for s, r0 in ((0.3, 1e-8), (0.5, 1e-6), (1.0, 1e-6), (2.0, 1e-6)):
        lim = r0**s * sf.bessel_k(s, r0)
        tgt = 2.0 ** (s - 1.0) * math.gamma(s)
        worst = max(worst, abs(lim - tgt) / tgt)
    rep.check("macdonald-small-r-limit", worst, 0.0, 1e-4, relative=False)
    # Segura chain on the log-spaced grid.
    nus = np.concatenate([[0.0], np.geomspace(1e-2, 10.0, 19)])
    rs = np.geomspace(1e-2, 1e2, 20)
    ok = all(sf.segura_check(float(nu), float(rr)).holds for nu in nus for rr in rs)
    rep.flag("segura-chain-20x20", ok)
    return rep


_RUNNERS = {
    "transform": _run_transform,
    "slice": _run_slice,
    "delta-asymptotics": _run_delta_asymptotics,
    "admissibility": _run_admissibility,
    "isometry": _run_isometry,
    "banach-norm": _run_banach_norm,
    "norm-limit": _run_norm_limit,
    "extension": _run_extension,
    "crown-probe": _run_crown_probe,
    "specfun-selftest": _run_specfun_selftest,
}


def run(cfg: RunConfig) -> Report:
    """Execute the configured verifier and write report + traces to disk."""
    t0 = time.perf_counter()
    rep = _RUNNERS[cfg.command](cfg)
    rep.wall_time_s = time.perf_counter() - t0
    if rep.seed is None:
        rep.seed = cfg.seed

    out_dir = os.environ.get("OUTPUT_DIR", cfg.output_dir)
    os.makedirs(out_dir, exist_ok=True)
    trace = rep.values.pop("trace", None)
    header = rep.values.pop("trace_header", None)
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        fh.write(rep.to_json() + "\n")
    if trace is not None:
        write_trace_csv(os.path.join(out_dir, f"trace_{cfg.command}.csv"), header, trace)
    return rep


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="horopoisson",
        description="Verifiers for the hyperbolic Poisson/Bergman toolkit",
    )
    parser.add_argument("--config", help="path to a JSON run configuration")
    parser.add_argument("--output", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--list-commands", action="store_true", help="list commands and exit")
    args = parser.parse_args(argv)

    if args.list_commands:
        for c in COMMANDS:
            print(c)
        return 0
    if not args.config:
        parser.error("--config is required unless --list-commands is given")
    try:
        with open(args.config) as fh:
            cfg = validate(fh.read())
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        for msg in e.messages:
            print(f"config error: {msg}", file=sys.stderr)
        return 2
    if args.output:
        cfg.output_dir = args.output
    if args.seed is not None:
        cfg.seed = args.seed
    try:
        rep = run(cfg)
    except HoropoissonError as e:
        print(f"run failed: {e}", file=sys.stderr)
        return 1
    for line in rep.summary_lines():
        print(line)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
