"""Configuration-driven experiment runner.

Every command reads one INI config, writes CSV results plus a run
manifest into the output directory, and echoes the resolved config so a
run can be reproduced byte for byte from its artifacts.  Exit codes:
0 success, 1 validation error, 2 budget or precision failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .config import ExperimentConfig
from .dimension import (
    entropy_dimension_estimate,
    exact_dimension,
    marstrand_sweep,
    support_dimension,
)
from .distset import distset_experiment, log_scale_range
from .errors import BudgetExceeded, CarpetError, PrecisionExhausted
from .metrics import SimpleTestFunction, h0, scenery_distribution, simple_test_average
from .render import render_heatmap
from .scenery import PhaseState
from .symbolic import Word, sample_point
from .verification import run_verification


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path: Path, fieldnames, rows) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in fieldnames])


def _write_manifest(path: Path, cfg: ExperimentConfig, command: str,
                    outputs: list[str], extra_lines=()) -> None:
    lines = [
        f"command={command}",
        f"version={__version__}",
        f"config_hash={cfg.config_hash()}",
        f"spec_hash={cfg.spec_hash()}",
        f"seed={cfg.seed}",
        f"precision={cfg.precision}",
        f"threads={cfg.threads}",
    ]
    lines += [f"output={name}" for name in outputs]
    lines += list(extra_lines)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _emit(cfg: ExperimentConfig, out: Path, command: str, outputs, extra=()):
    (out / f"{command}_config.ini").write_text(cfg.dumps(), encoding="utf-8")
    _write_manifest(out / f"{command}_manifest.txt", cfg, command,
                    outputs + [f"{command}_config.ini"], extra)


def cmd_dim(cfg: ExperimentConfig, out: Path) -> int:
    spec = cfg.spec()
    k_lo = cfg.param("dim", "k_lo", 8, int)
    k_hi = cfg.param("dim", "k_hi", 14, int)
    t = cfg.param("dim", "t", "0")
    phase = PhaseState.create(spec.m, spec.n, t, prec=cfg.precision)
    est = entropy_dimension_estimate(spec, phase, k_lo, k_hi)
    row = {
        "m": spec.m,
        "n": spec.n,
        "exact_dimension": exact_dimension(spec),
        "entropy_slope_estimate": est,
        "support_dimension": support_dimension(spec),
        "k_lo": k_lo,
        "k_hi": k_hi,
        "t": float(phase.t_float),
    }
    _write_csv(out / "dim.csv", list(row.keys()), [row])
    _emit(cfg, out, "dim", ["dim.csv"])
    return 0


def default_test_battery(spec) -> list[SimpleTestFunction]:
    """Five indicator test functions exercising phase, both words, and a ball."""
    i0 = next(i for i in range(spec.m) if spec.q[i] > 0)
    j0 = next(j for j in range(spec.n) if spec.r[j] > 0)
    level = min(h0(spec), 2)
    center = Word((i0,) * max(level, 1), spec.m)
    empty_i, empty_j = Word((), spec.m), Word((), spec.n)
    return [
        SimpleTestFunction(0.0, 1.0, empty_i, Word((j0,), spec.n), center, 0),
        SimpleTestFunction(0.0, 0.5, empty_i, empty_j, center, 0),
        SimpleTestFunction(0.25, 0.75, Word((i0,), spec.m), empty_j, center, 0),
        SimpleTestFunction(0.0, 1.0, empty_i, empty_j, center, level),
        SimpleTestFunction(0.1, 0.6, Word((i0,), spec.m), Word((j0,), spec.n), center, level),
    ]


def cmd_scenery(cfg: ExperimentConfig, out: Path) -> int:
    spec = cfg.spec()
    N = cfg.param("scenery", "n_steps", 20000, int)
    q = cfg.param("scenery", "q", 1, int)
    t = cfg.param("scenery", "t", "0")
    phase = PhaseState.create(spec.m, spec.n, t, prec=cfg.precision)
    battery = default_test_battery(spec)
    depth = q * N + max(len(g.iprefix) for g in battery) + 8
    point = sample_point(spec, cfg.seed, depth)
    rows = []
    for idx, g in enumerate(battery):
        res = simple_test_average(spec, g, phase, point, N, q)
        rows.append({
            "test": idx,
            "a": g.a,
            "b": g.b,
            "iprefix": "".join(map(str, g.iprefix)),
            "jprefix": "".join(map(str, g.jprefix)),
            "h": g.h,
            "N": N,
            "q": q,
            "empirical": res.empirical,
            "exact": res.exact,
            "abs_error": abs(res.empirical - res.exact),
        })
    emp = scenery_distribution(spec, phase, point, N, q)
    extra = []
    if phase.is_rational:
        atoms = emp.phase_atoms()
        extra.append(f"phase_atoms={len(atoms)}")
    else:
        extra.append(f"phase_ks_uniform={_fmt(emp.phase_ks_uniform())}")
    _write_csv(
        out / "scenery.csv",
        ["test", "a", "b", "iprefix", "jprefix", "h", "N", "q",
         "empirical", "exact", "abs_error"],
        rows,
    )
    _emit(cfg, out, "scenery", ["scenery.csv"], extra)
    return 0


def cmd_project(cfg: ExperimentConfig, out: Path) -> int:
    spec = cfg.spec()
    grid_txt = cfg.param("project", "s_grid", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    s_grid = [float(tok) for tok in grid_txt.split(",") if tok.strip()]
    q = cfg.param("project", "q", 8, int)
    samples = cfg.param("project", "samples", 200, int)
    depth = cfg.param("project", "depth", 12, int)
    phase = PhaseState.create(spec.m, spec.n, 0, prec=cfg.precision)
    sweep = marstrand_sweep(
        spec, s_grid, (1, -1), q, samples, cfg.seed, depth,
        phase=phase, threads=cfg.threads,
    )
    rows = [
        {
            "s": row.label(),
            "sign": "" if row.proj.kind != "oblique" else ("+" if row.proj.sign > 0 else "-"),
            "q": row.q,
            "E_q_estimate": row.eq_estimate,
            "direct_dim_estimate": row.direct_estimate,
            "samples": row.samples,
            "seed": row.seed,
        }
        for row in sweep
    ]
    _write_csv(
        out / "project.csv",
        ["s", "sign", "q", "E_q_estimate", "direct_dim_estimate", "samples", "seed"],
        rows,
    )
    _emit(cfg, out, "project", ["project.csv"])
    return 0


def cmd_distset(cfg: ExperimentConfig, out: Path) -> int:
    spec = cfg.spec()
    depth = cfg.param("distset", "depth", 9, int)
    eps_min = cfg.param("distset", "eps_min", 2.0 ** -9, float)
    eps_max = cfg.param("distset", "eps_max", 2.0 ** -4, float)
    n_scales = cfg.param("distset", "n_scales", 6, int)
    mode = cfg.param("distset", "mode", "exhaustive")
    count = cfg.param("distset", "count", 20000, int)
    pair_budget = cfg.param("distset", "pair_budget", 10_000_000, int)
    report = distset_experiment(
        spec, depth, log_scale_range(eps_min, eps_max, n_scales),
        seed=cfg.seed, mode=mode, count=count, pair_budget=pair_budget,
    )
    row = report.csv_row()
    _write_csv(out / "distset.csv", list(row.keys()), [row])
    _emit(cfg, out, "distset", ["distset.csv"],
          [f"dim_support={_fmt(report.dim_support)}",
           "note=box-counting lower estimate, not a Hausdorff value"])
    return 0


def cmd_render(cfg: ExperimentConfig, out: Path) -> int:
    spec = cfg.spec()
    depth = cfg.param("render", "depth", 6, int)
    t = cfg.param("render", "t", "0")
    width = cfg.param("render", "width", 512, int)
    height = cfg.param("render", "height", 512, int)
    phase = PhaseState.create(spec.m, spec.n, t, prec=cfg.precision)
    render_heatmap(spec, depth, phase, width, height, out / "render.ppm")
    _emit(cfg, out, "render", ["render.ppm"])
    return 0


def cmd_verify(cfg: ExperimentConfig, out: Path) -> int:
    n_specs = cfg.param("verify", "specs", 50, int)
    results = run_verification(cfg.seed, n_specs)
    lines = [f"check={name} cases={count} ok={_fmt(ok)}" for name, count, ok in results]
    _emit(cfg, out, "verify", [], lines)
    rows = [{"check": name, "cases": count, "ok": ok} for name, count, ok in results]
    _write_csv(out / "verify.csv", ["check", "cases", "ok"], rows)
    if not all(ok for _, _, ok in results):
        return 1
    return 0


COMMANDS = {
    "dim": cmd_dim,
    "scenery": cmd_scenery,
    "project": cmd_project,
    "distset": cmd_distset,
    "render": cmd_render,
    "verify": cmd_verify,
}


def run(command: str, cfg: ExperimentConfig, out_dir) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[command](cfg, out)
    except (BudgetExceeded, PrecisionExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CarpetError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="carpetlab",
        description="Magnification scenery experiments for grid Bernoulli measures",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="INI config path")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--precision", type=int, default=None, help="phase precision bits")
    args = parser.parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
    except (CarpetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    if args.precision is not None:
        cfg.precision = args.precision
    return run(args.command, cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
