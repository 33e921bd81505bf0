"""
Command-line driver.

    flexsynth modes    --recipe plate_surrogate [--n-flex 10] [--out DIR]
    flexsynth simulate --config CFG.yaml [--model FILE | --recipe SPEC] --out DIR
    flexsynth rigid    --config CFG.yaml [--model FILE | --recipe SPEC] --out DIR
    flexsynth compare  FLEX.csv RIGID.csv [--columns PAT ...] [--max-rel-rms 0.01]

Exit codes: 0 success, 1 numerical failure or failed comparison, 2 bad input.
"""
from __future__ import annotations

import argparse
import logging
import re
import sys

import numpy as np
import yaml

from . import output
from .config import RECIPES, ModelSource, _number, load_config
from .errors import ConfigError, DivergenceError, FlexSynthError, NumericalError
from .model import build_modal_system, compute_modes

log = logging.getLogger("flexsynth")

EXIT_OK, EXIT_NUMERICAL, EXIT_INPUT = 0, 1, 2


def parse_recipe(spec):
    """``name`` or ``name:key=value,key=value`` (values parsed as YAML scalars/lists)."""
    name, _, rest = spec.partition(":")
    if name not in RECIPES:
        raise ConfigError(f"--recipe: unknown recipe {name!r} (choose from {', '.join(sorted(RECIPES))})")
    params = {}
    if rest:
        # split on commas that start a new key=value pair
        for item in re.split(r",(?=\s*[A-Za-z_]\w*\s*=)", rest):
            key, eq, value = item.partition("=")
            if not eq:
                raise ConfigError(f"--recipe: expected key=value, got {item!r}")
            try:
                params[key.strip()] = _number(yaml.safe_load(value))
            except yaml.YAMLError:
                raise ConfigError(f"--recipe: cannot parse value for {key.strip()!r}") from None
    return ModelSource(recipe=name, params=params)


def _model_source(args, cfg=None):
    if args.model and args.recipe:
        raise ConfigError("give only one of --model and --recipe")
    if args.model:
        return ModelSource(path=args.model), None
    if args.recipe:
        return parse_recipe(args.recipe), None
    if cfg is not None and cfg.model is not None:
        return cfg.model, cfg.base_dir
    return None, None


def _build_model(args, cfg=None, required=True):
    source, base = _model_source(args, cfg)
    if source is None:
        if required:
            raise ConfigError("no model: use --model, --recipe or a model section in the config")
        return None
    return source.build(base)


def _load_cfg(args):
    if not args.config:
        raise ConfigError("--config is required")
    return load_config(args.config).with_overrides(args.dt, args.t_end)


def _out_dir(args):
    return output.ensure_dir(args.out or ".")


def _output_nodes(cfg, model):
    refs = cfg.output_nodes or cfg.markers
    nodes = [model.node_index(r) for r in refs]
    return nodes, [output.node_name(model, n) for n in nodes]


def _write_run(out, traj, model, cfg, groups, trailer=None, rigid_points=None):
    written = []
    if "frame" in groups:
        p = out / "frame.csv"
        output.write_csv(p, output.FRAME_COLUMNS, output.frame_table(traj), trailer)
        written.append(p)
    if "nodes" in groups and model is not None:
        nodes, names = _output_nodes(cfg, model)
        if rigid_points is not None:
            from .rigid import point_kinematics
            kin = point_kinematics(traj, model.node_coords[nodes], nodes)
        else:
            from .synthesis import reconstruct_global
            kin = reconstruct_global(traj, model, nodes)
        p = out / "nodes.csv"
        output.write_csv(p, output.node_columns(names), output.node_table(traj.time, kin), trailer)
        written.append(p)
    if "modal" in groups and traj.q is not None:
        p = out / "modal.csv"
        output.write_csv(p, output.modal_columns(traj.q.shape[1]), output.modal_table(traj),
                         trailer)
        written.append(p)
    return written


def cmd_modes(args):
    model = _build_model(args)
    basis = compute_modes(model, args.n_flex)
    rows = []
    for k, f in enumerate(basis.frequencies):
        kind = "rigid" if k < basis.n_rigid else "flexible"
        rows.append((k, float(f), kind))
    if not args.quiet:
        print(f"model {model.name or '(unnamed)'}: {model.n_nodes} nodes, {model.n_dofs} DOFs")
        print(f"{'mode':>4}  {'frequency_hz':>16}  kind")
        for k, f, kind in rows:
            print(f"{k:>4}  {f:16.8g}  {kind}")
    if args.out:
        out = _out_dir(args)
        with open(out / "modes.csv", "w") as fh:
            fh.write("mode,frequency_hz,kind\n")
            for k, f, kind in rows:
                fh.write(f"{k},{f!r},{kind}\n")
    return EXIT_OK


def cmd_simulate(args):
    from .synthesis import simulate
    cfg = _load_cfg(args)
    model = _build_model(args, cfg)
    cfg.validate_against(model)
    basis = compute_modes(model, cfg.n_flex_modes)
    system = build_modal_system(model, basis, cfg.damping_vector(basis.n_rigid, basis.n_modes))
    out = _out_dir(args)
    try:
        traj = simulate(model, system, cfg)
    except DivergenceError as exc:
        if exc.partial is not None:
            _write_run(out, exc.partial, model, cfg, cfg.output_groups,
                       trailer=f"step={exc.step} time_s={exc.time!r}")
        raise
    files = _write_run(out, traj, model, cfg, cfg.output_groups)
    if not args.quiet:
        peak = np.abs(traj.omega).max(axis=0)
        print(f"simulated {len(traj) - 1} steps to t = {traj.time[-1]:.6g} s "
              f"({basis.n_rigid} rigid + {basis.n_modes - basis.n_rigid} flexible modes)")
        print("peak |omega_body| = " + ", ".join(f"{v:.6g}" for v in peak) + " rad/s")
        print("max marker-velocity drift = "
              f"{np.max(traj.marker_drift, initial=0.0):.3g} mm/s")
        for f in files:
            print(f"wrote {f}")
    return EXIT_OK


def cmd_rigid(args):
    from .rigid import RigidBodyProps, simulate_rigid
    cfg = _load_cfg(args)
    model = _build_model(args, cfg, required=False)
    if cfg.rigid is not None:
        props = cfg.rigid.props()
    elif model is not None:
        props = RigidBodyProps.from_model(model)
    else:
        raise ConfigError("rigid: give rigid properties in the config or a model to derive them")
    if model is None and cfg.loads.entries:
        raise ConfigError("loads: rigid run needs a model to locate the load nodes")
    points = None
    loads = cfg.loads
    if model is not None:
        cfg.validate_against(model)
        points = model.node_coords
        loads = loads.resolve(model)
    from .rigid import RigidState
    init = RigidState(com_pos=props.com.copy(),
                      com_vel=np.asarray(cfg.initial.velocity, dtype=float),
                      omega_body=np.asarray(cfg.initial.omega, dtype=float))
    out = _out_dir(args)
    groups = [g for g in cfg.output_groups if g != "modal"]
    try:
        traj = simulate_rigid(props, loads, cfg.dt, cfg.t_end, init, points)
    except DivergenceError as exc:
        if exc.partial is not None:
            _write_run(out, exc.partial, model, cfg, groups,
                       trailer=f"step={exc.step} time_s={exc.time!r}", rigid_points=points)
        raise
    files = _write_run(out, traj, model, cfg, groups, rigid_points=points)
    if not args.quiet:
        print(f"rigid body: mass {props.mass:.6g} Mg, principal inertia "
              + ", ".join(f"{v:.6g}" for v in props.inertia_principal) + " Mg mm^2")
        print(f"initial alpha_body = " + ", ".join(f"{v:.8g}" for v in traj.alpha[0])
              + " rad/s^2")
        for f in files:
            print(f"wrote {f}")
    return EXIT_OK


def cmd_compare(args):
    a = output.read_csv(args.first)
    b = output.read_csv(args.second)
    window = None
    if args.window:
        try:
            lo, hi = (float(v) for v in args.window.split(":"))
        except ValueError:
            raise ConfigError("--window: expected T0:T1") from None
        window = (lo, hi)
    reports = output.compare_tables(a, b, args.columns, args.max_rel_rms, args.max_abs, window)
    thresholds = {"max_rel_rms": args.max_rel_rms, "max_abs": args.max_abs, "window": window}
    summary = output.report_json(reports, thresholds)
    if args.out:
        out = _out_dir(args)
        (out / "compare.json").write_text(summary + "\n")
    if args.json:
        print(summary)
    elif not args.quiet:
        print(output.report_table(reports))
    passed = all(r.passed for r in reports)
    if not passed:
        failed = ", ".join(r.column for r in reports if not r.passed)
        print(f"comparison failed: {failed}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_NUMERICAL


def _common(p, config=True):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", help="model file (JSON, see README)")
    src.add_argument("--recipe", help="built-in model, e.g. plate_surrogate:spring_ea=2e8")
    if config:
        p.add_argument("--config", help="simulation config (YAML)")
        p.add_argument("--dt", type=float, help="override time step (s)")
        p.add_argument("--t-end", type=float, dest="t_end", help="override end time (s)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--quiet", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flexsynth",
        description="Flexible-body dynamics by synthesis of single-step modal responses "
                    "in reconfigured inertial frames.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", help="natural frequencies of a model")
    _common(p, config=False)
    p.add_argument("--n-flex", type=int, default=10, help="flexible modes to report")
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("simulate", help="flexible-body run, writes CSVs")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rigid", help="rigid-body reference run, same CSV schema")
    _common(p)
    p.set_defaults(func=cmd_rigid)

    p = sub.add_parser("compare", help="column-wise difference of two CSVs")
    p.add_argument("first")
    p.add_argument("second", help="reference (denominator of the relative RMS)")
    p.add_argument("--columns", nargs="+", help="column names or patterns, e.g. 'omega_body_*'")
    p.add_argument("--max-rel-rms", type=float, default=0.01)
    p.add_argument("--max-abs", type=float, default=None)
    p.add_argument("--window", help="time window T0:T1 in seconds")
    p.add_argument("--json", action="store_true", help="print the JSON summary instead of a table")
    p.add_argument("--out", help="directory for compare.json")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FlexSynthError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
