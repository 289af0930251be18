"""Command-line front end for the packaged studies.

One subcommand per study (solve, table1..table5, energy, stability,
spectral) plus `accept`, which runs the acceptance test suite. Studies
start from their packaged preset, then apply an optional config file
(--config) and finally any command-line overrides (--out, --method,
--ladder, --seed). Exit codes: 0 on success, 2 on a configuration
error, 3 when the acceptance suite fails.
"""

import argparse
import os
import subprocess
import sys

from .harness import (ConfigError, ExperimentConfig, Rung, parse_config,
                      run_experiment)

# subcommand -> study id understood by the harness
_STUDIES = {
    "solve": "custom",
    "table1": "table1",
    "table2": "stability",
    "table3": "table3",
    "table4": "spectral",
    "table5": "table5",
    "energy": "energy",
    "stability": "stability",
    "spectral": "spectral",
}

_STUDY_HELP = {
    "solve": "single custom run; writes trajectory, energy and error CSVs",
    "table1": "space/time convergence ladder of all four methods",
    "table2": "stability sweep: growing tau against the step-size bound",
    "table3": "kernel-width ladder toward the classical wave equation",
    "table4": "spectral-accuracy ladder of the Fourier discretization",
    "table5": "nonlinear bond-stretch bar convergence ladder",
    "energy": "discrete energy drift of the conservative steppers",
    "stability": "alias of table2",
    "spectral": "alias of table4",
}


def _parse_ladder(text):
    """Command-line ladder: rungs `h tau N N_T` separated by `;`."""
    rungs = []
    for i, chunk in enumerate(text.split(";"), start=1):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split()
        if len(parts) != 4:
            raise ConfigError("--ladder rung %d needs `h tau N N_T`, got %r"
                              % (i, chunk))
        try:
            rungs.append(Rung(float(parts[0]), float(parts[1]),
                              int(parts[2]), int(parts[3])))
        except ValueError:
            raise ConfigError("--ladder rung %d has non-numeric fields: %r"
                              % (i, chunk))
    if not rungs:
        raise ConfigError("--ladder is empty")
    return tuple(rungs)


def _apply_overrides(cfg, args):
    """A copy of cfg with the command-line flags folded in."""
    kwargs = dict(
        experiment=cfg.experiment, methods=cfg.methods, ladder=cfg.ladder,
        rho=cfg.material.rho, E=cfg.material.E, l=cfg.material.l,
        L=cfg.material.L, s_reg=cfg.s_reg, out_dir=cfg.out_dir,
        epsilon=cfg.epsilon, delta_factor=cfg.delta_factor,
        l_values=cfg.l_values, sample_dt=cfg.sample_dt,
        series_terms=cfg.series_terms, seed=cfg.seed)
    if args.out is not None:
        kwargs["out_dir"] = args.out
    if args.method is not None:
        kwargs["methods"] = tuple(
            m.strip() for m in args.method.split(",") if m.strip())
    if args.ladder is not None:
        kwargs["ladder"] = _parse_ladder(args.ladder)
    if args.seed is not None:
        kwargs["seed"] = args.seed
    return ExperimentConfig(**kwargs)


def _run_study(name, args):
    if args.config is not None:
        cfg = parse_config(args.config, experiment=_STUDIES[name])
    else:
        cfg = ExperimentConfig(experiment=_STUDIES[name])
    cfg = _apply_overrides(cfg, args)
    artifact, path = run_experiment(cfg)
    print("wrote %s (%d rows)" % (path, len(artifact.rows)))
    for row in artifact.rows:
        order = "" if row[6] is None else "  order %6.3f" % row[6]
        print("  %-8s h=%-9g tau=%-9g N=%-7d N_T=%-6d max_error %.6e%s"
              % (row[0], row[1], row[2], row[3], row[4], row[5], order))
    return 0


def _acceptance_path():
    here = os.path.abspath(os.path.join(os.getcwd(), "tests",
                                        "test_acceptance.py"))
    if os.path.exists(here):
        return here
    # editable installs keep the suite two levels above the package
    root = os.path.dirname(os.path.dirname(os.path.dirname(
        os.path.abspath(__file__))))
    packaged = os.path.join(root, "tests", "test_acceptance.py")
    if os.path.exists(packaged):
        return packaged
    return None


def _run_accept(args):
    path = _acceptance_path()
    if path is None:
        print("cannot find tests/test_acceptance.py (run from the"
              " repository root)", file=sys.stderr)
        return 2
    env = os.environ.copy()
    if args.seed is not None:
        env["PERIWAVE_SEED"] = str(args.seed)
    cmd = [sys.executable, "-m", "pytest", path, "-v"]
    rc = subprocess.call(cmd, env=env)
    return 0 if rc == 0 else 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="periwave",
        description="nonlocal wave equation solvers and their"
                    " standard studies")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, study in _STUDIES.items():
        p = sub.add_parser(name, help=_STUDY_HELP[name])
        p.add_argument("--config", metavar="FILE",
                       help="INI config file (preset values fill the gaps)")
        p.add_argument("--out", metavar="DIR",
                       help="output directory for the CSV artifacts")
        p.add_argument("--method", metavar="TAGS",
                       help="comma list of method tags, e.g. MSV,GT")
        p.add_argument("--ladder", metavar="RUNGS",
                       help="rungs `h tau N N_T` separated by `;`")
        p.add_argument("--seed", type=int, metavar="N",
                       help="seed recorded in the config (randomized"
                            " suites read it)")
    p = sub.add_parser("accept", help="run the acceptance test suite")
    p.add_argument("--seed", type=int, metavar="N",
                   help="seed exported to the suite as PERIWAVE_SEED")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "accept":
            return _run_accept(args)
        return _run_study(args.command, args)
    except ConfigError as exc:
        print("config error: %s" % (exc,), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
