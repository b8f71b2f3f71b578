"""Command-line front end.

    occdmd generate --out data/
    occdmd fit --data data/ --method okr --lambda 1e-3 --out model.json
    occdmd sweep --config run.json --out sweep.dat
    occdmd predict --model model.json --x0 1,0 --horizon 10 --out pred.csv
    occdmd modes --data data/ --out modes.json

Errors exit with a nonzero, category-specific status and a one-line
``occdmd: error[<category>]: ...`` message on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import run_lambda_sweep, zero_model_error
from .config import RunConfig
from .dynamics import generate_dataset, get_system
from .errors import InputError, OccDmdError
from .estimators import (
    eval_singular_function,
    extract_modes,
    fit_okr,
    fit_sldmd,
    predict_flow,
    singular_triples,
)
from .fileio import (
    load_model,
    read_trajectories,
    save_model,
    write_dat,
    write_trajectories,
    write_trajectory_csv,
)
from .operator_core import build_gram_pack

log = logging.getLogger("occdmd")

IO_EXIT = 7


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(default=None) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=default)
    g = p.add_argument_group("global options")
    g.add_argument("--config", type=Path, help="JSON key/value run configuration")
    g.add_argument("--seed", type=int)
    g.add_argument("--mu-d", type=float, dest="mu_d", help="domain kernel width")
    g.add_argument("--mu-r", type=float, dest="mu_r", help="range kernel width")
    g.add_argument("--lambda", type=float, dest="lam", help="OKR regularisation parameter")
    g.add_argument("--cutoff", type=float, help="relative singular-value cutoff for the pseudoinverse")
    g.add_argument("--quad", choices=["simpson", "trapezoid"])
    g.add_argument("--out", type=Path, help="output file or directory")
    g.add_argument("-v", "--verbose", action="store_true", default=default or False)
    return p


def build_parser() -> argparse.ArgumentParser:
    # subcommands repeat the global flags; SUPPRESS keeps their unset
    # defaults from clobbering values given before the subcommand name
    common = _common(argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="occdmd", description="Fit continuous-time vector fields from trajectory data with occupation kernels.",
                                     parents=[_common()])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="simulate a trajectory dataset")
    p.add_argument("--noise-std", type=float, dest="noise_std")

    p = sub.add_parser("fit", parents=[common], help="fit an SLDMD or OKR model")
    p.add_argument("--data", type=Path, help="dataset manifest or directory (default: simulate from config)")
    p.add_argument("--method", choices=["sldmd", "okr"])

    p = sub.add_parser("sweep", parents=[common], help="OKR vs SLDMD error over a lambda grid")
    p.add_argument("--data", type=Path)
    p.add_argument("--noise-std", type=float, dest="noise_std")
    p.add_argument("--lambdas", type=_float_list, help="comma-separated lambda values")

    p = sub.add_parser("predict", parents=[common], help="integrate a fitted model")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--x0", type=_float_list, required=True)
    p.add_argument("--horizon", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=0.01)

    p = sub.add_parser("modes", parents=[common], help="singular values, modes and singular functions")
    p.add_argument("--data", type=Path)
    p.add_argument("--top", type=int, default=5, help="number of singular functions to tabulate")
    return parser


def _config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    keys = ["seed", "mu_d", "mu_r", "lam", "cutoff", "quad", "noise_std", "lambdas", "method"]
    return cfg.updated({k: getattr(args, k, None) for k in keys}, source="command line")


def _dataset(args, cfg):
    if getattr(args, "data", None) is not None:
        return read_trajectories(args.data)
    return generate_dataset(cfg.dataset_spec())


def _require_out(args):
    if args.out is None:
        raise InputError(f"{args.command} needs --out")
    return args.out


def cmd_generate(args, cfg):
    out = _require_out(args)
    spec = cfg.dataset_spec()
    trajs = generate_dataset(spec)
    meta = {k: cfg.to_dict()[k] for k in ("system", "grid_min", "grid_max", "grid_counts",
                                          "duration", "dt", "noise_std", "seed")}
    path = write_trajectories(trajs, out, meta)
    log.info("wrote %d trajectories to %s", len(trajs), path)


def cmd_fit(args, cfg):
    out = _require_out(args)
    pack = build_gram_pack(_dataset(args, cfg), cfg.params_d(), cfg.params_r(), cfg.quadrature())
    if cfg.method == "sldmd":
        model = fit_sldmd(pack, cfg.cutoff)
    else:
        model = fit_okr(pack, cfg.lam)
    save_model(model, out)
    log.info("wrote %s model (M=%d) to %s", model.method, model.M, out)


def cmd_sweep(args, cfg):
    out = _require_out(args)
    system = get_system(cfg.system)
    grid = cfg.eval_grid()
    component = int(cfg.component) - 1
    rows = run_lambda_sweep(_dataset(args, cfg), cfg.params_d(), cfg.params_r(), cfg.quadrature(),
                            cfg.sweep_lambdas(), grid, system=system, component=component,
                            rel_cutoff=cfg.cutoff)
    comments = [
        "occdmd lambda sweep",
        "config " + json.dumps(cfg.to_dict(), sort_keys=True),
        f"zero_model_err {zero_model_error(system, component, grid)!r}",
    ]
    write_dat(rows, out, comments)
    log.info("wrote %d rows to %s", len(rows), out)


def cmd_predict(args, cfg):
    model = load_model(args.model)
    traj = predict_flow(model, np.array(args.x0), args.horizon, args.dt)
    write_trajectory_csv(traj, sys.stdout if args.out is None else args.out)


def cmd_modes(args, cfg):
    out = _require_out(args)
    pack = build_gram_pack(_dataset(args, cfg), cfg.params_d(), cfg.params_r(), cfg.quadrature())
    triples = singular_triples(pack, cfg.cutoff)
    modes = extract_modes(pack, cfg.cutoff)
    grid = cfg.eval_grid()
    pts = grid.points()
    top = max(0, min(args.top, len(triples)))
    doc = {
        "M": pack.M,
        "n": pack.n,
        "rank": int(sum(t.sigma > 0 for t in triples)),
        "sigma": [t.sigma for t in triples],
        "modes": modes.tolist(),
        "grid": {"lo": grid.lo, "hi": grid.hi, "counts": grid.counts},
        "singular_functions": [
            {
                "index": i,
                "sigma": triples[i].sigma,
                "left": eval_singular_function(pack, triples[i], "left", pts).tolist(),
                "right": eval_singular_function(pack, triples[i], "right", pts).tolist(),
            }
            for i in range(top)
        ],
    }
    Path(out).write_text(json.dumps(doc) + "\n")


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "sweep": cmd_sweep,
    "predict": cmd_predict,
    "modes": cmd_modes,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = _config(args)
        COMMANDS[args.command](args, cfg)
    except OccDmdError as exc:
        print(f"occdmd: error[{exc.category}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"occdmd: error[io]: {exc}", file=sys.stderr)
        return IO_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
