"""Command-line front end.

Subcommands: verify (oracle suites), approx (fit the weighting network to a
named weighting rule and report held-out MSE), train (joint training runs
with metrics CSV and checkpoints), report (aggregate metrics across seeds).

Exit codes: 0 pass, 1 check failure, 2 usage or configuration error.
MENTOR_OUT_DIR overrides the output directory of any command.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, build_config, config_hash
from .curriculum import CurriculumParams
from .data import corrupt_labels, make_synthetic
from .mentornet import MentorNet, MlpMentor, generate_curriculum_dataset, train_implicit
from .netcore import substream
from .spade import read_metrics_csv, run_spade, write_metrics_csv
from .verify import SUITES, run_suites

APPROX_CURRICULA = ("self-paced", "hard-negative", "linear", "focal",
                    "temporal-mixture")


def _out_dir(args):
    out = os.environ.get("MENTOR_OUT_DIR", args.out)
    os.makedirs(out, exist_ok=True)
    return out


def _comment(seed, cfg_hash):
    return f"mentor-curriculum v{__version__} seed={seed} config_hash={cfg_hash}"


def cmd_verify(args):
    out = _out_dir(args)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_suites(names, seed=args.seed)
    for res in results:
        status = "pass" if res["pass"] else "FAIL"
        print(f"{res['suite']}: {status}  cases={res['cases']}  "
              f"max_error={res['max_error']:.3g}  tolerance={res['tolerance']:g}")
    report = {
        "version": __version__,
        "seed": args.seed,
        "suites": results,
        "pass": all(r["pass"] for r in results),
    }
    path = os.path.join(out, "verify_report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    print(f"report written to {path}")
    return 0 if report["pass"] else 1


def _approx_params(args):
    kind = args.curriculum
    return CurriculumParams(kind=kind, lam=args.lam, gamma=args.gamma,
                            lam1=args.lam1, lam2=args.lam2,
                            switch_pct=args.switch_pct)


def cmd_approx(args):
    if args.curriculum not in APPROX_CURRICULA:
        print(f"unknown curriculum {args.curriculum!r}; choose from "
              f"{APPROX_CURRICULA}", file=sys.stderr)
        return 2
    out = _out_dir(args)
    params = _approx_params(args)
    data_rng = substream(args.seed, "approx.data")
    batch, targets = generate_curriculum_dataset(
        params, args.samples, data_rng, n_labels=args.classes,
        window=args.window)

    net = MentorNet(args.classes, rng=substream(args.seed, "approx.init"))
    history = train_implicit(batch, targets, net, args.epochs,
                             substream(args.seed, "approx.train"))
    mse = history[-1] if history else float("nan")
    mlp_mse = ""
    if args.mlp:
        mlp = MlpMentor(args.classes, rng=substream(args.seed, "approx.mlp-init"))
        mlp_history = train_implicit(batch, targets, mlp, args.epochs,
                                     substream(args.seed, "approx.mlp-train"))
        mlp_mse = f"{mlp_history[-1]:.17g}" if mlp_history else "nan"

    path = os.path.join(out, "approx.csv")
    new_file = not os.path.exists(path)
    with open(path, "a", encoding="utf-8") as fh:
        if new_file:
            fh.write(f"# {_comment(args.seed, 'approx')}\n")
            fh.write("curriculum,samples,epochs,seed,bilstm_mse,mlp_mse\n")
        fh.write(f"{args.curriculum},{args.samples},{args.epochs},"
                 f"{args.seed},{mse:.17g},{mlp_mse}\n")
    print(f"{args.curriculum}: held-out MSE {mse:.3e}"
          + (f"  (mlp {mlp_mse})" if mlp_mse else ""))
    print(f"row appended to {path}")
    return 0


def _train_overrides(args):
    overrides = list(args.set or ())
    if args.noise is not None:
        overrides.append(f"corruption.noise_fraction={args.noise}")
    if args.curriculum is not None:
        overrides.append(f"curriculum.mode={args.curriculum}")
    if args.epochs is not None:
        overrides.append(f"train.epochs={args.epochs}")
    return overrides


def cmd_train(args):
    out = _out_dir(args)
    overrides = _train_overrides(args)
    if args.seeds is not None:
        seeds = [int(s) for s in args.seeds.split(",")]
    else:
        seeds = [args.seed]
    final_accs = []
    for seed in seeds:
        cfg = build_config(args.config, overrides + [f"train.seed={seed}"])
        dataset = corrupt_labels(make_synthetic(cfg.dataset), cfg.corruption)
        result = run_spade(dataset, cfg.train)
        h = config_hash(cfg)
        metrics_path = os.path.join(out, f"metrics_seed{seed}.csv")
        write_metrics_csv(result.metrics, metrics_path, comment=_comment(seed, h))
        result.student.save(os.path.join(out, f"student_seed{seed}.bin"))
        if cfg.train.curriculum_mode == "mentornet-dd":
            result.mentor.save(os.path.join(out, f"mentor_seed{seed}.bin"))
        acc = result.metrics[-1]["val_acc"] if result.metrics else float("nan")
        final_accs.append(acc)
        print(f"seed {seed}: final val acc {acc:.4f}  -> {metrics_path}")
    if len(final_accs) > 1:
        print(f"mean final val acc over {len(seeds)} seeds: "
              f"{np.mean(final_accs):.4f}")
    return 0


def cmd_report(args):
    finals = []
    for path in args.files:
        rows = read_metrics_csv(path)
        if not rows:
            raise ValueError(f"{path}: no metric rows")
        peak = max(r["weighted_loss"] for r in rows)
        last = rows[-1]
        ratio = (last["mean_w_clean"] / last["mean_w_corrupt"]
                 if last["mean_w_corrupt"] > 0 else float("inf"))
        finals.append({
            "file": path,
            "val_acc": last["val_acc"],
            "weight_ratio_clean_over_corrupt": ratio,
            "converged": bool(last["weighted_loss"] <= 0.5 * peak),
        })
    accs = np.array([f["val_acc"] for f in finals])
    ratios = np.array([f["weight_ratio_clean_over_corrupt"] for f in finals])
    summary = {
        "runs": len(finals),
        "val_acc_mean": float(accs.mean()),
        "val_acc_std": float(accs.std()),
        "weight_ratio_mean": float(ratios[np.isfinite(ratios)].mean())
        if np.any(np.isfinite(ratios)) else float("inf"),
        "all_converged": all(f["converged"] for f in finals),
        "per_run": finals,
    }
    print(f"runs:           {summary['runs']}")
    print(f"final val acc:  {summary['val_acc_mean']:.4f} "
          f"+/- {summary['val_acc_std']:.4f}")
    print(f"clean/corrupt weight ratio: {summary['weight_ratio_mean']:.3f}")
    print(f"all converged:  {summary['all_converged']}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
        print(f"summary written to {args.json}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mentor-curriculum",
        description="Curriculum-weighted training on corrupted labels: "
                    "verification suites, weighting-network fits, training "
                    "runs and reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run oracle verification suites")
    p.add_argument("--suite", default="all", choices=list(SUITES) + ["all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("approx", help="fit the weighting network to a "
                                      "predefined weighting rule")
    p.add_argument("--curriculum", required=True)
    p.add_argument("--samples", type=int, default=30000)
    p.add_argument("--epochs", type=int, default=80)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--window", type=int, default=1)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--lam1", type=float, default=1.0)
    p.add_argument("--lam2", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--switch-pct", type=int, default=50)
    p.add_argument("--mlp", action="store_true",
                   help="also fit the 2-layer MLP ablation")
    p.add_argument("--out", default="out")
    p.set_defaults(fn=cmd_approx)

    p = sub.add_parser("train", help="run joint training")
    p.add_argument("--config", default=None, help="INI config path")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                   help="override one config entry (repeatable)")
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--curriculum", default=None,
                   choices=["none", "mentornet-dd", "explicit-g"])
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", default=None, help="comma list; runs each seed")
    p.add_argument("--out", default="out")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("report", help="aggregate metrics CSVs")
    p.add_argument("files", nargs="+")
    p.add_argument("--json", default=None, help="also write JSON summary here")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
