"""Command-line front end.

Subcommands:

* threshold — noise/prior-corrected decision thresholds (pure calculus)
* gen       — sample a labeled dataset, flip labels, write CSV
* train     — fit the MLP on the observed labels of a dataset CSV
* eval      — score a saved model on a dataset CSV at a chosen threshold
* fig2      — training-efficiency grid (accuracy vs training size per noise level)
* fig3      — flip-ratio grid (corrected vs naive threshold)
* bernoulli — flipped-coin demo: closed-form rate recovery vs grid-search MLE

Batch-only by design: every run reads flags/config, writes its outputs plus
a JSON manifest, and exits.  Usage and config errors exit 2; runtime
failures (missing/malformed files, diverged training) exit 1.
"""

import argparse
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, experiments, mlp, svgchart, synthdata
from .calculus import (
    ClassPriors,
    NoiseParams,
    bernoulli_grid_mle,
    logit_shift,
    mle_flipped_bernoulli,
    noisy_decision_threshold,
    propagate_priors,
    threshold_from_priors,
)
from .seeding import derive_seed, make_rng


class UsageError(Exception):
    """Bad flag values or combinations; exits 2."""


class ConfigError(Exception):
    """Bad experiment config file; exits 2."""


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_manifest(path: Path, command: str, config: dict, outputs: list[str],
                    started: str) -> None:
    doc = {
        "tool": "labelnoise",
        "version": __version__,
        "command": command,
        "config": config,
        "outputs": outputs,
        "started_utc": started,
        "finished_utc": _utc_now(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _flags(build):
    """Run a constructor over flag values, turning ValueError into UsageError."""
    try:
        return build()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- threshold

def cmd_threshold(args) -> int:
    noise, clean = _flags(lambda: (NoiseParams(args.gamma1, args.gamma0), ClassPriors(args.p1)))
    eval_prior = _flags(lambda: ClassPriors(args.p1 if args.eval_p1 is None else args.eval_p1))
    noisy = propagate_priors(clean, noise)
    delta = _flags(lambda: logit_shift(noisy, eval_prior))
    # every number below is the untouched return value of a calculus call
    print(f"basic_threshold {noisy_decision_threshold(noise)!r}")
    print(f"noisy_prior_p1  {noisy.p1!r}")
    print(f"noisy_prior_p0  {noisy.p0!r}")
    print(f"logit_shift     {delta!r}")
    print(f"mlp_threshold   {threshold_from_priors(eval_prior, noisy)!r}")
    return 0


# ---------------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    started = _utc_now()
    noise = _flags(lambda: NoiseParams(args.gamma1, args.gamma0))
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    problem = _flags(lambda: synthdata.make_random_problem(args.seed, args.separation, args.p1))
    clean = synthdata.sample_dataset(problem, args.n, derive_seed(args.seed, "gen-sample"))
    data = synthdata.flip_labels(clean, noise, derive_seed(args.seed, "gen-flip"))
    out = Path(args.out)
    synthdata.save_dataset_csv(data, out)
    config = {
        "n": args.n, "seed": args.seed, "p1": args.p1, "gamma1": args.gamma1,
        "gamma0": args.gamma0, "separation": args.separation, "out": str(out),
    }
    manifest = out.with_name(out.name + ".manifest.json")
    _write_manifest(manifest, "gen", config, [str(out)], started)
    print(f"wrote {len(data)} samples to {out}")
    print(f"clean class-1 fraction    {float((data.y_clean == 1).mean())!r}")
    print(f"observed class-1 fraction {float((data.z_observed == 1).mean())!r}")
    print(f"manifest {manifest}")
    return 0


# -------------------------------------------------------------------- train

def cmd_train(args) -> int:
    started = _utc_now()
    arch = _flags(lambda: mlp.Architecture(2, tuple(args.hidden)))
    cfg = _flags(lambda: mlp.TrainConfig(
        epochs=args.epochs, batch_size=args.batch_size, learning_rate=args.learning_rate,
        momentum=args.momentum, weight_decay=args.weight_decay, init_seed=args.seed,
        early_stop_tol=args.early_stop_tol))
    data = synthdata.load_dataset_csv(args.data)
    result = mlp.train(data.x, data.z_observed, arch, cfg)
    for i, ep_loss in enumerate(result.epoch_losses, start=1):
        print(f"epoch {i}/{cfg.epochs}  loss {ep_loss:.6f}")
    out = Path(args.out)
    mlp.save_model(result.params, out)
    config = {
        "data": str(args.data), "out": str(out), "hidden": list(args.hidden),
        "epochs": args.epochs, "batch_size": args.batch_size,
        "learning_rate": args.learning_rate, "momentum": args.momentum,
        "weight_decay": args.weight_decay, "seed": args.seed,
        "early_stop_tol": args.early_stop_tol,
    }
    manifest = out.with_name(out.name + ".manifest.json")
    _write_manifest(manifest, "train", config, [str(out)], started)
    print(f"saved model to {out}")
    print(f"manifest {manifest}")
    return 0


# --------------------------------------------------------------------- eval

def _resolve_threshold(args) -> float:
    if args.threshold is not None:
        if args.gamma1 is not None or args.gamma0 is not None:
            raise UsageError("give either --threshold or --gamma1/--gamma0, not both")
        if not 0.0 < args.threshold < 1.0:
            raise UsageError(f"--threshold must lie strictly inside (0, 1), got {args.threshold}")
        return args.threshold
    if args.gamma1 is None or args.gamma0 is None:
        raise UsageError("need a threshold source: --threshold, or both --gamma1 and --gamma0")
    noise = _flags(lambda: NoiseParams(args.gamma1, args.gamma0))
    clean = _flags(lambda: ClassPriors(args.p1))
    eval_prior = _flags(lambda: ClassPriors(args.p1 if args.eval_p1 is None else args.eval_p1))
    return threshold_from_priors(eval_prior, propagate_priors(clean, noise))


def cmd_eval(args) -> int:
    threshold = _resolve_threshold(args)
    params = mlp.load_model(args.model)
    data = synthdata.load_dataset_csv(args.data)
    labels = data.y_clean if args.labels == "clean" else data.z_observed
    pred = mlp.classify(params, data.x, threshold)
    tp = int(((pred == 1) & (labels == 1)).sum())
    fp = int(((pred == 1) & (labels == 0)).sum())
    fn = int(((pred == 0) & (labels == 1)).sum())
    tn = int(((pred == 0) & (labels == 0)).sum())
    print(f"threshold   {threshold!r}")
    print(f"labels      {args.labels}")
    print(f"samples     {len(data)}")
    print(f"accuracy    {float((pred == labels).mean())!r}")
    print(f"tp fp fn tn {tp} {fp} {fn} {tn}")
    return 0


# -------------------------------------------------------------- experiments

_FLOAT_KEYS = {"separation_scale", "learning_rate", "momentum"}
_INT_KEYS = {"runs", "test_size", "train_size", "base_seed", "epochs", "batch_size"}
_FLOAT_LIST_KEYS = {"noise_levels", "flip_ratios"}
_INT_LIST_KEYS = {"training_sizes"}


def _cast_config_value(key: str, value):
    def num(v, kind):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"bad value for {key!r}: expected a {kind}, got {v!r}")
        if kind == "int" and float(v) != int(v):
            raise ConfigError(f"bad value for {key!r}: expected an integer, got {v!r}")
        return int(v) if kind == "int" else float(v)

    if key in _FLOAT_KEYS:
        return num(value, "float")
    if key in _INT_KEYS:
        return num(value, "int")
    if key in _FLOAT_LIST_KEYS or key in _INT_LIST_KEYS:
        if not isinstance(value, list) or not value:
            raise ConfigError(f"bad value for {key!r}: expected a non-empty list of numbers")
        kind = "int" if key in _INT_LIST_KEYS else "float"
        return tuple(num(v, kind) for v in value)
    raise AssertionError(key)


def _load_grid_config(cls, path):
    allowed = {f.name for f in dataclasses.fields(cls)}
    overrides = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path}: not valid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path}: top level must be a JSON object")
        unknown = sorted(set(raw) - allowed)
        if unknown:
            raise ConfigError(
                f"config {path}: unknown key(s): {', '.join(unknown)}; "
                f"allowed keys: {', '.join(sorted(allowed))}")
        overrides = {key: _cast_config_value(key, value) for key, value in raw.items()}
    try:
        return cls(**overrides)
    except ValueError as exc:
        raise ConfigError(f"config {path}: {exc}") from None


def _config_as_dict(cfg) -> dict:
    out = dataclasses.asdict(cfg)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}


def _chart_series(summary, x_field: str):
    by_n: dict[float, list] = {}
    for row in summary:
        by_n.setdefault(row.n, []).append(row)
    series = []
    for n, rows in sorted(by_n.items()):
        rows.sort(key=lambda r: getattr(r, x_field))
        xs = tuple(getattr(r, x_field) for r in rows)
        series.append(svgchart.Series(f"n={n:g} corrected", xs, tuple(r.mean_corrected for r in rows)))
        series.append(svgchart.Series(f"n={n:g} naive", xs, tuple(r.mean_naive for r in rows), dashed=True))
    return series


def _run_grid_command(args, name: str, cls, runner, x_field: str, x_label: str,
                      title: str, x_log: bool) -> int:
    started = _utc_now()
    cfg = _load_grid_config(cls, args.config)
    if args.print_config:
        print(json.dumps(_config_as_dict(cfg), indent=2, sort_keys=True))
        return 0
    if args.jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {args.jobs}")
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = runner(cfg, jobs=args.jobs)
    summary = experiments.summarize(rows)

    results_path = outdir / f"{name}_results.csv"
    summary_path = outdir / f"{name}_summary.csv"
    chart_path = outdir / f"{name}.svg"
    experiments.write_results_csv(rows, results_path)
    experiments.write_summary_csv(summary, summary_path)
    svgchart.write_line_chart(
        chart_path, _chart_series(summary, x_field),
        title=title, x_label=x_label, y_label="mean accuracy on clean labels", x_log=x_log)
    manifest_path = outdir / f"{name}_manifest.json"
    _write_manifest(manifest_path, name, _config_as_dict(cfg),
                    [str(results_path), str(summary_path), str(chart_path)], started)
    for row in summary:
        print(f"n={row.n:g} ratio={row.ratio:g} size={row.train_size} "
              f"corrected={row.mean_corrected:.4f}±{row.se_corrected:.4f} "
              f"naive={row.mean_naive:.4f}±{row.se_naive:.4f} ceiling={row.mean_ceiling:.4f}")
    for p in (results_path, summary_path, chart_path, manifest_path):
        print(f"wrote {p}")
    return 0


def cmd_fig2(args) -> int:
    return _run_grid_command(
        args, "fig2", experiments.EfficiencyGridConfig, experiments.run_efficiency_grid,
        x_field="train_size", x_label="training-set size",
        title="Accuracy vs training size under symmetric label noise", x_log=True)


def cmd_fig3(args) -> int:
    return _run_grid_command(
        args, "fig3", experiments.FlipRatioGridConfig, experiments.run_flip_ratio_grid,
        x_field="ratio", x_label="flip ratio gamma0 / gamma1",
        title="Corrected vs naive threshold under asymmetric label noise", x_log=False)


# ---------------------------------------------------------------- bernoulli

def cmd_bernoulli(args) -> int:
    noise = _flags(lambda: NoiseParams(args.gamma1, args.gamma0))
    if not 0.0 <= args.p <= 1.0:
        raise UsageError(f"--p must lie in [0, 1], got {args.p}")
    if args.count < 1:
        raise UsageError(f"--count must be >= 1, got {args.count}")
    rng = make_rng(args.seed, "bernoulli")
    y = rng.random(args.count) < args.p
    u = rng.random(args.count)
    z = np.where(y, (u >= noise.gamma1), (u < noise.gamma0)).astype(np.int64)
    noisy_rate, clean_rate = mle_flipped_bernoulli(z, noise)
    oracle = bernoulli_grid_mle(z, noise)
    print(f"count          {args.count}")
    print(f"true_p         {args.p!r}")
    print(f"observed_mean  {noisy_rate!r}")
    print(f"recovered_rate {clean_rate!r}")
    print(f"grid_mle       {oracle!r}")
    return 0


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelnoise",
        description="Binary classification with randomly flipped training labels: "
                    "threshold corrections, synthetic-data studies, rate recovery.")
    parser.add_argument("--version", action="version", version=f"labelnoise {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="corrected decision thresholds from flip rates and priors")
    p.add_argument("--gamma1", type=float, required=True, help="P(true 1 observed as 0)")
    p.add_argument("--gamma0", type=float, required=True, help="P(true 0 observed as 1)")
    p.add_argument("--p1", type=float, default=0.5, help="clean class-1 prior of the training data")
    p.add_argument("--eval-p1", type=float, default=None,
                   help="class-1 prior of the data to classify (default: same as --p1)")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("gen", help="sample a synthetic dataset and write it as CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p1", type=float, default=0.5, help="clean class-1 prior")
    p.add_argument("--gamma1", type=float, default=0.0)
    p.add_argument("--gamma0", type=float, default=0.0)
    p.add_argument("--separation", type=float, default=2.5, help="class separation scale")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train the MLP on the observed labels of a dataset CSV")
    p.add_argument("--data", required=True, help="dataset CSV (from gen)")
    p.add_argument("--out", required=True, help="output model path")
    p.add_argument("--hidden", type=int, nargs="+", default=[15, 15])
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--early-stop-tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a saved model on a dataset CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--threshold", type=float, default=None, help="explicit decision threshold")
    p.add_argument("--gamma1", type=float, default=None, help="derive the threshold from flip rates")
    p.add_argument("--gamma0", type=float, default=None)
    p.add_argument("--p1", type=float, default=0.5, help="clean class-1 prior of the training data")
    p.add_argument("--eval-p1", type=float, default=None)
    p.add_argument("--labels", choices=("clean", "observed"), default="clean",
                   help="which label column to score against")
    p.set_defaults(func=cmd_eval)

    for name, func, help_text in (
        ("fig2", cmd_fig2, "training-efficiency grid: accuracy vs training size per noise level"),
        ("fig3", cmd_fig3, "flip-ratio grid: corrected vs naive decision threshold"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="JSON config (defaults apply to missing keys)")
        p.add_argument("--outdir", default=None, help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--print-config", action="store_true",
                       help="print the resolved config as JSON and exit")
        p.set_defaults(func=func)

    p = sub.add_parser("bernoulli", help="flipped-coin demo: recover the clean rate two ways")
    p.add_argument("--p", type=float, required=True, help="true clean rate")
    p.add_argument("--gamma1", type=float, required=True)
    p.add_argument("--gamma0", type=float, required=True)
    p.add_argument("--count", type=int, required=True, help="number of tosses")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bernoulli)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    if getattr(args, "command", None) in ("fig2", "fig3"):
        if not args.print_config and args.outdir is None:
            print("error: --outdir is required (unless --print-config)", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (synthdata.DatasetFormatError, mlp.ModelFormatError, mlp.TrainingDivergedError,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
