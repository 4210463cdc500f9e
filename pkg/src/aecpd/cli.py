"""Command-line front end: generate / detect / evaluate / sweep.

Settings resolve in four layers, later ones winning: built-in defaults,
presets pulled in by --setting/--family, a config file of ``key = value``
lines, and explicit flags.  --explain-config prints the resolved table with
the source of every value and exits.

Exit codes: 0 success, 1 usage or configuration errors, 2 unreadable or
malformed input data, 3 numerical failure during training.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import datagen, evaluation, preprocess
from .autoencoder import TrainingDivergedError
from .pipeline import MODES, SCORE_KINDS, PipelineResult, RunSettings, run_pipeline
from .postprocess import ScoreCurve
from .preprocess import DataFormatError


class UsageError(Exception):
    """Bad flags, bad config values, or missing required settings."""


_SETTING_PRESETS = {
    "a": {"h_td": 1, "s_td": 1, "h_fd": 1, "s_fd": 1, "k": 2,
          "lambda_td": 1.0, "lambda_fd": 1.0},
    "b": {"h_td": 3, "s_td": 2, "h_fd": 1, "s_fd": 1, "k": 2,
          "lambda_td": 1.0, "lambda_fd": 1.0},
}
_FAMILY_PRESETS = {
    "jm": {"window": 20, "delta": 15},
    "sv": {"window": 20, "delta": 15},
    "gm": {"window": 20, "delta": 15},
    "cc": {"window": 200, "delta": 150},
}

# resolution-table keys, in display order, with built-in defaults
_DEFAULTS = {
    "mode": "combined",
    "window": None,
    "bins": None,
    "h_td": 1,
    "s_td": 1,
    "h_fd": 1,
    "s_fd": 1,
    "k": 2,
    "lambda_td": 1.0,
    "lambda_fd": 1.0,
    "epochs": 200,
    "batch_size": 64,
    "learning_rate": 1e-3,
    "seed": 0,
    "tau": 0.0,
    "alpha": None,
    "beta": None,
    "delta": None,
    "score": "prominence",
    "matched_filter": True,
    "count": 1,
}

_INT_KEYS = {"window", "bins", "h_td", "s_td", "h_fd", "s_fd", "k",
             "epochs", "batch_size", "seed", "delta", "count"}
_FLOAT_KEYS = {"lambda_td", "lambda_fd", "learning_rate", "tau", "alpha", "beta"}
_STR_KEYS = {"mode", "score", "setting", "family"}
_BOOL_KEYS = {"matched_filter"}

_SWEEP_WINDOW_MULTIPLIERS = (0.25, 1 / (2 * math.sqrt(2)), 0.5,
                             1 / math.sqrt(2), 1.0, math.sqrt(2),
                             2.0, 2 * math.sqrt(2), 4.0)
_SWEEP_PARAMS = ("window", "h_td", "h_fd", "k", "lambda")


def _coerce(key: str, text: str):
    if key in _STR_KEYS:
        return text
    if key in _BOOL_KEYS:
        lowered = text.lower()
        if lowered in ("true", "false"):
            return lowered == "true"
        raise UsageError(f"config key {key!r} expects true or false, got {text!r}")
    if key in _INT_KEYS:
        try:
            return int(text, 10)
        except ValueError:
            raise UsageError(f"config key {key!r} expects an integer, got {text!r}") from None
    if key in _FLOAT_KEYS:
        try:
            return float(text)
        except ValueError:
            raise UsageError(f"config key {key!r} expects a number, got {text!r}") from None
    raise UsageError(f"unknown config key {key!r}")


def parse_config(path) -> dict:
    """Read a flat ``key = value`` config file (#-comment lines allowed)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _DEFAULTS and key not in ("setting", "family"):
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _coerce(key, val.strip())
    return values


def resolve_settings(args) -> dict:
    """Merge defaults, presets, config file and flags.

    Returns key -> (value, source-label).
    """
    table = {key: (val, "default") for key, val in _DEFAULTS.items()}
    config = parse_config(args.config) if getattr(args, "config", None) else {}

    setting = getattr(args, "setting", None)
    setting_src = "flag"
    if setting is None and "setting" in config:
        setting, setting_src = config["setting"], "config"
    family = getattr(args, "family", None)
    family_src = "flag"
    if family is None and "family" in config:
        family, family_src = config["family"], "config"

    if setting is not None:
        if setting not in _SETTING_PRESETS:
            raise UsageError(f"unknown setting {setting!r} (choose from a, b)")
        for key, val in _SETTING_PRESETS[setting].items():
            table[key] = (val, f"setting {setting}")
    if family is not None:
        if family not in _FAMILY_PRESETS:
            raise UsageError(f"unknown family {family!r} (choose from "
                             f"{', '.join(_FAMILY_PRESETS)})")
        for key, val in _FAMILY_PRESETS[family].items():
            table[key] = (val, f"family {family}")

    for key, val in config.items():
        if key in ("setting", "family"):
            continue
        table[key] = (val, f"config {args.config}")
    for key in _DEFAULTS:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            table[key] = (flag_val, "flag")

    table["setting"] = (setting, setting_src if setting is not None else "default")
    table["family"] = (family, family_src if family is not None else "default")
    return table


def explain_config(table) -> str:
    lines = []
    for key in ("setting", "family", *_DEFAULTS):
        value, source = table[key]
        if value is None:
            shown = "auto" if key in ("bins", "alpha", "beta") else "unset"
        elif isinstance(value, bool):
            shown = "true" if value else "false"
        else:
            shown = str(value)
        lines.append(f"{key} = {shown} ({source})")
    return "\n".join(lines)


def build_run_settings(table) -> RunSettings:
    value = lambda key: table[key][0]
    if value("window") is None:
        raise UsageError("window size required: pass --window or --family")
    try:
        return RunSettings(
            window_size=value("window"),
            mode=value("mode"),
            n_bins=value("bins"),
            h_td=value("h_td"), s_td=value("s_td"),
            h_fd=value("h_fd"), s_fd=value("s_fd"),
            k=value("k"),
            lambda_td=value("lambda_td"), lambda_fd=value("lambda_fd"),
            epochs=value("epochs"), batch_size=value("batch_size"),
            learning_rate=value("learning_rate"),
            seed=value("seed"), tau=value("tau"),
            alpha=value("alpha"), beta=value("beta"),
            use_matched_filter=value("matched_filter"),
            score=value("score"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- file I/O

def write_curve_csv(path, result: PipelineResult, tau: float) -> None:
    """Per-stamp dissimilarity, filtered value, score and alarm flag."""
    stamps = result.scores.stamps
    lines = ["t,dissim,dissim_filtered,score,is_alarm"]
    for i, t in enumerate(stamps):
        alarm = 1 if result.scores.values[i] > tau else 0
        lines.append(f"{t},{float(result.dissim.values[i])!r},"
                     f"{float(result.filtered.values[i])!r},"
                     f"{float(result.scores.values[i])!r},{alarm}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve_csv(path) -> ScoreCurve:
    """Rebuild the score curve written by ``detect``."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    if not lines or lines[0] != "t,dissim,dissim_filtered,score,is_alarm":
        raise DataFormatError(f"{path}: not a detection curve file")
    stamps, scores = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 5:
            raise DataFormatError(f"{path}:{lineno}: expected 5 columns")
        try:
            stamps.append(int(parts[0]))
            scores.append(float(parts[3]))
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: malformed row") from None
    stamps = np.asarray(stamps)
    if stamps.size == 0:
        raise DataFormatError(f"{path}: empty curve")
    if stamps[0] < 1 or np.any(np.diff(stamps) != 1):
        raise DataFormatError(f"{path}: stamps must be consecutive")
    return ScoreCurve(np.asarray(scores, dtype=float), int(stamps[0]))


def write_detections_csv(path, alarms) -> None:
    lines = ["t"] + [str(int(t)) for t in alarms]
    Path(path).write_text("\n".join(lines) + "\n")


def read_stamps_csv(path) -> np.ndarray:
    """Read a one-column stamp list as written by ``detect`` (header ``t``)."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    if not lines or lines[0] != "t":
        raise DataFormatError(f"{path}: expected a stamp list with header 't'")
    try:
        return np.asarray([int(line) for line in lines[1:] if line], dtype=np.int64)
    except ValueError:
        raise DataFormatError(f"{path}: malformed stamp") from None


def write_svg(path, curve, alarms, title: str) -> None:
    """Minimal hand-rolled SVG: filtered-curve polyline with alarm markers.

    Long curves are decimated to at most 2000 polyline points.
    """
    width, height, pad = 900, 300, 45
    values = curve.values
    stamps = curve.stamps
    stride = max(1, math.ceil(values.size / 2000))
    values = values[::stride]
    stamps = stamps[::stride]
    lo, hi = float(values.min()), float(values.max())
    if hi - lo < 1e-12:
        hi = lo + 1.0
    span = max(int(stamps[-1]) - int(stamps[0]), 1)

    def fx(t):
        return pad + (t - stamps[0]) * (width - 2 * pad) / span

    def fy(v):
        return height - pad - (v - lo) * (height - 2 * pad) / (hi - lo)

    points = " ".join(f"{fx(t):.2f},{fy(v):.2f}" for t, v in zip(stamps, values))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="20" font-family="monospace" font-size="13">{title}</text>',
    ]
    for t in alarms:
        x = fx(int(t))
        parts.append(f'<line x1="{x:.2f}" y1="{pad}" x2="{x:.2f}" y2="{height - pad}" '
                     'stroke="red" stroke-width="1"/>')
    parts.append(f'<polyline points="{points}" fill="none" stroke="black" stroke-width="1"/>')
    parts.append(f'<text x="{pad}" y="{height - pad + 16}" font-family="monospace" '
                 f'font-size="11">t={int(stamps[0])}</text>')
    parts.append(f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="end" '
                 f'font-family="monospace" font-size="11">t={int(stamps[-1])}</text>')
    parts.append(f'<text x="5" y="{fy(hi):.2f}" font-family="monospace" '
                 f'font-size="11">{hi:.4g}</text>')
    parts.append(f'<text x="5" y="{fy(lo):.2f}" font-family="monospace" '
                 f'font-size="11">{lo:.4g}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


# ------------------------------------------------------------- subcommands

def _out_dir(args, required: bool) -> Path | None:
    out = getattr(args, "out", None)
    if out is None:
        if required:
            raise UsageError("--out is required for this command")
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_generate(args) -> int:
    table = resolve_settings(args)
    if args.explain_config:
        print(explain_config(table))
        return 0
    family = table["family"][0]
    if family is None:
        raise UsageError("generate needs --family (jm, sv, cc or gm)")
    out = _out_dir(args, required=True)
    seed0 = table["seed"][0]
    count = table["count"][0]
    if count < 1:
        raise UsageError("count must be positive")
    manifest = ["file,family,seed,length,n_change_points" +
                ("" if args.no_timestamp else ",generated_at")]
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    for i in range(count):
        seed = seed0 + i
        series = datagen.FAMILIES[family](seed)
        name = f"{family}_{seed}.csv"
        preprocess.save_csv(series, out / name)
        row = f"{name},{family},{seed},{series.length},{series.change_points.size}"
        manifest.append(row if args.no_timestamp else f"{row},{stamp}")
    (out / "manifest.csv").write_text("\n".join(manifest) + "\n")
    print(f"wrote {count} series to {out}")
    return 0


def cmd_detect(args) -> int:
    table = resolve_settings(args)
    if args.explain_config:
        print(explain_config(table))
        return 0
    settings = build_run_settings(table)
    out = _out_dir(args, required=True)
    series = preprocess.load_csv(args.input)
    result = run_pipeline(series, settings)
    stem = Path(args.input).stem
    write_curve_csv(out / f"{stem}_curve.csv", result, settings.tau)
    write_detections_csv(out / f"{stem}_detections.csv", result.alarms)
    if args.plot:
        write_svg(out / f"{stem}_curve.svg", result.filtered, result.alarms, stem)
    shown = ", ".join(str(int(t)) for t in result.alarms[:20])
    more = "" if result.alarms.size <= 20 else ", ..."
    print(f"{result.alarms.size} alarms (tau={settings.tau}): {shown}{more}")
    return 0


def _evaluate_one(path, settings, override_gt, use_scores):
    if use_scores:
        scores = read_curve_csv(path)
        gt = override_gt
    else:
        series = preprocess.load_csv(path)
        gt = override_gt if override_gt is not None else series.change_points
        scores = run_pipeline(series, settings).scores
    return scores, gt


def cmd_evaluate(args) -> int:
    table = resolve_settings(args)
    if args.explain_config:
        print(explain_config(table))
        return 0
    delta = table["delta"][0]
    if delta is None:
        raise UsageError("evaluate needs a tolerance: pass --delta or --family")
    settings = None if args.scores else build_run_settings(table)
    override_gt = read_stamps_csv(args.gt) if args.gt else None
    if args.scores and override_gt is None:
        raise UsageError("--scores needs --gt with the true change points")
    if override_gt is not None and len(args.inputs) > 1:
        raise UsageError("--gt only makes sense with a single input")
    out = _out_dir(args, required=False)
    rows = []
    for path in args.inputs:
        scores, gt = _evaluate_one(path, settings, override_gt, args.scores)
        roc = evaluation.roc_auc(scores, gt, delta)
        name = Path(path).name
        rows.append((name, roc.auc))
        print(f"{name}: auc {roc.auc:.4f}")
        if out is not None:
            write_roc_csv(out / f"{Path(path).stem}_roc.csv", roc)
    mean, se = evaluation.corpus_auc([auc for _, auc in rows])
    print(f"mean auc {mean:.4f} (se {se:.4f}) over {len(rows)} series")
    if out is not None:
        write_summary_csv(out / "summary.csv", rows, mean, se)
    return 0


def write_roc_csv(path, roc) -> None:
    lines = ["tau,fpr,tpr"]
    for tau, fpr, tpr in roc.points:
        lines.append(f"{float(tau)!r},{float(fpr)!r},{float(tpr)!r}")
    lines.append(",1.0,1.0")
    lines.append(f"auc,{roc.auc!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_csv(path, rows, mean: float, se: float) -> None:
    lines = ["file,auc"]
    lines += [f"{name},{auc!r}" for name, auc in rows]
    lines.append(f"mean,{mean!r}")
    lines.append(f"se,{se!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def _sweep_values(param: str, text: str | None):
    if text is None:
        if param == "window":
            return list(_SWEEP_WINDOW_MULTIPLIERS)
        if param == "k":
            return list(range(1, 11))
        raise UsageError(f"--values is required when sweeping {param}")
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        try:
            out.append(float(piece) if param in ("window", "lambda") else int(piece))
        except ValueError:
            raise UsageError(f"bad sweep value {piece!r}") from None
    if not out:
        raise UsageError("empty sweep value list")
    return out


def _sweep_settings(base: RunSettings, param: str, value) -> RunSettings:
    if param == "window":
        n = max(2, round(base.window_size * value))
        return dataclasses.replace(base, window_size=n)
    if param == "k":
        return dataclasses.replace(base, k=value)
    if param == "lambda":
        return dataclasses.replace(base, lambda_td=value, lambda_fd=value)
    if param == "h_td":
        return dataclasses.replace(base, h_td=value, s_td=max(value - 1, 1))
    if param == "h_fd":
        return dataclasses.replace(base, h_fd=value, s_fd=max(value - 1, 1))
    raise UsageError(f"unknown sweep parameter {param!r}")


def cmd_sweep(args) -> int:
    table = resolve_settings(args)
    if args.explain_config:
        print(explain_config(table))
        return 0
    delta = table["delta"][0]
    if delta is None:
        raise UsageError("sweep needs a tolerance: pass --delta or --family")
    base = build_run_settings(table)
    values = _sweep_values(args.param, args.values)
    corpus = [preprocess.load_csv(path) for path in args.inputs]
    for series, path in zip(corpus, args.inputs):
        if series.change_points.size == 0:
            raise DataFormatError(f"{path}: no ground-truth change points")
    out = _out_dir(args, required=False)
    lines = ["param,value,mean_auc,se"]
    print("param,value,mean_auc,se")
    for value in values:
        settings = _sweep_settings(base, args.param, value)
        aucs = [evaluation.roc_auc(run_pipeline(s, settings).scores,
                                   s.change_points, delta).auc
                for s in corpus]
        mean, se = evaluation.corpus_auc(aucs)
        lines.append(f"{args.param},{value!r},{mean!r},{se!r}")
        print(f"{args.param},{value},{mean:.4f},{se:.4f}")
    if out is not None:
        (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    return 0


# ------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_shared_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key = value settings file")
    sub.add_argument("--mode", choices=MODES)
    sub.add_argument("--setting", choices=sorted(_SETTING_PRESETS))
    sub.add_argument("--family", choices=sorted(_FAMILY_PRESETS))
    sub.add_argument("--window", type=int, help="sliding window size N")
    sub.add_argument("--bins", type=int, help="frequency bins kept per window")
    sub.add_argument("--delta", type=int, help="detection tolerance in samples")
    sub.add_argument("--tau", type=float, help="alarm threshold on the scores")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--alpha", type=float, help="time-domain fusion weight")
    sub.add_argument("--beta", type=float, help="frequency-domain fusion weight")
    sub.add_argument("--k", type=int, help="time-invariance lookback")
    sub.add_argument("--lambda-td", type=float)
    sub.add_argument("--lambda-fd", type=float)
    sub.add_argument("--h-td", type=int)
    sub.add_argument("--s-td", type=int)
    sub.add_argument("--h-fd", type=int)
    sub.add_argument("--s-fd", type=int)
    sub.add_argument("--epochs", type=int)
    sub.add_argument("--batch-size", type=int)
    sub.add_argument("--learning-rate", type=float)
    sub.add_argument("--score", choices=SCORE_KINDS)
    sub.add_argument("--no-matched-filter", dest="matched_filter",
                     action="store_const", const=False)
    sub.add_argument("--explain-config", action="store_true",
                     help="print the resolved settings and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aecpd",
                     description="Autoencoder change-point detection toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("generate", parents=[], help="write benchmark series")
    _add_shared_flags(gen)
    gen.add_argument("--count", type=int, help="number of series (seeds seed..seed+count-1)")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--no-timestamp", action="store_true",
                     help="omit the timestamp column from the manifest")
    gen.set_defaults(func=cmd_generate)

    det = commands.add_parser("detect", help="run detection on one series")
    det.add_argument("input", help="series CSV")
    _add_shared_flags(det)
    det.add_argument("--out", required=True, help="output directory")
    det.add_argument("--plot", action="store_true", help="also write an SVG plot")
    det.set_defaults(func=cmd_detect)

    ev = commands.add_parser("evaluate", help="score detections against ground truth")
    ev.add_argument("inputs", nargs="+", help="series CSVs (or curve CSVs with --scores)")
    _add_shared_flags(ev)
    ev.add_argument("--scores", action="store_true",
                    help="inputs are detect curve files, skip the pipeline")
    ev.add_argument("--gt", help="stamp-list CSV with the true change points")
    ev.add_argument("--out", help="directory for ROC and summary CSVs")
    ev.set_defaults(func=cmd_evaluate)

    sw = commands.add_parser("sweep", help="replay detection over a parameter grid")
    sw.add_argument("inputs", nargs="+", help="series CSVs with ground truth")
    _add_shared_flags(sw)
    sw.add_argument("--param", required=True, choices=_SWEEP_PARAMS)
    sw.add_argument("--values", help="comma-separated grid "
                    "(window values are multipliers of the base window)")
    sw.add_argument("--out", help="directory for sweep.csv")
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataFormatError, OSError, UnicodeDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (TrainingDivergedError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
