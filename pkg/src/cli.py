"""
Command-line interface.

Machine-readable output (JSON, CSV) goes to stdout or to ``-o`` files; logs
and rich tables go to stderr. Exit codes: 0 success, 2 invalid input,
1 any other toolkit error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError as PydanticValidationError
from rich.table import Table

from src import __version__
from src.config import get_settings
from src.errors import MomentSegError, ValidationError, wrap_pydantic_error
from src.logging_utils import setup_logging, stderr_console
from src.reports import ReportGenerator
from src.tools.curve import as_similarity, smooth_clamped
from src.tools.grounding import default_window, ground, interval_iou, moment_center, theta_sweep
from src.tools.matching import finite_difference_grad, find_loss, find_loss_grad, max_relative_error, similarity_matrix
from src.tools.metrics import boundary_f, region_j
from src.tools.rng import RngStream
from src.tools.sampling import STRATEGIES, sample_frames
from src.tools.serialization import load_curve, load_tokens, read_json, write_json
from src.workflows.comparison import DEFAULT_STRATEGIES, ComparisonResult, compare_strategies
from src.workflows.pipeline import CENTER_ANCHORED, PipelineParams, run_pipeline
from src.workflows.propagation import ABLATION_STEPS, PropagationConfig, PropagationResult, run_forward_baseline, run_propagation
from src.workflows.scenario import PRESETS, GeneratedScenario, gen_scenario, load_corpus, load_scenario, save_scenario

logger = logging.getLogger(__name__)


def _emit_json(data: Any, output: Optional[str]) -> None:
    if output:
        write_json(data, output)
        logger.info("Wrote %s", output)
    else:
        sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _parse_list(text: str, kind=str) -> List[Any]:
    try:
        return [kind(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ValidationError(f"cannot parse list {text!r}: {e}") from e


def parse_seeds(text: str) -> List[int]:
    """``"0..19"`` (inclusive range) or a comma list such as ``"1,4,9"``."""
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            lo_i, hi_i = int(lo), int(hi)
        except ValueError as e:
            raise ValidationError(f"cannot parse seed range {text!r}") from e
        if hi_i < lo_i:
            raise ValidationError(f"empty seed range {text!r}")
        return list(range(lo_i, hi_i + 1))
    return _parse_list(text, int)


def _parse_interval(text: str):
    parts = _parse_list(text, int)
    if len(parts) != 2:
        raise ValidationError(f"expected 'start,end', got {text!r}")
    return parts[0], parts[1]


def _pipeline_params(args: argparse.Namespace, **overrides: Any) -> PipelineParams:
    values = {name: getattr(args, name, None) for name in ("k", "window", "theta", "update_lambda")}
    values.update(overrides)
    try:
        return PipelineParams.from_settings(**values)
    except PydanticValidationError as e:
        raise wrap_pydantic_error(e, "parameters") from e


def _corpus(args: argparse.Namespace) -> List[GeneratedScenario]:
    if args.corpus:
        return load_corpus(args.corpus)
    names = args.preset or ["late-target"]
    unknown = [n for n in names if n not in PRESETS]
    if unknown:
        raise ValidationError(f"unknown preset(s): {', '.join(unknown)}")
    return [gen_scenario(PRESETS[name](), seed=args.scenario_seed) for name in names]


def _print_table(title: str, frame: pd.DataFrame) -> None:
    table = Table(title=title)
    for column in frame.columns:
        table.add_column(str(column))
    for row in frame.itertuples(index=False):
        table.add_row(*[f"{v:.4f}" if isinstance(v, float) else str(v) for v in row])
    stderr_console.print(table)


# ---------------------------------------------------------------- commands


def cmd_gen(args: argparse.Namespace) -> int:
    if args.config:
        config = read_json(args.config)
        if not isinstance(config, dict):
            raise ValidationError(f"{args.config} does not contain a scenario config object")
    else:
        config = PRESETS[args.preset]()
    generated = gen_scenario(config, args.seed)
    if args.output:
        save_scenario(generated.scenario, args.output)
        logger.info("Wrote %s", args.output)
    else:
        _emit_json(generated.scenario.model_dump(mode="json"), None)
    return 0


def cmd_ground(args: argparse.Namespace) -> int:
    settings = get_settings()
    curve = as_similarity(load_curve(args.curve), args.frames, settings.smooth_sigma, settings.smooth_radius)
    result = ground(curve, args.theta if args.theta is not None else settings.theta, args.window)
    data: Dict[str, Any] = {
        "center": result.moment.center,
        "window": result.moment.window,
        "segments": [seg.model_dump() for seg in result.segments],
        "best": result.best.model_dump() if result.best else None,
        "interval": list(result.interval),
        "used_fallback": result.used_fallback,
    }
    if args.gt:
        data["iou"] = interval_iou(result.interval, _parse_interval(args.gt))
    _emit_json(data, args.output)
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    settings = get_settings()
    curve = as_similarity(load_curve(args.curve), args.frames, settings.smooth_sigma, settings.smooth_radius)
    window = default_window(curve.length) if args.window is None else args.window
    center = moment_center(curve, window).center
    k = settings.num_samples if args.k is None else args.k
    samples = sample_frames(args.strategy, curve, k, center, RngStream(seed=args.seed))
    _emit_json({
        "indices": list(samples.indices),
        "center": samples.center,
        "k_left": samples.k_left,
        "k_right": samples.k_right,
    }, args.output)
    return 0


def cmd_loss(args: argparse.Namespace) -> int:
    tm = load_tokens(args.tokens)
    logits = similarity_matrix(tm)
    grad = find_loss_grad(logits, tm)
    data: Dict[str, Any] = {"loss": find_loss(logits, tm), "shape": list(tm.shape), "grad": grad.tolist()}
    if args.grad_check:
        data["max_rel_error"] = max_relative_error(grad, finite_difference_grad(logits, tm))
    _emit_json(data, args.output)
    return 0


def _propagation_report(result: PropagationResult, generated: GeneratedScenario) -> Dict[str, Any]:
    tol = get_settings().boundary_tol
    rows = []
    for frame, (pred, gt) in enumerate(zip(result.masks, generated.gt_masks)):
        rows.append({
            "frame": frame,
            "j": region_j(pred, gt),
            "f": boundary_f(pred, gt, tol),
            "track_score": result.track_scores[frame],
        })
    mean_j = sum(row["j"] for row in rows) / len(rows)
    return {
        "mean_j": mean_j,
        "per_frame": rows,
        "update_log": [event.model_dump() for event in result.log.events],
        "n_updates": result.log.n_updates,
    }


def cmd_propagate(args: argparse.Namespace) -> int:
    generated = load_scenario(args.scenario)
    params = _pipeline_params(args, strategy=args.anchors_from, seed=args.seed)
    scenario = generated.scenario
    curve = smooth_clamped(generated.curve, params.smooth_sigma, params.smooth_radius)
    center = moment_center(curve, default_window(curve.length) if params.window is None else params.window).center
    samples = sample_frames(params.strategy, curve, params.k, center, RngStream(seed=params.seed, label=f"pipeline/{scenario.name}"))
    start = center if params.strategy in CENTER_ANCHORED else samples.indices[0]
    anchors = set(samples.indices) | {start}

    if args.ablation:
        rows = []
        for name, config in ABLATION_STEPS.items():
            config = config.model_copy(update={"update_lambda": params.update_lambda})
            report = _propagation_report(
                run_propagation(scenario.horizon, start, anchors, generated.tracker(), config), generated
            )
            rows.append({"config": name, "mean_j": report["mean_j"], "n_updates": report["n_updates"]})
        _print_table(f"Propagation ablation ({scenario.name})", pd.DataFrame(rows))
        _emit_json({"start_frame": start, "anchors": sorted(anchors), "ablation": rows}, args.output)
        return 0

    if args.baseline:
        result = run_forward_baseline(scenario.horizon, generated.tracker())
    else:
        config = PropagationConfig(update_lambda=params.update_lambda)
        result = run_propagation(scenario.horizon, start, anchors, generated.tracker(), config)
    report = _propagation_report(result, generated)

    if args.csv:
        frame = pd.DataFrame(report["per_frame"])
        frame["anchor"] = frame["frame"].isin(anchors)
        frame["cleared"] = frame["frame"].isin(result.log.cleared_frames)
        frame.to_csv(args.output or sys.stdout, index=False, lineterminator="\n")
        return 0
    report.update({
        "start_frame": 0 if args.baseline else start,
        "anchors": [0] if args.baseline else sorted(anchors),
        "mode": "forward_baseline" if args.baseline else "bap",
    })
    _emit_json(report, args.output)
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    generated = load_scenario(args.scenario)
    params = _pipeline_params(args, strategy=args.strategy, seed=args.seed)
    result = run_pipeline(generated, params)
    _emit_json(result.model_dump(mode="json"), args.output)
    return 0


def _write_comparison(result: ComparisonResult, args: argparse.Namespace) -> None:
    if args.output:
        path = Path(args.output)
        reports = ReportGenerator(output_dir=path.parent)
        reports.generate_csv_report(result, path.stem)
        if args.json:
            reports.generate_json_report(result, path.stem)
    elif args.json:
        _emit_json(result.to_dict(), None)
    else:
        result.table().to_csv(sys.stdout, index=False, lineterminator="\n")
    if args.xlsx:
        xlsx = Path(args.xlsx)
        ReportGenerator(output_dir=xlsx.parent).generate_excel_report(result, xlsx.stem)


def cmd_compare(args: argparse.Namespace) -> int:
    corpus = _corpus(args)
    ks = None if args.k is None else _parse_list(args.k, int)
    params = _pipeline_params(args, k=ks[0] if ks else None)
    strategies = _parse_list(args.strategies)
    workers = get_settings().max_workers if args.workers is None else args.workers
    result = compare_strategies(
        corpus, strategies, params, parse_seeds(args.seeds), max_workers=workers, ks=ks
    )
    _print_table("Strategy comparison", result.summary())
    _write_comparison(result, args)
    return 0


def cmd_tsg_sweep(args: argparse.Namespace) -> int:
    settings = get_settings()
    corpus = _corpus(args)
    queries = [
        (smooth_clamped(g.curve, settings.smooth_sigma, settings.smooth_radius), g.scenario.gt_interval)
        for g in corpus
    ]
    table = theta_sweep(queries, _parse_list(args.thetas, float), settings.iou_thresholds, args.window)
    _print_table("Post-processing threshold sweep", table)
    table.to_csv(args.output or sys.stdout, index=False, lineterminator="\n")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="momentseg", description="Moment-centric grounding, sampling and propagation toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Override MOMENTSEG_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="Generate a synthetic scenario file")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="Scenario config JSON")
    source.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("ground", help="Moment center and threshold segment of a curve")
    p.add_argument("--curve", required=True)
    p.add_argument("--theta", type=float)
    p.add_argument("--window", type=int)
    p.add_argument("--frames", type=int, help="Resample the curve onto this many frames")
    p.add_argument("--gt", help="Ground-truth interval 'start,end' for IoU")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("sample", help="Select frames from a curve")
    p.add_argument("--curve", required=True)
    p.add_argument("--strategy", choices=STRATEGIES, default="mcs")
    p.add_argument("--k", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--frames", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("loss", help="[FIND]-token matching loss")
    p.add_argument("--tokens", required=True)
    p.add_argument("--grad-check", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("propagate", help="Propagate masks on a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--anchors-from", choices=STRATEGIES, default="mcs")
    p.add_argument("--k", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--lambda", dest="update_lambda", type=float)
    p.add_argument("--seed", type=int, default=0)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--baseline", action="store_true", help="Forward propagation from frame 0 without updates")
    mode.add_argument("--ablation", action="store_true", help="Run the four propagation configurations")
    p.add_argument("--csv", action="store_true", help="One CSV row per frame")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("pipeline", help="Run one scenario end to end")
    p.add_argument("--scenario", required=True)
    p.add_argument("--strategy", choices=STRATEGIES, default="mcs")
    p.add_argument("--k", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--lambda", dest="update_lambda", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pipeline)

    for name, func, help_text in (
        ("compare", cmd_compare, "Compare sampling strategies over a corpus"),
        ("tsg-sweep", cmd_tsg_sweep, "Grounding metrics for several thresholds"),
    ):
        p = sub.add_parser(name, help=help_text)
        corpus = p.add_mutually_exclusive_group()
        corpus.add_argument("--corpus", help="Directory of scenario JSON files")
        corpus.add_argument("--preset", action="append", help="Built-in scenario (repeatable)")
        p.add_argument("--scenario-seed", type=int, default=0, help="Seed for preset scenarios")
        p.add_argument("--window", type=int)
        p.add_argument("-o", "--output")
        p.set_defaults(func=func)
        if name == "compare":
            p.add_argument("--strategies", default=",".join(DEFAULT_STRATEGIES))
            p.add_argument("--k", help="Frame budget K, or a comma list such as 4,8,16 to sweep")
            p.add_argument("--theta", type=float)
            p.add_argument("--lambda", dest="update_lambda", type=float)
            p.add_argument("--seeds", default="0")
            p.add_argument("--workers", type=int)
            p.add_argument("--json", action="store_true", help="Mirror the CSV as JSON")
            p.add_argument("--xlsx", help="Also write an Excel workbook to this path")
        else:
            p.add_argument("--thetas", default="0.2,0.3,0.4,0.5,0.6")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        setup_logging(args.log_level)
        return args.func(args)
    except ValidationError as e:
        stderr_console.print(f"[red]error:[/red] {e}")
        return 2
    except PydanticValidationError as e:
        stderr_console.print(f"[red]error:[/red] {wrap_pydantic_error(e, 'arguments')}")
        return 2
    except MomentSegError as e:
        stderr_console.print(f"[red]error:[/red] {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
