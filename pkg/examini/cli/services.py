"""
Command-line dispatch: argument parsing, config validation and exit codes
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from loguru import logger

from ..benchmarks.machine import load_machine_profile
from ..benchmarks.models import CampaignSpec, MachineProfile
from ..benchmarks.reports import load_report
from ..benchmarks.services import get_benchmark_service
from ..core.config import settings
from ..core.errors import ConfigError, ExaminiError, ValidationError
from ..core.log import configure_logging
from ..gravity.models import GravityConfig, SphParams, WalkParams
from ..gravity.services import get_gravity_service
from ..mhd.models import GridSpec, MhdConfig
from ..mhd.services import get_mhd_service
from ..pic.models import PicConfig, SpeciesSpec
from ..pic.services import get_pic_service
from ..tracing.antipatterns import DEFAULT_MAX_BYTES, DEFAULT_MIN_RUN
from ..tracing.services import get_trace_service
from .schemas import SCHEMAS, schema_help
from .validation import validate_config, validate_document, write_effective_config

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def mhd_from_values(values: Dict[str, Any]):
    config = MhdConfig(**{k: values[k] for k in MhdConfig.__dataclass_fields__ if k in values})
    config.wavevector = tuple(config.wavevector)
    grid = GridSpec(global_cells=tuple(values["global_cells"]),
                    domain_extent=tuple(tuple(e) for e in values["domain_extent"]),
                    rank_layout=tuple(values["rank_layout"]), ghost_width=values["ghost_width"],
                    periodic=tuple(values["periodic"]))
    return config, grid


def pic_from_values(values: Dict[str, Any]) -> PicConfig:
    species = [SpeciesSpec(s["name"], s["qom"], s["charge_density"], s["vth"], tuple(s["drift"]))
               for s in values["species"]]
    fields = {k: values[k] for k in PicConfig.__dataclass_fields__ if k in values and k != "species"}
    fields["cells"] = tuple(fields["cells"])
    fields["extent"] = tuple(fields["extent"])
    return PicConfig(species=species, **fields)


def gravity_from_values(values: Dict[str, Any]) -> GravityConfig:
    params = WalkParams(theta=values["theta"], softening=values["softening"], group_size=values["group_size"],
                        direct_radius=values["direct_radius"])
    sph = SphParams(**values["sph"]) if values.get("sph") else None
    return GravityConfig(n_bodies=values["n_bodies"], distribution=values["distribution"], walk=values["walk"],
                         params=params, leaf_capacity=values["leaf_capacity"], key_order=values["key_order"],
                         seed=values["seed"], sph=sph)


def campaign_from_values(values: Dict[str, Any]) -> CampaignSpec:
    return CampaignSpec.from_dict({k: v for k, v in values.items() if k != "tolerance_pct"})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="examini", description="Instrumented exascale mini-app suite")
    parser.add_argument("--log-level", default=None, help="loguru level (default EXAMINI_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{mhd,pic,gravity,trace,campaign,report}")

    def run_parser(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", required=True, help="JSON config document")
        p.add_argument("--out", default=settings.OUTPUT_DIR, help="output directory")
        p.add_argument("--ranks", type=int, default=None, help="logical rank count override")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        return p

    run_parser("mhd", "finite-volume MHD run")
    pic = run_parser("pic", "semi-implicit PIC run")
    pic.add_argument("--cycles", type=int, default=None, help="cycle count override")
    run_parser("gravity", "tree gravity force-accuracy run")

    trace = sub.add_parser("trace", help="trace analysis")
    trace_sub = trace.add_subparsers(dest="action", required=True)
    analyze = trace_sub.add_parser("analyze", help="POP efficiency metrics")
    analyze.add_argument("--in", dest="source", required=True, help="trace JSON-lines file")
    analyze.add_argument("--ideal-replay", action="store_true", help="replay on an ideal network (SerE/TE)")
    analyze.add_argument("--region", default=None)
    analyze.add_argument("--base", default=None, help="base trace for scalability metrics")
    analyze.add_argument("--mode", choices=("weak", "strong"), default=None)
    analyze.add_argument("--out", default=None, help="write JSON tree and CSV table here")
    anti = trace_sub.add_parser("antipatterns", help="barrier-bounded small-message runs")
    anti.add_argument("--in", dest="source", required=True)
    anti.add_argument("--min-run", type=int, default=DEFAULT_MIN_RUN)
    anti.add_argument("--max-bytes", type=int, default=DEFAULT_MAX_BYTES)
    anti.add_argument("--out", default=None)

    campaign = sub.add_parser("campaign", help="scaling campaign with regression check")
    campaign.add_argument("--config", required=True)
    campaign.add_argument("--out", default=settings.OUTPUT_DIR)
    campaign.add_argument("--machine", default=None, help="machine profile JSON (default: detect)")
    campaign.add_argument("--baseline-dir", default=settings.BASELINE_DIR)
    campaign.add_argument("--update-baselines", action="store_true")
    campaign.add_argument("--format", choices=("csv", "json"), default=None, help="single report format")
    campaign.add_argument("--seed", type=int, default=None)

    report = sub.add_parser("report", help="re-emit a saved campaign result")
    report.add_argument("--in", dest="source", required=True, help="campaign result JSON")
    report.add_argument("--format", choices=("csv", "json"), default="csv")
    report.add_argument("--out", default=settings.OUTPUT_DIR)
    return parser


def _print_summary(summary: Dict[str, Any]) -> None:
    public = {k: v for k, v in summary.items() if k != "result"}
    print(json.dumps(public, indent=2, default=str))


def _load(args: argparse.Namespace, schema_name: str) -> Dict[str, Any]:
    values = validate_config(args.config, SCHEMAS[schema_name])
    if getattr(args, "seed", None) is not None:
        values["seed"] = args.seed
    if getattr(args, "ranks", None) is not None:
        values["ranks"] = args.ranks
    if getattr(args, "cycles", None) is not None:
        values["cycles"] = args.cycles
    write_effective_config(values, args.out, schema_name)
    return values


def _run_mhd(args: argparse.Namespace) -> int:
    values = _load(args, "mhd")
    config, grid = mhd_from_values(values)
    summary = get_mhd_service(args.out).run(config, grid, ranks=values["ranks"], stem="mhd")
    _print_summary(summary)
    return EXIT_OK


def _run_pic(args: argparse.Namespace) -> int:
    values = _load(args, "pic")
    config = pic_from_values(values)
    summary = get_pic_service(args.out).run(config, ranks=values["ranks"] or 1, stem="pic")
    _print_summary(summary)
    return EXIT_OK


def _run_gravity(args: argparse.Namespace) -> int:
    values = _load(args, "gravity")
    config = gravity_from_values(values)
    summary = get_gravity_service(args.out).run(config, ranks=values["ranks"] or 1, stem="gravity")
    _print_summary(summary)
    return EXIT_OK if summary["status"] == "completed" else EXIT_CHECK_FAILED


def _run_trace(args: argparse.Namespace) -> int:
    service = get_trace_service(args.out)
    if args.action == "analyze":
        tree = service.analyze(args.source, region=args.region, ideal_replay=args.ideal_replay,
                               base=args.base, mode=args.mode)
        if args.out:
            service.save_report(tree)
        print(json.dumps(tree, indent=2, sort_keys=True))
        return EXIT_OK
    summary = service.antipatterns(args.source, min_run=args.min_run, max_bytes=args.max_bytes)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "antipatterns.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    _print_summary(summary)
    return EXIT_OK


def _run_campaign(args: argparse.Namespace) -> int:
    values = _load(args, "campaign")
    spec = campaign_from_values(values)
    machine: Optional[MachineProfile] = None
    if args.machine:
        validate_config(args.machine, SCHEMAS["machine"])
        machine = load_machine_profile(args.machine)
    formats = (args.format,) if args.format else ("csv", "json")
    summary = get_benchmark_service(args.out, args.baseline_dir).run(
        spec, machine=machine, tolerance_pct=values["tolerance_pct"],
        update_baselines=args.update_baselines, formats=formats)
    _print_summary(summary)
    return EXIT_CHECK_FAILED if summary["status"] == "failed" else EXIT_OK


def _run_report(args: argparse.Namespace) -> int:
    result = load_report(args.source)
    summary = get_benchmark_service(args.out).report(result, formats=(args.format,))
    _print_summary(summary)
    return EXIT_OK


HANDLERS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "mhd": _run_mhd,
    "pic": _run_pic,
    "gravity": _run_gravity,
    "trace": _run_trace,
    "campaign": _run_campaign,
    "report": _run_report,
}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; the return value is the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.log_level)
    try:
        return HANDLERS[args.command](args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        if args.command in SCHEMAS:
            print(f"{args.command} config fields:\n{schema_help(SCHEMAS[args.command])}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ExaminiError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"{args.command} failed unexpectedly: {e}")
        return EXIT_RUNTIME


def check_document(kind: str, data: Dict[str, Any]) -> List[str]:
    """Field paths violating the schema of `kind` (empty when valid)"""
    try:
        validate_document(data, SCHEMAS[kind])
    except ValidationError as e:
        return e.fields
    return []
