"""plan: greedy support removal at one build direction."""
import argparse
import logging
from pathlib import Path

from app.commands.arguments import add_accessibility_options, direction
from app.dependencies import get_plan_config, get_setup
from app.schemas.report import PlanRow, format_direction
from app.services.planner import plan
from app.services.volume_io import write_volume
from app.utils.reports import render, write_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("plan", help="Plan support removal steps")
    parser.add_argument("config", help="Setup file (JSON)")
    parser.add_argument("--build-dir", type=direction, required=True, help="Build direction x,y,z")
    parser.add_argument("--out", required=True, help="Plan CSV")
    parser.add_argument("--halt-fraction", dest="halt_fraction", type=float, default=None,
                        help="Stop when the best step removes less than this fraction of the support")
    parser.add_argument("--report", default=None, help="Text report (defaults to the CSV path with .txt)")
    parser.add_argument("--export-steps", dest="export_steps", default=None,
                        help="Directory for per-step removed volumes")
    add_accessibility_options(parser)
    parser.set_defaults(handler=cmd_plan)


def cmd_plan(args: argparse.Namespace) -> int:
    """Write the plan CSV and text report, and optionally the removed volume of every step."""
    loaded = get_setup(Path(args.config))
    cfg = get_plan_config(
        loaded.config,
        lam=args.lam,
        alpha_deg=args.alpha_deg,
        roll_deg=args.roll_deg,
        halt_fraction=args.halt_fraction,
    )
    result = plan(loaded.part, args.build_dir, loaded.setup, alpha_deg=cfg.alpha_deg, cfg=cfg, workers=args.workers)

    rows = [PlanRow.from_step(step) for step in result.steps]
    write_csv(args.out, rows, PlanRow.CSV_FIELDS)
    if args.export_steps:
        out_dir = Path(args.export_steps)
        for step in result.steps:
            write_volume(out_dir / f"step_{step.step_index:03d}.vox", step.removed)
        write_volume(out_dir / "remaining.vox", result.remaining)

    report = render(
        "plan_report.txt.j2",
        rows=rows,
        build_dir=format_direction(tuple(round(v, 4) for v in result.near_net.build_dir)),
        alpha_deg=cfg.alpha_deg,
        lam=cfg.lam,
        halt_fraction=cfg.halt_fraction,
        initial_volume=result.initial_volume,
        removed_pct=100.0 * result.removed_fraction,
        remaining_volume=result.remaining.volume,
        accessible_remaining_volume=result.accessible_remaining_volume,
    )
    report_path = Path(args.report) if args.report else Path(args.out).with_suffix(".txt")
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(report, encoding="utf-8")
    logger.info("Wrote %d plan steps to %s", len(rows), args.out)
    print(report, end="")
    return 0
