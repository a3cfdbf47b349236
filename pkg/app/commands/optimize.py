"""optimize: rank sampled build directions."""
import argparse
import logging
from pathlib import Path

from app.commands.arguments import add_accessibility_options
from app.dependencies import get_optimize_config, get_setup
from app.models.results import SamplingMode
from app.schemas.report import OrientationRow
from app.services.orient import score_orientations
from app.utils.reports import render, write_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("optimize", help="Rank build directions by support and secluded support volume")
    parser.add_argument("config", help="Setup file (JSON)")
    parser.add_argument("--out", required=True, help="Ranking CSV")
    parser.add_argument("--w-acc", dest="w_acc", type=float, default=None, help="Weight of the secluded term")
    parser.add_argument("--n-b", dest="n_b", type=int, default=None, help="Number of sampled directions")
    parser.add_argument("--n-b-star", dest="n_b_star", type=int, default=None, help="Number of directions returned")
    parser.add_argument("--mode", type=SamplingMode, choices=list(SamplingMode), default=None)
    add_accessibility_options(parser)
    parser.set_defaults(handler=cmd_optimize)


def cmd_optimize(args: argparse.Namespace) -> int:
    """Write the full ranking CSV and print the top n_b_star summary."""
    loaded = get_setup(Path(args.config))
    cfg = get_optimize_config(
        loaded.config,
        planar=loaded.part.lattice.is_planar,
        lam=args.lam,
        alpha_deg=args.alpha_deg,
        w_acc=args.w_acc,
        n_b=args.n_b,
        n_b_star=args.n_b_star,
        mode=args.mode,
        roll_deg=args.roll_deg,
    )
    records = score_orientations(loaded.part, loaded.setup, cfg, workers=args.workers)
    rows = [OrientationRow.from_record(rank, record) for rank, record in enumerate(records, start=1)]
    write_csv(args.out, rows, OrientationRow.CSV_FIELDS)
    logger.info("Wrote ranking of %d directions to %s", len(rows), args.out)

    print(render(
        "ranking_summary.txt.j2",
        rows=rows[:cfg.n_b_star],
        w_acc=cfg.w_acc,
        lam=cfg.lam,
        alpha_deg=cfg.alpha_deg,
        n_b=cfg.n_b,
        v_s_max=cfg.v_s_max if cfg.v_s_max is not None else max(r.V_S_mm3 for r in rows),
        v_gamma_max=cfg.v_gamma_max if cfg.v_gamma_max is not None else max(r.V_Gamma_mm3 for r in rows),
    ), end="")
    return 0
