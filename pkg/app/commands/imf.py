"""imf: accessibility field of the near-net shape at one build direction."""
import argparse
import logging
from pathlib import Path
from typing import Optional

from app.commands.arguments import add_accessibility_options, direction
from app.config import settings
from app.dependencies import get_accessibility_config, get_setup
from app.services.imf import fixture_obstacles, imf_setup, max_oracle_error, split_support
from app.services.support import assemble_near_net
from app.services.volume_io import export_vtk, write_volumes
from app.utils.exceptions import InvariantException
from app.utils.reports import render

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("imf", help="Compute the inaccessibility field and split the support")
    parser.add_argument("config", help="Setup file (JSON)")
    parser.add_argument("--build-dir", type=direction, required=True, help="Build direction x,y,z")
    parser.add_argument("--out", required=True, help="Output prefix for the volume files")
    add_accessibility_options(parser)
    parser.add_argument("--oracle-check", action="store_true", help="Compare against brute-force placement")
    parser.add_argument("--vtk", action="store_true", help="Also export structured-points files")
    parser.set_defaults(handler=cmd_imf)


def oracle_check(part, setup, workers) -> Optional[float]:
    """Largest FFT/oracle disagreement over every fixture and tool."""
    worst = 0.0
    for j, obstacle in enumerate(fixture_obstacles(part, setup)):
        if obstacle.lattice.size > settings.ORACLE_MAX_CELLS:
            logger.warning(
                "Oracle check skipped: domain of %d cells exceeds %d", obstacle.lattice.size, settings.ORACLE_MAX_CELLS
            )
            return None
        for i, tool in enumerate(setup.tools):
            error = max_oracle_error(
                obstacle, tool, settings.ORACLE_QUERY_COUNT, seed=settings.ORACLE_SEED + j * len(setup.tools) + i,
                workers=workers,
            )
            logger.debug("Oracle check fixture %d tool %s: %.3e", j, tool.name, error)
            worst = max(worst, error)
    if worst > settings.ORACLE_TOLERANCE:
        raise InvariantException(f"FFT field disagrees with the placement oracle by {worst:.3e}")
    return worst


def cmd_imf(args: argparse.Namespace) -> int:
    """Write <out>_field.vox, <out>_accessible.vox and <out>_secluded.vox and print V_S and V_Gamma."""
    loaded = get_setup(Path(args.config))
    cfg = get_accessibility_config(
        loaded.config, lam=args.lam, alpha_deg=args.alpha_deg, roll_deg=args.roll_deg
    )
    near_net = assemble_near_net(loaded.part, args.build_dir, cfg.alpha_deg, roll_deg=cfg.roll_deg)
    result = imf_setup(near_net.part, loaded.setup, workers=args.workers)
    accessible, secluded = split_support(near_net.support, result.field, cfg.lam)

    outputs = [("field", result.field), ("accessible", accessible), ("secluded", secluded)]
    write_volumes(args.out, outputs)
    if args.vtk:
        prefix = Path(args.out)
        for suffix, volume in outputs:
            export_vtk(prefix.with_name(f"{prefix.name}_{suffix}.vtk"), volume)

    error = oracle_check(near_net.part, loaded.setup, args.workers) if args.oracle_check else None
    print(render(
        "imf_summary.txt.j2",
        v_s=near_net.support.volume,
        v_gamma=secluded.volume,
        lam=cfg.lam,
        oracle_error=error,
        oracle_queries=settings.ORACLE_QUERY_COUNT,
    ), end="")
    return 0
