"""voxelize: STL mesh to indicator volume."""
import argparse
import logging

from app.commands.arguments import positive_float
from app.services.volume_io import export_vtk, load_mesh, voxelize, write_volume

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("voxelize", help="Voxelize an STL mesh")
    parser.add_argument("mesh", help="Binary or ASCII STL file")
    parser.add_argument("--spacing", type=positive_float, required=True, help="Cell size in mm")
    parser.add_argument("--out", required=True, help="Output volume file")
    parser.add_argument("--vtk", default=None, help="Also export a structured-points file")
    parser.set_defaults(handler=cmd_voxelize)


def cmd_voxelize(args: argparse.Namespace) -> int:
    """Voxelize a mesh and write it as a volume file."""
    mesh = load_mesh(args.mesh)
    grid = voxelize(mesh, args.spacing, workers=args.workers)
    write_volume(args.out, grid)
    if args.vtk:
        export_vtk(args.vtk, grid)
    logger.info("Wrote %s (%d cells, %.3f mm3)", args.out, grid.count, grid.volume)
    print(f"{args.out}: dims={'x'.join(str(n) for n in grid.lattice.dims)} cells={grid.count} volume={grid.volume:.4f} mm3")
    return 0
