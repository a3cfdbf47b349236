"""CSV tables and Jinja2 text reports."""
import csv
from pathlib import Path
from typing import Iterable, List, Union

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.config import settings
from app.schemas.report import OrientationRow, PlanRow

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"

templates = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    trim_blocks=True,
    lstrip_blocks=True,
)


def render(name: str, **context) -> str:
    """Render a text template with the application name and version available."""
    return templates.get_template(name).render(app_name=settings.APP_NAME, app_version=settings.APP_VERSION, **context)


def write_csv(path: Union[str, Path], rows: Iterable[Union[OrientationRow, PlanRow]], fields: List[str]) -> Path:
    """Write report rows with a fixed header and "\\n" line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row.csv_row())
    return path
