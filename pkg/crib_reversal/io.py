"""
Readers and writers for layouts, tables and summaries.

Files are SI except where a key carries an explicit unit suffix. Floats are
written with repr so identical runs give byte-identical files.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np

from .exceptions import LayoutError, UsageError
from .field_solver import Electrode, ElectrodeLayout, FieldMap, ShiftProfile

logger = logging.getLogger(__name__)

UM = 1e-6
PathLike = Union[str, Path]


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a table with a header row; returns the path written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.debug(f"Wrote {path}")
    return path


def read_csv(path: PathLike) -> List[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            return list(csv.DictReader(f))
    except OSError as e:
        raise UsageError(f"Cannot read {path}: {e}")


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_json(path: PathLike, data: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_plain(data), indent=2, sort_keys=True, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: PathLike):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"File not found: {path}")
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}")


def layout_to_dict(layout: ElectrodeLayout) -> dict:
    return {
        "period_lx_um": layout.period_lx / UM,
        "ly_um": layout.ly / UM,
        "electrodes": [
            {
                "x_um": e.center_x / UM,
                "y_um": e.center_y / UM,
                "w_um": e.width / UM,
                "h_um": e.height / UM,
                "potential_v": e.potential,
                "group": e.group,
                "potential_factor": e.potential_factor,
            }
            for e in layout.electrodes
        ],
        "region_a": [[a / UM, b / UM] for a, b in layout.region_a],
    }


def layout_from_dict(data: dict) -> ElectrodeLayout:
    """
    Build a layout from its file form.

    Raises:
        UsageError: If a required key is missing or not numeric.
        LayoutError: If the geometry violates the layout invariants.
    """
    try:
        electrodes = []
        for item in data["electrodes"]:
            x = float(item["x_um"]) * UM
            y = float(item["y_um"]) * UM
            electrodes.append(
                Electrode(
                    center_x=x,
                    center_y=y,
                    width=float(item["w_um"]) * UM,
                    height=float(item["h_um"]) * UM,
                    potential=float(item["potential_v"]),
                    group=str(item.get("group", "")),
                    potential_factor=float(item.get("potential_factor", 1.0)),
                    x_factor=1.0 if x >= 0 else -1.0,
                    y_factor=1.0 if y >= 0 else -1.0,
                )
            )
        period = float(data["period_lx_um"]) * UM
        ly = float(data.get("ly_um", data.get("period_lx_um"))) * UM
        region_a = [(float(a) * UM, float(b) * UM) for a, b in data.get("region_a", [])]
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"Malformed layout file: {e}")
    return ElectrodeLayout(period_lx=period, ly=ly, electrodes=electrodes, region_a=region_a)


def load_layout(path: PathLike) -> ElectrodeLayout:
    data = read_json(path)
    if not isinstance(data, dict):
        raise UsageError(f"{path} must hold a JSON object")
    try:
        return layout_from_dict(data)
    except LayoutError as e:
        raise UsageError(f"{path}: {e.message}")


def save_layout(layout: ElectrodeLayout, path: PathLike) -> Path:
    return write_json(path, layout_to_dict(layout))


def write_field_map(field_map: FieldMap, path: PathLike) -> Path:
    """CSV of (x, y, phi, ex, ey), x-major; phi is NaN for magnetic maps."""
    xx, yy = np.meshgrid(field_map.x, field_map.y, indexing="ij")
    phi = field_map.phi if field_map.phi is not None else np.full(xx.shape, np.nan)
    columns = [xx, yy, phi, field_map.field_x, field_map.field_y]
    rows = zip(*(c.ravel() for c in columns))
    return write_csv(path, ["x", "y", "phi", "ex", "ey"], rows)


def write_profile(profile: ShiftProfile, path: PathLike) -> Path:
    return write_csv(path, ["x", "shift_hz"], zip(profile.x, profile.shift))
