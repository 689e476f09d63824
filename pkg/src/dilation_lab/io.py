"""File formats: coefficient files, report envelopes and CSV plot data."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import scalars as sc
from .scalars import EXACT
from .series import TruncatedSeries

SCHEMA_VERSION = "1.0"


class InputError(ValueError):
    """Malformed input file or arguments."""


def series_to_json(f: TruncatedSeries, t=0) -> dict:
    out = {
        "mode": f.mode,
        "t": t if not isinstance(t, Fraction) else float(t),
        "coeffs": [sc.scalar_to_json(a, f.mode) for a in f.dense()],
    }
    if f.has_tail:
        out["tail_l2_sq"] = str(f.tail_l2_sq) if f.mode == EXACT else float(f.tail_l2_sq)
        out["tail_l1"] = f.tail_l1
    return out


def series_from_json(data: dict) -> tuple[TruncatedSeries, object]:
    """Parse a coefficient file; returns ``(series, t)``."""
    try:
        mode = data["mode"]
        sc.check_mode(mode)
        coeffs = [sc.scalar_from_json(item, mode) for item in data["coeffs"]]
        t = data.get("t", 0)
        tail_sq = data.get("tail_l2_sq", 0)
        tail_sq = Fraction(str(tail_sq)) if mode == EXACT else float(tail_sq)
        tail_l1 = float(data.get("tail_l1", 0.0))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"malformed coefficient file: {exc}") from exc
    if isinstance(t, float) and t.is_integer():
        t = int(t)
    f = TruncatedSeries.from_coeffs(coeffs, mode, tail_l2_sq=tail_sq, tail_l1=tail_l1)
    return f, t


def read_series(path) -> tuple[TruncatedSeries, object]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    return series_from_json(data)


def write_series(path, f: TruncatedSeries, t=0) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(series_to_json(f, t), indent=1) + "\n", encoding="utf-8")
    return path


def default_timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        when = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        when = datetime.now(tz=timezone.utc).replace(microsecond=0)
    return when.isoformat()


@dataclass
class RunManifest:
    command: str
    inputs: list
    caps: dict
    seed: int | None
    tolerances: dict
    out_dir: str
    timestamp: str = field(default_factory=default_timestamp)

    def to_json(self) -> dict:
        return asdict(self)


def load_schema() -> dict:
    text = resources.files("dilation_lab").joinpath("schema/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def envelope(manifest: RunManifest, result: dict, verdict: str, exit_status: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest.to_json(),
        "verdict": verdict,
        "exit_status": exit_status,
        "result": result,
    }


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, sc.GaussianRational):
        return sc.scalar_to_json(obj, EXACT)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, tuple):
        return list(obj)
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=1, sort_keys=True, default=_jsonable, allow_nan=True) + "\n"


def write_report(out_dir, name: str, payload: dict) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.json"
    path.write_text(dumps(payload), encoding="utf-8")
    return path


def write_csv(out_dir, name: str, header, rows) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)
    return path
