"""
Formatting and export helpers for the source designer CLI
"""
import json
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

SIGNIFICANT_DIGITS = 12


def format_timestamp(dt: Optional[datetime] = None) -> str:
    """Format a datetime object as an ISO timestamp (seconds precision)"""
    if dt is None:
        dt = datetime.now()
    return dt.isoformat(timespec="seconds")


def format_runtime(seconds: float) -> str:
    """Format a runtime in seconds as a readable string"""
    if seconds < 1:
        return f"{seconds*1000:.0f}ms"
    if seconds < 120:
        return f"{seconds:.2f}s"
    return f"{seconds/60:.1f}min"


def format_value(value: Any) -> str:
    """Locale-independent table cell: 12 significant digits for numbers"""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if isinstance(value, float) and math.isnan(value):
            return "nan"
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    return str(value).replace("\t", " ").replace("\n", " ")


def truncate_text(text: str, max_length: int = 100) -> str:
    """Truncate text to a maximum length with ellipsis"""
    if len(text) > max_length:
        return text[:max_length] + "..."
    return text


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Tab-separated UTF-8 table, one header line, newline-terminated rows"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\t".join(header) + "\n")
        for row in rows:
            f.write("\t".join(format_value(v) for v in row) + "\n")
    return path


def write_json(path: Path, data: Dict[str, Any]) -> Path:
    """JSON document with NaN written as null"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(_finite(data), f, indent=2, sort_keys=False)
        f.write("\n")
    return path


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value
