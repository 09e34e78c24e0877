"""Bound reports, the baseline-constants file, and CSV/JSON emission."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

DEFAULT_BASELINES = "baselines.txt"


@dataclass(frozen=True)
class BoundReport:
    """Measured side ``lhs`` of an inequality against its right side with constant 1.

    A lower bound (``lhs >= c * rhs``) passes when
    ``lhs >= baseline * rhs - tolerance``, i.e. when the implied constant is
    at least the baseline; an upper bound (``kind="upper"``) passes when
    ``lhs <= baseline * rhs + tolerance``. A zero right side gives an
    implied constant of ``inf`` (lower bounds then hold trivially).
    """

    name: str
    lhs: float
    rhs_at_c1: float
    baseline_constant: float
    context: Mapping[str, Any] = field(default_factory=dict)
    kind: str = "lower"
    tolerance: float = 0.0

    @property
    def implied_constant(self) -> float:
        if self.rhs_at_c1 == 0:
            return 0.0 if self.lhs == 0 and self.kind == "upper" else math.inf
        return self.lhs / self.rhs_at_c1

    @property
    def passed(self) -> bool:
        if self.kind == "upper":
            return self.lhs <= self.baseline_constant * self.rhs_at_c1 + self.tolerance
        return self.lhs >= self.baseline_constant * self.rhs_at_c1 - self.tolerance

    def row(self) -> dict[str, Any]:
        out = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs_at_c1": self.rhs_at_c1,
            "implied_constant": self.implied_constant,
            "baseline_constant": self.baseline_constant,
            "kind": self.kind,
            "pass": int(self.passed),
        }
        for k, v in self.context.items():
            out[k] = v
        return out


class Baselines(dict):
    """``key -> float`` map read from a ``key = value`` text file.

    Keys may themselves contain ``=`` (``kkl.rho=2``); the value follows the
    last one.

    Lookups try ``name.context`` first and fall back to ``name``.
    """

    def constant(self, name: str, context: str | None = None) -> float:
        if context is not None and f"{name}.{context}" in self:
            return self[f"{name}.{context}"]
        if name in self:
            return self[name]
        raise KeyError(f"no baseline for {name!r}" + (f" ({context})" if context else ""))


def parse_baselines(text: str) -> Baselines:
    out = Baselines()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"baselines line {lineno}: expected 'key = value'")
        key, _, value = (s.strip() for s in line.rpartition("="))
        out[key] = float(value)
    return out


def load_baselines(path: str | Path | None = None) -> Baselines:
    if path is None:
        text = resources.files("geoinfluence").joinpath("data", DEFAULT_BASELINES).read_text()
    else:
        text = Path(path).read_text()
    return parse_baselines(text)


# ---------------------------------------------------------------------------
# emission


def format_value(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.10g}"
    return str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError("non-finite values cannot be written as JSON")
        return float(f"{v:.10g}")
    if hasattr(v, "item"):
        return _json_value(v.item())
    return v


def render(rows: Sequence[Mapping[str, Any]], fmt: str, columns: Sequence[str] | None = None) -> str:
    """Render rows with a stable column order (first-seen order if not given)."""
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_value(_plain(r.get(c, ""))) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        data = [{c: _json_value(_plain(r.get(c))) for c in columns} for r in rows]
        return json.dumps({"columns": list(columns), "rows": data}, indent=1, allow_nan=False) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _plain(v: Any) -> Any:
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return v.item()
    return v


def emit(rows: Sequence[Mapping[str, Any]], fmt: str, path: str | Path | None = None,
         columns: Sequence[str] | None = None) -> str:
    """Write rows to ``path`` (UTF-8) and return the rendered text."""
    text = render(rows, fmt, columns)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def parse_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def reports_to_rows(reports: Iterable[BoundReport]) -> list[dict[str, Any]]:
    return [r.row() for r in reports]
