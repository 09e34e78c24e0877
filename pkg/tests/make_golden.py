"""Rewrite the golden CLI outputs from the current implementation."""
import io
import shlex
from pathlib import Path

from geoinfluence.cli import run
from golden_cases import CASES

HERE = Path(__file__).parent / "golden"


def main():
    HERE.mkdir(exist_ok=True)
    for name, cmd in CASES.items():
        buf = io.StringIO()
        code = run(shlex.split(cmd), buf)
        if code != 0:
            raise SystemExit(f"{name}: exit {code}")
        ext = "json" if "--format json" in cmd else "csv"
        (HERE / f"{name}.{ext}").write_text(buf.getvalue(), encoding="utf-8")
        print(f"wrote {name}.{ext}")


if __name__ == "__main__":
    main()
