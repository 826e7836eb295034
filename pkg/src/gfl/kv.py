"""Plain ``key = value`` text files used for manifests, configs and summaries."""

from __future__ import annotations

from pathlib import Path


def format_float(v: float) -> str:
    """Canonical 9-significant-digit formatting shared by every text output."""
    return f"{v:.9g}"


def dump_kv(items: dict, path: Path | str) -> None:
    """Write a dict as sorted ``key = value`` lines (values via str/format_float)."""
    lines = []
    for key in items:
        val = items[key]
        if isinstance(val, float):
            val = format_float(val)
        lines.append(f"{key} = {val}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_kv(path: Path | str) -> dict[str, str]:
    """Read ``key = value`` lines; blank lines and '#' comments are skipped."""
    out: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed line in {path}: {raw!r}")
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out
