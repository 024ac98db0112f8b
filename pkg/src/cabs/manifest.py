"""Reproducibility manifests written alongside every CLI output."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Mapping, Sequence


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def write_manifest(
    out_path: str | Path,
    *,
    command_line: Sequence[str],
    config: Mapping,
    inputs: Sequence[str | Path],
    outputs: Sequence[str | Path],
    tool_version: str,
    summary: Mapping | None = None,
) -> Path:
    """Write ``<out_path>.manifest.json`` and return its path.

    Contents are fully determined by the run's inputs and configuration
    (no timestamps), so identical reruns produce identical manifests.
    """
    manifest = {
        "tool_version": tool_version,
        "command_line": list(command_line),
        "config": dict(config),
        "input_digests": {str(p): file_digest(p) for p in inputs},
        "outputs": {str(p): file_digest(p) for p in outputs},
    }
    if summary is not None:
        manifest["summary"] = dict(summary)
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
