"""Export training JSONL into the fused segment layout.

Each instance becomes four source segments (corrupted statement paired
with one packed evidence snippet each, in the exact layout the editor
sees at inference) and one target line (the clean statement). Instances
violating the packing invariants are skipped and logged, never written.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .determinism import render_segment

logger = logging.getLogger(__name__)

PACK_SIZE = 4
SEGMENT_JOIN = "\t"


def _validate(instance: dict, line_number: int) -> list[str] | None:
    problems = []
    for key in ("clean", "corrupted", "packed", "gold"):
        if key not in instance:
            problems.append(f"missing {key}")
    if not problems:
        packed = instance["packed"]
        if len(packed) != PACK_SIZE:
            problems.append(f"packed holds {len(packed)} snippets, need {PACK_SIZE}")
        packed_ids = {e.get("id") for e in packed}
        for g in instance["gold"]:
            if g.get("id") not in packed_ids:
                problems.append(f"gold snippet {g.get('id')!r} missing from packed")
        if instance.get("corrupted") == instance.get("clean"):
            problems.append("corrupted equals clean")
    if problems:
        logger.warning("line %d skipped: %s", line_number, "; ".join(problems))
        return None
    return [render_segment(instance["corrupted"], e["text"]) for e in instance["packed"]]


def export_fid_training(instances_path: str | Path, out_stem: str | Path) -> tuple[Path, Path]:
    """Write ``<out_stem>.source`` (tab-joined segments per instance) and
    ``<out_stem>.target`` (one clean statement per line)."""
    out_stem = Path(out_stem)
    source_lines: list[str] = []
    target_lines: list[str] = []
    for ln, line in enumerate(Path(instances_path).read_text(encoding="utf-8").split("\n"), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj.get("__truncated__"):
            logger.warning("line %d: truncation marker; producing run was interrupted", ln)
            continue
        segments = _validate(obj, ln)
        if segments is None:
            continue
        source_lines.append(SEGMENT_JOIN.join(segments))
        target_lines.append(obj["clean"])
    source_path = out_stem.with_suffix(".source")
    target_path = out_stem.with_suffix(".target")
    source_path.write_text("\n".join(source_lines) + ("\n" if source_lines else ""), encoding="utf-8")
    target_path.write_text("\n".join(target_lines) + ("\n" if target_lines else ""), encoding="utf-8")
    return source_path, target_path
