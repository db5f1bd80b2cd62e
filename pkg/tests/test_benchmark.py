"""Smoke test: the kernel benchmark runs and restores the backend."""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

BENCH = Path(__file__).parent.parent / "benchmarks" / "bench_kernels.py"


def test_benchmark_runs_at_tiny_sizes():
    out = subprocess.run(
        [
            sys.executable,
            str(BENCH),
            "--pairs", "4",
            "--length", "32",
            "--matrices", "4",
            "--rows", "4",
            "--cols", "16",
        ],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert out.returncode == 0, out.stderr
    assert "levenshtein[numba]" in out.stdout
    assert "levenshtein[numpy]" in out.stdout
    assert "greedy_select[numba]" in out.stdout
    # both backends computed the same checksums
    lines = [l for l in out.stdout.splitlines() if "checksum" in l]
    lev_checksums = {l.split("checksum")[1] for l in lines if "levenshtein" in l}
    sel_checksums = {l.split("checksum")[1] for l in lines if "greedy_select" in l}
    assert len(lev_checksums) == 1
    assert len(sel_checksums) == 1
