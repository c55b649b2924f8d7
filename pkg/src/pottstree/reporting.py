"""Reproducibility plumbing: seeds, chunking, grids, CSV and manifests.

Conventions used by every sweep in the package:

* Randomness comes from numpy's PCG64.  A sweep with master seed ``s`` is cut
  into fixed-size chunks numbered ``0, 1, ...``; chunk ``i`` draws from
  ``Generator(PCG64(SeedSequence([s, i])))``.  The chunk layout depends only
  on the sample count, never on the thread count, and per-chunk results are
  reduced in chunk order — so outputs are byte-identical for any ``--threads``.
* Floats are serialized with ``repr`` (shortest round-trip form), decimal
  point, no locale.
* Files are written to a temporary sibling and atomically renamed, so a
  crashed run never leaves a partial file behind.
"""

from __future__ import annotations

import csv
import io
import os
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

DEFAULT_CHUNK = 25_000


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Deterministic generator for stream ``key`` of master ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, key)])))


def chunk_sizes(total: int, chunk: int = DEFAULT_CHUNK) -> list[int]:
    """Sizes of the fixed chunk decomposition of ``total`` samples."""
    if total < 0:
        raise DomainError(f"sample count must be >= 0, got {total}")
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def parallel_chunk_map(fn, n_chunks: int, threads: int = 1) -> list:
    """Evaluate ``fn(i)`` for ``i in range(n_chunks)``, results in index order.

    ``threads=1`` runs inline; larger values use a thread pool.  Since results
    are consumed in index order, the output is independent of scheduling.
    """
    if threads <= 1 or n_chunks <= 1:
        return [fn(i) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_chunks)))


def parse_grid(text: str) -> list[float]:
    """Parse ``start:stop:step`` into an inclusive grid.

    The endpoint is included when it lands within 1e-12 of a grid point.
    A bare number parses as a single-point grid.
    """
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise DomainError(f"malformed grid {text!r} (want start:stop:step)")
    if len(values) == 1:
        return values
    if len(values) != 3:
        raise DomainError(f"malformed grid {text!r} (want start:stop:step)")
    start, stop, step = values
    if step <= 0:
        raise DomainError(f"grid step must be positive, got {step}")
    if stop < start - 1e-12:
        raise DomainError(f"grid stop {stop} precedes start {start}")
    count = int(np.floor((stop - start) / step + 1e-12)) + 1
    return [start + k * step for k in range(count)]


def format_value(v) -> str:
    """Serialize one CSV/manifest value deterministically."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def _atomic_write(path: str | os.PathLike, data: str) -> None:
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(path, text: str) -> None:
    _atomic_write(path, text)


def write_csv_atomic(path, header: list[str], rows: list[list]) -> None:
    """Write an RFC-4180-style CSV (header + rows) atomically."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    _atomic_write(path, buf.getvalue())


def code_version() -> str:
    """``git describe`` of the working tree, or the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=10,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    from . import __version__
    return f"pottstree-{__version__}"


@dataclass
class RunManifest:
    """Key=value record of one CLI run (parameters, seeds, version, timing)."""

    command: str
    parameters: dict = field(default_factory=dict)
    started: float = field(default_factory=time.time)

    def finish(self) -> None:
        self.parameters["wall_time_s"] = time.time() - self.started

    def to_text(self) -> str:
        lines = [f"command={self.command}", f"code_version={code_version()}"]
        for k, v in self.parameters.items():
            lines.append(f"{k}={format_value(v)}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        write_text_atomic(path, self.to_text())


@dataclass
class CertificationReport:
    """Outcome of one sampled certification sweep.

    ``min_margin`` is the worst (smallest) slack observed; a negative value
    means the asserted property failed on some sample and ``witness`` then
    carries a machine-readable description of the worst offender.
    """

    kind: str
    parameters: dict
    sample_count: int
    seed: int
    min_margin: float
    passed: bool
    witness: dict | None = None

    def to_text(self) -> str:
        lines = [f"kind={self.kind}"]
        for k, v in self.parameters.items():
            lines.append(f"{k}={format_value(v)}")
        lines += [
            f"sample_count={self.sample_count}",
            f"seed={self.seed}",
            f"min_margin={format_value(self.min_margin)}",
            f"passed={format_value(self.passed)}",
        ]
        if self.witness is not None:
            for k, v in self.witness.items():
                lines.append(f"witness_{k}={format_value(v)}")
        return "\n".join(lines) + "\n"
