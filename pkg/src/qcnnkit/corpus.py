"""Synthetic two-class binary corpus and labeled-directory I/O.

Class 0 files are low-entropy: a handful of repeating 16-byte motifs drawn
from the dark end of the byte range.  Class 1 files are high-entropy random
bytes with a structured header and periodic section markers.  File sizes are
uniform in [4 KB, 64 KB].  Everything is deterministic per seed.

On disk a corpus is a directory of raw files plus `labels.csv` with a
`path,label` header and one `relative_path,label` line per file.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DataError

MIN_FILE_SIZE = 4 * 1024
MAX_FILE_SIZE = 64 * 1024

# recognizable fixed prefix for class-1 files, followed by random content
_HEADER_PATTERN = bytes(range(0, 64, 2))
_SECTION_MARKER = b"\x00SECT\x00\xff\x10"


def _low_entropy_file(rng: np.random.Generator, size: int) -> bytes:
    num_motifs = int(rng.integers(1, 4))
    motifs = rng.integers(0, 96, size=(num_motifs, 16), dtype=np.uint8)
    segments = []
    remaining = size
    while remaining > 0:
        motif = motifs[int(rng.integers(0, num_motifs))]
        reps = min(int(rng.integers(16, 256)), (remaining + 15) // 16)
        segments.append(np.tile(motif, reps)[:remaining])
        remaining -= segments[-1].shape[0]
    return np.concatenate(segments).tobytes()


def _high_entropy_file(rng: np.random.Generator, size: int) -> bytes:
    body = rng.integers(0, 256, size=size, dtype=np.uint8)
    data = bytearray(body.tobytes())
    data[: len(_HEADER_PATTERN)] = _HEADER_PATTERN
    step = int(rng.integers(1024, 4096))
    for offset in range(step, size - len(_SECTION_MARKER), step):
        data[offset : offset + len(_SECTION_MARKER)] = _SECTION_MARKER
    return bytes(data)


def synth_binary_corpus(n_per_class: int, seed: int) -> tuple[list[bytes], np.ndarray]:
    """Generate n_per_class files of each class; labels alternate 0,1,0,1,..."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be positive")
    rng = np.random.default_rng(seed)
    files: list[bytes] = []
    labels: list[int] = []
    for _ in range(n_per_class):
        for label in (0, 1):
            size = int(rng.integers(MIN_FILE_SIZE, MAX_FILE_SIZE + 1))
            maker = _low_entropy_file if label == 0 else _high_entropy_file
            files.append(maker(rng, size))
            labels.append(label)
    return files, np.array(labels, dtype=np.int64)


def write_corpus(directory, files: list[bytes], labels: np.ndarray) -> Path:
    """Write files plus labels.csv under `directory`; returns the csv path."""
    if len(files) != len(labels):
        raise ValueError(f"{len(files)} files but {len(labels)} labels")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / "labels.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label"])
        for i, (blob, label) in enumerate(zip(files, labels)):
            name = f"sample_{i:05d}.bin"
            (directory / name).write_bytes(blob)
            writer.writerow([name, int(label)])
    return csv_path


def load_corpus(directory) -> tuple[list[bytes], np.ndarray]:
    """Read a labeled corpus directory back into (files, labels)."""
    directory = Path(directory)
    csv_path = directory / "labels.csv"
    if not csv_path.is_file():
        raise FileNotFoundError(f"{csv_path} not found")
    files: list[bytes] = []
    labels: list[int] = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["path", "label"]:
            raise DataError(f"{csv_path}: expected header 'path,label', got {header}")
        for row in reader:
            if len(row) != 2:
                raise DataError(f"{csv_path}: malformed line {row}")
            rel_path, label_text = row
            if label_text not in ("0", "1"):
                raise DataError(f"{csv_path}: label must be 0 or 1, got {label_text!r}")
            file_path = directory / rel_path
            if not file_path.is_file():
                raise FileNotFoundError(f"{file_path} not found")
            files.append(file_path.read_bytes())
            labels.append(int(label_text))
    if not files:
        raise DataError(f"{csv_path}: corpus is empty")
    return files, np.array(labels, dtype=np.int64)
