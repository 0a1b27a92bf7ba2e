"""MNIST IDX ingestion: big-endian typed containers, gzip-transparent.

Images carry magic 0x00000803 (unsigned bytes, count x rows x cols),
labels 0x00000801 (unsigned bytes, count).  Every format violation is
fatal and reports the byte offset of the offending field.
"""

from __future__ import annotations

import gzip
import os
from dataclasses import dataclass

import numpy as np

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

_TRAIN_IMAGES = "train-images-idx3-ubyte"
_TRAIN_LABELS = "train-labels-idx1-ubyte"
_TEST_IMAGES = "t10k-images-idx3-ubyte"
_TEST_LABELS = "t10k-labels-idx1-ubyte"


class IdxFormatError(Exception):
    pass


@dataclass
class MnistData:
    """One split: raw byte images (n, rows, cols) and labels (n,)."""

    images: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    def flat_images(self) -> np.ndarray:
        """Pixels scaled to [0, 1], flattened to (n, rows*cols)."""
        return self.images.reshape(len(self), -1).astype(np.float64) / 255.0


def _read_raw(path: str) -> bytes:
    with open(path, "rb") as f:
        head = f.read(2)
        f.seek(0)
        if head == b"\x1f\x8b":
            with gzip.open(f) as gz:
                return gz.read()
        return f.read()


def _be32(buf: bytes, offset: int, what: str, path: str) -> int:
    if offset + 4 > len(buf):
        raise IdxFormatError(
            f"{path}: truncated reading {what} at byte {offset} "
            f"(file has {len(buf)} bytes)")
    return int.from_bytes(buf[offset:offset + 4], "big")


def load_idx_file(path: str, expect_magic: int) -> np.ndarray:
    """Parse one IDX container into an ndarray of unsigned bytes."""
    buf = _read_raw(path)
    magic = _be32(buf, 0, "magic", path)
    if magic != expect_magic:
        raise IdxFormatError(
            f"{path}: bad magic 0x{magic:08x} at byte 0 "
            f"(expected 0x{expect_magic:08x})")
    ndim = magic & 0xFF
    dims = []
    for d in range(ndim):
        dims.append(_be32(buf, 4 + 4 * d, f"dimension {d}", path))
    start = 4 + 4 * ndim
    count = int(np.prod(dims)) if dims else 0
    if len(buf) - start < count:
        raise IdxFormatError(
            f"{path}: truncated payload at byte {start}: need {count} "
            f"bytes for shape {tuple(dims)}, found {len(buf) - start}")
    data = np.frombuffer(buf, dtype=np.uint8, count=count, offset=start)
    return data.reshape(dims)


def load_mnist_idx(images_path: str, labels_path: str) -> MnistData:
    """Load one images/labels pair and cross-validate the two files."""
    images = load_idx_file(images_path, IMAGE_MAGIC)
    labels = load_idx_file(labels_path, LABEL_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"count mismatch: {images.shape[0]} images vs "
            f"{labels.shape[0]} labels")
    bad = np.nonzero(labels > 9)[0]
    if bad.size:
        i = int(bad[0])
        raise IdxFormatError(
            f"{labels_path}: label {int(labels[i])} out of range [0, 9] "
            f"at byte {8 + i}")
    return MnistData(images=images, labels=labels)


def _locate(directory: str, stem: str) -> str:
    for name in (stem, stem + ".gz"):
        path = os.path.join(directory, name)
        if os.path.exists(path):
            return path
    raise FileNotFoundError(
        f"{stem}[.gz] not found under {directory}")


def find_mnist(directory: str = None):
    """(train, test) MnistData from a directory of standard IDX files.

    Falls back to $SYNAPSIM_MNIST_DIR; returns None when no directory is
    configured or the files are absent.
    """
    directory = directory or os.environ.get("SYNAPSIM_MNIST_DIR")
    if not directory:
        return None
    try:
        train = load_mnist_idx(_locate(directory, _TRAIN_IMAGES),
                               _locate(directory, _TRAIN_LABELS))
        test = load_mnist_idx(_locate(directory, _TEST_IMAGES),
                              _locate(directory, _TEST_LABELS))
    except FileNotFoundError:
        return None
    return train, test
