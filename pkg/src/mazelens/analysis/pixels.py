"""Per-pixel activation datasets and their class assignments.

A spatial activation tensor (C, H, W) flattens into H*W points in R^C;
point k corresponds to pixel (k // W, k % W). Classifications carry the
class table (label, color, hidden flag) that the coloring and scatter
views edit, and serialize to a canonical JSON document that round-trips
byte-exactly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import FormatError, NotFoundError, ParameterError, ShapeMismatchError

DOCUMENT_VERSION = 1
_COLOR_RE = re.compile(r"^#[0-9A-Fa-f]{6}$")


@dataclass(frozen=True)
class PixelDataset:
    """n = H*W points in R^d taken from one captured layer."""

    layer: str
    height: int
    width: int
    points: np.ndarray  # (n, d) float32, write-protected

    def __post_init__(self) -> None:
        self.points.setflags(write=False)
        if self.points.shape[0] != self.height * self.width:
            raise ShapeMismatchError(
                f"dataset has {self.points.shape[0]} points for a "
                f"{self.height}x{self.width} layer"
            )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def pixel_of(self, point: int) -> tuple[int, int]:
        if not 0 <= point < self.n:
            raise ParameterError(f"point {point} out of range [0, {self.n})")
        return point // self.width, point % self.width

    def point_of(self, y: int, x: int) -> int:
        if not (0 <= y < self.height and 0 <= x < self.width):
            raise ParameterError(f"pixel ({y}, {x}) outside {self.height}x{self.width}")
        return y * self.width + x


def flatten_activations(trace, layer: str) -> PixelDataset:
    """Treat each spatial position of a captured layer as one datum."""
    tensor = trace.layer(layer)
    if tensor.ndim != 3:
        raise ShapeMismatchError(
            f"layer {layer!r} has shape {tensor.shape}; only spatial CxHxW "
            "layers flatten into pixel datasets"
        )
    c, h, w = tensor.shape
    points = np.ascontiguousarray(tensor.reshape(c, h * w).T).astype(np.float32)
    return PixelDataset(layer=layer, height=h, width=w, points=points)


@dataclass(frozen=True)
class ClassInfo:
    label: str = ""
    color: str = "#000000"  # fresh classes start black, like the initial view
    hidden: bool = False


@dataclass(frozen=True)
class Classification:
    """Per-point class ids plus the class table.

    Immutable value: edits return new instances, which is what makes the
    undo stack in the session store trivial.
    """

    layer: str
    shape: tuple[int, int, int]  # (H, W, C)
    assignment: np.ndarray  # (n,) int32, write-protected
    classes: dict[int, ClassInfo] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.assignment.setflags(write=False)
        h, w, _ = self.shape
        if self.assignment.shape != (h * w,):
            raise ShapeMismatchError(
                f"assignment length {self.assignment.shape} does not match "
                f"{h}x{w} pixels"
            )
        used = set(np.unique(self.assignment).tolist())
        missing = used - set(self.classes)
        if missing:
            raise FormatError(f"assignment references unknown class ids {sorted(missing)}")

    @property
    def n(self) -> int:
        return self.assignment.shape[0]

    def class_counts(self) -> dict[int, int]:
        ids, counts = np.unique(self.assignment, return_counts=True)
        out = {int(i): int(c) for i, c in zip(ids, counts)}
        for cid in self.classes:
            out.setdefault(cid, 0)
        return out

    def with_class(self, cid: int, info: ClassInfo) -> "Classification":
        if cid not in self.classes:
            raise NotFoundError(f"class id {cid} not in table")
        table = dict(self.classes)
        table[cid] = info
        return replace(self, classes=table)


def classification_from_labels(
    dataset: PixelDataset, labels: np.ndarray, channels: int | None = None
) -> Classification:
    """Wrap raw cluster labels (any ints) into a dense-id Classification."""
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    remap = {int(old): new for new, old in enumerate(uniq.tolist())}
    dense = np.array([remap[int(v)] for v in labels], dtype=np.int32)
    table = {i: ClassInfo() for i in range(len(uniq))}
    return Classification(
        layer=dataset.layer,
        shape=(dataset.height, dataset.width, channels or dataset.d),
        assignment=dense,
        classes=table,
    )


def reassign_points(
    classification: Classification, points, target: int | None
) -> Classification:
    """Move the given points to ``target`` (an existing id) or, when
    target is None, to a fresh class. Emptied classes stay in the table."""
    idx = np.asarray(list(points), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= classification.n):
        raise ParameterError(
            f"point indices out of range [0, {classification.n})"
        )
    table = dict(classification.classes)
    if target is None:
        target = max(table, default=-1) + 1
        table[target] = ClassInfo()
    elif target not in table:
        raise NotFoundError(f"target class id {target} not in table")
    assignment = classification.assignment.copy()
    assignment[idx] = target
    return replace(classification, assignment=assignment, classes=table)


def to_document(classification: Classification) -> dict:
    """Interchange JSON object (the PixCol <-> scatter-view format)."""
    canon = _canonicalize(classification)
    h, w, c = canon.shape
    return {
        "version": DOCUMENT_VERSION,
        "layer": canon.layer,
        "shape": [h, w, c],
        "assignment": canon.assignment.tolist(),
        "classes": {
            str(cid): {
                "label": info.label,
                "color": info.color,
                "hidden": info.hidden,
            }
            for cid, info in canon.classes.items()
        },
    }


def canonical_json_bytes(classification: Classification) -> bytes:
    return json.dumps(
        to_document(classification), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def _canonicalize(classification: Classification) -> Classification:
    """Dense class ids 0..m-1 in ascending old-id order."""
    old_ids = sorted(classification.classes)
    if old_ids == list(range(len(old_ids))):
        return classification
    remap = {old: new for new, old in enumerate(old_ids)}
    assignment = np.array(
        [remap[int(v)] for v in classification.assignment], dtype=np.int32
    )
    classes = {remap[old]: classification.classes[old] for old in old_ids}
    return replace(classification, assignment=assignment, classes=classes)


def from_document(doc: dict) -> Classification:
    if not isinstance(doc, dict):
        raise FormatError("classification document must be a JSON object")
    if doc.get("version") != DOCUMENT_VERSION:
        raise FormatError(
            f"unsupported classification version {doc.get('version')!r}"
        )
    try:
        h, w, c = (int(v) for v in doc["shape"])
        assignment = np.asarray(doc["assignment"], dtype=np.int32)
        classes = {}
        for key, val in doc["classes"].items():
            color = str(val["color"])
            if not _COLOR_RE.match(color):
                raise FormatError(f"bad color {color!r} for class {key}")
            classes[int(key)] = ClassInfo(
                label=str(val["label"]),
                color=color,
                hidden=bool(val["hidden"]),
            )
        layer = str(doc["layer"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed classification document: {exc}") from exc
    return Classification(
        layer=layer, shape=(h, w, c), assignment=assignment, classes=classes
    )
