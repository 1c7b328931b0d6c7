"""Value types shared by selectors, the scene generator and the metrics.

A :class:`CorrespondenceSet` stores its data column-wise in read-only numpy
arrays so the selectors can stay vectorized; indexing or iterating it yields
:class:`Correspondence` records.  The position of a correspondence in the set
is its identity everywhere in the pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .exceptions import DegenerateModel, InvalidInput

# Relative magnitude below which an entry counts as zero when fixing the sign.
_SIGN_EPS = 1e-12


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInput(f"non-finite point ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class LocalAffine:
    """Jacobian of the local frame map between the two images."""

    a11: float
    a12: float
    a21: float
    a22: float

    def __post_init__(self):
        if self.a11 * self.a22 - self.a12 * self.a21 == 0.0:
            raise InvalidInput("local affine frame is degenerate (zero determinant)")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]], dtype=float)


@dataclass(frozen=True)
class Correspondence:
    p: Point2
    q: Point2
    quality: float | None = None
    affine: LocalAffine | None = None
    gt_label: bool | None = None

    def __post_init__(self):
        if self.quality is not None and not 0.0 <= self.quality <= 1.0:
            raise InvalidInput(f"quality {self.quality} outside [0, 1]")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class CorrespondenceSet:
    """Ordered, immutable collection of putative matches.

    Parameters
    ----------
    p, q : array-like of shape (N, 2)
        Keypoint coordinates in image 1 and image 2, in pixels.
    quality : array-like of shape (N,), optional
        Match quality in [0, 1], lower is better (a nearest-neighbour ratio).
        NaN marks a missing value.
    affine : array-like of shape (N, 2, 2), optional
        Local affine frame of every match.  NaN rows mark missing frames.
    labels : array-like of shape (N,), optional
        Ground-truth inlier labels; -1 marks a missing label.
    image1_size, image2_size : (w, h), optional
        Image extents.  Inferred from the coordinates when omitted.
    margin : float
        Fraction of the image-1 extent that image-1 points may lie outside it.
    """

    def __init__(
        self,
        p,
        q,
        quality=None,
        affine=None,
        labels=None,
        image1_size=None,
        image2_size=None,
        margin: float = 0.1,
    ):
        p = np.array(p, dtype=float).reshape(-1, 2)
        q = np.array(q, dtype=float).reshape(-1, 2)
        if p.shape != q.shape:
            raise InvalidInput(f"p and q differ in shape: {p.shape} vs {q.shape}")
        if not (np.isfinite(p).all() and np.isfinite(q).all()):
            raise InvalidInput("keypoint coordinates must be finite")
        n = len(p)

        if quality is not None:
            quality = np.array(quality, dtype=float).reshape(-1)
            if quality.shape != (n,):
                raise InvalidInput("quality must have one entry per correspondence")
            present = quality[~np.isnan(quality)]
            if ((present < 0.0) | (present > 1.0)).any():
                raise InvalidInput("quality values must lie in [0, 1]")
        if affine is not None:
            affine = np.array(affine, dtype=float).reshape(-1, 2, 2)
            if len(affine) != n:
                raise InvalidInput("affine must have one frame per correspondence")
            rows = ~np.isnan(affine).any(axis=(1, 2))
            det = np.linalg.det(affine[rows]) if rows.any() else np.zeros(0)
            if (det == 0.0).any():
                raise InvalidInput("local affine frames must be non-degenerate")
        if labels is not None:
            labels = np.array(labels, dtype=np.int8).reshape(-1)
            if labels.shape != (n,):
                raise InvalidInput("labels must have one entry per correspondence")
            if not np.isin(labels, (-1, 0, 1)).all():
                raise InvalidInput("labels must be 0, 1 or -1 (missing)")

        self.image1_size = _size_or_extent(image1_size, p)
        self.image2_size = _size_or_extent(image2_size, q)
        if n and margin is not None:
            w, h = self.image1_size
            lo = -margin * np.array([w, h])
            hi = (1.0 + margin) * np.array([w, h])
            if ((p < lo) | (p > hi)).any():
                raise InvalidInput("image-1 points fall outside the image margin")

        # an optional field with no value present is the same as an absent one
        if quality is not None and np.isnan(quality).all():
            quality = None
        if affine is not None and np.isnan(affine).any(axis=(1, 2)).all():
            affine = None
        if labels is not None and (labels < 0).all():
            labels = None

        self.p = _readonly(p)
        self.q = _readonly(q)
        self.quality = None if quality is None else _readonly(quality)
        self.affine = None if affine is None else _readonly(affine)
        self.labels = None if labels is None else _readonly(labels)

    @classmethod
    def from_items(cls, items: Sequence[Correspondence], image1_size=None,
                   image2_size=None, margin: float = 0.1) -> "CorrespondenceSet":
        items = list(items)
        p = [(c.p.x, c.p.y) for c in items]
        q = [(c.q.x, c.q.y) for c in items]
        quality = affine = labels = None
        if any(c.quality is not None for c in items):
            quality = [np.nan if c.quality is None else c.quality for c in items]
        if any(c.affine is not None for c in items):
            nan = np.full((2, 2), np.nan)
            affine = [nan if c.affine is None else c.affine.matrix for c in items]
        if any(c.gt_label is not None for c in items):
            labels = [-1 if c.gt_label is None else int(c.gt_label) for c in items]
        return cls(np.reshape(p, (-1, 2)), np.reshape(q, (-1, 2)), quality, affine,
                   labels, image1_size, image2_size, margin)

    def __len__(self) -> int:
        return len(self.p)

    def __getitem__(self, i: int) -> Correspondence:
        quality = affine = label = None
        if self.quality is not None and not np.isnan(self.quality[i]):
            quality = float(self.quality[i])
        if self.affine is not None and not np.isnan(self.affine[i]).any():
            affine = LocalAffine(*map(float, self.affine[i].ravel()))
        if self.labels is not None and self.labels[i] >= 0:
            label = bool(self.labels[i])
        return Correspondence(Point2(*map(float, self.p[i])), Point2(*map(float, self.q[i])),
                              quality, affine, label)

    def __iter__(self) -> Iterator[Correspondence]:
        return (self[i] for i in range(len(self)))

    @property
    def items(self) -> list[Correspondence]:
        return list(self)

    @property
    def has_quality(self) -> bool:
        return self.quality is not None and not np.isnan(self.quality).any()

    @property
    def has_affine(self) -> bool:
        return self.affine is not None and not np.isnan(self.affine).any()

    @property
    def has_labels(self) -> bool:
        return self.labels is not None and (self.labels >= 0).all()

    def subset(self, indices) -> "CorrespondenceSet":
        idx = np.asarray(indices, dtype=int)
        pick = lambda a: None if a is None else a[idx]  # noqa: E731
        return CorrespondenceSet(self.p[idx], self.q[idx], pick(self.quality), pick(self.affine),
                                 pick(self.labels), self.image1_size, self.image2_size, None)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CorrespondenceSet):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and np.array_equal(a, b, equal_nan=True)

        return (self.image1_size == other.image1_size
                and self.image2_size == other.image2_size
                and same(self.p, other.p) and same(self.q, other.q)
                and same(self.quality, other.quality) and same(self.affine, other.affine)
                and same(self.labels, other.labels))

    __hash__ = None

    def __repr__(self) -> str:
        return (f"CorrespondenceSet(n={len(self)}, image1_size={self.image1_size}, "
                f"image2_size={self.image2_size})")


def _size_or_extent(size, pts: np.ndarray) -> tuple[float, float]:
    if size is not None:
        w, h = (float(v) for v in size)
        if not (w > 0 and h > 0):
            raise InvalidInput(f"image size must be positive, got {size}")
        return (w, h)
    if len(pts) == 0:
        return (1.0, 1.0)
    hi = np.maximum(pts.max(axis=0), 0.0)
    return (float(np.floor(hi[0])) + 1.0, float(np.floor(hi[1])) + 1.0)


def canonicalize_model(m) -> np.ndarray:
    """Return ``m`` scaled to unit Frobenius norm with its last nonzero entry positive.

    >>> canonicalize_model(-2 * np.eye(3))[0, 0].round(6)
    0.57735
    """
    a = np.array(m, dtype=float).reshape(3, 3)
    norm = np.linalg.norm(a)
    if not np.isfinite(norm) or norm == 0.0:
        raise DegenerateModel("cannot canonicalize an all-zero (or non-finite) model")
    a = a / norm
    flat = a.ravel()
    nz = np.flatnonzero(np.abs(flat) > _SIGN_EPS)
    if flat[nz[-1]] < 0:
        a = -a
    return a


@dataclass(frozen=True)
class Homography:
    """Projective 3x3 map stored in canonical scale (row-major)."""

    m: tuple[float, ...]

    @classmethod
    def from_matrix(cls, m) -> "Homography":
        return cls(tuple(float(v) for v in canonicalize_model(m).ravel()))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.m, dtype=float).reshape(3, 3)

    kind = "homography"


@dataclass(frozen=True)
class Fundamental:
    """Rank-2 fundamental matrix stored in canonical scale (row-major)."""

    m: tuple[float, ...]

    @classmethod
    def from_matrix(cls, m) -> "Fundamental":
        a = np.array(m, dtype=float).reshape(3, 3)
        u, s, vt = np.linalg.svd(a)
        s[2] = 0.0
        return cls(tuple(float(v) for v in canonicalize_model(u @ np.diag(s) @ vt).ravel()))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.m, dtype=float).reshape(3, 3)

    kind = "fundamental"


@dataclass
class SelectionResult:
    """Output of a selector.

    ``stats`` holds selector-specific diagnostics (e.g. the fitted mixture
    weight of VFC).  ``history`` is only filled by the hypothesize-and-verify selectors: one
    ``(hypotheses_drawn, selected_indices)`` entry per improvement of the best
    model, which lets callers ask how many hypotheses a target quality took.
    """

    selected: np.ndarray
    confidence: np.ndarray | None = None
    model: Homography | Fundamental | None = None
    iterations_used: int = 0
    runtime: float = 0.0
    flags: tuple[str, ...] = ()
    method: str = ""
    history: list[tuple[int, np.ndarray]] = field(default_factory=list, repr=False)
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        sel = np.asarray(self.selected, dtype=np.int64).reshape(-1)
        sel = np.unique(sel)
        self.selected = sel

    def mask(self, n: int) -> np.ndarray:
        if len(self.selected) and (self.selected[0] < 0 or self.selected[-1] >= n):
            raise InvalidInput(f"selection indices out of range for a set of size {n}")
        out = np.zeros(n, dtype=bool)
        out[self.selected] = True
        return out
