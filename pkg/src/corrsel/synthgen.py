"""Synthetic correspondence scenes with known ground truth.

Geometric nuisances (zoom, rotation, viewpoint change, several independent
structures) are produced by the scene transform.  Photometric nuisances have
no pixels to act on here; they show up only as the inlier ratio and the
quality model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import GenerationFailure, InvalidInput
from .geometry import homography_dlt, transfer_errors
from .model import CorrespondenceSet, Homography

# Fraction by which the image-2 frame is grown when accepting mapped inliers.
FRAME_MARGIN = 0.1


@dataclass(frozen=True)
class Translation:
    dx: float
    dy: float


@dataclass(frozen=True)
class Rotation:
    degrees: float


@dataclass(frozen=True)
class Zoom:
    scale: float


@dataclass(frozen=True)
class RandomPerspective:
    """Random viewpoint change: image corners jittered by up to ``strength`` of the image size."""

    strength: float = 0.15


@dataclass(frozen=True)
class MultiStructure:
    """Several independent planar structures.

    Each structure owns a vertical band of image 1 whose width is proportional
    to its weight.  ``homographies`` entries may be 3x3 matrices or ``None``
    for a random perspective map.
    """

    homographies: tuple = (None, None)
    weights: tuple[float, ...] = (0.5, 0.5)


@dataclass(frozen=True)
class SceneSpec:
    n: int
    inlier_ratio: float = 0.5
    noise_sigma: float = 1.0
    transform: object = field(default_factory=lambda: Translation(30.0, 10.0))
    image_size: tuple[float, float] = (640.0, 480.0)
    quality_model: str | None = "correlated"
    affine_frames: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInput("n must be at least 1")
        if not 0.0 < self.inlier_ratio <= 1.0:
            raise InvalidInput("inlier_ratio must lie in (0, 1]")
        if self.noise_sigma < 0:
            raise InvalidInput("noise_sigma must be nonnegative")
        if self.quality_model not in (None, "correlated", "uncorrelated"):
            raise InvalidInput("quality_model must be 'correlated', 'uncorrelated' or None")
        if isinstance(self.transform, MultiStructure):
            w = self.transform.weights
            if len(w) != len(self.transform.homographies) or not math.isclose(sum(w), 1.0):
                raise InvalidInput("multi-structure weights must match the structures and sum to 1")


@dataclass(frozen=True)
class GroundTruth:
    """Either a single homography (``kind='homography'``) or labels only.

    ``labels`` always holds the generator's inlier flags; only ``kind``
    decides which semantics the metrics use.
    """

    kind: str
    labels: np.ndarray
    H: Homography | None = None

    def __post_init__(self):
        if self.kind not in ("homography", "labels"):
            raise InvalidInput(f"unknown ground-truth kind {self.kind!r}")
        if (self.kind == "homography") != (self.H is not None):
            raise InvalidInput("homography ground truth needs H, label ground truth must not carry one")


def _about_center(linear: np.ndarray, size) -> np.ndarray:
    cx, cy = size[0] / 2.0, size[1] / 2.0
    to = np.array([[1.0, 0, cx], [0, 1.0, cy], [0, 0, 1.0]])
    back = np.array([[1.0, 0, -cx], [0, 1.0, -cy], [0, 0, 1.0]])
    return to @ linear @ back


def rotation_homography(degrees: float, size) -> np.ndarray:
    t = math.radians(degrees)
    c, s = math.cos(t), math.sin(t)
    # exact quarter turns keep exact zeros
    if float(degrees).is_integer() and int(degrees) % 90 == 0:
        c, s = float(round(c)), float(round(s))
    return _about_center(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]), size)


def zoom_homography(scale: float, size) -> np.ndarray:
    return _about_center(np.diag([scale, scale, 1.0]), size)


def random_perspective(rng: np.random.Generator, size, strength: float = 0.15) -> np.ndarray:
    w, h = size
    corners = np.array([[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]])
    jitter = rng.uniform(-strength, strength, size=(4, 2)) * np.array([w, h])
    return homography_dlt(corners, corners + jitter)


def transform_matrix(transform, size, rng: np.random.Generator) -> np.ndarray:
    if isinstance(transform, Translation):
        return np.array([[1.0, 0, transform.dx], [0, 1.0, transform.dy], [0, 0, 1.0]])
    if isinstance(transform, Rotation):
        return rotation_homography(transform.degrees, size)
    if isinstance(transform, Zoom):
        if transform.scale <= 0:
            raise InvalidInput("zoom scale must be positive")
        return zoom_homography(transform.scale, size)
    if isinstance(transform, RandomPerspective):
        return random_perspective(rng, size, transform.strength)
    if isinstance(transform, np.ndarray) or isinstance(transform, (list, tuple)):
        return np.asarray(transform, dtype=float).reshape(3, 3)
    raise InvalidInput(f"unsupported transform {transform!r}")


def parse_transform(text: str):
    """Parse ``translation:dx,dy``, ``rotation:deg``, ``zoom:s``, ``homography[:strength]`` or ``multi:k``."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "translation":
            dx, dy = (float(v) for v in arg.split(","))
            return Translation(dx, dy)
        if name == "rotation":
            return Rotation(float(arg))
        if name == "zoom":
            return Zoom(float(arg))
        if name in ("homography", "perspective"):
            return RandomPerspective(float(arg)) if arg else RandomPerspective()
        if name == "multi":
            k = int(arg) if arg else 2
            if k < 1:
                raise ValueError
            return MultiStructure((None,) * k, (1.0 / k,) * k)
    except ValueError:
        pass
    raise InvalidInput(f"cannot parse transform {text!r}")


def local_jacobian(h: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Jacobian of ``x -> rho(H [x; 1])`` at every point, shape ``(N, 2, 2)``."""
    hx = pts @ h[:, :2].T + h[:, 2]
    w = hx[:, 2]
    mapped = hx[:, :2] / w[:, None]
    jac = (h[None, :2, :2] - mapped[:, :, None] * h[None, 2:3, :2]) / w[:, None, None]
    return jac


def _random_affines(rng: np.random.Generator, n: int) -> np.ndarray:
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    s1 = rng.uniform(0.5, 2.0, n)
    s2 = rng.uniform(0.5, 2.0, n)
    c, s = np.cos(theta), np.sin(theta)
    rot = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    return rot * np.stack([s1, s2], -1)[:, None, :]


def _split_counts(total: int, weights) -> list[int]:
    raw = np.asarray(weights, dtype=float) * total
    counts = np.floor(raw).astype(int)
    rest = total - counts.sum()
    for i in np.argsort(-(raw - counts), kind="stable")[:rest]:
        counts[i] += 1
    return counts.tolist()


def _sample_structure(rng, h, count, x_range, size, sigma, budget):
    """Draw ``count`` inliers of one structure; returns (p, q, attempts used)."""
    w, h_img = size
    lo = -FRAME_MARGIN * np.array([w, h_img])
    hi = (1.0 + FRAME_MARGIN) * np.array([w, h_img])
    ps, qs = [], []
    have = attempts = 0
    while have < count:
        if attempts >= budget:
            raise GenerationFailure(f"could not place {count} inliers within {budget} attempts")
        batch = min(max(2 * (count - have), 16), budget - attempts)
        attempts += batch
        p = np.column_stack([rng.uniform(x_range[0], x_range[1], batch), rng.uniform(0.0, h_img, batch)])
        hx = p @ h[:, :2].T + h[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            clean = hx[:, :2] / hx[:, 2:3]
        noisy = clean + rng.normal(0.0, sigma, size=clean.shape) if sigma > 0 else clean
        ok = np.isfinite(noisy).all(axis=1) & (np.abs(hx[:, 2]) > 1e-12)
        ok &= ((noisy >= lo) & (noisy <= hi)).all(axis=1)
        take = np.flatnonzero(ok)[: count - have]
        ps.append(p[take])
        qs.append(noisy[take])
        have += len(take)
    return np.concatenate(ps) if ps else np.zeros((0, 2)), np.concatenate(qs) if qs else np.zeros((0, 2)), attempts


def generate_scene(spec: SceneSpec) -> tuple[CorrespondenceSet, GroundTruth]:
    """Build a shuffled correspondence set plus its ground truth from ``spec``.

    Deterministic in ``spec.seed``.
    """
    rng = np.random.default_rng(spec.seed)
    size = tuple(float(v) for v in spec.image_size)
    w, h = size
    n_in = min(spec.n, math.ceil(round(spec.n * spec.inlier_ratio, 9)))
    n_out = spec.n - n_in
    budget = 100 * spec.n

    if isinstance(spec.transform, MultiStructure):
        mats = [transform_matrix(RandomPerspective(), size, rng) if m is None else
                np.asarray(m, dtype=float).reshape(3, 3) for m in spec.transform.homographies]
        weights = spec.transform.weights
    else:
        mats = [transform_matrix(spec.transform, size, rng)]
        weights = (1.0,)

    edges = np.concatenate([[0.0], np.cumsum(weights)]) * w
    p_in, q_in, jac = [], [], []
    used = 0
    for k, (hm, count) in enumerate(zip(mats, _split_counts(n_in, weights))):
        p, q, attempts = _sample_structure(rng, hm, count, (edges[k], edges[k + 1]), size,
                                           spec.noise_sigma, budget - used)
        used += attempts
        p_in.append(p)
        q_in.append(q)
        jac.append(local_jacobian(hm, p))
    p_in = np.concatenate(p_in)
    q_in = np.concatenate(q_in)

    p_out = np.column_stack([rng.uniform(0.0, w, n_out), rng.uniform(0.0, h, n_out)])
    q_out = np.column_stack([rng.uniform(0.0, w, n_out), rng.uniform(0.0, h, n_out)])
    p_all = np.concatenate([p_in, p_out])
    q_all = np.concatenate([q_in, q_out])
    labels = np.concatenate([np.ones(n_in, dtype=np.int8), np.zeros(n_out, dtype=np.int8)])

    quality = None
    if spec.quality_model == "correlated":
        quality = np.concatenate([rng.uniform(0.3, 0.75, n_in), rng.uniform(0.6, 1.0, n_out)])
    elif spec.quality_model == "uncorrelated":
        quality = rng.uniform(0.3, 1.0, spec.n)

    affine = None
    if spec.affine_frames:
        affine = np.concatenate([np.concatenate(jac), _random_affines(rng, n_out)])

    order = rng.permutation(spec.n)
    cs = CorrespondenceSet(
        p_all[order], q_all[order],
        None if quality is None else quality[order],
        None if affine is None else affine[order],
        labels[order], size, size,
    )
    if len(mats) == 1:
        gt = GroundTruth("homography", labels[order].astype(bool), Homography.from_matrix(mats[0]))
    else:
        gt = GroundTruth("labels", labels[order].astype(bool))
    return cs, gt


def label_against_homography(cs: CorrespondenceSet, h, t_gt: float = 10.0) -> np.ndarray:
    """Per-index ``|x' - rho(H x)| <= t_gt``; points mapped to infinity are labelled False."""
    m = h.matrix if isinstance(h, Homography) else np.asarray(h, dtype=float).reshape(3, 3)
    return transfer_errors(m, cs.p, cs.q) <= t_gt


__all__ = [
    "SceneSpec", "GroundTruth", "Translation", "Rotation", "Zoom", "RandomPerspective",
    "MultiStructure", "generate_scene", "label_against_homography", "parse_transform",
]
