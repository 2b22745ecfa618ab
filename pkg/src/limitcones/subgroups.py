"""Cartan projections of reductive subgroups and the sharpness predicate.

A reductive subgroup ``H`` whose Cartan subspace is aligned with the diagonal
is described by rays of its own chamber written in ambient coordinates. Its
image in the ambient chamber is obtained by sorting coordinates, since the
ambient Cartan projection of ``exp(v)`` is the Weyl-folded ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .cartan import random_sl
from .cones import HalfSpaceCone, SampledCone, angular_distance, normalize
from .errors import InvalidInputError

__all__ = [
    "FoldedSubgroupCone",
    "SharpnessReport",
    "reductive_subgroup_cone",
    "folded_plane_sl3_in_sl4",
    "block_case_fold",
    "sharpness_test",
    "subgroup_cone",
    "SUBGROUPS",
    "V0_RAY",
    "random_block_elements",
]

V0_RAY = normalize(np.array([1.0, 0.0, 0.0, -1.0]))


@dataclass
class FoldedSubgroupCone:
    """Limit cone of a subgroup, before and after folding into the chamber."""

    subalgebra_rays: SampledCone
    folded: SampledCone
    exact_pieces: list = field(default_factory=list)
    name: str | None = None

    @property
    def n(self):
        return self.folded.n

    def angle_to(self, v):
        """Angle from each direction in ``v`` to the folded cone.

        Uses the exact pieces when there are any, else the nearest sample.
        """
        v = np.atleast_2d(np.asarray(v, dtype=float))
        if self.exact_pieces:
            per_piece = np.stack([np.atleast_1d(p.angle_to(v)) for p in self.exact_pieces])
            return per_piece.min(axis=0)
        return angular_distance(v, self.folded)

    def contains(self, v, tol=config.IDENTITY_TOL):
        if not self.exact_pieces:
            return self.angle_to(v) <= tol
        return np.any([p.contains(v, tol=tol) for p in self.exact_pieces], axis=0)

    def to_dict(self):
        return {
            "schema": config.SCHEMA_VERSION,
            "name": self.name,
            "rays": self.subalgebra_rays.directions.tolist(),
            "folded": self.folded.directions.tolist(),
            "pieces": [p.to_dict() for p in self.exact_pieces],
        }

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"schema", "name", "rays", "folded", "pieces"}
        if unknown:
            raise InvalidInputError(f"unknown subgroup keys: {sorted(unknown)}")
        if "rays" not in d:
            raise InvalidInputError("subgroup JSON needs a 'rays' field")
        rays = SampledCone.from_dict({"directions": d["rays"]})
        folded = SampledCone.from_dict({"directions": d["folded"]}) if "folded" in d else SampledCone(-np.sort(-rays.directions, axis=1))
        pieces = [HalfSpaceCone.from_dict(p) for p in d.get("pieces", [])]
        return cls(rays, folded, pieces, d.get("name"))

    def __eq__(self, other):
        return (
            isinstance(other, FoldedSubgroupCone)
            and self.name == other.name
            and self.subalgebra_rays == other.subalgebra_rays
            and self.folded == other.folded
            and len(self.exact_pieces) == len(other.exact_pieces)
            and all(a == b for a, b in zip(self.exact_pieces, other.exact_pieces))
        )


def reductive_subgroup_cone(rays, exact_pieces=None, name=None):
    """Fold subgroup chamber rays (ambient coordinates) into the ambient chamber."""
    rays = np.atleast_2d(np.asarray(rays, dtype=float))
    scale = np.linalg.norm(rays, axis=1)
    if np.any(scale == 0):
        raise InvalidInputError("subgroup rays must be non-zero")
    if np.any(np.abs(rays.sum(axis=1)) > config.IDENTITY_TOL * np.maximum(scale, 1.0)):
        raise InvalidInputError("subgroup rays must have zero coordinate sum")
    folded = -np.sort(-rays, axis=1)
    return FoldedSubgroupCone(SampledCone(rays), SampledCone(folded), list(exact_pieces or []), name)


def block_case_fold(mu_block):
    """Ambient Cartan projection of an SL(3) block element, by the explicit case split.

    ``(v1, v2, v3)`` non-increasing maps to ``(v1, v2, 0, v3)`` when ``v2 >= 0``
    and to ``(v1, 0, v2, v3)`` otherwise.
    """
    m = np.asarray(mu_block, dtype=float)
    v1, v2, v3 = m[..., 0], m[..., 1], m[..., 2]
    zero = np.zeros_like(v1)
    upper = np.stack([v1, v2, zero, v3], axis=-1)
    lower = np.stack([v1, zero, v2, v3], axis=-1)
    return np.where((v2 >= 0)[..., None], upper, lower)


def _v1_piece():
    # {(a, b, 0, c) : a >= b >= 0}
    forms = [[1, -1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, -1, 0]]
    return HalfSpaceCone(forms, rays=[[1, 0, 0, -1], [1, 1, 0, -2]])


def _v2_piece():
    # {(a, 0, b, c) : 0 >= b >= c}
    forms = [[0, 1, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 1, -1]]
    return HalfSpaceCone(forms, rays=[[1, 0, 0, -1], [2, 0, -1, -1]])


def folded_plane_sl3_in_sl4(samples=181):
    """Image in the SL(4) chamber of the chamber of an SL(3) corner block.

    The result is the union of the two planar sectors ``V1`` and ``V2``
    (exact pieces, in that order) meeting along the ray through
    ``(1, 0, 0, -1)``. ``samples`` directions of the block chamber are folded.
    """
    e1 = normalize(np.array([2.0, -1.0, -1.0]))
    e2 = normalize(np.array([1.0, 1.0, -2.0]))
    half = np.arccos(np.clip(e1 @ e2, -1, 1))
    # orthonormal frame of the block chamber's plane, sweep from e1 to e2
    f = normalize(e2 - (e2 @ e1) * e1)
    t = np.linspace(0.0, half, samples)
    block = np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * f
    rays = np.concatenate([block, np.zeros((samples, 1))], axis=1)
    return reductive_subgroup_cone(rays, [_v1_piece(), _v2_piece()], "sl3-block-in-sl4")


SUBGROUPS = {"sl3-block-in-sl4": folded_plane_sl3_in_sl4}


def subgroup_cone(spec):
    """Resolve a registered subgroup name or a ``{"rays": ...}`` mapping."""
    if isinstance(spec, str):
        if spec not in SUBGROUPS:
            raise InvalidInputError(f"unknown subgroup {spec!r}; known: {sorted(SUBGROUPS)}")
        return SUBGROUPS[spec]()
    if isinstance(spec, FoldedSubgroupCone):
        return spec
    if isinstance(spec, dict):
        if "folded" in spec or "pieces" in spec:
            return FoldedSubgroupCone.from_dict(spec)
        unknown = set(spec) - {"schema", "name", "rays"}
        if unknown:
            raise InvalidInputError(f"unknown subgroup keys: {sorted(unknown)}")
        return reductive_subgroup_cone(spec["rays"], name=spec.get("name"))
    return reductive_subgroup_cone(spec)


@dataclass
class SharpnessReport:
    min_angle: float
    threshold: float
    closest_direction: np.ndarray

    @property
    def sharp(self):
        return self.min_angle > self.threshold

    def to_dict(self):
        return {
            "min_angle": self.min_angle,
            "threshold": self.threshold,
            "sharp": self.sharp,
            "closest_direction": self.closest_direction.tolist(),
        }


def sharpness_test(gamma_cone, h_cone, threshold=config.SHARP_THRESHOLD):
    """Smallest angle between the directions of ``gamma_cone`` and the subgroup cone.

    The verdict is *sharp* when that angle is strictly above ``threshold``.
    """
    if len(gamma_cone) == 0:
        raise InvalidInputError("empty limit cone")
    h_cone = subgroup_cone(h_cone)
    d = gamma_cone.directions
    ang = np.atleast_1d(h_cone.angle_to(d))
    k = int(np.argmin(ang))
    return SharpnessReport(float(max(ang[k], 0.0)), float(threshold), d[k].copy())


def random_block_elements(count, rng):
    """Random determinant-one matrices in the upper-left SL(3) block of SL(4)."""
    blocks = random_sl(3, rng, size=count)
    out = np.zeros((count, 4, 4))
    out[:, :3, :3] = blocks
    out[:, 3, 3] = 1.0
    return out

