"""Closed cones of the Cartan subspace.

Two representations are used side by side:

* :class:`SampledCone` -- a finite set of unit directions, the surrogate for
  an asymptotic cone estimated from finitely many group elements;
* :class:`HalfSpaceCone` -- an intersection of half-spaces ``{h >= 0}``,
  used for constructed cones where membership must be exact.

Angles are measured on the unit sphere of the Cartan subspace with the
Euclidean inner product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, nnls
from scipy.spatial import ConvexHull, cKDTree

from . import config
from .cartan import (
    LinearForm,
    in_chamber,
    opposite_theta,
    opposition_involution,
    recenter,
    simple_root,
    weyl_subgroup,
)
from .errors import InfeasibleError, InvalidInputError

__all__ = [
    "SampledCone",
    "HalfSpaceCone",
    "AdmissibilityReport",
    "normalize",
    "angle",
    "directed_hausdorff",
    "projectivized_hausdorff",
    "angular_distance",
    "sampling_mesh",
    "conical_hull",
    "in_conical_hull",
    "angle_to_ray_cone",
    "is_convex_cone",
    "theta_convexity",
    "wall_margin",
    "i_invariance_defect",
    "membership",
    "construct_admissible_cone",
    "verify_admissible",
    "chamber_rays",
]


def normalize(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def angle(u, v):
    """Angle between two non-zero vectors (or stacks of them)."""
    u, v = normalize(u), normalize(v)
    # atan2 form stays accurate for nearly parallel vectors
    cross = np.linalg.norm(u - v, axis=-1)
    summ = np.linalg.norm(u + v, axis=-1)
    return 2.0 * np.arctan2(cross, summ)


def _chord_to_angle(d):
    a = 2.0 * np.arcsin(np.clip(np.asarray(d) / 2.0, 0.0, 1.0))
    # rounding in the tree query leaves ~1e-16 for coincident directions
    return np.where(a <= 1e-12, 0.0, a)


class SampledCone:
    """A finite set of unit directions in the Cartan subspace.

    Parameters
    ----------
    vectors : (m, n) array_like
        Non-zero vectors; they are normalised, recentred to zero sum and
        deduplicated (first occurrence wins, order otherwise preserved).
    decimals : int
        Rounding used to detect duplicate directions.
    """

    def __init__(self, vectors, decimals=config.DEDUP_DECIMALS, _trusted=False):
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        if v.size == 0 or v.shape[-1] < 2:
            raise InvalidInputError("a sampled cone needs at least one direction")
        if not _trusted:
            if not np.all(np.isfinite(v)):
                raise InvalidInputError("directions must be finite")
            v = recenter(v)
            norms = np.linalg.norm(v, axis=1)
            if np.any(norms == 0.0):
                raise InvalidInputError("zero vector is not a direction")
            v = v / norms[:, None]
            _, first = np.unique(np.round(v, decimals), axis=0, return_index=True)
            v = v[np.sort(first)]
        self.directions = v
        self._tree = None

    @classmethod
    def from_vectors(cls, vectors, min_norm=0.0, decimals=config.DEDUP_DECIMALS):
        """Directions of the vectors whose norm exceeds ``min_norm`` (and zero)."""
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        norms = np.linalg.norm(v, axis=1)
        keep = (norms > 0.0) & (norms >= min_norm)
        return cls(v[keep], decimals=decimals)

    @property
    def n(self):
        return self.directions.shape[1]

    def __len__(self):
        return len(self.directions)

    def __repr__(self):
        return f"SampledCone(n={self.n}, directions={len(self)})"

    def __eq__(self, other):
        return isinstance(other, SampledCone) and np.array_equal(self.directions, other.directions)

    @property
    def chamber_flag(self):
        return bool(np.all(in_chamber(self.directions)))

    @property
    def tree(self):
        if self._tree is None:
            self._tree = cKDTree(self.directions)
        return self._tree

    def opposite(self):
        """Image under the opposition involution."""
        return SampledCone(opposition_involution(self.directions))

    def act(self, w):
        return SampledCone(w(self.directions))

    def union(self, *others):
        return SampledCone(np.concatenate([self.directions] + [o.directions for o in others]))

    def thinned(self, resolution):
        """Keep one direction per grid cell of side ``resolution``."""
        if resolution <= 0:
            return self
        _, first = np.unique(np.floor(self.directions / resolution), axis=0, return_index=True)
        return SampledCone(self.directions[np.sort(first)], _trusted=True)

    def to_dict(self):
        return {"schema": config.SCHEMA_VERSION, "directions": self.directions.tolist()}

    @classmethod
    def from_dict(cls, d):
        if "directions" not in d:
            raise InvalidInputError("cone JSON needs a 'directions' field")
        v = np.atleast_2d(np.asarray(d["directions"], dtype=float))
        # already-unit, zero-sum input is kept bit for bit so dumps round-trip
        if (v.size and v.shape[-1] >= 2 and np.all(np.isfinite(v))
                and np.allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-12, rtol=0)
                and np.allclose(v.sum(axis=1), 0.0, atol=1e-12)
                and len(np.unique(np.round(v, config.DEDUP_DECIMALS), axis=0)) == len(v)):
            return cls(v, _trusted=True)
        return cls(v)


def angular_distance(points, cone):
    """Angle from each unit vector in ``points`` to the nearest direction of ``cone``."""
    pts = normalize(np.atleast_2d(points))
    d, _ = cone.tree.query(pts, k=1)
    return _chord_to_angle(d)


def directed_hausdorff(a, b):
    """``max_{x in a} min_{y in b} angle(x, y)``."""
    return float(np.max(angular_distance(a.directions, b)))


def projectivized_hausdorff(a, b):
    """Hausdorff distance between the direction sets, in radians."""
    if len(a) == 0 or len(b) == 0:
        raise InvalidInputError("Hausdorff distance needs non-empty cones")
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


def sampling_mesh(cone):
    """Largest nearest-neighbour angle inside the sample (0 for a single ray)."""
    if len(cone) < 2:
        return 0.0
    d, _ = cone.tree.query(cone.directions, k=2)
    return float(np.max(_chord_to_angle(d[:, 1])))


def _residual_angle(gens, v):
    # angle between v and the cone spanned by the columns of gens
    coef, _ = nnls(gens, v)
    p = gens @ coef
    r = np.linalg.norm(v - p)
    if r <= 1e-12 * np.linalg.norm(v):
        return 0.0
    return float(np.arctan2(r, np.linalg.norm(p) if p.any() else 0.0))


def _face_angles(v, rays):
    # The nearest point of a polyhedral cone lies in the relative interior of
    # a face spanned by some subset of rays; try every subset at once.
    best = np.full(len(v), np.pi / 2)
    k = len(rays)
    for size in range(1, min(k, v.shape[1]) + 1):
        for sub in itertools.combinations(range(k), size):
            r = rays[list(sub)]
            coef = v @ np.linalg.pinv(r)
            ok = np.all(coef >= -1e-12, axis=1)
            if not ok.any():
                continue
            p = coef[ok] @ r
            res = np.linalg.norm(v[ok] - p, axis=1)
            pn = np.linalg.norm(p, axis=1)
            ang = np.where(res <= 1e-12, 0.0, np.arctan2(res, pn))
            best[ok] = np.minimum(best[ok], ang)
    return best


def angle_to_ray_cone(v, rays):
    """Angle from ``v`` to the convex cone generated by ``rays`` (rows)."""
    rays = np.atleast_2d(np.asarray(rays, dtype=float))
    v = normalize(np.asarray(v, dtype=float))
    if v.ndim == 1:
        return _residual_angle(rays.T, v)
    if len(rays) <= 6:
        return _face_angles(v, rays)
    return np.array([_residual_angle(rays.T, x) for x in v])


def _hull_l1_gap(dirs, v):
    # min |dirs.T c - v|_1 over c >= 0, as a linear program
    m, n = dirs.shape
    cost = np.concatenate([np.zeros(m), np.ones(2 * n)])
    a_eq = np.hstack([dirs.T, np.eye(n), -np.eye(n)])
    res = linprog(cost, A_eq=a_eq, b_eq=v, bounds=(0, None), method="highs")
    return float(res.fun) if res.status == 0 else np.inf


def in_conical_hull(cone, v, tol=config.ANGULAR_TOL):
    """Whether unit ``v`` lies (within ``tol``) in the conical hull of ``cone``.

    Small samples use the exact angle; large ones an L1 gap from a linear
    program, which bounds the Euclidean gap from above.
    """
    v = normalize(np.asarray(v, dtype=float))
    if len(cone) <= 2000:
        return angle_to_ray_cone(v, cone.directions) <= tol
    return _hull_l1_gap(cone.directions, v) <= tol


def conical_hull(cone, tol=config.ANGULAR_TOL):
    """Extreme directions of the conical hull, found by cone-membership filtering."""
    keep = list(range(len(cone)))
    dirs = cone.directions
    for i in range(len(cone)):
        others = [j for j in keep if j != i]
        if not others:
            break
        if _residual_angle(dirs[others].T, dirs[i]) <= tol:
            keep.remove(i)
    return SampledCone(dirs[keep], _trusted=True)


def is_convex_cone(cone, tol=config.ANGULAR_TOL, resolution=None, max_points=400):
    """Pairwise-midpoint convexity test at the sample's own resolution.

    A sampled cone is declared convex when the midpoint direction of every
    pair of samples lies within ``resolution + tol`` of some sample.
    ``resolution`` defaults to :func:`sampling_mesh`, the covering radius the
    sample itself demonstrates; a gap wider than that is a hole in the cone.
    Samples above ``max_points`` are thinned first.
    """
    c = cone
    if len(c) > max_points:
        step = 1e-3
        while len(c) > max_points:
            c = cone.thinned(step)
            step *= 1.5
    if len(c) < 2:
        return True
    mesh = sampling_mesh(c) if resolution is None else float(resolution)
    d = c.directions
    i, j = np.triu_indices(len(d), k=1)
    mids = d[i] + d[j]
    norms = np.linalg.norm(mids, axis=1)
    if np.any(norms < 1e-12):
        return False
    gaps = angular_distance(mids / norms[:, None], c)
    return bool(np.all(gaps <= mesh + tol))


def theta_convexity(theta, cone, tol=config.ANGULAR_TOL, resolution=None):
    """Convexity of the orbit of ``cone`` under W_{theta ∪ i(theta)}."""
    th = opposite_theta(theta, cone.n)
    orbit = SampledCone(np.concatenate([w(cone.directions) for w in weyl_subgroup(th, cone.n)]))
    return is_convex_cone(orbit, tol=tol, resolution=resolution)


def wall_margin(cone, i):
    """``min alpha_i`` over the directions; positive means the wall is avoided."""
    return float(np.min(simple_root(i, cone.directions)))


def i_invariance_defect(cone):
    return projectivized_hausdorff(cone, cone.opposite())


def chamber_rays(n):
    """Extreme rays of the positive chamber, ``(1,..,1,0,..,0)`` recentred."""
    rays = np.zeros((n - 1, n))
    for j in range(1, n):
        rays[j - 1, :j] = 1.0
    return normalize(recenter(rays))


def _unit_forms(forms):
    f = recenter(np.atleast_2d(np.asarray(forms, dtype=float)))
    norms = np.linalg.norm(f, axis=1)
    if np.any(norms == 0.0):
        raise InvalidInputError("a form vanishes on the Cartan subspace")
    f = f / norms[:, None]
    _, first = np.unique(np.round(f, 10), axis=0, return_index=True)
    return f[np.sort(first)]


def _cartan_basis(n):
    # orthonormal basis (columns) of the zero-sum subspace
    q, _ = np.linalg.qr(recenter(np.eye(n))[:, : n - 1])
    return q


class HalfSpaceCone:
    """The cone ``{v : h_j(v) >= 0 for all j}`` inside the Cartan subspace.

    Forms are restricted to the Cartan subspace (zero-sum coefficients) and
    normalised to unit length, so ``h_j(v)`` for a unit ``v`` is the sine of
    the angle between ``v`` and the wall ``ker h_j``.
    """

    def __init__(self, forms, rays=None):
        self.forms = _unit_forms(forms)
        self._rays = None if rays is None else normalize(np.atleast_2d(rays))
        self.report = None

    @property
    def n(self):
        return self.forms.shape[1]

    def __repr__(self):
        return f"HalfSpaceCone(n={self.n}, forms={len(self.forms)})"

    def __eq__(self, other):
        return isinstance(other, HalfSpaceCone) and np.array_equal(self.forms, other.forms)

    def values(self, v):
        return np.asarray(v, dtype=float) @ self.forms.T

    def contains(self, v, tol=config.IDENTITY_TOL):
        v = np.asarray(v, dtype=float)
        scale = np.linalg.norm(v, axis=-1)
        return np.all(self.values(v) >= -tol * scale[..., None], axis=-1)

    def opposite(self):
        return HalfSpaceCone(-self.forms[:, ::-1])

    def act(self, w):
        """Image ``w·K``: ``v in w·K`` iff ``w^-1 v in K``."""
        winv = w.inverse()
        return HalfSpaceCone(np.stack([LinearForm(f).compose(winv).coeffs for f in self.forms]))

    def extreme_rays(self, tol=1e-9):
        """Unit extreme rays, by enumerating (d-1)-subsets of active walls.

        Only meant for the small ranks handled here (a handful of dimensions,
        a few dozen forms).
        """
        if self._rays is not None:
            return self._rays
        n = self.n
        basis = _cartan_basis(n)
        fb = self.forms @ basis
        d = n - 1
        found = []
        if d == 1:
            cand = np.array([basis[:, 0], -basis[:, 0]])
            found = [c for c in cand if np.all(self.forms @ c >= -tol)]
        else:
            for combo in itertools.combinations(range(len(fb)), d - 1):
                sub = fb[list(combo)]
                _, s, vt = np.linalg.svd(sub)
                if s[-1] < 1e-10:
                    continue
                r = basis @ vt[-1]
                for c in (r, -r):
                    if np.all(self.forms @ c >= -tol):
                        found.append(c)
        if not found:
            self._rays = np.zeros((0, n))
            return self._rays
        rays = normalize(np.array(found))
        _, first = np.unique(np.round(rays, 9), axis=0, return_index=True)
        self._rays = rays[np.sort(first)]
        return self._rays

    def angle_to(self, v):
        """Angle from ``v`` to the cone (0 inside)."""
        return angle_to_ray_cone(v, self.extreme_rays())

    def sample(self, count, rng, center=None, spread=0.3):
        """Random unit members, drawn around ``center`` and kept by rejection."""
        rays = self.extreme_rays()
        if center is None:
            center = normalize(rays.mean(axis=0))
        out = [r for r in rays]
        tries = 0
        while len(out) < count + len(rays) and tries < 200 * count:
            x = recenter(center + spread * rng.standard_normal(self.n))
            if np.linalg.norm(x) > 0 and self.contains(x, tol=0.0):
                out.append(normalize(x))
            tries += 1
        return np.array(out)

    def to_dict(self):
        d = {"schema": config.SCHEMA_VERSION, "forms": self.forms.tolist()}
        if self._rays is not None:
            d["rays"] = self._rays.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        if "forms" not in d:
            raise InvalidInputError("cone JSON needs a 'forms' field")
        unknown = set(d) - {"schema", "forms", "rays"}
        if unknown:
            raise InvalidInputError(f"unknown cone keys: {sorted(unknown)}")
        cone = cls(d["forms"], rays=d.get("rays"))
        raw = np.atleast_2d(np.asarray(d["forms"], dtype=float))
        if raw.shape == cone.forms.shape and np.allclose(raw, cone.forms, atol=1e-12, rtol=0):
            cone.forms = raw
        if d.get("rays") is not None:
            cone._rays = np.atleast_2d(np.asarray(d["rays"], dtype=float))
        return cone


def membership(cone, v, tol=config.IDENTITY_TOL):
    return bool(cone.contains(v, tol=tol)) if np.ndim(v) == 1 else cone.contains(v, tol=tol)


def _sphere_offsets(dim, count, rng):
    # unit vectors of R^dim used to sample an epsilon-sphere
    if dim == 0:
        return np.zeros((0, 0))
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    pts = rng.standard_normal((count * dim, dim))
    pts = np.concatenate([pts, np.eye(dim), -np.eye(dim)])
    return normalize(pts)


def _epsilon_neighbourhood(directions, eps, count, rng):
    """Directions plus samples at angle ``eps`` around each of them."""
    n = directions.shape[1]
    basis = _cartan_basis(n)
    out = [directions]
    for d in directions:
        # orthonormal basis of the tangent space at d
        proj = basis - np.outer(d, d @ basis)
        u, s, _ = np.linalg.svd(proj, full_matrices=False)
        tangent = u[:, s > 1e-9][:, : n - 2]
        offs = _sphere_offsets(tangent.shape[1], count, rng)
        if offs.size:
            out.append(np.cos(eps) * d + np.sin(eps) * offs @ tangent.T)
    return np.concatenate(out)


def _hull_forms(points, center):
    """Facet forms of the conical hull of ``points`` (all on the side of ``center``)."""
    n = points.shape[1]
    basis = _cartan_basis(n)
    b = basis - np.outer(center, center @ basis)
    u, s, _ = np.linalg.svd(b, full_matrices=False)
    b = u[:, s > 1e-9][:, : n - 2]
    heights = points @ center
    if np.any(heights <= 0):
        raise InfeasibleError("neighbourhood samples leave the half-space of the centre direction")
    y = (points @ b) / heights[:, None]
    k = b.shape[1]
    if k == 0:
        return np.atleast_2d(center)
    if k == 1:
        lo, hi = y.min(), y.max()
        return np.stack([hi * center - b[:, 0], b[:, 0] - lo * center])
    hull = ConvexHull(y)
    normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
    return -(normals @ b.T + offsets[:, None] * center[None, :])


def _separating_form(kernel_rays, targets, tol):
    """Form negative on ``kernel_rays`` and positive on ``targets``; returns (h, margin)."""
    n = targets.shape[1]
    basis = _cartan_basis(n)
    d = n - 1
    # variables: z (d coefficients in the Cartan basis), t; maximise t
    a_k = np.hstack([kernel_rays @ basis, np.ones((len(kernel_rays), 1))])
    a_t = np.hstack([-(targets @ basis), np.ones((len(targets), 1))])
    res = linprog(
        c=np.r_[np.zeros(d), -1.0],
        A_ub=np.vstack([a_k, a_t]),
        b_ub=np.zeros(len(kernel_rays) + len(targets)),
        bounds=[(-1.0, 1.0)] * d + [(None, 1.0)],
        method="highs",
    )
    if res.status != 0:
        return None, -np.inf
    h = basis @ res.x[:d]
    norm = np.linalg.norm(h)
    if norm == 0.0 or res.x[-1] <= tol:
        return None, float(res.x[-1])
    h = h / norm
    margin = min(float(np.min(targets @ h)), float(-np.max(kernel_rays @ h)))
    return h, margin


@dataclass
class AdmissibilityReport:
    """Post-hoc checks of a constructed cone; ``ok`` is their conjunction."""

    interior_margin: float
    interior: bool
    i_invariant: bool
    orbit_convex: bool
    wall_margins: dict
    walls_avoided: bool
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.interior and self.i_invariant and self.orbit_convex and self.walls_avoided


def verify_admissible(cone, d_cone, theta, eps, tol=1e-8, seed=0, test_vectors=1000, orbit_samples=40):
    """Check the four admissibility properties of ``cone`` around ``d_cone``.

    * interiority: every direction of ``d_cone`` satisfies every form by at
      least ``eps / 2`` (chamber walls of roots outside ``theta ∪ i(theta)``
      may be touched);
    * i-invariance: membership agrees on ``v`` and ``i(v)`` for random test
      vectors, half of them drawn near ``d_cone``;
    * orbit convexity: pairwise midpoints of the W-orbit of sampled members
      fall back into the orbit (exact membership);
    * wall margins: ``alpha > 0`` on every extreme ray for alpha in
      ``theta ∪ i(theta)``.
    """
    n = cone.n
    th = opposite_theta(theta, n)
    rng = np.random.default_rng(seed)
    dirs = d_cone.directions

    vals = dirs @ cone.forms.T
    loose = np.zeros(len(cone.forms), dtype=bool)
    for i in range(1, n):
        if i not in th:
            a = normalize(recenter(LinearForm.simple_root(i, n).coeffs))
            loose |= np.all(np.isclose(cone.forms, a, atol=1e-10), axis=1)
    strict = vals[:, ~loose]
    interior_margin = float(np.min(strict)) if strict.size else np.inf
    interior = interior_margin > eps / 2 - tol and bool(np.all(vals[:, loose] >= -tol))

    half = test_vectors // 2
    vs = recenter(rng.standard_normal((test_vectors - half, n)))
    near = dirs[rng.integers(len(dirs), size=half)] + 2 * eps * rng.standard_normal((half, n))
    vs = np.concatenate([vs, recenter(near)])
    inside = cone.contains(vs, tol=tol)
    i_inv = bool(np.array_equal(inside, cone.contains(opposition_involution(vs), tol=tol)))

    W = weyl_subgroup(th, n)
    members = cone.sample(orbit_samples, rng, center=normalize(dirs.mean(axis=0)), spread=2 * eps)
    orbit = np.concatenate([w(members) for w in W])
    i, j = np.triu_indices(len(orbit), k=1)
    mids = orbit[i] + orbit[j]
    mids = mids[np.linalg.norm(mids, axis=1) > 1e-12]
    in_orbit = np.zeros(len(mids), dtype=bool)
    for w in W:
        in_orbit |= cone.contains(w.inverse()(mids), tol=tol)
    orbit_convex = bool(np.all(in_orbit))

    rays = cone.extreme_rays()
    margins = {a: float(np.min(simple_root(a, rays))) if len(rays) else -np.inf for a in th}
    walls = all(m > tol for m in margins.values())
    return AdmissibilityReport(
        interior_margin,
        bool(interior),
        i_inv,
        orbit_convex,
        margins,
        walls,
        details={"test_vectors": test_vectors, "midpoints": int(len(mids)), "members": int(len(members))},
    )


def construct_admissible_cone(d_cone, theta, eps=0.05, *, circle_samples=16, tol=1e-8, seed=0):
    """Closed cone with ``d_cone`` in its interior, admissible for ``theta ∪ i(theta)``.

    Follows the usual construction ``C = D_eps ∩ a+ ∩ H ∩ i(H)``: ``D_eps`` is
    the conical hull of an eps-neighbourhood of the W-orbit of ``D ∪ i(D)``
    (so that W·C stays convex), and ``H`` is cut
    out by the W-translates of one separating form ``h_alpha`` per root,
    found by a linear program that pushes the face ``ker alpha ∩ a+`` to the
    negative side and the W-orbit of ``D_eps ∩ a+`` to the positive side.

    Raises
    ------
    InfeasibleError
        When ``D`` meets a wall ``ker alpha`` or the separation fails for the
        requested ``eps``; ``err.root`` names the index of alpha.
    """
    if not isinstance(d_cone, SampledCone):
        d_cone = SampledCone(d_cone)
    n = d_cone.n
    th = opposite_theta(theta, n)
    rng = np.random.default_rng(seed)
    dsym = d_cone.union(d_cone.opposite())
    if not dsym.chamber_flag:
        raise InvalidInputError("D must lie in the positive chamber")
    for a in th:
        if wall_margin(dsym, a) <= tol:
            raise InfeasibleError(f"D meets the wall ker alpha_{a}", root=a)
    if not theta_convexity(th, dsym):
        raise InfeasibleError("the W-orbit of D is not convex")
    W = weyl_subgroup(th, n)

    nbhd = _epsilon_neighbourhood(dsym.directions, eps, circle_samples, rng)
    nbhd = np.concatenate([nbhd, opposition_involution(nbhd)])
    nbhd_plus = nbhd[in_chamber(nbhd, tol=0.0)]
    targets = np.concatenate([w(nbhd_plus) for w in W])
    rays = chamber_rays(n)

    forms = [recenter(LinearForm.simple_root(i, n).coeffs) for i in range(1, n)]
    separating = {}
    for a in th:
        kernel = np.delete(rays, a - 1, axis=0)
        if len(kernel) == 0:
            continue
        h, margin = _separating_form(kernel, targets, tol)
        if h is None or margin <= tol:
            raise InfeasibleError(
                f"no form separates ker alpha_{a} from the eps={eps} neighbourhood of D", root=a
            )
        separating[a] = h
        for w in W:
            hw = LinearForm(h).compose(w)
            forms.append(hw.coeffs)
            forms.append(hw.opposite().coeffs)

    # the neighbourhood of the whole W-orbit keeps W·C convex
    orbit_nbhd = normalize(np.concatenate([w(nbhd) for w in W]))
    center = normalize(orbit_nbhd.mean(axis=0))
    hull = _hull_forms(orbit_nbhd, center)
    forms.extend(hull)
    forms.extend(-hull[:, ::-1])

    cone = HalfSpaceCone(np.array(forms))
    report = verify_admissible(cone, d_cone, th, eps, tol=tol, seed=seed)
    report.details["separating_forms"] = {a: h.tolist() for a, h in separating.items()}
    cone.report = report
    if not report.ok:
        raise InfeasibleError(f"constructed cone failed verification: {report}")
    return cone
