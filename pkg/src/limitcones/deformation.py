"""Deformation experiments: families of representations of a fixed free group.

A :class:`RepresentationFamily` perturbs chosen generators of a base group by
left multiplication with ``exp(t X)``. Experiments estimate limit cones (and
optionally growth indicators) along a schedule of ``t`` values and compare
them with the ``t = 0`` estimate at each ball radius of a ladder.

Two built-in families:

* the symmetric-cube image of an SL(2) Schottky group, a Borel-Anosov group
  whose limit cone is the single ray through ``(3, 1, -1, -3)``;
* a Schottky group inside the SL(3) corner block of SL(4), whose limit cone
  lies on the folded plane ``V1 ∪ V2``, perturbed out of the block.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import config
from .cartan import cartan_projection, normalize_theta, p_theta, two_rho
from .cones import (
    SampledCone,
    angle,
    directed_hausdorff,
    in_conical_hull,
    normalize,
)
from .errors import BudgetExceededError, InvalidInputError
from .invariants import (
    completeness_level,
    estimate_growth_indicator,
    estimate_limit_cone,
)
from .subgroups import V0_RAY, folded_plane_sl3_in_sl4
from .words import MarkedGroup, ball_size, compute_ball

__all__ = [
    "symmetric_power",
    "build_sym3_schottky",
    "RepresentationFamily",
    "build_sym3_family",
    "build_section7_family",
    "random_traceless",
    "FoldedNeighbourhood",
    "ContinuityRow",
    "ContinuityReport",
    "run_continuity_experiment",
    "GrowthContinuityTable",
    "run_growth_continuity",
    "hull_escape",
    "is_loxodromic",
    "anchor_direction",
    "SECTION7_DEFAULTS",
]


def symmetric_power(g, m=3):
    """Action of ``g`` in SL(2) on binary forms of degree ``m``.

    The basis ``sqrt(C(m, k)) x^(m-k) y^k`` is used, in which rotations act
    orthogonally, so ``mu`` of the image is ``(m, m-2, ..., -m) * mu_1(g)``.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (2, 2):
        raise InvalidInputError("symmetric_power takes a 2x2 matrix")
    (a, b), (c, d) = g
    out = np.zeros((m + 1, m + 1))
    for k in range(m + 1):
        # image of x^(m-k) y^k with x -> a x + c y, y -> b x + d y,
        # coefficients indexed by the power of y
        poly = np.array([1.0])
        for _ in range(m - k):
            poly = np.convolve(poly, [a, c])
        for _ in range(k):
            poly = np.convolve(poly, [b, d])
        out[:, k] = poly
    scale = np.sqrt([math.comb(m, j) for j in range(m + 1)])
    return out * scale[None, :] / scale[:, None]


def _rotation(phi):
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def build_sym3_schottky(translation_lengths=(3.0, 3.0), separation=math.pi / 4):
    """Symmetric-cube image of a two-generator SL(2) Schottky group.

    The first generator is ``diag(e^(l/2), e^(-l/2))`` (translation length
    ``l`` in the hyperbolic plane). The second is the same kind of element
    conjugated by a rotation through ``separation``; ``pi/4`` puts its fixed
    points as far as possible from those of the first.
    """
    l1, l2 = (float(x) for x in translation_lengths)
    if l1 <= 0 or l2 <= 0:
        raise InvalidInputError("translation lengths must be positive")
    a = np.diag([math.exp(l1 / 2), math.exp(-l1 / 2)])
    r = _rotation(separation)
    b = r @ np.diag([math.exp(l2 / 2), math.exp(-l2 / 2)]) @ r.T
    return MarkedGroup([symmetric_power(a), symmetric_power(b)])


def random_traceless(n, seed):
    """Seeded random traceless ``n x n`` matrix with unit Frobenius norm."""
    x = np.random.default_rng(seed).standard_normal((n, n))
    x -= np.trace(x) / n * np.eye(n)
    return x / np.linalg.norm(x)


def is_loxodromic(g, tol=1e-6):
    """Whether the eigenvalue moduli of ``g`` are pairwise distinct (log gap > tol)."""
    logs = np.sort(np.log(np.abs(np.linalg.eigvals(g))))
    return bool(np.all(np.diff(logs) > tol))


@dataclass
class RepresentationFamily:
    """Perturbations ``g_j -> exp(t X_j) g_j`` of some generators of ``base``."""

    base: MarkedGroup
    perturbations: dict
    schedule: tuple
    name: str = "custom"
    params: dict = field(default_factory=dict)
    loxodromic: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.base.n
        for j, x in self.perturbations.items():
            if not 0 <= j < self.base.rank:
                raise InvalidInputError(f"no generator with index {j}")
            x = np.asarray(x, dtype=float)
            if x.shape != (n, n):
                raise InvalidInputError("perturbation directions must be n x n")
            if abs(np.trace(x)) > config.IDENTITY_TOL:
                raise InvalidInputError("perturbation directions must be traceless")
        self.schedule = tuple(float(t) for t in self.schedule)

    def generators_at(self, t):
        if t == 0:
            return list(self.base.generators)
        gens = []
        for j, g in enumerate(self.base.generators):
            if j in self.perturbations:
                h = expm(t * np.asarray(self.perturbations[j], dtype=float)) @ g
                h = h / np.abs(np.linalg.det(h)) ** (1.0 / len(h))
                gens.append(h)
            else:
                gens.append(g)
        return gens

    def at(self, t):
        return self.base.with_generators(self.generators_at(t))

    def check_loxodromic(self, indices=None):
        """Record, per ``t``, whether each perturbed generator is loxodromic."""
        indices = sorted(self.perturbations) if indices is None else indices
        self.loxodromic = {
            t: all(is_loxodromic(self.generators_at(t)[j]) for j in indices) for t in self.schedule
        }
        bad = [t for t, ok in self.loxodromic.items() if t != 0 and not ok]
        if bad:
            warnings.warn(f"perturbed generators are not loxodromic at t = {bad}; try another seed",
                          stacklevel=2)
        return self.loxodromic

    def to_dict(self):
        return {
            "schema": config.SCHEMA_VERSION,
            "name": self.name,
            "params": self.params,
            "schedule": list(self.schedule),
            "group": self.base.to_dict(),
            "perturbations": {str(j): np.asarray(x).tolist() for j, x in self.perturbations.items()},
            "loxodromic": {repr(t): v for t, v in self.loxodromic.items()},
        }


def build_sym3_family(translation_lengths=(3.0, 3.0), separation=math.pi / 4,
                      schedule=(0.1, 0.05, 0.02, 0.01, 0.0), seed=0):
    """Symmetric-cube Schottky group with its second generator perturbed."""
    base = build_sym3_schottky(translation_lengths, separation)
    x = random_traceless(4, seed)
    fam = RepresentationFamily(
        base, {1: x}, schedule, "sym3-schottky",
        {"translation_lengths": list(translation_lengths), "separation": separation, "seed": seed},
    )
    fam.check_loxodromic()
    return fam


def _block_rotation(angles=(0.7, 0.5, 0.3)):
    p, q, r = angles
    k = np.array([[0.0, -p, q], [p, 0.0, -r], [-q, r, 0.0]])
    g = np.eye(4)
    g[:3, :3] = expm(k)
    return g


SECTION7_DEFAULTS = {
    "v": (4.0, 1.0, -5.0),
    "w1": 3.0,
    "conjugator_angles": (0.7, 0.5, 0.3),
    "schedule": (0.1, 0.03, 0.01, 0.003, 0.001, 0.0),
    "seed": 0,
}


def build_section7_family(v=SECTION7_DEFAULTS["v"], w1=SECTION7_DEFAULTS["w1"], conjugator=None,
                          schedule=SECTION7_DEFAULTS["schedule"], seed=SECTION7_DEFAULTS["seed"]):
    """Two-generator group in the SL(3) corner block, deformed out of the block.

    ``a = diag(e^v1, e^v2, e^v3, 1)`` and ``b = g diag(e^w1, 1, e^-w1, 1) g^-1``
    with ``g`` in the block (a fixed generic rotation by default). ``b`` is
    perturbed to ``exp(t X) b`` with ``X`` a seeded random traceless matrix.
    ``b`` itself has a repeated eigenvalue modulus; the loxodromic check
    of each ``b_t`` is recorded in ``family.loxodromic``.
    """
    v1, v2, v3 = (float(x) for x in v)
    if not (v1 > v2 > 0 > v3) or abs(v1 + v2 + v3) > config.IDENTITY_TOL:
        raise InvalidInputError("need v1 > v2 > 0 > v3 with v1 + v2 + v3 = 0")
    if not w1 > 0:
        raise InvalidInputError("need w1 > 0")
    if any(t < 0 for t in schedule):
        raise InvalidInputError("schedule values must be non-negative")
    if conjugator is None:
        g = _block_rotation(SECTION7_DEFAULTS["conjugator_angles"])
    else:
        g = np.asarray(conjugator, dtype=float)
        if g.shape == (3, 3):
            big = np.eye(4)
            big[:3, :3] = g
            g = big
        if g.shape != (4, 4) or np.abs(g[3, :3]).max() > 0 or np.abs(g[:3, 3]).max() > 0 or g[3, 3] != 1:
            raise InvalidInputError("the conjugator must lie in the SL(3) block")
    a = np.diag([math.exp(v1), math.exp(v2), math.exp(v3), 1.0])
    b = g @ np.diag([math.exp(w1), 1.0, math.exp(-w1), 1.0]) @ np.linalg.inv(g)
    x = random_traceless(4, seed)
    fam = RepresentationFamily(
        MarkedGroup([a, b]), {1: x}, schedule, "sl3-block-deformation",
        {"v": [v1, v2, v3], "w1": w1, "conjugator": g.tolist(), "seed": seed},
    )
    fam.check_loxodromic()
    return fam


class FoldedNeighbourhood:
    """Open neighbourhood ``C1 ∪ C2`` of the folded plane ``V1 ∪ V2``.

    With ``d_i`` the angle to ``V_i``, ``C_i = {d_i < kappa * d_j}``
    together with the common ray ``V0``. The pieces only meet along ``V0``,
    and for small ``kappa`` the midpoint of a unit vector of ``C1 - V0`` and
    one of ``C2 - V0`` lies outside both.
    """

    def __init__(self, kappa=config.FOLD_KAPPA, ray_tol=1e-8):
        if not 0 < kappa < 1:
            raise InvalidInputError("kappa must lie in (0, 1)")
        self.kappa = float(kappa)
        self.ray_tol = float(ray_tol)
        self.plane = folded_plane_sl3_in_sl4(samples=3)

    def distances(self, v):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        d1 = np.atleast_1d(self.plane.exact_pieces[0].angle_to(v))
        d2 = np.atleast_1d(self.plane.exact_pieces[1].angle_to(v))
        return d1, d2

    def piece(self, v):
        """0 outside, 1 or 2 for the piece containing ``v``, 3 on ``V0``."""
        v = np.atleast_2d(np.asarray(v, dtype=float))
        d1, d2 = self.distances(v)
        on_v0 = angle(normalize(v), V0_RAY[None, :]) <= self.ray_tol
        in1 = (d1 <= self.ray_tol) | (d1 < self.kappa * d2)
        in2 = (d2 <= self.ray_tol) | (d2 < self.kappa * d1)
        out = np.where(in1, 1, np.where(in2, 2, 0))
        return np.where(on_v0, 3, out)

    def contains(self, v):
        return self.piece(v) > 0

    def to_dict(self):
        return {"kappa": self.kappa, "ray_tol": self.ray_tol}


def hull_escape(cone, anchor, nbhd, tol=config.ANGULAR_TOL):
    """Midpoint test on an estimated cone.

    ``u`` is the direction of ``cone`` in ``C2 - V0`` farthest from ``V0``;
    ``w`` is the midpoint of ``u`` and the unit ``anchor`` (``mu(a)`` for
    the counterexample). Reports whether ``w`` is outside ``nbhd`` and inside
    the conical hull of ``cone``, plus how many raw directions of ``cone``
    already lie outside ``nbhd``.
    """
    d = cone.directions
    pieces = nbhd.piece(d)
    raw_out = pieces == 0
    cand = np.flatnonzero(pieces == 2)
    res = {
        "u": None,
        "w": None,
        "w_outside": False,
        "w_in_hull": False,
        "hull_escape": False,
        "raw_outside": int(raw_out.sum()),
        "raw_outside_max_angle": 0.0,
    }
    if raw_out.any():
        d1, d2 = nbhd.distances(d[raw_out])
        res["raw_outside_max_angle"] = float(np.max(np.minimum(d1, d2)))
    if cand.size == 0:
        return res
    far = cand[np.argmax(angle(d[cand], V0_RAY[None, :]))]
    u = d[far]
    w = normalize(0.5 * (u + normalize(anchor)))
    res["u"] = u.tolist()
    res["w"] = w.tolist()
    res["w_outside"] = bool(nbhd.piece(w)[0] == 0)
    res["w_in_hull"] = bool(in_conical_hull(cone, w, tol))
    res["hull_escape"] = res["w_outside"] and res["w_in_hull"]
    return res


@dataclass
class ContinuityRow:
    t: float
    radius: int
    count_used: int
    escape: float
    loss: float
    hausdorff: float
    lsc_defect: float
    hull: dict | None = None

    def to_dict(self):
        d = {k: getattr(self, k) for k in
             ("t", "radius", "count_used", "escape", "loss", "hausdorff", "lsc_defect")}
        if self.hull is not None:
            d.update({f"hull_{k}": v for k, v in self.hull.items()})
        return d


@dataclass
class ContinuityReport:
    family: str
    cutoff: float
    ladder: tuple
    schedule: tuple
    rows: list
    lsc_eps: float
    complete: bool = True
    error: str | None = None
    cones: dict = field(default_factory=dict, repr=False)

    def row(self, t, radius):
        for r in self.rows:
            if r.t == t and r.radius == radius:
                return r
        raise KeyError((t, radius))

    def distances(self, radius):
        """``{t: hausdorff}`` at one radius."""
        return {r.t: r.hausdorff for r in self.rows if r.radius == radius}

    def to_dict(self):
        return {
            "schema": config.SCHEMA_VERSION,
            "family": self.family,
            "cutoff": self.cutoff,
            "ladder": list(self.ladder),
            "schedule": list(self.schedule),
            "lsc_eps": self.lsc_eps,
            "complete": self.complete,
            "error": self.error,
            "rows": [r.to_dict() for r in self.rows],
        }


def run_continuity_experiment(family, ladder=config.N_LADDER, cutoff=1.0, *, lsc_eps=0.05,
                              neighbourhood=None, anchor=None, budget=config.ELEMENT_BUDGET,
                              workers=1, keep_cones=False):
    """Compare estimated limit cones along ``family.schedule`` with ``t = 0``.

    For each radius ``N`` and each ``t``: ``escape`` is the directed
    Hausdorff distance from the ``t`` estimate into the ``t = 0`` estimate,
    ``loss`` the reverse, and ``lsc_defect = max(0, loss - lsc_eps)`` how
    far the ``t = 0`` directions fall outside the ``lsc_eps``-neighbourhood
    of the ``t`` estimate. When ``neighbourhood`` (and the ``anchor``
    direction for the midpoint test) are given, :func:`hull_escape` is
    recorded per row.

    Only the largest radius is enumerated per ``t``; smaller radii are
    restrictions of that ball. If the element budget would be exceeded,
    rows already completed are returned with ``complete=False``.
    """
    ladder = tuple(sorted(int(n) for n in ladder))
    schedule = tuple(family.schedule)
    if 0.0 not in schedule:
        schedule = schedule + (0.0,)
    top = ladder[-1]
    rows, cones = [], {}
    report = ContinuityReport(family.name, float(cutoff), ladder, schedule, rows, float(lsc_eps),
                              cones=cones)
    per_ball = ball_size(family.base.rank, top)
    try:
        if per_ball * len(schedule) > budget:
            raise BudgetExceededError(
                f"{len(schedule)} balls of {per_ball} elements exceed the budget of {budget}"
            )
        balls = {0.0: compute_ball(family.at(0.0), top, workers=workers, budget=budget)}
        base = {n: estimate_limit_cone(balls[0.0], n, cutoff) for n in ladder}
        for t in schedule:
            ball = balls[0.0] if t == 0 else compute_ball(family.at(t), top, workers=workers, budget=budget)
            for n in ladder:
                est = base[n] if t == 0 else estimate_limit_cone(ball, n, cutoff)
                esc = directed_hausdorff(est.cone, base[n].cone)
                loss = directed_hausdorff(base[n].cone, est.cone)
                hull = None
                if neighbourhood is not None and anchor is not None:
                    hull = hull_escape(est.cone, anchor, neighbourhood)
                rows.append(ContinuityRow(t, n, est.count_used, esc, loss, max(esc, loss),
                                          max(0.0, loss - lsc_eps), hull))
                if keep_cones:
                    cones[(t, n)] = est
    except BudgetExceededError as exc:
        report.complete = False
        report.error = str(exc)
    return report


@dataclass
class GrowthContinuityTable:
    theta: tuple
    directions: np.ndarray
    schedule: tuple
    radius: int
    fit_window: tuple
    values: np.ndarray
    reliable: np.ndarray
    bound: np.ndarray

    def max_delta(self):
        """``{t: max_v |psi_t(v) - psi_0(v)|}``."""
        i0 = self.schedule.index(0.0)
        return {t: float(np.nanmax(np.abs(self.values[i] - self.values[i0])))
                for i, t in enumerate(self.schedule)}

    @property
    def within_bound(self):
        """Every cell obeys ``psi <= 2 rho + 0.1``."""
        v = self.values
        return bool(np.all(np.isnan(v) | (v <= self.bound[None, :] + 0.1)))

    def to_dict(self):
        return {
            "theta": list(self.theta),
            "directions": self.directions.tolist(),
            "schedule": list(self.schedule),
            "radius": self.radius,
            "fit_window": list(self.fit_window),
            "values": [[None if np.isnan(x) else float(x) for x in row] for row in self.values],
            "reliable": self.reliable.tolist(),
            "two_rho": self.bound.tolist(),
        }


def run_growth_continuity(family, theta, directions, radius, *, eps_list=config.EPSILON_LIST,
                          workers=1, balls=None):
    """Growth-indicator estimates per ``(t, v)`` with one shared fit window.

    The window is ``[T/2, T]`` with ``T`` the smallest completeness level
    over the schedule, so every cell counts over the same norm range.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    schedule = tuple(family.schedule)
    if 0.0 not in schedule:
        schedule = schedule + (0.0,)
    balls = dict(balls or {})
    for t in schedule:
        if t not in balls:
            balls[t] = compute_ball(family.at(t), radius, workers=workers)
    theta = normalize_theta(theta, family.base.n)
    levels = [
        completeness_level(np.linalg.norm(p_theta(theta, balls[t].mu), axis=1), balls[t].lengths, radius)
        for t in schedule
    ]
    tc = min(levels)
    window = (tc / 2.0, tc)
    vals = np.full((len(schedule), len(directions)), np.nan)
    rel = np.zeros_like(vals, dtype=bool)
    for i, t in enumerate(schedule):
        for j, v in enumerate(directions):
            est = estimate_growth_indicator(balls[t], theta, v, eps_list, window=window)
            vals[i, j] = est.value
            rel[i, j] = est.is_reliable
    return GrowthContinuityTable(theta, directions, schedule, radius, window, vals, rel,
                                 np.array([two_rho(v) for v in directions]))


def anchor_direction(family):
    """Unit ``mu`` of the first generator."""
    return normalize(cartan_projection(family.base.generators[0]))

