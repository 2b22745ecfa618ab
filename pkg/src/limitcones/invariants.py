"""Finite-radius estimators of limit cones, growth indicators, critical exponents
and Anosov certificates.

Every estimate carries the finite-scale parameters it was computed with (ball
radius, norm cutoff, cone half-angles, fit window). None of them is a
converged asymptotic value.

Counting functions ``T -> #{gamma : f(gamma) <= T}`` are only trusted up to
the *completeness level* ``T_c = min {f(gamma) : |gamma| = N}``: past that
level, elements of word length ``> N`` that are missing from the ball could
contribute. Rates are fitted by least squares on ``log count`` over the
trailing half ``[T_c / 2, T_c]`` unless a window is given.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import config
from .cartan import LinearForm, in_chamber, normalize_theta, p_theta, simple_root
from .cones import SampledCone, angle, normalize
from .errors import EmptyEstimateError, InvalidFormError, InvalidInputError
from .words import Ball, MarkedGroup, compute_ball

__all__ = [
    "LimitConeEstimate",
    "GrowthIndicatorEstimate",
    "CriticalExponentEstimate",
    "AnosovCertificate",
    "get_ball",
    "estimate_limit_cone",
    "estimate_growth_indicator",
    "estimate_critical_exponent",
    "anosov_certificate",
    "completeness_level",
    "fit_log_count",
]


def get_ball(source, radius=None, *, jordan=False, workers=1):
    """Return a :class:`Ball` from a group (computing it) or a ball (restricting it)."""
    if isinstance(source, Ball):
        if jordan and source.lam is None:
            return compute_ball(source.group, source.radius if radius is None else radius,
                                jordan=True, workers=workers)
        if radius is None or radius == source.radius:
            return source
        if radius > source.radius:
            raise InvalidInputError(f"ball has radius {source.radius}, asked for {radius}")
        return source.restrict(radius)
    if isinstance(source, MarkedGroup):
        if radius is None:
            raise InvalidInputError("a ball radius is required")
        return compute_ball(source, radius, jordan=jordan, workers=workers)
    raise InvalidInputError(f"expected a MarkedGroup or Ball, got {type(source).__name__}")


@dataclass
class LimitConeEstimate:
    cone: SampledCone
    ball_radius: int
    norm_cutoff: float
    count_used: int
    kind: str = "cartan"
    theta: tuple | None = None

    def to_dict(self):
        return {
            "schema": config.SCHEMA_VERSION,
            "kind": self.kind,
            "theta": None if self.theta is None else list(self.theta),
            "ball_radius": self.ball_radius,
            "norm_cutoff": self.norm_cutoff,
            "count_used": self.count_used,
            "directions": self.cone.directions.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            SampledCone(d["directions"]),
            int(d["ball_radius"]),
            float(d["norm_cutoff"]),
            int(d["count_used"]),
            d.get("kind", "cartan"),
            None if d.get("theta") is None else tuple(d["theta"]),
        )


def estimate_limit_cone(source, radius=None, cutoff=1.0, kind="cartan", theta=None, *, workers=1):
    """Directions ``v / |v|`` of the projections of ball elements with ``|v| >= cutoff``.

    Parameters
    ----------
    source : MarkedGroup or Ball
    radius : int
        Ball radius ``N`` (optional when a ball is passed).
    cutoff : float
        Norm cutoff ``R_min > 0``.
    kind : {"cartan", "jordan", "theta"}
        Which projection: mu, lambda (zero vectors discarded), or
        ``p_theta ∘ mu``.
    theta : iterable of int
        Required for ``kind="theta"``.
    """
    if kind not in ("cartan", "jordan", "theta"):
        raise InvalidInputError(f"unknown limit cone kind {kind!r}")
    if not cutoff > 0:
        raise InvalidInputError("norm cutoff must be positive")
    if radius is not None and radius < 1:
        raise InvalidInputError("ball radius must be at least 1")
    ball = get_ball(source, radius, jordan=(kind == "jordan"), workers=workers)
    if kind == "jordan":
        vecs = ball.lam
    elif kind == "theta":
        if theta is None:
            raise InvalidInputError("kind='theta' needs theta")
        theta = normalize_theta(theta, ball.group.n)
        vecs = p_theta(theta, ball.mu)
    else:
        vecs = ball.mu
    norms = np.linalg.norm(vecs, axis=1)
    keep = (norms >= cutoff) & (norms > config.IDENTITY_TOL)
    if not np.any(keep):
        raise EmptyEstimateError(
            f"no element of the radius-{ball.radius} ball has norm >= {cutoff}; try a smaller cutoff"
        )
    cone = SampledCone(vecs[keep])
    return LimitConeEstimate(cone, ball.radius, float(cutoff), int(keep.sum()), kind,
                             theta if kind == "theta" else None)


def completeness_level(values, lengths, radius):
    """``min f(gamma)`` over the outermost sphere ``|gamma| = radius``."""
    outer = lengths == radius
    if radius < 1 or not np.any(outer):
        raise InvalidInputError("the ball has no outer sphere")
    return float(np.min(values[outer]))


def fit_log_count(values, window, grid=40):
    """Least-squares slope of ``log #{values <= T}`` over ``T`` in ``window``.

    Returns ``(slope, intercept, rms_residual, T, counts)``; ``slope`` is nan
    when fewer than two grid points carry a positive count.
    """
    lo, hi = window
    ts = np.linspace(lo, hi, grid)
    counts = np.searchsorted(np.sort(values), ts, side="right")
    pos = counts > 0
    if pos.sum() < 2:
        return np.nan, np.nan, np.nan, ts, counts
    y = np.log(counts[pos])
    coef = np.polyfit(ts[pos], y, 1)
    resid = y - np.polyval(coef, ts[pos])
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2))), ts, counts


@dataclass
class GrowthIndicatorEstimate:
    direction: np.ndarray
    scale: float
    theta: tuple
    cone_half_angles: list
    slopes: list
    residuals: list
    window_counts: list
    reliable: list
    value: float
    half_angle_used: float | None
    fit_window: tuple
    ball_radius: int
    tables: dict = field(default_factory=dict, repr=False)

    @property
    def is_reliable(self):
        return self.half_angle_used is not None

    @property
    def eps_trend(self):
        """Slopes ordered by decreasing half-angle, as ``(eps, slope)`` pairs."""
        return list(zip(self.cone_half_angles, self.slopes))

    def to_dict(self):
        return {
            "direction": self.direction.tolist(),
            "scale": self.scale,
            "theta": list(self.theta),
            "cone_half_angles": list(self.cone_half_angles),
            "slopes": [None if np.isnan(s) else s for s in self.slopes],
            "residuals": [None if np.isnan(r) else r for r in self.residuals],
            "window_counts": list(self.window_counts),
            "reliable": list(self.reliable),
            "value": None if np.isnan(self.value) else self.value,
            "half_angle_used": self.half_angle_used,
            "fit_window": list(self.fit_window),
            "ball_radius": self.ball_radius,
            "norm": "euclidean",
        }


def estimate_growth_indicator(source, theta, v, eps_list=config.EPSILON_LIST, radius=None, *,
                              window=None, min_count=config.MIN_CONE_COUNT, grid=40, workers=1):
    """Growth rate of ``mu_theta`` in shrinking angular cones about ``v``.

    For each half-angle ``eps`` the counting function
    ``M_eps(T) = #{gamma : angle(mu_theta(gamma), v) < eps, |mu_theta(gamma)| <= T}``
    is fitted by ``log M_eps(T) ≈ a + s T`` over the window. The estimate is
    ``|v| * s`` at the smallest ``eps`` whose count at the window start is
    at least ``min_count``; if none qualifies the largest ``eps`` is used
    and the estimate is flagged unreliable.
    """
    ball = get_ball(source, radius, workers=workers)
    n = ball.group.n
    theta = normalize_theta(theta, n)
    v = np.asarray(v, dtype=float)
    scale = float(np.linalg.norm(v))
    if v.shape != (n,) or scale == 0.0:
        raise InvalidInputError("v must be a non-zero vector of the Cartan subspace")
    if abs(v.sum()) > config.IDENTITY_TOL * scale or not in_chamber(v, tol=config.IDENTITY_TOL * scale):
        raise InvalidInputError("v must lie in the positive chamber")
    if not np.allclose(p_theta(theta, v), v, atol=config.IDENTITY_TOL * scale):
        raise InvalidInputError("v must lie in a_theta")
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidInputError("eps_list must be strictly decreasing")
    u = v / scale

    mt = p_theta(theta, ball.mu)
    norms = np.linalg.norm(mt, axis=1)
    if window is None:
        tc = completeness_level(norms, ball.lengths, ball.radius)
        window = (tc / 2.0, tc)
    nonzero = norms > config.IDENTITY_TOL
    ang = np.full(len(norms), np.inf)
    ang[nonzero] = angle(mt[nonzero], u[None, :])

    slopes, resids, counts_lo, reliable, tables = [], [], [], [], {}
    for eps in eps_list:
        r = norms[ang < eps]
        s, _, res, ts, counts = fit_log_count(r, window, grid)
        slopes.append(s)
        resids.append(res)
        counts_lo.append(int(counts[0]))
        reliable.append(bool(counts[0] >= min_count and np.isfinite(s)))
        tables[eps] = (ts, counts)
    used = None
    for eps, ok in zip(eps_list, reliable):
        if ok:
            used = eps
    pick = eps_list.index(used) if used is not None else 0
    value = scale * slopes[pick] if np.isfinite(slopes[pick]) else np.nan
    return GrowthIndicatorEstimate(
        u, scale, theta, eps_list, slopes, resids, counts_lo, reliable, float(value), used,
        (float(window[0]), float(window[1])), ball.radius, tables,
    )


@dataclass
class CriticalExponentEstimate:
    form: object
    value: float
    fit_window: tuple
    residual: float
    poincare_exponent: float
    poincare_bracket: tuple
    poincare_sums: dict
    ball_radius: int
    table: tuple = field(default=None, repr=False)

    def to_dict(self):
        form = self.form if isinstance(self.form, str) else self.form.coeffs.tolist()
        return {
            "form": form,
            "value": self.value,
            "fit_window": list(self.fit_window),
            "residual": self.residual,
            "poincare_exponent": self.poincare_exponent,
            "poincare_bracket": list(self.poincare_bracket),
            "poincare_sums": {f"{s:.6g}": p for s, p in self.poincare_sums.items()},
            "ball_radius": self.ball_radius,
        }


def _form_values(form, mu):
    if isinstance(form, str):
        if form != "norm":
            raise InvalidInputError(f"unknown form {form!r}")
        return np.linalg.norm(mu, axis=1)
    if not isinstance(form, LinearForm):
        form = LinearForm(form)
    if form.n != mu.shape[1]:
        raise InvalidInputError("form and group have different sizes")
    return form(mu)


def _sphere_log_sum(values, s):
    # log sum exp(-s * values), stable
    x = -s * values
    m = np.max(x)
    return m + np.log(np.sum(np.exp(x - m)))


def _sphere_ratio_root(v_outer, v_inner, s_max=1e3):
    """Root in ``s`` of ``log S_outer(s) - log S_inner(s)``."""
    def g(s):
        return _sphere_log_sum(v_outer, s) - _sphere_log_sum(v_inner, s)

    if g(0.0) <= 0:
        return 0.0
    hi = 1.0
    while g(hi) > 0:
        hi *= 2.0
        if hi > s_max:
            return np.inf
    return float(brentq(g, 0.0, hi, xtol=1e-12))


def estimate_critical_exponent(source, form, radius=None, *, window=None, grid=40, workers=1):
    """Exponential growth rate of ``#{gamma : phi(mu(gamma)) <= T}``.

    Parameters
    ----------
    form : LinearForm, array_like or "norm"
        ``phi``; must be positive on the sampled directions of words of length
        at least ``N / 2``. ``"norm"`` counts by the Euclidean norm of mu.

    Notes
    -----
    Alongside the fitted slope, the Poincaré series is examined directly: the
    sphere sums ``S_m(s) = sum_{|gamma| = m} exp(-s phi(mu(gamma)))`` grow in
    ``m`` for ``s`` below the exponent and decay above it, so the root of
    ``log S_N(s) = log S_{N-1}(s)`` is an independent estimate. The bracket is
    the pair of roots for the spheres ``(N-2, N-1)`` and ``(N-1, N)``.
    """
    ball = get_ball(source, radius, workers=workers)
    N = ball.radius
    if N < 2:
        raise InvalidInputError("critical exponent needs a ball radius of at least 2")
    vals = _form_values(form, ball.mu)
    tail = ball.lengths >= max(1, N // 2)
    bad = int(np.sum(vals[tail] <= 0))
    if bad:
        raise InvalidFormError(f"form is non-positive on {bad} elements of word length >= {max(1, N // 2)}")
    if window is None:
        tc = completeness_level(vals, ball.lengths, N)
        window = (tc / 2.0, tc)
    slope, _, resid, ts, counts = fit_log_count(vals, window, grid)

    spheres = [vals[ball.lengths == m] for m in range(N + 1)]
    root = _sphere_ratio_root(spheres[N], spheres[N - 1])
    prev = _sphere_ratio_root(spheres[N - 1], spheres[N - 2]) if N >= 3 else np.nan
    bracket = tuple(sorted((float(prev), float(root))))
    sums = {}
    if np.isfinite(slope):
        for f in (0.8, 0.9, 1.0, 1.1, 1.2):
            s = f * slope
            sums[s] = float(np.exp(_sphere_log_sum(vals, s)))
    return CriticalExponentEstimate(
        form, float(slope), (float(window[0]), float(window[1])), float(resid), float(root), bracket,
        sums, N, (ts, counts),
    )


@dataclass
class AnosovCertificate:
    theta: tuple
    slopes: dict
    intercepts: dict
    tail_slopes: dict
    intercept_bound: float
    ball_radius: int

    @property
    def min_slope(self):
        return min(self.slopes.values())

    @property
    def certified(self):
        return self.min_slope > 0

    def to_dict(self):
        return {
            "theta": list(self.theta),
            "slopes": {str(k): v for k, v in self.slopes.items()},
            "intercepts": {str(k): v for k, v in self.intercepts.items()},
            "tail_slopes": {str(k): v for k, v in self.tail_slopes.items()},
            "intercept_bound": self.intercept_bound,
            "min_slope": self.min_slope,
            "ball_radius": self.ball_radius,
        }


def anosov_certificate(source, theta, radius=None, *, intercept=0.0, workers=1):
    """Uniform linear lower bounds ``alpha(mu(gamma)) >= c |gamma| - C``.

    For each root alpha in ``theta`` the largest ``c`` valid over the whole
    ball with ``C = intercept`` is the lower envelope
    ``c = min_gamma (alpha(mu(gamma)) + C) / |gamma|``; with the default
    ``C = 0`` this is the infimum of the secant slopes from the identity. The
    tightest intercept actually needed by that ``c`` is reported too, along
    with the secant slope of the sphere minima over the outer half of the
    ball as a diagnostic.
    """
    ball = get_ball(source, radius, workers=workers)
    N = ball.radius
    if N < 4:
        raise InvalidInputError("Anosov certificate needs a ball radius of at least 4")
    theta = normalize_theta(theta, ball.group.n)
    x = ball.lengths
    pos = x > 0
    slopes, intercepts, tails = {}, {}, {}
    half = (N + 1) // 2
    for a in theta:
        y = simple_root(a, ball.mu)
        c = float(np.min((y[pos] + intercept) / x[pos]))
        slopes[a] = c
        intercepts[a] = float(max(0.0, np.max(c * x[pos] - y[pos])))
        mins = [float(np.min(y[x == m])) for m in range(N + 1)]
        tails[a] = (mins[N] - mins[half]) / (N - half)
    return AnosovCertificate(theta, slopes, intercepts, tails, float(intercept), N)
