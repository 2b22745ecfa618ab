"""Cartan and Jordan projections, roots, weights and Weyl group of SL(n, R).

The Cartan subspace is the space of zero-sum vectors in R^n and the positive
Weyl chamber is the set of such vectors with non-increasing coordinates. Roots
and weights are indexed from 1 as in the usual notation ``alpha_1, ...,
alpha_{n-1}``. A subset ``theta`` of simple roots is any iterable of such
indices.

Vectors of the Cartan subspace are plain ``numpy`` arrays; every function
accepts a stack of vectors along the leading axes where that makes sense.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from . import config
from .errors import InvalidInputError

__all__ = [
    "AmbientGroup",
    "LinearForm",
    "WeylElement",
    "cartan_projection",
    "cartan_projection_batch",
    "jordan_projection",
    "exterior_power",
    "mu_from_exterior_logs",
    "opposition_involution",
    "opposite_theta",
    "normalize_theta",
    "theta_blocks",
    "p_theta",
    "simple_root",
    "two_rho",
    "fundamental_weight",
    "weyl_action",
    "fold_to_chamber",
    "weyl_subgroup",
    "wall_reflection",
    "random_sl",
    "recenter",
    "in_chamber",
]


@dataclass(frozen=True)
class AmbientGroup:
    """SL(n, R); ``rank`` is n - 1."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidInputError(f"SL(n) needs integer n >= 2, got {self.n!r}")

    @property
    def rank(self) -> int:
        return self.n - 1

    def check_vector(self, v, tol=config.IDENTITY_TOL):
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.n:
            raise InvalidInputError(f"expected vectors of length {self.n}, got shape {v.shape}")
        if np.any(np.abs(v.sum(axis=-1)) > tol * max(1.0, float(np.max(np.abs(v), initial=0.0)))):
            raise InvalidInputError("Cartan vectors must have zero coordinate sum")
        return v


def recenter(v):
    """Subtract the coordinate mean so the result lies exactly in the Cartan subspace."""
    v = np.asarray(v, dtype=float)
    return v - v.mean(axis=-1, keepdims=True)


def in_chamber(v, tol=config.IDENTITY_TOL):
    """True where the coordinates of ``v`` are non-increasing (within ``tol``)."""
    v = np.asarray(v, dtype=float)
    return np.all(np.diff(v, axis=-1) <= tol, axis=-1)


def _as_square(g):
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 2:
        raise InvalidInputError(f"expected a square matrix of size >= 2, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise InvalidInputError("matrix has non-finite entries")
    return g


def cartan_projection(g, *, logscale=None, tol=config.DET_TOL):
    """Cartan projection: sorted log singular values, recentered to zero sum.

    Parameters
    ----------
    g : (n, n) array_like
        A matrix of SL(n, R). If ``logscale`` is given the true matrix is
        ``exp(logscale) * g`` and the determinant check is skipped.
    logscale : float, optional
        Log of a scalar factor multiplying ``g``.
    tol : float
        Accepted deviation ``|det g - 1|``.
    """
    g = _as_square(g)
    if logscale is None:
        det = np.linalg.det(g)
        if not abs(det - 1.0) <= tol:
            raise InvalidInputError(f"det g = {float(det):.12g} is not 1 within {tol}")
        logscale = 0.0
    s = np.linalg.svd(g, compute_uv=False)
    if s[-1] <= 0.0 or not np.all(np.isfinite(s)):
        raise InvalidInputError("matrix is singular")
    return recenter(np.log(s) + logscale)


def cartan_projection_batch(mats, logscales=None):
    """Vectorised :func:`cartan_projection` for a stack of matrices (no det check)."""
    mats = np.asarray(mats, dtype=float)
    s = np.linalg.svd(mats, compute_uv=False)
    with np.errstate(divide="ignore"):
        out = np.log(s)
    if logscales is not None:
        out = out + np.asarray(logscales, dtype=float)[..., None]
    return recenter(out)


def jordan_projection(g):
    """Jordan projection: sorted log moduli of eigenvalues, recentered to zero sum.

    Complex conjugate pairs contribute two equal coordinates.
    """
    g = _as_square(g)
    ev = np.abs(np.linalg.eigvals(g))
    if np.any(ev == 0.0):
        raise InvalidInputError("matrix is singular")
    return recenter(np.sort(np.log(ev))[::-1])


def exterior_power(g, k):
    """Matrix of the k-th exterior power of ``g`` in the lexicographic basis of k-subsets.

    Works on a stack of matrices along leading axes.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[-1]
    if not 1 <= k <= n:
        raise InvalidInputError(f"exterior power index {k} out of range for n={n}")
    subsets = list(itertools.combinations(range(n), k))
    m = comb(n, k)
    out = np.empty(g.shape[:-2] + (m, m))
    for a, rows in enumerate(subsets):
        sub = g[..., rows, :]
        for b, cols in enumerate(subsets):
            out[..., a, b] = np.linalg.det(sub[..., :, cols])
    return out


def mu_from_exterior_logs(top_logs):
    """Recover mu from ``s_k = log sigma_1(wedge^k g)``, k = 1..n-1.

    ``mu_k = s_k - s_{k-1}`` with ``s_0 = s_n = 0``. Each ``s_k`` is a top
    singular value and therefore computed to full relative accuracy even when
    ``g`` is badly conditioned, which plain SVD is not.
    """
    s = np.asarray(top_logs, dtype=float)
    zeros = np.zeros(s.shape[:-1] + (1,))
    full = np.concatenate([zeros, s, zeros], axis=-1)
    mu = np.diff(full, axis=-1)
    return recenter(np.sort(mu, axis=-1)[..., ::-1])


def opposition_involution(v):
    """``i(v) = -w0 v``: reverse the coordinates and negate."""
    v = np.asarray(v, dtype=float)
    return -v[..., ::-1]


def normalize_theta(theta, n):
    """Validate a set of simple-root indices and return it as a sorted tuple."""
    try:
        idx = sorted({int(i) for i in theta})
    except TypeError:
        idx = [int(theta)]
    if not idx:
        raise InvalidInputError("theta must be non-empty")
    if idx[0] < 1 or idx[-1] > n - 1:
        raise InvalidInputError(f"theta indices must lie in 1..{n - 1}, got {idx}")
    return tuple(idx)


def opposite_theta(theta, n):
    """``theta ∪ i(theta)``; the opposition involution sends alpha_k to alpha_{n-k}."""
    t = normalize_theta(theta, n)
    return tuple(sorted(set(t) | {n - i for i in t}))


def theta_blocks(theta, n):
    """Coordinate blocks joined by the roots outside ``theta``.

    ``a_theta`` is the set of zero-sum vectors constant on each block.
    """
    t = set(normalize_theta(theta, n))
    blocks, current = [], [0]
    for i in range(1, n):
        if i in t:
            blocks.append(current)
            current = [i]
        else:
            current.append(i)
    blocks.append(current)
    return blocks


def p_theta(theta, v):
    """Orthogonal projection onto ``a_theta``: average the coordinates over each block."""
    v = np.asarray(v, dtype=float)
    out = v.copy()
    for block in theta_blocks(theta, v.shape[-1]):
        if len(block) > 1:
            out[..., block] = v[..., block].mean(axis=-1, keepdims=True)
    return out


def _check_index(i, lo, hi, what):
    if int(i) != i or not lo <= i <= hi:
        raise InvalidInputError(f"{what} index {i} out of range {lo}..{hi}")
    return int(i)


def simple_root(i, v):
    """``alpha_i(v) = v_i - v_{i+1}``."""
    v = np.asarray(v, dtype=float)
    i = _check_index(i, 1, v.shape[-1] - 1, "root")
    return v[..., i - 1] - v[..., i]


def two_rho(v):
    """Sum of positive roots: ``sum_i (n + 1 - 2i) v_i``."""
    v = np.asarray(v, dtype=float)
    n = v.shape[-1]
    return v @ (n + 1 - 2 * np.arange(1, n + 1, dtype=float))


def fundamental_weight(k, v):
    """``omega_k(v) = v_1 + ... + v_k``."""
    v = np.asarray(v, dtype=float)
    k = _check_index(k, 1, v.shape[-1] - 1, "weight")
    return v[..., :k].sum(axis=-1)


@dataclass(frozen=True, eq=False)
class LinearForm:
    """A linear functional on the Cartan subspace, ``phi(v) = coeffs @ v``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 2 or not np.all(np.isfinite(c)):
            raise InvalidInputError("linear form coefficients must be a finite vector")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, v):
        return np.asarray(v, dtype=float) @ self.coeffs

    def __eq__(self, other):
        return isinstance(other, LinearForm) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"LinearForm({self.coeffs.tolist()})"

    @property
    def n(self):
        return self.coeffs.size

    def restricted(self):
        """Same functional on zero-sum vectors, with zero-sum coefficients."""
        return LinearForm(recenter(self.coeffs))

    def compose(self, w):
        """``phi ∘ w`` for a Weyl element ``w``."""
        c = np.empty_like(self.coeffs)
        c[list(w.perm)] = self.coeffs
        return LinearForm(c)

    def opposite(self):
        """``phi ∘ i``."""
        return LinearForm(-self.coeffs[::-1])

    def is_theta_form(self, theta, tol=config.IDENTITY_TOL):
        """Whether ``phi = phi ∘ p_theta`` on the Cartan subspace."""
        c = recenter(self.coeffs)
        return bool(np.allclose(p_theta(theta, c), c, atol=tol))

    @classmethod
    def simple_root(cls, i, n):
        i = _check_index(i, 1, n - 1, "root")
        c = np.zeros(n)
        c[i - 1], c[i] = 1.0, -1.0
        return cls(c)

    @classmethod
    def two_rho(cls, n):
        return cls(n + 1 - 2 * np.arange(1, n + 1, dtype=float))

    @classmethod
    def fundamental_weight(cls, k, n):
        k = _check_index(k, 1, n - 1, "weight")
        c = np.zeros(n)
        c[:k] = 1.0
        return cls(c)

    @classmethod
    def coordinate(cls, i, n):
        c = np.zeros(n)
        c[_check_index(i, 1, n, "coordinate") - 1] = 1.0
        return cls(c)


@dataclass(frozen=True)
class WeylElement:
    """A coordinate permutation acting by ``(w·v)_i = v_{perm[i]}``."""

    perm: tuple

    def __post_init__(self):
        p = tuple(int(i) for i in self.perm)
        if sorted(p) != list(range(len(p))):
            raise InvalidInputError(f"not a permutation: {self.perm}")
        object.__setattr__(self, "perm", p)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)))

    def __call__(self, v):
        return np.asarray(v, dtype=float)[..., list(self.perm)]

    def __mul__(self, other):
        # (self * other)·v = self·(other·v)
        return WeylElement(tuple(other.perm[i] for i in self.perm))

    def inverse(self):
        return WeylElement(tuple(np.argsort(self.perm).tolist()))

    @property
    def is_identity(self):
        return self.perm == tuple(range(len(self.perm)))


def weyl_action(w, v):
    return w(v)


def wall_reflection(i, n):
    """Reflection in ``ker alpha_i``: swap coordinates i and i+1."""
    i = _check_index(i, 1, n - 1, "root")
    p = list(range(n))
    p[i - 1], p[i] = p[i], p[i - 1]
    return WeylElement(tuple(p))


def fold_to_chamber(v):
    """Sort ``v`` into the positive chamber; return the image and the witness ``w``.

    ``w(v)`` equals the returned vector. Ties keep their order, so vectors
    already in the chamber come back with the identity.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise InvalidInputError("fold_to_chamber takes a single vector; sort a stack directly")
    perm = np.argsort(-v, kind="stable")
    return v[perm], WeylElement(tuple(perm.tolist()))


def weyl_subgroup(theta, n):
    """Elements of W_theta: permutations within the blocks cut by ``theta``.

    This is the subgroup generated by the reflections in the walls of the
    simple roots outside ``theta``.
    """
    blocks = theta_blocks(theta, n)
    out = []
    for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
        perm = [0] * n
        for block, image in zip(blocks, choice):
            for i, j in zip(block, image):
                perm[i] = j
        out.append(WeylElement(tuple(perm)))
    return out


def random_sl(n, rng, size=None):
    """Gaussian matrices rescaled to determinant one.

    A negative determinant is fixed by flipping the sign of the first row.
    """
    shape = (n, n) if size is None else (size, n, n)
    g = rng.standard_normal(shape)
    det = np.linalg.det(g)
    flip = det < 0
    if size is None:
        if flip:
            g[0] *= -1
    else:
        g[flip, 0, :] *= -1
    det = np.abs(det)
    return g / (det ** (1.0 / n))[..., None, None] if size is not None else g / det ** (1.0 / n)
