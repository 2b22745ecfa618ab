"""Word-metric balls of marked free subgroups of SL(n, R).

Long products of hyperbolic matrices are badly conditioned: the small singular
values of a length-12 word are far below ``eps * sigma_1`` and plain SVD
returns noise for them. Every word is therefore carried as a stack of
renormalised exterior powers ``wedge^k g`` (k = 1..n-1). Only the top
singular value of each power is read off, which is accurate to machine
precision, and ``mu_k = log sigma_1(wedge^k g) - log sigma_1(wedge^{k-1} g)``.

Balls are computed level by level with batched numpy products, one subtree
per first letter. Subtrees are independent, so they can be farmed out to
worker processes and merged in prefix order.
"""

from __future__ import annotations

import logging
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config
from .cartan import cartan_projection, exterior_power, mu_from_exterior_logs
from .errors import BudgetExceededError, InvalidInputError, ScaleOverflowError

log = logging.getLogger(__name__)

__all__ = [
    "MarkedGroup",
    "ScaledMatrix",
    "GroupElementRecord",
    "Ball",
    "scaled_multiply",
    "scaled_power",
    "ball_size",
    "sphere_size",
    "compute_ball",
    "enumerate_ball",
    "word_exteriors",
    "word_cartan_projection",
    "word_jordan_projection",
    "power_cartan_projection",
]


@dataclass
class ScaledMatrix:
    """``exp(logscale) * mat`` with ``max |mat_ij|`` kept in [1/2, 2]."""

    mat: np.ndarray
    logscale: float = 0.0

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=float)
        if not np.all(np.isfinite(self.mat)):
            raise InvalidInputError("scaled matrix has non-finite entries")
        self.logscale = float(self.logscale)

    @classmethod
    def from_matrix(cls, m, logscale=0.0):
        m = np.asarray(m, dtype=float)
        peak = np.max(np.abs(m))
        if peak == 0.0:
            raise InvalidInputError("zero matrix")
        return cls(m / peak, logscale + np.log(peak))

    def normalized(self):
        return ScaledMatrix.from_matrix(self.mat, self.logscale)

    def to_matrix(self):
        return np.exp(self.logscale) * self.mat

    def cartan(self):
        """Cartan projection of the represented matrix.

        Singular values shift uniformly by ``logscale``; the recentering
        absorbs that shift. Accurate only while ``mat`` is well conditioned;
        use :func:`word_cartan_projection` for long words.
        """
        return cartan_projection(self.mat, logscale=self.logscale)


def scaled_multiply(a, b, bound=config.LOGSCALE_BOUND):
    """Product of two scaled matrices, renormalised; log-scales add."""
    out = ScaledMatrix.from_matrix(a.mat @ b.mat, a.logscale + b.logscale)
    if not abs(out.logscale) <= bound:
        raise ScaleOverflowError(f"logscale {out.logscale} exceeds bound {bound}")
    return out


def scaled_power(a, p, bound=config.LOGSCALE_BOUND):
    """``a**p`` for an integer ``p >= 0`` by repeated squaring."""
    if int(p) != p or p < 0:
        raise InvalidInputError("power must be a non-negative integer")
    result = ScaledMatrix(np.eye(a.mat.shape[0]), 0.0)
    base = a.normalized()
    p = int(p)
    while p:
        if p & 1:
            result = scaled_multiply(result, base, bound)
        p >>= 1
        if p:
            base = scaled_multiply(base, base, bound)
    return result


def _exterior_stack(g):
    n = g.shape[0]
    return [ScaledMatrix.from_matrix(exterior_power(g, k)) for k in range(1, n)]


def _top_logs(stack):
    return np.array([s.logscale + np.log(np.linalg.norm(s.mat, 2)) for s in stack])


def _spectral_logs(stack):
    return np.array([s.logscale + np.log(np.max(np.abs(np.linalg.eigvals(s.mat)))) for s in stack])


def power_cartan_projection(g, p):
    """Cartan projection of ``g**p`` through scaled exterior powers."""
    g = np.asarray(g, dtype=float)
    if p == 0:
        return np.zeros(g.shape[0])
    stack = [scaled_power(s, p) for s in _exterior_stack(g)]
    return mu_from_exterior_logs(_top_logs(stack))


@dataclass(frozen=True)
class GroupElementRecord:
    word: str
    length: int
    mu: np.ndarray
    lam: np.ndarray | None = None


class MarkedGroup:
    """A subgroup of SL(n, R) with an ordered generating set.

    Letters ``0..k-1`` are the generators and ``k..2k-1`` their inverses.
    Words are printed with lowercase names for generators and uppercase for
    inverses (``"aB"`` is ``a * b^-1``).

    Parameters
    ----------
    generators : sequence of (n, n) array_like
    assume_free : bool
        Treat distinct reduced words as distinct elements. Only ``True`` is
        supported.
    names : str, optional
        One lowercase letter per generator.
    tol : float
        Accepted ``|det - 1|`` for each generator.
    """

    def __init__(self, generators, assume_free=True, names=None, tol=config.DET_TOL):
        gens = [np.array(g, dtype=float) for g in generators]
        if not gens:
            raise InvalidInputError("a marked group needs at least one generator")
        n = gens[0].shape[0]
        for g in gens:
            if g.shape != (n, n) or n < 2:
                raise InvalidInputError("generators must be square matrices of one size >= 2")
            if not np.all(np.isfinite(g)):
                raise InvalidInputError("generator has non-finite entries")
            det = np.linalg.det(g)
            if not abs(det - 1.0) <= tol:
                raise InvalidInputError(f"generator determinant {float(det):.12g} is not 1 within {tol}")
        if not assume_free:
            raise InvalidInputError("only free marked groups (assume_free=True) are supported")
        if names is None:
            if len(gens) > 26:
                raise InvalidInputError("at most 26 generators")
            names = string.ascii_lowercase[: len(gens)]
        names = str(names)
        if len(names) != len(gens) or len(set(names)) != len(names) or not names.islower():
            raise InvalidInputError("names must be distinct lowercase letters, one per generator")
        self.n = n
        self.generators = gens
        self.assume_free = True
        self.names = names
        self.tol = tol
        self.inverses = [np.linalg.inv(g) for g in gens]

    @property
    def rank(self):
        """Number of generators (the rank of the free group)."""
        return len(self.generators)

    @property
    def letters(self):
        return self.generators + self.inverses

    def inverse_letter(self, j):
        k = self.rank
        return (j + k) % (2 * k)

    def letter_name(self, j):
        k = self.rank
        return self.names[j] if j < k else self.names[j - k].upper()

    def parse_word(self, word):
        out = []
        for ch in word:
            if ch in self.names:
                out.append(self.names.index(ch))
            elif ch.lower() in self.names:
                out.append(self.names.index(ch.lower()) + self.rank)
            else:
                raise InvalidInputError(f"unknown letter {ch!r} in word {word!r}")
        return out

    def format_word(self, letters):
        return "".join(self.letter_name(int(j)) for j in letters if j >= 0)

    def inverse_word(self, word):
        return word[::-1].swapcase()

    def evaluate(self, word):
        """Plain double-precision product; only for short words."""
        m = np.eye(self.n)
        for j in self.parse_word(word):
            m = m @ self.letters[j]
        return m

    def letter_exteriors(self):
        """Per exterior degree k: (2r, d_k, d_k) normalised letters and their log-scales."""
        if not hasattr(self, "_ext"):
            ext = []
            for k in range(1, self.n):
                mats = np.stack([exterior_power(g, k) for g in self.letters])
                peak = np.max(np.abs(mats), axis=(1, 2))
                ext.append((mats / peak[:, None, None], np.log(peak)))
            self._ext = ext
        return self._ext

    def with_generators(self, generators):
        return MarkedGroup(generators, names=self.names, tol=self.tol)

    def to_dict(self):
        return {
            "schema": config.SCHEMA_VERSION,
            "n": self.n,
            "generators": [g.tolist() for g in self.generators],
            "assume_free": self.assume_free,
            "names": self.names,
        }

    def __eq__(self, other):
        return (
            isinstance(other, MarkedGroup)
            and self.names == other.names
            and len(self.generators) == len(other.generators)
            and all(np.array_equal(a, b) for a, b in zip(self.generators, other.generators))
        )

    def __repr__(self):
        return f"MarkedGroup(n={self.n}, rank={self.rank}, names={self.names!r})"


def word_exteriors(group, word):
    """Scaled exterior-power stack of a word."""
    stack = [ScaledMatrix(np.eye(e.shape[1]), 0.0) for e, _ in group.letter_exteriors()]
    for j in group.parse_word(word):
        stack = [
            scaled_multiply(s, ScaledMatrix(e[j], lg[j]))
            for s, (e, lg) in zip(stack, group.letter_exteriors())
        ]
    return stack


def word_cartan_projection(group, word):
    if not word:
        return np.zeros(group.n)
    return mu_from_exterior_logs(_top_logs(word_exteriors(group, word)))


def word_jordan_projection(group, word):
    if not word:
        return np.zeros(group.n)
    return mu_from_exterior_logs(_spectral_logs(word_exteriors(group, word)))


def sphere_size(k, m):
    """Number of reduced words of length ``m`` in the free group of rank ``k``."""
    return 1 if m == 0 else 2 * k * (2 * k - 1) ** (m - 1)


def ball_size(k, radius):
    return sum(sphere_size(k, m) for m in range(radius + 1))


@dataclass
class Ball:
    """Arrays describing every reduced word of length ``<= radius``.

    Rows are in depth-first prefix order (shorter prefixes first). ``letters``
    is padded with -1 past each word's length.
    """

    group: MarkedGroup
    radius: int
    letters: np.ndarray
    lengths: np.ndarray
    mu: np.ndarray
    lam: np.ndarray | None = None
    dropped: int = 0
    _words: list | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.lengths)

    def words(self):
        if self._words is None:
            self._words = [self.group.format_word(row) for row in self.letters]
        return self._words

    def sphere(self, m):
        return np.flatnonzero(self.lengths == m)

    def records(self):
        words = self.words()
        for i in range(len(self)):
            yield GroupElementRecord(
                words[i],
                int(self.lengths[i]),
                self.mu[i],
                None if self.lam is None else self.lam[i],
            )

    def restrict(self, radius):
        """The sub-ball of words of length ``<= radius``."""
        keep = self.lengths <= radius
        return Ball(
            self.group,
            radius,
            self.letters[keep, :radius],
            self.lengths[keep],
            self.mu[keep],
            None if self.lam is None else self.lam[keep],
            self.dropped,
        )


def _top_log_batch(mats):
    # largest singular value of each matrix in the stack
    s = np.linalg.svd(mats, compute_uv=False)[:, 0]
    return np.log(s)


def _spectral_log_batch(mats):
    return np.log(np.max(np.abs(np.linalg.eigvals(mats)), axis=1))


_CHUNK = 1 << 16


def _subtree(group, first, depth, jordan, bound):
    """All reduced words starting with letter ``first`` of length 1..depth."""
    ext = group.letter_exteriors()
    nl = 2 * group.rank
    inv = np.array([group.inverse_letter(j) for j in range(nl)])
    mats = [e[[first]].copy() for e, _ in ext]
    logs = np.array([[lg[first] for _, lg in ext]])
    last = np.array([first])
    letters = np.array([[first]], dtype=np.int8)

    out_letters, out_len, out_mu, out_lam = [], [], [], []
    dropped = 0
    for level in range(1, depth + 1):
        tops = np.stack([_top_log_batch_chunked(m) for m in mats], axis=1) + logs
        ok = np.all(np.isfinite(tops), axis=1) & np.all(np.abs(logs) <= bound, axis=1)
        if not np.all(ok):
            dropped += int(np.sum(~ok))
            mats = [m[ok] for m in mats]
            logs, last, letters, tops = logs[ok], last[ok], letters[ok], tops[ok]
        out_mu.append(mu_from_exterior_logs(tops))
        if jordan:
            spec = np.stack([_spectral_log_batch(m) for m in mats], axis=1) + logs
            out_lam.append(mu_from_exterior_logs(spec))
        pad = np.full((len(last), depth), -1, dtype=np.int8)
        pad[:, :level] = letters
        out_letters.append(pad)
        out_len.append(np.full(len(last), level, dtype=np.int16))
        if level == depth:
            break
        # children of every parent, grouped by appended letter
        kids_mats = [[] for _ in mats]
        kids_logs, kids_parent, kids_letter = [], [], []
        for j in range(nl):
            idx = np.flatnonzero(last != inv[j])
            if idx.size == 0:
                continue
            for k, (e, lg) in enumerate(ext):
                kids_mats[k].append(mats[k][idx] @ e[j])
            kids_logs.append(logs[idx] + np.array([lg[j] for _, lg in ext]))
            kids_parent.append(idx)
            kids_letter.append(np.full(idx.size, j))
        parent = np.concatenate(kids_parent)
        letter = np.concatenate(kids_letter)
        order = np.lexsort((letter, parent))
        logs = np.concatenate(kids_logs)[order]
        mats = [np.concatenate(km)[order] for km in kids_mats]
        for k in range(len(mats)):
            peak = np.max(np.abs(mats[k]), axis=(1, 2))
            mats[k] /= peak[:, None, None]
            logs[:, k] += np.log(peak)
        letters = np.concatenate([letters[parent[order]], letter[order, None].astype(np.int8)], axis=1)
        last = letter[order]

    letters_all = np.concatenate(out_letters)
    order = np.lexsort(tuple(letters_all[:, i] for i in range(depth - 1, -1, -1)))
    return (
        letters_all[order],
        np.concatenate(out_len)[order],
        np.concatenate(out_mu)[order],
        np.concatenate(out_lam)[order] if jordan else None,
        dropped,
    )


def _top_log_batch_chunked(mats):
    if len(mats) <= _CHUNK:
        return _top_log_batch(mats)
    return np.concatenate([_top_log_batch(mats[i : i + _CHUNK]) for i in range(0, len(mats), _CHUNK)])


def _subtree_task(args):
    return _subtree(*args)


def compute_ball(group, radius, *, jordan=False, workers=1, budget=config.ELEMENT_BUDGET,
                 bound=config.LOGSCALE_BOUND):
    """Cartan (and optionally Jordan) projections of the whole word ball.

    Parameters
    ----------
    group : MarkedGroup
    radius : int
        Maximal word length ``N >= 0``.
    jordan : bool
        Also compute Jordan projections (about 3x the cost).
    workers : int
        Number of processes; subtrees of the first letter are distributed
        among them and merged back in prefix order.
    budget : int
        Maximum number of elements; checked before any work starts.
    """
    if int(radius) != radius or radius < 0:
        raise InvalidInputError("radius must be a non-negative integer")
    radius = int(radius)
    size = ball_size(group.rank, radius)
    if size > budget:
        raise BudgetExceededError(f"ball of radius {radius} has {size} elements, budget is {budget}")

    n = group.n
    letters = [np.full((1, radius), -1, dtype=np.int8)]
    lengths = [np.zeros(1, dtype=np.int16)]
    mu = [np.zeros((1, n))]
    lam = [np.zeros((1, n))] if jordan else None
    dropped = 0
    if radius > 0:
        tasks = [(group, j, radius, jordan, bound) for j in range(2 * group.rank)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_subtree_task, tasks))
        else:
            results = [_subtree_task(t) for t in tasks]
        for le, ln, m, lm, dr in results:
            letters.append(le)
            lengths.append(ln)
            mu.append(m)
            if jordan:
                lam.append(lm)
            dropped += dr
    if dropped:
        log.warning("dropped %d elements whose log-scale exceeded %g", dropped, bound)
    return Ball(
        group,
        radius,
        np.concatenate(letters),
        np.concatenate(lengths).astype(int),
        np.concatenate(mu),
        np.concatenate(lam) if jordan else None,
        dropped,
    )


def enumerate_ball(group, radius, *, jordan=False, workers=1, budget=config.ELEMENT_BUDGET):
    """Stream the ball as :class:`GroupElementRecord` in depth-first prefix order.

    The identity comes first, then the subtree of each first letter in
    letter order. Each subtree is computed in one batch, so memory is bounded
    by the largest subtree rather than the whole ball.
    """
    if int(radius) != radius or radius < 0:
        raise InvalidInputError("radius must be a non-negative integer")
    size = ball_size(group.rank, radius)
    if size > budget:
        raise BudgetExceededError(f"ball of radius {radius} has {size} elements, budget is {budget}")
    n = group.n
    yield GroupElementRecord("", 0, np.zeros(n), np.zeros(n) if jordan else None)
    if radius == 0:
        return
    tasks = [(group, j, int(radius), jordan, config.LOGSCALE_BOUND) for j in range(2 * group.rank)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_subtree_task, tasks)
            for res in results:
                yield from _records(group, res)
    else:
        for t in tasks:
            yield from _records(group, _subtree_task(t))


def _records(group, res):
    letters, lengths, mu, lam, _ = res
    for i in range(len(lengths)):
        yield GroupElementRecord(
            group.format_word(letters[i]), int(lengths[i]), mu[i], None if lam is None else lam[i]
        )
