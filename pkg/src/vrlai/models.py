"""Lifetime distributions represented through their survival functions.

Every model is an immutable object exposing the survival function and,
when one exists, the density and hazard. Primitive families may also carry
closed-form conditional residual moments, which the residual engine uses in
preference to quadrature. Transform nodes (mixtures, i.i.d. sums, order
statistics, parallel and series systems) combine child models pointwise.

All evaluation methods accept scalars or numpy arrays and return a float for
scalar input.
"""

from __future__ import annotations

import itertools
import json
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.special import gammaincc, gammainc

from . import numerics
from .errors import BadOrder, BadWeights, ModelSpecError, NoDensity, UndefinedAtBreakpoint

__all__ = [
    "SurvivalModel",
    "Exponential",
    "Erlang",
    "Pareto",
    "Lomax",
    "Piece",
    "Piecewise",
    "NumericOnly",
    "Mixture",
    "IidConvolution",
    "OrderStatistic",
    "Parallel",
    "Series",
    "exponential",
    "erlang",
    "pareto",
    "lomax",
    "mixture",
    "iid_convolution",
    "order_statistic",
    "parallel",
    "series",
    "numeric_only",
    "survival",
    "density",
    "hazard",
    "from_spec",
    "load_spec",
]

_ATOM_EPS = 1e-15


def _scalar_or_array(fn: Callable[[np.ndarray], np.ndarray], t):
    arr = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        out = np.asarray(fn(arr), dtype=float)
    if arr.ndim == 0:
        return float(out.reshape(-1)[0])
    return np.broadcast_to(out, arr.shape).copy()


class SurvivalModel(ABC):
    """Base class of all lifetime models.

    Subclasses implement ``_sf`` on arrays and may override ``_cdf``,
    ``_pdf``, ``_left_sf`` and ``closed_residual``.
    """

    support_start: float = 0.0
    breakpoints: tuple[float, ...] = ()
    has_density: bool = True
    time_scale: float = 1.0

    @abstractmethod
    def _sf(self, t: np.ndarray) -> np.ndarray:
        ...

    def _cdf(self, t: np.ndarray) -> np.ndarray:
        return 1.0 - self._sf(t)

    def _pdf(self, t: np.ndarray) -> np.ndarray:
        return -np.asarray(numerics.differentiate(self._sf, t))

    def _left_sf(self, t: np.ndarray) -> np.ndarray:
        return self._sf(t)

    def _logsf(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self._sf(t))

    def closed_residual(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
        """Conditional moments ``(E[X_t], E[X_t^2])`` for ``t >= support_start``.

        ``None`` when the family has no closed form.
        """
        return None

    # public evaluation ----------------------------------------------------

    def survival(self, t):
        """P(X > t)."""
        return _scalar_or_array(self._sf, t)

    def cdf(self, t):
        return _scalar_or_array(self._cdf, t)

    def left_survival(self, t):
        """P(X >= t), the left limit of the survival function."""
        return _scalar_or_array(self._left_sf, t)

    def density(self, t):
        if not self.has_density:
            raise NoDensity(f"{self!r} has atoms and no density")
        arr = np.asarray(t, dtype=float)
        if self.breakpoints and np.isin(arr, self.breakpoints).any():
            raise UndefinedAtBreakpoint(f"density of {self!r} undefined at a breakpoint")
        return _scalar_or_array(self._pdf, arr)

    def hazard(self, t):
        f = self.density(t)
        s = self.survival(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            return f / s

    def atoms(self) -> list[tuple[float, float]]:
        """Point masses as ``(location, mass)`` pairs."""
        out = []
        for bp in self.breakpoints:
            mass = self.left_survival(bp) - self.survival(bp)
            if mass > _ATOM_EPS:
                out.append((bp, mass))
        return out


# primitives -----------------------------------------------------------------


@dataclass(frozen=True)
class Exponential(SurvivalModel):
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate!r}")

    @property
    def time_scale(self):
        return 1.0 / self.rate

    def _sf(self, t):
        return np.where(t < 0, 1.0, np.exp(-self.rate * np.maximum(t, 0.0)))

    def _cdf(self, t):
        return np.where(t < 0, 0.0, -np.expm1(-self.rate * np.maximum(t, 0.0)))

    def _pdf(self, t):
        return np.where(t < 0, 0.0, self.rate * np.exp(-self.rate * np.maximum(t, 0.0)))

    def closed_residual(self, t):
        mu = np.full(np.shape(t), 1.0 / self.rate)
        return mu, np.full(np.shape(t), 2.0 / self.rate**2)


@dataclass(frozen=True)
class Erlang(SurvivalModel):
    """Sum of ``k`` independent exponentials with common ``rate``."""

    k: int
    rate: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"Erlang shape must be a positive integer, got {self.k!r}")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate!r}")

    @property
    def time_scale(self):
        return self.k / self.rate

    def _sf(self, t):
        return np.where(t < 0, 1.0, gammaincc(self.k, self.rate * np.maximum(t, 0.0)))

    def _cdf(self, t):
        return np.where(t < 0, 0.0, gammainc(self.k, self.rate * np.maximum(t, 0.0)))

    def _pdf(self, t):
        x = self.rate * np.maximum(t, 0.0)
        dens = self.rate * np.exp((self.k - 1) * np.log(np.where(x > 0, x, 1.0)) - x - math.lgamma(self.k))
        if self.k > 1:
            dens = np.where(x > 0, dens, 0.0)
        return np.where(t < 0, 0.0, dens)

    def closed_residual(self, t):
        # ratios of partial Poisson sums avoid the e^{-rate t} underflow
        x = self.rate * np.asarray(t, dtype=float)
        terms = [np.ones_like(x)]
        for j in range(1, self.k):
            terms.append(terms[-1] * x / j)
        partial = np.cumsum(np.stack(terms), axis=0)  # partial[i-1] = sum_{j<i}
        top = partial[-1]
        ratios = partial / top
        weights = np.arange(self.k, 0, -1, dtype=float).reshape((-1,) + (1,) * x.ndim)
        mu = ratios.sum(axis=0) / self.rate
        m2 = 2.0 * (weights * ratios).sum(axis=0) / self.rate**2
        return mu, m2


@dataclass(frozen=True)
class Pareto(SurvivalModel):
    """Pareto law with survival ``(b/t)**(a+1)`` for ``t >= b``.

    ``a > 1`` keeps the residual variance finite. With ``formula=True`` the
    power expression is used for every ``t > 0``: this is not a proper
    survival function but reproduces arguments that extend the closed forms
    below the support start.
    """

    a: float
    b: float = 1.0
    formula: bool = False

    def __post_init__(self):
        if not self.a > 1:
            raise ValueError(f"Pareto shape a must exceed 1 for a finite residual variance, got {self.a!r}")
        if not self.b > 0:
            raise ValueError(f"Pareto scale b must be positive, got {self.b!r}")

    @property
    def support_start(self):
        return 0.0 if self.formula else float(self.b)

    @property
    def breakpoints(self):
        return () if self.formula else (float(self.b),)

    @property
    def time_scale(self):
        return float(self.b)

    def _sf(self, t):
        p = self.a + 1.0
        if self.formula:
            return (self.b / t) ** p
        return np.where(t < self.b, 1.0, (self.b / np.maximum(t, self.b)) ** p)

    def _logsf(self, t):
        with np.errstate(divide="ignore"):
            val = (self.a + 1.0) * (np.log(self.b) - np.log(np.abs(t)))
        return val if self.formula else np.where(t < self.b, 0.0, val)

    def _pdf(self, t):
        p = self.a + 1.0
        val = p * self.b**p / np.abs(t) ** (p + 1.0)
        if self.formula:
            return val
        return np.where(t < self.b, 0.0, val)

    def closed_residual(self, t):
        t = np.asarray(t, dtype=float)
        a = self.a
        return t / a, 2.0 * t**2 / (a * (a - 1.0))


@dataclass(frozen=True)
class Lomax(SurvivalModel):
    """Shifted Pareto: survival ``(1 + t/scale)**-(a+1)`` on ``t >= 0``."""

    a: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.a > 1:
            raise ValueError(f"Lomax shape a must exceed 1, got {self.a!r}")
        if not self.scale > 0:
            raise ValueError(f"Lomax scale must be positive, got {self.scale!r}")

    @property
    def time_scale(self):
        return self.scale

    def _sf(self, t):
        return np.where(t < 0, 1.0, (1.0 + np.maximum(t, 0.0) / self.scale) ** -(self.a + 1.0))

    def _cdf(self, t):
        return np.where(t < 0, 0.0, -np.expm1(-(self.a + 1.0) * np.log1p(np.maximum(t, 0.0) / self.scale)))

    def _pdf(self, t):
        p = self.a + 1.0
        return np.where(t < 0, 0.0, p / self.scale * (1.0 + np.maximum(t, 0.0) / self.scale) ** -(p + 1.0))

    def closed_residual(self, t):
        u = self.scale + np.asarray(t, dtype=float)
        return u / self.a, 2.0 * u**2 / (self.a * (self.a - 1.0))


@dataclass(frozen=True)
class Piece:
    """One branch of a piecewise survival function, valid on ``[start, next)``."""

    start: float
    sf: Callable[[np.ndarray], np.ndarray]
    pdf: Callable[[np.ndarray], np.ndarray] | None = None
    logsf: Callable[[np.ndarray], np.ndarray] | None = None


@dataclass(frozen=True)
class Piecewise(SurvivalModel):
    """Survival function given branch by branch on ``[0, inf)``.

    Branches are half-open so the function is right-continuous; a branch
    whose start value is below the previous branch's limit is an atom.
    """

    pieces: tuple[Piece, ...]
    name: str = "piecewise"

    def __post_init__(self):
        starts = [p.start for p in self.pieces]
        if not starts or starts[0] != 0.0 or any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("piece starts must begin at 0 and increase strictly")

    @property
    def breakpoints(self):
        return tuple(float(p.start) for p in self.pieces[1:])

    @property
    def has_density(self):
        return not self.atoms()

    def _index(self, t, side):
        starts = np.array([p.start for p in self.pieces])
        return np.clip(np.searchsorted(starts, t, side=side) - 1, 0, len(self.pieces) - 1)

    def _select(self, t, idx, attr):
        out = np.zeros(np.shape(t))
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if np.any(mask):
                fn = getattr(piece, attr)
                out = np.where(mask, np.asarray(fn(np.where(mask, t, piece.start))), out)
        return out

    def _sf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < 0, 1.0, self._select(t, self._index(t, "right"), "sf"))

    def _left_sf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 0, 1.0, self._select(t, self._index(t, "left"), "sf"))

    def _logsf(self, t):
        if all(p.logsf is None for p in self.pieces):
            return super()._logsf(t)
        t = np.asarray(t, dtype=float)
        idx = self._index(t, "right")
        out = np.zeros(np.shape(t))
        for i, piece in enumerate(self.pieces):
            mask = (idx == i) & (t >= 0)
            if np.any(mask):
                x = np.where(mask, t, piece.start)
                with np.errstate(divide="ignore"):
                    val = piece.logsf(x) if piece.logsf is not None else np.log(piece.sf(x))
                out = np.where(mask, val, out)
        return out

    def _pdf(self, t):
        t = np.asarray(t, dtype=float)
        if any(p.pdf is None for p in self.pieces):
            return super()._pdf(t)
        return np.where(t < 0, 0.0, self._select(t, self._index(t, "right"), "pdf"))

    def __repr__(self):
        return f"Piecewise({self.name!r})"

    def atoms(self):
        out = []
        for piece in self.pieces[1:]:
            x = np.array(piece.start)
            mass = float(self._left_sf(x) - self._sf(x))
            if mass > _ATOM_EPS:
                out.append((float(piece.start), mass))
        return out


@dataclass(frozen=True)
class NumericOnly(SurvivalModel):
    """Same law as ``child`` with closed-form residual moments hidden."""

    child: SurvivalModel

    @property
    def support_start(self):
        return self.child.support_start

    @property
    def breakpoints(self):
        return self.child.breakpoints

    @property
    def has_density(self):
        return self.child.has_density

    @property
    def time_scale(self):
        return self.child.time_scale

    def _sf(self, t):
        return self.child._sf(t)

    def _cdf(self, t):
        return self.child._cdf(t)

    def _pdf(self, t):
        return self.child._pdf(t)

    def _left_sf(self, t):
        return self.child._left_sf(t)

    def _logsf(self, t):
        return self.child._logsf(t)

    def atoms(self):
        return self.child.atoms()


# transforms -----------------------------------------------------------------


@dataclass(frozen=True)
class Mixture(SurvivalModel):
    components: tuple[SurvivalModel, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.components) == 0 or w.shape != (len(self.components),):
            raise BadWeights("need one weight per component")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise BadWeights(f"weights must be nonnegative and sum to 1, got {self.weights!r}")

    @property
    def support_start(self):
        return min(c.support_start for c in self.components)

    @property
    def breakpoints(self):
        return tuple(sorted({bp for c in self.components for bp in c.breakpoints}))

    @property
    def has_density(self):
        return all(c.has_density for c in self.components)

    @property
    def time_scale(self):
        return max(c.time_scale for c in self.components)

    def _combine(self, attr, t):
        return sum(w * getattr(c, attr)(t) for c, w in zip(self.components, self.weights))

    def _sf(self, t):
        return self._combine("_sf", t)

    def _cdf(self, t):
        return self._combine("_cdf", t)

    def _pdf(self, t):
        return self._combine("_pdf", t)

    def _left_sf(self, t):
        return self._combine("_left_sf", t)

    def closed_residual(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < max(c.support_start for c in self.components)):
            return None
        parts = [c.closed_residual(t) for c in self.components]
        if any(p is None for p in parts):
            return None
        sfs = [c._sf(t) for c in self.components]
        total = sum(w * s for w, s in zip(self.weights, sfs))
        mu = sum(w * s * p[0] for w, s, p in zip(self.weights, sfs, parts)) / total
        m2 = sum(w * s * p[1] for w, s, p in zip(self.weights, sfs, parts)) / total
        return mu, m2


@dataclass(frozen=True)
class IidConvolution(SurvivalModel):
    """Sum of ``n`` i.i.d. copies of ``child`` by numeric convolution.

    Survival and density of the partial sums are obtained by one quadrature
    per query point, cached per instance.
    """

    child: SurvivalModel
    n: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)
    _lock: Any = field(default_factory=threading.Lock, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("convolution order must be an integer >= 2")
        if not self.child.has_density:
            raise NoDensity("numeric convolution needs a child density")

    @property
    def breakpoints(self):
        base = (0.0, *self.child.breakpoints)
        sums = {sum(c) for c in itertools.combinations_with_replacement(base, self.n)}
        return tuple(sorted(s for s in sums if s > 0))

    @property
    def time_scale(self):
        return self.n * self.child.time_scale

    def _partial(self, order):
        if order == 1:
            return self.child
        return IidConvolution(self.child, order)

    def _convolve(self, t, kind):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.empty(flat.size)
        todo = []
        with self._lock:
            for i, v in enumerate(flat):
                hit = self._cache.get((kind, v))
                if hit is None:
                    todo.append(i)
                else:
                    out[i] = hit
        if todo:
            pts = flat[todo]
            out[todo] = self._integrate(pts, kind)
            with self._lock:
                if len(self._cache) > 200_000:
                    self._cache.clear()
                for v, val in zip(pts, out[todo]):
                    self._cache[(kind, v)] = val
        return out.reshape(t.shape)

    def _integrate(self, pts, kind):
        rest = self._partial(self.n - 1)
        f = self.child._pdf
        g = rest._sf if kind == "sf" else rest._pdf
        pos = np.maximum(pts, 0.0)
        bps = set(self.child.breakpoints)
        lo, hi, own = [], [], []
        for j, tj in enumerate(pos):
            cuts = {0.0, tj} | {b for b in bps if 0 < b < tj} | {tj - b for b in rest.breakpoints if 0 < b < tj}
            edges = np.array(sorted(cuts))
            if edges.size < 2:
                continue
            lo.append(edges[:-1])
            hi.append(edges[1:])
            own.append(np.full(edges.size - 1, j))
        res = np.zeros(pos.size)
        if lo:
            own_arr = np.concatenate(own)
            vals, _, _ = numerics._simpson_batch(
                lambda u, o: f(u) * g(pos[o] - u),
                np.concatenate(lo),
                np.concatenate(hi),
                own_arr,
                1e-13,
                1e-11,
                1.0 / np.bincount(own_arr)[own_arr],
                numerics.DEFAULT_CONFIG.max_depth,
            )
            res = np.bincount(own_arr, weights=vals, minlength=pos.size)
        if kind == "sf":
            res = res + self.child._sf(pos)
        return np.where(pts < 0, 1.0 if kind == "sf" else 0.0, res)

    def _sf(self, t):
        return np.clip(self._convolve(t, "sf"), 0.0, 1.0)

    def _pdf(self, t):
        return self._convolve(t, "pdf")


def _check_order(k, n):
    if int(n) != n or n < 1:
        raise BadOrder(f"sample size must be a positive integer, got {n!r}")
    if int(k) != k or not 1 <= k <= n:
        raise BadOrder(f"order statistic needs 1 <= k <= n, got k={k!r}, n={n!r}")


class _SystemNode(SurvivalModel):
    child: SurvivalModel

    @property
    def support_start(self):
        return self.child.support_start

    @property
    def breakpoints(self):
        return self.child.breakpoints

    @property
    def has_density(self):
        return self.child.has_density

    @property
    def time_scale(self):
        return self.child.time_scale

    def _sf(self, t):
        return self._from_child(self.child._sf(t), self.child._cdf(t))

    def _left_sf(self, t):
        left = self.child._left_sf(t)
        return self._from_child(left, 1.0 - left)


@dataclass(frozen=True)
class OrderStatistic(_SystemNode):
    """``k``-th smallest of ``n`` i.i.d. copies (a k-out-of-n lifetime)."""

    child: SurvivalModel
    k: int
    n: int

    def __post_init__(self):
        _check_order(self.k, self.n)

    def _from_child(self, s, c):
        return sum(math.comb(self.n, i) * c**i * s ** (self.n - i) for i in range(self.k))

    def _pdf(self, t):
        s, c, f = self.child._sf(t), self.child._cdf(t), self.child._pdf(t)
        coef = math.factorial(self.n) / (math.factorial(self.k - 1) * math.factorial(self.n - self.k))
        return coef * c ** (self.k - 1) * s ** (self.n - self.k) * f


@dataclass(frozen=True)
class Parallel(_SystemNode):
    """Maximum of ``n`` i.i.d. copies."""

    child: SurvivalModel
    n: int

    def __post_init__(self):
        _check_order(self.n, self.n)

    def _from_child(self, s, c):
        with np.errstate(divide="ignore"):
            return -np.expm1(self.n * np.log1p(-np.minimum(s, 1.0)))

    def _pdf(self, t):
        return self.n * self.child._cdf(t) ** (self.n - 1) * self.child._pdf(t)


@dataclass(frozen=True)
class Series(_SystemNode):
    """Minimum of ``n`` i.i.d. copies."""

    child: SurvivalModel
    n: int

    def __post_init__(self):
        _check_order(1, self.n)

    def _from_child(self, s, c):
        return s**self.n

    def _pdf(self, t):
        return self.n * self.child._sf(t) ** (self.n - 1) * self.child._pdf(t)


# constructors -----------------------------------------------------------------


def exponential(rate: float = 1.0) -> Exponential:
    return Exponential(float(rate))


def erlang(k: int, rate: float = 1.0) -> Erlang:
    return Erlang(int(k), float(rate))


def pareto(a: float, b: float = 1.0, formula: bool = False) -> Pareto:
    return Pareto(float(a), float(b), bool(formula))


def lomax(a: float, scale: float = 1.0) -> Lomax:
    return Lomax(float(a), float(scale))


def numeric_only(m: SurvivalModel) -> SurvivalModel:
    """Wrap ``m`` so residual moments are always computed by quadrature."""
    return m if isinstance(m, NumericOnly) else NumericOnly(m)


def mixture(models: Sequence[SurvivalModel], weights: Sequence[float], simplify: bool = True) -> SurvivalModel:
    """Convex combination of survival functions.

    A mixture of identical components is the component itself.
    """
    models = tuple(models)
    weights = tuple(float(w) for w in weights)
    node = Mixture(models, weights)
    if simplify:
        live = [m for m, w in zip(models, weights) if w > 0]
        if all(m == live[0] for m in live):
            return live[0]
    return node


def iid_convolution(m: SurvivalModel, n: int) -> SurvivalModel:
    """Sum of ``n`` i.i.d. copies; closed form for exponential and Erlang children."""
    if int(n) != n or n < 1:
        raise ValueError("convolution order must be a positive integer")
    n = int(n)
    if n == 1:
        return m
    if isinstance(m, Exponential):
        return Erlang(n, m.rate)
    if isinstance(m, Erlang):
        return Erlang(n * m.k, m.rate)
    return IidConvolution(m, n)


def order_statistic(m: SurvivalModel, k: int, n: int) -> SurvivalModel:
    _check_order(k, n)
    return m if n == 1 else OrderStatistic(m, int(k), int(n))


def parallel(m: SurvivalModel, n: int) -> SurvivalModel:
    _check_order(n, n)
    return m if n == 1 else Parallel(m, int(n))


def series(m: SurvivalModel, n: int) -> SurvivalModel:
    _check_order(1, n)
    return m if n == 1 else Series(m, int(n))


def survival(m: SurvivalModel, t):
    return m.survival(t)


def density(m: SurvivalModel, t):
    return m.density(t)


def hazard(m: SurvivalModel, t):
    return m.hazard(t)


# model-spec documents -----------------------------------------------------------

_SPEC_FIELDS = {
    "exponential": {"rate"},
    "erlang": {"k", "rate"},
    "pareto": {"a", "b", "formula"},
    "lomax": {"a", "scale"},
    "mixture": {"components", "weights"},
    "iid_convolution": {"child", "n"},
    "order_statistic": {"child", "k", "n"},
    "parallel": {"child", "n"},
    "series": {"child", "n"},
    "fixture": {"id", "mode"},
}
_REQUIRED = {
    "exponential": {"rate"},
    "erlang": {"k", "rate"},
    "pareto": {"a"},
    "lomax": {"a"},
    "mixture": {"components", "weights"},
    "iid_convolution": {"child", "n"},
    "order_statistic": {"child", "k", "n"},
    "parallel": {"child", "n"},
    "series": {"child", "n"},
    "fixture": {"id"},
}


def from_spec(doc: Any) -> SurvivalModel:
    """Build a model from a parsed model-spec document.

    Example: ``{"kind": "order_statistic", "k": 2, "n": 3,
    "child": {"kind": "exponential", "rate": 1.0}}``. Unknown kinds or
    fields raise :class:`ModelSpecError`.
    """
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ModelSpecError("model spec must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind not in _SPEC_FIELDS:
        raise ModelSpecError(f"unknown model kind {kind!r}")
    keys = set(doc) - {"kind"}
    extra = keys - _SPEC_FIELDS[kind]
    if extra:
        raise ModelSpecError(f"unknown field(s) for {kind}: {sorted(extra)}")
    missing = _REQUIRED[kind] - keys
    if missing:
        raise ModelSpecError(f"missing field(s) for {kind}: {sorted(missing)}")
    try:
        if kind == "exponential":
            return exponential(doc["rate"])
        if kind == "erlang":
            return erlang(doc["k"], doc["rate"])
        if kind == "pareto":
            return pareto(doc["a"], doc.get("b", 1.0), doc.get("formula", False))
        if kind == "lomax":
            return lomax(doc["a"], doc.get("scale", 1.0))
        if kind == "mixture":
            return mixture([from_spec(c) for c in doc["components"]], doc["weights"])
        if kind == "iid_convolution":
            return iid_convolution(from_spec(doc["child"]), doc["n"])
        if kind == "order_statistic":
            return order_statistic(from_spec(doc["child"]), doc["k"], doc["n"])
        if kind == "parallel":
            return parallel(from_spec(doc["child"]), doc["n"])
        if kind == "series":
            return series(from_spec(doc["child"]), doc["n"])
        from .fixtures import build_fixture

        out = build_fixture(doc["id"], mode=doc.get("mode", "model"))
        if isinstance(out, tuple):
            raise ModelSpecError(f"fixture {doc['id']!r} is a pair, not a single model")
        return out
    except ModelSpecError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ModelSpecError(f"invalid {kind} spec: {exc}") from exc


def load_spec(text: str) -> SurvivalModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSpecError(f"model spec is not valid JSON: {exc}") from exc
    return from_spec(doc)
