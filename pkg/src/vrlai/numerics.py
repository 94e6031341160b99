"""Deterministic numerical kernels.

Adaptive Simpson quadrature on finite and semi-infinite ranges, central
differences with one Richardson step, and monotone bisection.

Integrands should accept numpy arrays. A scalar-only callable still works
through an elementwise fallback, just slowly. All routines are pure
functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import DivergentIntegral, MaxDepthExceeded, TargetOutOfRange, VrlaiError

__all__ = [
    "QuadratureConfig",
    "DEFAULT_CONFIG",
    "integrate",
    "integrate_tail",
    "cumulative_integral",
    "differentiate",
    "invert_monotone",
    "invert_monotone_many",
]

_EPS = float(np.finfo(float).eps)
_MIN_DEPTH = 2
_MAX_ACTIVE = 4_000_000
_MAX_BLOCKS = 200
_MIN_BLOCKS = 4
# geometric tail blocks shrinking slower than this are treated as divergent
_DIVERGENCE_RATIO = 0.99
_POWER_LAW_RATIO = 0.01


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and step policy shared by every integral in the package.

    ``tail_cut`` is the survival-like level at which a semi-infinite range is
    truncated; ``diff_step`` is the relative step of central differences.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    tail_cut: float = 1e-14
    max_depth: int = 60
    diff_step: float = 1e-5

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "tail_cut", "diff_step"):
            value = getattr(self, name)
            if not (value > 0 and np.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if int(self.max_depth) != self.max_depth or self.max_depth < 10:
            raise ValueError(f"max_depth must be an integer >= 10, got {self.max_depth!r}")


DEFAULT_CONFIG = QuadratureConfig()


def _as_vector_fn(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap ``f`` so it maps a 1-d array to an array of the same shape."""
    mode: list[str] = []

    def call(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not mode:
            try:
                y = np.asarray(f(x), dtype=float)
                out = np.array(np.broadcast_to(y, x.shape), dtype=float)
                mode.append("vector")
                return out
            except VrlaiError:
                raise
            except (TypeError, ValueError):
                mode.append("scalar")
        if mode[0] == "vector":
            return np.array(np.broadcast_to(np.asarray(f(x), dtype=float), x.shape), dtype=float)
        return np.fromiter((f(float(v)) for v in x), dtype=float, count=x.size)

    return call


def _simpson_batch(f, lefts, rights, owners, abs_tol, rel_tol, share, max_depth):
    """Breadth-first adaptive Simpson over many independent panels.

    ``f(x, owner)`` is evaluated on all active nodes of one refinement level
    at once. Each owner gets the tolerance ``max(abs_tol, rel_tol*|coarse|)``
    where ``coarse`` is the initial three-point estimate summed over its
    panels; a panel receives ``share`` of it and halves it on every split.

    Returns per-panel ``(values, errors, converged)``.
    """
    a = np.asarray(lefts, dtype=float)
    b = np.asarray(rights, dtype=float)
    owners = np.asarray(owners, dtype=np.intp)
    n = a.size
    values = np.zeros(n)
    errors = np.zeros(n)
    converged = np.ones(n, dtype=bool)
    if n == 0:
        return values, errors, converged

    m = 0.5 * (a + b)
    # endpoints are sampled one ulp inside so a jump sitting on a panel edge
    # contributes its one-sided limit
    a_in = np.where(b > a, np.nextafter(a, b), a)
    b_in = np.where(b > a, np.nextafter(b, a), b)
    fx = f(np.concatenate([a_in, m, b_in]), np.concatenate([owners, owners, owners]))
    fa, fm, fb = np.split(np.asarray(fx, dtype=float), 3)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    coarse = np.bincount(owners, weights=np.nan_to_num(whole), minlength=owners.max() + 1)
    tol = np.maximum(abs_tol, rel_tol * np.abs(coarse[owners])) * np.asarray(share, dtype=float)
    panel = np.arange(n)
    depth = np.zeros(n, dtype=int)

    while a.size:
        if a.size > _MAX_ACTIVE:
            raise MaxDepthExceeded(float(values.sum()), float("inf"), "too many active subintervals")
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        o = owners[panel]
        fy = np.asarray(f(np.concatenate([lm, rm]), np.concatenate([o, o])), dtype=float)
        flm, frm = np.split(fy, 2)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole

        noise = 64.0 * _EPS * (np.abs(left) + np.abs(right))
        tiny = (b - a) <= 16.0 * _EPS * np.maximum(np.abs(a), np.abs(b))
        # a panel that is rounding-sized from the start (a node next to a
        # breakpoint) carries no mass worth resolving
        ok = ((np.abs(delta) <= np.maximum(15.0 * tol, noise)) & (depth >= _MIN_DEPTH)) | (tiny & (depth == 0))
        stuck = (depth + 1 >= max_depth) | tiny | ~np.isfinite(delta)
        done = ok | stuck
        if done.any():
            p = panel[done]
            np.add.at(values, p, (left + right + delta / 15.0)[done])
            np.add.at(errors, p, np.abs(delta[done]) / 15.0)
            failed = done & ~ok
            if failed.any():
                converged[panel[failed]] = False

        keep = ~done
        if not keep.any():
            break
        ak, bk, mk = a[keep], b[keep], m[keep]
        a = np.concatenate([ak, mk])
        b = np.concatenate([mk, bk])
        fa, fm, fb = (
            np.concatenate([fa[keep], fm[keep]]),
            np.concatenate([flm[keep], frm[keep]]),
            np.concatenate([fm[keep], fb[keep]]),
        )
        whole = np.concatenate([left[keep], right[keep]])
        tol = np.concatenate([tol[keep], tol[keep]]) * 0.5
        depth = np.concatenate([depth[keep], depth[keep]]) + 1
        panel = np.concatenate([panel[keep], panel[keep]])

    return values, errors, converged


def _edges(a: float, b: float, breakpoints: Iterable[float]) -> np.ndarray:
    inner = [float(p) for p in breakpoints if a < p < b]
    return np.unique(np.array([a, *inner, b], dtype=float))


def integrate(
    f: Callable,
    a: float,
    b: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    breakpoints: Iterable[float] = (),
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` by adaptive Simpson.

    The range is split at every breakpoint strictly inside it, so jumps and
    kinks never sit inside a panel. Returns ``(value, err_est)``.

    Raises
    ------
    MaxDepthExceeded
        If some panel did not converge; carries the best estimate.
    """
    a, b = float(a), float(b)
    if b < a:
        raise ValueError(f"integration limits out of order: [{a}, {b}]")
    if a == b:
        return 0.0, 0.0
    g = _as_vector_fn(f)
    edges = _edges(a, b, breakpoints)
    lo, hi = edges[:-1], edges[1:]
    share = (hi - lo) / (b - a)
    vals, errs, conv = _simpson_batch(
        lambda x, _o: g(x), lo, hi, np.zeros(lo.size, dtype=np.intp), cfg.abs_tol, cfg.rel_tol, share, cfg.max_depth
    )
    value, err = float(vals.sum()), float(errs.sum())
    if not conv.all():
        raise MaxDepthExceeded(value, err)
    return value, err


def cumulative_integral(
    f: Callable,
    grid,
    lower: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    breakpoints: Iterable[float] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Running integrals ``int_lower^{t_k} f`` for every point of ``grid``.

    The grid may be unsorted and contain repeats; each panel between
    consecutive distinct points gets its own relative tolerance so that every
    running value is accurate, not only the last one. ``f`` must accept
    arrays.
    """
    t = np.asarray(grid, dtype=float)
    flat = t.ravel()
    if flat.size == 0:
        return np.zeros_like(t), np.zeros_like(t)
    if flat.min() < lower:
        raise ValueError(f"grid point {flat.min()} below lower limit {lower}")
    top = float(flat.max())
    pts = [float(lower), top, *flat.tolist(), *(p for p in breakpoints if lower < p < top)]
    edges = np.unique(np.array(pts, dtype=float))
    if edges.size < 2:
        return np.zeros_like(t), np.zeros_like(t)
    lo, hi = edges[:-1], edges[1:]
    g = _as_vector_fn(f)
    vals, errs, conv = _simpson_batch(
        lambda x, _o: g(x), lo, hi, np.arange(lo.size), cfg.abs_tol, cfg.rel_tol, 1.0, cfg.max_depth
    )
    run = np.concatenate([[0.0], np.cumsum(vals)])
    run_err = np.concatenate([[0.0], np.cumsum(errs)])
    idx = np.searchsorted(edges, flat)
    if not conv.all():
        raise MaxDepthExceeded(float(run[-1]), float(run_err[-1]))
    return run[idx].reshape(t.shape), run_err[idx].reshape(t.shape)


def _tail_batch(f, starts, envelope, cfg, breakpoints=(), scale=1.0):
    """Integrate ``f(x, j)`` over ``[starts[j], inf)`` for every ``j``.

    The integrand is divided by ``envelope(starts[j], j)`` so tolerances act
    on O(1) quantities. The range is cut into geometric blocks of widths
    ``scale * 2**k``; it is truncated after the first block whose end has
    normalised envelope below ``cfg.tail_cut``. The mass beyond is
    extrapolated from the ratio of the last two block contributions, which
    is exact for power-law tails; a ratio near one means the partial sums
    are not Cauchy and the integral is declared divergent.
    """
    starts = np.atleast_1d(np.asarray(starts, dtype=float))
    n = starts.size
    idx = np.arange(n)
    norm = np.asarray(envelope(starts, idx), dtype=float)
    live = norm > 0
    values = np.zeros(n)
    errors = np.zeros(n)
    if not live.any():
        return values, errors

    unit = np.exp2(np.arange(_MAX_BLOCKS + 1)) - 1.0
    scales = np.broadcast_to(np.asarray(scale, dtype=float), (n,))
    owners = idx[live]
    x = starts[owners, None] + scales[owners, None] * unit[None, 1:]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        env = np.asarray(envelope(x.ravel(), np.repeat(owners, _MAX_BLOCKS)), dtype=float)
        rel = env.reshape(owners.size, _MAX_BLOCKS) / norm[owners, None]
    below = rel < cfg.tail_cut
    below[:, : _MIN_BLOCKS - 1] = False
    if not below.any(axis=1).all():
        raise DivergentIntegral("integrand envelope never falls below the tail cut")
    nblocks = np.argmax(below, axis=1) + 1

    bps = np.sort(np.asarray([float(p) for p in breakpoints], dtype=float))
    lo_list, hi_list, own_list, blk_list, share_list = [], [], [], [], []
    for j, nb in zip(owners, nblocks):
        s0 = starts[j]
        offs = scales[j] * unit
        ends = s0 + offs[: nb + 1]
        inner = bps[(bps > s0) & (bps < ends[-1])]
        edges = np.unique(np.concatenate([ends, inner]))
        lo_list.append(edges[:-1])
        hi_list.append(edges[1:])
        own_list.append(np.full(edges.size - 1, j))
        blk_list.append(np.searchsorted(offs, 0.5 * (edges[:-1] + edges[1:]) - s0, side="right") - 1)
        share_list.append(np.full(edges.size - 1, 1.0 / (edges.size - 1)))
    lo = np.concatenate(lo_list)
    hi = np.concatenate(hi_list)
    own = np.concatenate(own_list)
    blk = np.minimum(np.concatenate(blk_list), _MAX_BLOCKS - 1)

    def normalised(xs, os):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.asarray(f(xs, os), dtype=float) / norm[os]

    vals, errs, conv = _simpson_batch(
        normalised, lo, hi, own, cfg.abs_tol, cfg.rel_tol, np.concatenate(share_list), cfg.max_depth
    )
    total = np.bincount(own, weights=vals, minlength=n)
    qerr = np.bincount(own, weights=errs, minlength=n)
    blocks = np.zeros((n, _MAX_BLOCKS))
    np.add.at(blocks, (own, blk), vals)

    last = blocks[owners, nblocks - 1]
    prev = blocks[owners, nblocks - 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(prev > 0, last / prev, 0.0)
    significant = last > cfg.abs_tol * np.maximum(1.0, np.abs(total[owners]))
    if np.any(significant & (ratio >= _DIVERGENCE_RATIO)):
        raise DivergentIntegral("tail block contributions do not shrink; integral diverges")
    ratio = np.clip(ratio, 0.0, _DIVERGENCE_RATIO)
    # extrapolate only power-law-like decay; a collapsing ratio means the
    # tail died inside the last block and its geometric continuation is spurious
    geometric = ratio >= _POWER_LAW_RATIO
    remainder = np.where(geometric, last * ratio / (1.0 - ratio), 0.0)
    t_end = scales[owners] * unit[nblocks]
    trunc = rel[np.arange(owners.size), nblocks - 1] * t_end

    values[owners] = (total[owners] + remainder) * norm[owners]
    errors[owners] = (qerr[owners] + 0.5 * np.abs(remainder) + trunc) * norm[owners]
    if not conv.all():
        raise MaxDepthExceeded(float(values.sum()), float(errors.sum()))
    return values, errors


def integrate_tail(
    f: Callable,
    a: float,
    envelope: Callable | None = None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    breakpoints: Iterable[float] = (),
    scale: float = 1.0,
) -> tuple[float, float]:
    """Integrate a nonnegative ``f`` over ``[a, inf)``.

    ``envelope`` is a decreasing function dominating ``f`` (defaults to
    ``|f|``). Tolerances apply to the integral measured in units of
    ``envelope(a)``.

    Raises
    ------
    DivergentIntegral
        When the geometric tail blocks fail to shrink.
    """
    g = _as_vector_fn(f)
    env = g if envelope is None else _as_vector_fn(envelope)
    vals, errs = _tail_batch(
        lambda x, _o: g(x),
        [float(a)],
        lambda x, _o: np.abs(env(np.atleast_1d(x))),
        cfg,
        breakpoints,
        scale,
    )
    return float(vals[0]), float(errs[0])


def differentiate(f: Callable, t, cfg: QuadratureConfig = DEFAULT_CONFIG, lower: float | None = None):
    """Derivative of a smooth ``f`` at ``t``.

    Central difference with step ``diff_step * max(1, |t|)`` and one
    Richardson extrapolation. Where ``t - 2h`` would cross ``lower`` a
    second-order forward formula is used instead. Accuracy near kinks is
    poor and not detected.
    """
    t_arr = np.asarray(t, dtype=float)
    h = cfg.diff_step * np.maximum(1.0, np.abs(t_arr))

    def central(step):
        return (np.asarray(f(t_arr + step)) - np.asarray(f(t_arr - step))) / (2.0 * step)

    def forward(step):
        return (-3.0 * np.asarray(f(t_arr)) + 4.0 * np.asarray(f(t_arr + step)) - np.asarray(f(t_arr + 2 * step))) / (
            2.0 * step
        )

    if lower is not None and np.any(t_arr - 2.0 * h < lower):
        fwd = (4.0 * forward(h / 2) - forward(h)) / 3.0
        if np.all(t_arr - 2.0 * h < lower):
            out = fwd
        else:
            out = np.where(t_arr - 2.0 * h < lower, fwd, (4.0 * central(h / 2) - central(h)) / 3.0)
    else:
        out = (4.0 * central(h / 2) - central(h)) / 3.0
    return float(out) if t_arr.ndim == 0 else np.asarray(out, dtype=float)


def invert_monotone(g: Callable, target: float, lo: float, hi: float) -> float:
    """Smallest ``t`` in ``[lo, hi]`` with ``g(t) <= target``, by bisection.

    ``g`` must be nonincreasing with ``g(lo) >= target >= g(hi)``. The result
    is within ``1e-13 * max(1, hi)`` of the right-continuous inverse.
    """
    lo, hi = float(lo), float(hi)
    glo, ghi = float(g(lo)), float(g(hi))
    if not (glo >= target >= ghi):
        raise TargetOutOfRange(f"target {target!r} not within [g(hi), g(lo)] = [{ghi!r}, {glo!r}]")
    if glo <= target:
        return lo
    width = 1e-13 * max(1.0, abs(hi))
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if float(g(mid)) > target:
            lo = mid
        else:
            hi = mid
    return hi


def invert_monotone_many(g: Callable, targets, lo, hi) -> np.ndarray:
    """Vectorised :func:`invert_monotone` for arrays of targets and brackets."""
    targets = np.asarray(targets, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), targets.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), targets.shape).copy()
    glo, ghi = np.asarray(g(lo)), np.asarray(g(hi))
    if np.any(glo < targets) or np.any(ghi > targets):
        raise TargetOutOfRange("some targets are not bracketed")
    done_lo = glo <= targets
    hi[done_lo] = lo[done_lo]
    width = 1e-13 * np.maximum(1.0, np.abs(hi))
    while True:
        active = (hi - lo) > width
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        stalled = (mid <= lo) | (mid >= hi)
        active &= ~stalled
        if not active.any():
            break
        above = np.asarray(g(mid)) > targets
        lo = np.where(active & above, mid, lo)
        hi = np.where(active & ~above, mid, hi)
    return hi
