"""Residual-life moments: MRL, VRL, their running integrals and reconstruction identities.

With ``F̄`` the survival function, ``T(t) = ∫_t^∞ F̄`` and
``D(t) = ∫_t^∞ T = ∫_t^∞ (u - t) F̄(u) du``, the residual life
``X_t = X - t | X > t`` has

    μ(t) = T(t) / F̄(t),       σ²(t) = 2 D(t) / F̄(t) - μ(t)².

Numerically both tails are integrated as moments of the normalised residual
survival ``F̄(t + s) / F̄(t)`` so that tolerances act on O(1) quantities.
Below the support start ``ℓ`` the survival equals one and the moments follow
from those at ``ℓ`` by shifting.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numerics
from .errors import DeadSupport, DivergentIntegral, InconsistentMoments, NonPositiveMrl, SingularReconstruction
from .models import SurvivalModel
from .numerics import DEFAULT_CONFIG, QuadratureConfig

__all__ = [
    "LOWER_MODES",
    "ResidualProfile",
    "residual_moments",
    "tail_integral",
    "second_tail",
    "mrl",
    "vrl",
    "cum_vrl",
    "cum_mrl",
    "lower_limit",
    "profile",
    "survival_from_mrl",
    "survival_from_vrl",
    "gupta_residual",
]

LOWER_MODES = ("zero", "support_start")
_CLAMP = 1e-9
_SINGULAR = 1e-8


def _out(values, like):
    arr = np.asarray(like)
    return float(np.asarray(values).reshape(-1)[0]) if arr.ndim == 0 else np.asarray(values).reshape(arr.shape)


@dataclass(frozen=True)
class _Moments:
    survival: np.ndarray
    mu: np.ndarray
    m2: np.ndarray | None
    err_mu: np.ndarray
    err_m2: np.ndarray | None


_HALVINGS = 60


def _local_scale(m: SurvivalModel, q: np.ndarray, log_s: np.ndarray) -> np.ndarray:
    """Largest ``h = time_scale * 2**-k`` with ``F̄(q + h) >= F̄(q) / 2``.

    Sizes the first tail block to the residual life actually present, which
    can be far shorter than the model's global time scale.
    """
    base = max(float(m.time_scale), 1e-300)
    h = base * np.exp2(-np.arange(_HALVINGS, dtype=float))
    x = q[:, None] + h[None, :]
    with np.errstate(all="ignore"):
        drop = m._logsf(x.ravel()).reshape(x.shape) - log_s[:, None]
    ok = drop >= -np.log(2.0)
    first = np.where(ok.any(axis=1), np.argmax(ok, axis=1), _HALVINGS - 1)
    return np.maximum(h[first], 1e-12 * np.maximum(1.0, np.abs(q)))


def _numeric_tails(m: SurvivalModel, q: np.ndarray, log_s: np.ndarray, cfg: QuadratureConfig, second: bool):
    scale = _local_scale(m, q, log_s)

    def resid(x, o):
        # ratio in log space: survival may underflow long before the ratio does
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(m._logsf(x) - log_s[o])

    mu, err_mu = numerics._tail_batch(resid, q, resid, cfg, m.breakpoints, scale)
    if not second:
        return mu, err_mu, None, None

    def weighted(x, o):
        return 2.0 * (x - q[o]) * resid(x, o)

    def env(x, o):
        return np.maximum(1.0, x - q[o]) * resid(x, o)

    m2, err_m2 = numerics._tail_batch(weighted, q, env, cfg, m.breakpoints, scale)
    return mu, err_mu, m2, err_m2


def residual_moments(m: SurvivalModel, t, cfg: QuadratureConfig = DEFAULT_CONFIG, second: bool = True) -> _Moments:
    """Survival and conditional moments ``E[X_t]``, ``E[X_t^2]`` on a 1-D array of times.

    ``second=False`` skips the second moment (useful when it diverges).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    ell = float(m.support_start)
    below = t < ell
    q = np.where(below, ell, t)
    uq, inverse = np.unique(q, return_inverse=True)
    with np.errstate(all="ignore"):
        log_s = np.asarray(m._logsf(uq), dtype=float).reshape(uq.shape)
    dead = np.isnan(log_s) | (log_s == -np.inf)
    if np.any(dead):
        bad = uq[dead][0]
        raise DeadSupport(f"survival of {m!r} vanishes at t={bad!r}")
    with np.errstate(over="ignore"):
        s = np.exp(log_s)

    closed = m.closed_residual(uq)
    if closed is not None:
        mu = np.asarray(closed[0], dtype=float)
        m2 = np.asarray(closed[1], dtype=float) if second else None
        err_mu = np.zeros_like(mu)
        err_m2 = np.zeros_like(mu) if second else None
    else:
        mu, err_mu, m2, err_m2 = _numeric_tails(m, uq, log_s, cfg, second)

    s, mu, err_mu = s[inverse], mu[inverse], err_mu[inverse]
    if second:
        m2, err_m2 = m2[inverse], err_m2[inverse]
    if below.any():
        gap = ell - t[below]
        tail = s[below] * mu[below]  # T(ℓ); survival is one below ℓ
        if second:
            d_ell = 0.5 * s[below] * m2[below]
            m2 = m2.copy()
            m2[below] = 2.0 * (d_ell + gap * tail) + gap**2
            err_m2 = err_m2.copy()
            err_m2[below] = s[below] * err_m2[below] + 2.0 * gap * s[below] * err_mu[below]
        mu = mu.copy()
        mu[below] = gap + tail
        err_mu = err_mu.copy()
        err_mu[below] = s[below] * err_mu[below]
        s = s.copy()
        s[below] = 1.0
    return _Moments(s, mu, m2, err_mu, err_m2)


def _variance(mom: _Moments) -> tuple[np.ndarray, np.ndarray]:
    var = mom.m2 - mom.mu**2
    err = mom.err_m2 + 2.0 * np.abs(mom.mu) * mom.err_mu
    slack = _CLAMP * np.maximum(1.0, np.abs(mom.m2))
    if np.any(var < -slack):
        raise InconsistentMoments(f"residual variance {var.min()!r} is negative beyond rounding")
    return np.maximum(var, 0.0), err


def tail_integral(m: SurvivalModel, t, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """``T(t) = ∫_t^∞ F̄(u) du``."""
    mom = residual_moments(m, t, cfg, second=False)
    return _out(mom.survival * mom.mu, t)


def second_tail(m: SurvivalModel, t, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """``D(t) = ∫_t^∞ T(u) du``; raises DivergentIntegral when ``E[X²]`` is infinite."""
    mom = residual_moments(m, t, cfg)
    return _out(0.5 * mom.survival * mom.m2, t)


def mrl(m: SurvivalModel, t, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Mean residual life ``μ(t)``."""
    return _out(residual_moments(m, t, cfg, second=False).mu, t)


def vrl(m: SurvivalModel, t, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Variance residual life ``σ²(t)``.

    Values within ``1e-9`` (relative) below zero are rounding and clamp to
    zero; anything more negative raises InconsistentMoments.
    """
    return _out(_variance(residual_moments(m, t, cfg))[0], t)


def lower_limit(m: SurvivalModel, lower: str = "zero") -> float:
    if lower == "zero":
        return 0.0
    if lower == "support_start":
        return float(m.support_start)
    raise ValueError(f"lower-limit mode must be one of {LOWER_MODES}, got {lower!r}")


def _running(m, fn, t, lower, cfg):
    t_arr = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    lo = lower_limit(m, lower)
    if np.any(t_arr < lo):
        raise ValueError(f"time below the integration lower limit {lo}")
    bps = sorted({*m.breakpoints, float(m.support_start)})
    vals, errs = numerics.cumulative_integral(fn, t_arr, lo, cfg, bps)
    return vals, errs


def cum_vrl(m: SurvivalModel, t, lower: str = "zero", cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Running integral ``Σ(t) = ∫_ℓ0^t σ²(u) du``.

    ``lower="zero"`` integrates from 0 with the true σ² (constant below the
    support start); ``lower="support_start"`` starts at the support start.
    """
    vals, _ = _running(m, lambda u: vrl(m, u, cfg), t, lower, _outer_cfg(m, cfg))
    return _out(vals, t)


def cum_mrl(m: SurvivalModel, t, lower: str = "zero", cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Running integral of the MRL."""
    vals, _ = _running(m, lambda u: mrl(m, u, cfg), t, lower, _outer_cfg(m, cfg))
    return _out(vals, t)


def _outer_cfg(m: SurvivalModel, cfg: QuadratureConfig) -> QuadratureConfig:
    # an integrand that is itself a quadrature carries ~1e-12 noise; asking
    # the outer rule for more than that only drives subdivision deeper
    if m.closed_residual(np.array([m.support_start])) is not None:
        return cfg
    return QuadratureConfig(
        rel_tol=max(cfg.rel_tol, 1e-9),
        abs_tol=max(cfg.abs_tol, 1e-11),
        tail_cut=cfg.tail_cut,
        max_depth=cfg.max_depth,
        diff_step=cfg.diff_step,
    )


# profiles -------------------------------------------------------------------------

COLUMNS = ("survival", "mrl", "vrl", "cum_vrl", "mrlai", "vrlai")


def _ratio_intensity(t, value, running):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = t * value / running
    return np.where(t == 0, 1.0, out)


@dataclass(frozen=True)
class ResidualProfile:
    """Residual-life curves on a grid.

    Columns that could not be computed (divergent moments) hold NaN and are
    listed in ``divergent``.
    """

    t: np.ndarray
    survival: np.ndarray
    mrl: np.ndarray
    vrl: np.ndarray
    cum_vrl: np.ndarray
    mrlai: np.ndarray
    vrlai: np.ndarray
    err_mrl: np.ndarray
    err_vrl: np.ndarray
    lower: str = "zero"
    divergent: tuple[str, ...] = field(default_factory=tuple)

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t," + ",".join(COLUMNS) + "\n")
        for i, ti in enumerate(self.t):
            cells = [_fmt(ti)] + [_fmt(self.column(c)[i]) for c in COLUMNS]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def to_records(self) -> list[dict]:
        rows = []
        for i, ti in enumerate(self.t):
            row = {"t": float(ti)}
            for c in COLUMNS:
                v = float(self.column(c)[i])
                row[c] = v if np.isfinite(v) else None
            rows.append(row)
        return rows

    def to_json(self) -> str:
        return json.dumps({"lower": self.lower, "divergent": list(self.divergent), "rows": self.to_records()}, indent=2)


def _fmt(x) -> str:
    x = float(x)
    return "" if not np.isfinite(x) else "%.12g" % x


def profile(
    m: SurvivalModel,
    grid,
    lower: str = "zero",
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    strict: bool = True,
) -> ResidualProfile:
    """Evaluate every residual curve of ``m`` on ``grid``.

    With ``strict=False`` a divergent moment leaves its dependent columns
    NaN instead of raising.
    """
    t = np.asarray(grid, dtype=float).ravel()
    nan = np.full(t.shape, np.nan)
    divergent: list[str] = []
    try:
        first = residual_moments(m, t, cfg, second=False)
    except DivergentIntegral:
        if strict:
            raise
        return ResidualProfile(t, np.asarray(m.survival(t), dtype=float).reshape(t.shape), nan, nan, nan, nan, nan,
                               nan, nan, lower, tuple(COLUMNS[1:]))
    surv, mu, err_mu = first.survival, first.mu, first.err_mu
    run_mu, _ = _running(m, lambda u: mrl(m, u, cfg), t, lower, _outer_cfg(m, cfg))
    mrlai = _ratio_intensity(t, mu, run_mu)
    try:
        mom = residual_moments(m, t, cfg)
        var, err_var = _variance(mom)
        run_var, _ = _running(m, lambda u: vrl(m, u, cfg), t, lower, _outer_cfg(m, cfg))
        vrlai = _ratio_intensity(t, var, run_var)
    except DivergentIntegral:
        if strict:
            raise
        var = err_var = run_var = vrlai = nan
        divergent = ["vrl", "cum_vrl", "vrlai"]
    return ResidualProfile(t, surv, mu, var, run_var, mrlai, vrlai, err_mu, err_var, lower, tuple(divergent))


# identities -------------------------------------------------------------------------


def survival_from_mrl(mu_fn: Callable, mu0: float, t, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Rebuild ``F̄(t) = (μ(0)/μ(t)) exp(-∫_0^t du/μ(u))`` from an MRL function."""
    g = numerics._as_vector_fn(mu_fn)

    def inv(u):
        val = np.asarray(g(u), dtype=float)
        if np.any(~(val > 0)):
            raise NonPositiveMrl("mean residual life must stay positive")
        return 1.0 / val

    t_arr = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    running, _ = numerics.cumulative_integral(inv, t_arr, 0.0, cfg)
    out = mu0 * inv(t_arr) * np.exp(-running)
    return _out(out, t)


def survival_from_vrl(vrl_fn: Callable, mrl_fn: Callable, t, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Rebuild ``F̄(t) = exp(-∫_0^t σ²'(u) / (σ²(u) - μ(u)²) du)``.

    Raises SingularReconstruction when ``|σ² - μ²| < 1e-8`` at a quadrature
    node (the exponential law, where the integrand is 0/0).
    """
    sv = numerics._as_vector_fn(vrl_fn)
    mv = numerics._as_vector_fn(mrl_fn)

    def rate(u):
        den = np.asarray(sv(u), dtype=float) - np.asarray(mv(u), dtype=float) ** 2
        if np.any(np.abs(den) < _SINGULAR):
            raise SingularReconstruction("σ² - μ² vanishes; the reconstruction is 0/0")
        return np.asarray(numerics.differentiate(sv, u, cfg, lower=0.0)) / den

    t_arr = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    loose = QuadratureConfig(rel_tol=max(cfg.rel_tol, 1e-8), abs_tol=max(cfg.abs_tol, 1e-10))
    running, _ = numerics.cumulative_integral(rate, t_arr, 0.0, loose)
    return _out(np.exp(-running), t)


def gupta_residual(m: SurvivalModel, t, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """``dσ²/dt - r(t) (σ²(t) - μ(t)²)``, zero for every law with a density."""
    t_arr = np.asarray(t, dtype=float)
    r = np.asarray(m.hazard(t_arr), dtype=float)
    d = numerics.differentiate(lambda u: vrl(m, u, cfg), t_arr, cfg, lower=float(m.support_start))
    mom = residual_moments(m, t_arr, cfg)
    var, _ = _variance(mom)
    out = np.asarray(d) - r.reshape(var.shape) * (var - mom.mu**2)
    return _out(out, t)
