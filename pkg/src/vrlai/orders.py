"""Grid-based decisions for stochastic orders between two lifetimes.

Pointwise relations (``lhs(t) <= rhs(t) + tol`` on every grid point):

* VRLAI  ``L_X^σ² <= L_Y^σ²``
* ICX    ``T_X <= T_Y``  (tail integrals of the survival functions)
* MRL    ``μ_X <= μ_Y``

Ratio relations (the curve must be nonincreasing; increments are measured
on the log scale, ``log g(t_{i+1}) - log g(t_i) <= tol``):

* VRL    ``D_X / D_Y``
* LR     ``f_X / f_Y``
* the VRLAI ratio criterion ``Σ_X / Σ_Y``, equivalent to the VRLAI order

A verdict certifies the grid only, not the continuum.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import intensity, residual
from .errors import NoDensity
from .models import SurvivalModel
from .numerics import DEFAULT_CONFIG, QuadratureConfig

__all__ = [
    "DEFAULT_TOL",
    "Relation",
    "Outcome",
    "Witness",
    "OrderVerdict",
    "vrlai_order",
    "vrlai_ratio_criterion",
    "vrl_order",
    "icx_order",
    "lr_order",
    "mrl_order",
    "proportional_vrl_check",
    "decide",
    "order_grid",
]

DEFAULT_TOL = 1e-7


class Relation(str, enum.Enum):
    VRLAI = "VRLAI"
    VRLAI_RATIO = "VRLAI_RATIO"
    VRL = "VRL"
    ICX = "ICX"
    LR = "LR"
    MRL = "MRL"


class Outcome(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Witness:
    """Grid evidence of a failure.

    For pointwise relations ``lhs > rhs + tol`` at ``t``. For ratio relations
    ``lhs = g(t)`` exceeds ``rhs = g(t_prev)``; ``triple`` optionally holds a
    valley ``g(t1) > g(t2) < g(t3)``.
    """

    t: float
    lhs: float
    rhs: float
    t_prev: float | None = None
    triple: tuple[tuple[float, float], ...] = ()

    def to_dict(self) -> dict:
        out = {"t": self.t, "lhs": self.lhs, "rhs": self.rhs}
        if self.t_prev is not None:
            out["t_prev"] = self.t_prev
        if self.triple:
            out["triple"] = [{"t": a, "value": b} for a, b in self.triple]
        return out


@dataclass(frozen=True)
class OrderVerdict:
    relation: Relation
    outcome: Outcome
    witness: Witness | None
    evidence: dict = field(default_factory=dict, repr=False)
    grid_spec: dict = field(default_factory=dict)
    tol: float = DEFAULT_TOL
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.outcome is Outcome.HOLDS

    def to_dict(self, evidence: bool = False) -> dict:
        out = {
            "relation": self.relation.value,
            "outcome": self.outcome.value,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "grid_spec": self.grid_spec,
            "tol": self.tol,
        }
        if self.note:
            out["note"] = self.note
        if evidence:
            out["evidence"] = {k: [float(x) for x in v] for k, v in self.evidence.items()}
        return out

    def to_json(self, evidence: bool = False) -> str:
        return json.dumps(self.to_dict(evidence), indent=2)


def order_grid(X: SurvivalModel, Y: SurvivalModel, grid=None, lower: str = "zero") -> np.ndarray:
    """Sorted grid of positive times, restricted beyond both lower limits."""
    if grid is None:
        base = intensity.default_grid()
        bps = [b for b in (*X.breakpoints, *Y.breakpoints) if base[0] <= b <= base[-1]]
        t = np.unique(np.concatenate([base, np.asarray(bps, dtype=float)]))
    else:
        t = np.unique(np.asarray(grid, dtype=float))
    floor = max(residual.lower_limit(X, lower), residual.lower_limit(Y, lower), 0.0)
    t = t[t > floor]
    if t.size < 2:
        raise ValueError("order decisions need at least two grid points above the lower limits")
    return t


def _spec(t: np.ndarray) -> dict:
    return {"start": float(t[0]), "stop": float(t[-1]), "count": int(t.size)}


def _pointwise(rel: Relation, t, lhs, rhs, tol, note="") -> OrderVerdict:
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    excess = lhs - rhs
    evidence = {"t": t, "lhs": lhs, "rhs": rhs}
    if np.any(np.isnan(excess)):
        return OrderVerdict(rel, Outcome.INCONCLUSIVE, None, evidence, _spec(t), tol, note or "undefined values on grid")
    i = int(np.argmax(excess))
    if excess[i] > tol:
        w = Witness(float(t[i]), float(lhs[i]), float(rhs[i]))
        return OrderVerdict(rel, Outcome.FAILS, w, evidence, _spec(t), tol, note)
    return OrderVerdict(rel, Outcome.HOLDS, None, evidence, _spec(t), tol, note)


def _nonincreasing(rel: Relation, t, num, den, tol, note="") -> OrderVerdict:
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = num / den
        logg = np.log(num) - np.log(den)
    evidence = {"t": t, "ratio": g}
    ok = ~np.isnan(logg)
    if ok.sum() < 2:
        return OrderVerdict(rel, Outcome.INCONCLUSIVE, None, evidence, _spec(t), tol, note or "ratio undefined on grid")
    tt, lg, gg = t[ok], logg[ok], g[ok]
    with np.errstate(invalid="ignore"):
        inc = np.diff(lg)
    inc = np.where(np.isnan(inc), 0.0, inc)  # inf - inf: no information
    if ok.sum() < t.size:
        note = note or f"{int(t.size - ok.sum())} grid points with undefined ratio skipped"
    i = int(np.argmax(inc))
    if inc[i] > tol:
        fin = np.isfinite(lg)
        swing = intensity._best_swing(lg[fin], np.full(int(fin.sum()), tol), "valley")
        tf, gf = tt[fin], gg[fin]
        triple = () if swing is None else tuple((float(tf[k]), float(gf[k])) for k in swing[0])
        w = Witness(float(tt[i + 1]), float(gg[i + 1]), float(gg[i]), float(tt[i]), triple)
        return OrderVerdict(rel, Outcome.FAILS, w, evidence, _spec(t), tol, note)
    return OrderVerdict(rel, Outcome.HOLDS, None, evidence, _spec(t), tol, note)


def vrlai_order(X, Y, grid=None, tol: float = DEFAULT_TOL, lower: str = "zero", cfg: QuadratureConfig = DEFAULT_CONFIG):
    """``X ⪯ Y`` in the VRLAI order: ``L_X(t) <= L_Y(t) + tol`` on the grid."""
    t = order_grid(X, Y, grid, lower)
    if X == Y:
        L = intensity.vrlai(X, t, lower, cfg)
        return _pointwise(Relation.VRLAI, t, L, L, tol)
    return _pointwise(Relation.VRLAI, t, intensity.vrlai(X, t, lower, cfg), intensity.vrlai(Y, t, lower, cfg), tol)


def vrlai_ratio_criterion(X, Y, grid=None, tol: float = DEFAULT_TOL, lower: str = "zero", cfg=DEFAULT_CONFIG):
    """VRLAI order through monotonicity of ``Σ_X / Σ_Y``.

    ``log Σ_X/Σ_Y`` has derivative ``(L_X - L_Y) / t``, so a nonincreasing
    ratio is the same statement as the pointwise order.
    """
    t = order_grid(X, Y, grid, lower)
    sx = residual.cum_vrl(X, t, lower, cfg)
    sy = sx if X == Y else residual.cum_vrl(Y, t, lower, cfg)
    return _nonincreasing(Relation.VRLAI_RATIO, t, sx, sy, tol)


def vrl_order(X, Y, grid=None, tol: float = DEFAULT_TOL, cfg=DEFAULT_CONFIG):
    """VRL order via ``D_X / D_Y`` nonincreasing."""
    t = order_grid(X, Y, grid)
    dx = residual.second_tail(X, t, cfg)
    dy = dx if X == Y else residual.second_tail(Y, t, cfg)
    return _nonincreasing(Relation.VRL, t, dx, dy, tol)


def icx_order(X, Y, grid=None, tol: float = DEFAULT_TOL, cfg=DEFAULT_CONFIG):
    """Increasing convex order: ``T_X(t) <= T_Y(t)`` on the grid."""
    t = order_grid(X, Y, grid)
    return _pointwise(Relation.ICX, t, residual.tail_integral(X, t, cfg), residual.tail_integral(Y, t, cfg), tol)


def mrl_order(X, Y, grid=None, tol: float = DEFAULT_TOL, cfg=DEFAULT_CONFIG):
    """MRL order: ``μ_X(t) <= μ_Y(t)`` on the grid."""
    t = order_grid(X, Y, grid)
    return _pointwise(Relation.MRL, t, residual.mrl(X, t, cfg), residual.mrl(Y, t, cfg), tol)


def lr_order(X, Y, grid=None, tol: float = DEFAULT_TOL, cfg=DEFAULT_CONFIG):
    """Likelihood-ratio order: ``f_X / f_Y`` nonincreasing.

    Inconclusive (not an error) when either law has atoms. Breakpoints are
    dropped from the grid since densities are one-sided there.
    """
    t = order_grid(X, Y, grid)
    t = t[~np.isin(t, (*X.breakpoints, *Y.breakpoints))]
    try:
        fx = X.density(t)
        fy = Y.density(t)
    except NoDensity as exc:
        return OrderVerdict(Relation.LR, Outcome.INCONCLUSIVE, None, {"t": t}, _spec(t), tol, f"no density: {exc}")
    return _nonincreasing(Relation.LR, t, fx, fy, tol)


def proportional_vrl_check(X, Y, grid=None, tol: float = 1e-6, cfg=DEFAULT_CONFIG) -> tuple[bool, float]:
    """Whether ``σ²_X = c σ²_Y`` on the grid, with ``c`` the median ratio."""
    t = order_grid(X, Y, grid)
    vx = np.asarray(residual.vrl(X, t, cfg))
    vy = np.asarray(residual.vrl(Y, t, cfg))
    with np.errstate(divide="ignore", invalid="ignore"):
        c = float(np.median(vx / vy))
    dev = np.abs(vx - c * vy)
    return bool(np.all(dev <= tol * np.maximum(1.0, vx))), c


_DISPATCH = {
    Relation.VRLAI: vrlai_order,
    Relation.VRLAI_RATIO: vrlai_ratio_criterion,
    Relation.VRL: vrl_order,
    Relation.ICX: icx_order,
    Relation.LR: lr_order,
    Relation.MRL: mrl_order,
}


def decide(
    X: SurvivalModel,
    Y: SurvivalModel,
    relations: Sequence[str | Relation],
    grid=None,
    tol: float = DEFAULT_TOL,
    lower: str = "zero",
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> list[OrderVerdict]:
    out = []
    for rel in relations:
        r = Relation(rel.upper() if isinstance(rel, str) else rel)
        fn = _DISPATCH[r]
        if r in (Relation.VRLAI, Relation.VRLAI_RATIO):
            out.append(fn(X, Y, grid, tol, lower, cfg))
        else:
            out.append(fn(X, Y, grid, tol, cfg))
    return out
