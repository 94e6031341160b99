"""Ageing-intensity functions and the IVRLAI/DVRLAI classification.

Each intensity compares a reliability curve at ``t`` with its running
average over ``[ℓ0, t]``:

* VRLAI  ``L^σ²(t) = t σ²(t) / ∫ σ²``
* MRLAI  ``L^μ(t)  = t μ(t) / ∫ μ``
* classical AI ``t r(t) / ∫ r``

``ℓ0`` is 0 by default or the support start with ``lower="support_start"``.
At ``t = 0`` the removable 0/0 is filled with its limit 1.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import residual
from .errors import NoDensity
from .models import SurvivalModel
from .numerics import DEFAULT_CONFIG, QuadratureConfig

__all__ = [
    "Regime",
    "Label",
    "AgeingClass",
    "vrlai",
    "mrlai",
    "classical_ai",
    "regime",
    "classify_vrlai",
    "default_grid",
    "CONSTANT_TOL",
    "NOISE",
]

CONSTANT_TOL = 1e-6
NOISE = 1e-9


class Regime(str, enum.Enum):
    ABOVE = "Above"
    AT = "At"
    BELOW = "Below"


class Label(str, enum.Enum):
    CONSTANT_UNITY = "ConstantUnity"
    IVRLAI = "IVRLAI"
    DVRLAI = "DVRLAI"
    NON_MONOTONE = "NonMonotone"


def _intensity(t, value, running, lo):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = t * np.asarray(value) / np.asarray(running)
    if lo > 0 and np.any(t <= lo):
        raise ValueError(f"intensity with lower limit {lo} needs t > {lo}")
    return np.where(t == 0, 1.0, out)


def _check_t(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValueError("intensities are defined for t >= 0")
    return arr


def vrlai(m: SurvivalModel, t, lower: str = "zero", cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Variance residual life ageing intensity ``t σ²(t) / ∫ σ²``."""
    arr = _check_t(t)
    lo = residual.lower_limit(m, lower)
    out = _intensity(arr, residual.vrl(m, arr, cfg), residual.cum_vrl(m, arr, lower, cfg), lo)
    return float(out) if arr.ndim == 0 else out


def mrlai(m: SurvivalModel, t, lower: str = "zero", cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Mean residual life ageing intensity ``t μ(t) / ∫ μ``."""
    arr = _check_t(t)
    lo = residual.lower_limit(m, lower)
    out = _intensity(arr, residual.mrl(m, arr, cfg), residual.cum_mrl(m, arr, lower, cfg), lo)
    return float(out) if arr.ndim == 0 else out


def classical_ai(m: SurvivalModel, t, lower: str = "zero", cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Hazard ageing intensity ``t r(t) / ∫ r``.

    The cumulative hazard is taken as ``-log`` of the survival ratio, which
    is exact for laws with a density.
    """
    if not m.has_density:
        raise NoDensity(f"{m!r} has atoms; the hazard ageing intensity is undefined")
    arr = _check_t(t)
    lo = residual.lower_limit(m, lower)
    r = np.asarray(m.hazard(arr), dtype=float)
    with np.errstate(divide="ignore"):
        cum = np.log(m.survival(lo)) - np.log(np.asarray(m.survival(arr), dtype=float))
    out = _intensity(arr, r, cum, lo)
    return float(out) if arr.ndim == 0 else out


def regime(m: SurvivalModel, t, tol: float = CONSTANT_TOL, lower: str = "zero", cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Whether ``L^σ²(t)`` sits above, at or below one (within ``tol``)."""
    value = vrlai(m, t, lower, cfg)
    if value > 1.0 + tol:
        return Regime.ABOVE
    if value < 1.0 - tol:
        return Regime.BELOW
    return Regime.AT


def default_grid(m: SurvivalModel | None = None, lower: str = "zero") -> np.ndarray:
    """400 log-spaced points on [1e-2, 20] plus any breakpoints in range.

    ``VRLAI_DEFAULT_GRID`` (``a:b:n[:log]``) overrides the base grid.
    """
    spec = os.environ.get("VRLAI_DEFAULT_GRID")
    if spec:
        from .cli import parse_grid

        base = parse_grid(spec)
    else:
        base = np.geomspace(1e-2, 20.0, 400)
    extra = []
    lo = 0.0
    if m is not None:
        lo = residual.lower_limit(m, lower)
        extra = [b for b in m.breakpoints if base[0] <= b <= base[-1]]
    grid = np.unique(np.concatenate([base, np.asarray(extra, dtype=float)]))
    return grid[grid > lo] if lo > 0 else grid


@dataclass(frozen=True)
class AgeingClass:
    label: Label
    witnesses: tuple[tuple[float, float], ...] = ()
    tol: float = CONSTANT_TOL
    sup_deviation: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "witnesses": [{"t": float(t), "L": float(v)} for t, v in self.witnesses],
            "tol": self.tol,
            "sup_abs_L_minus_1": float(self.sup_deviation),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _best_swing(values, noise, pick):
    """Index triple of the largest valley (``pick=max``) or peak (``pick=min``)."""
    n = values.size
    if n < 3:
        return None
    sign = 1.0 if pick == "valley" else -1.0
    v = sign * values
    pref = np.maximum.accumulate(v)
    suf = np.maximum.accumulate(v[::-1])[::-1]
    left = pref[:-2] - v[1:-1]
    right = suf[2:] - v[1:-1]
    depth = np.minimum(left, right)
    gate = noise[1:-1]
    j = int(np.argmax(depth - gate))
    if not (left[j] > gate[j] and right[j] > gate[j]):
        return None
    mid = j + 1
    i = int(np.argmax(v[:mid]))
    k = mid + 1 + int(np.argmax(v[mid + 1 :]))
    return (i, mid, k), float(depth[j])


def classify_vrlai(
    m: SurvivalModel,
    grid=None,
    tol: float = CONSTANT_TOL,
    lower: str = "zero",
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    values=None,
) -> AgeingClass:
    """Label the VRLAI curve of ``m`` on ``grid``.

    ``ConstantUnity`` when ``sup |L - 1| <= tol``. Otherwise monotone unless
    there is a valley or a peak whose both swings exceed the rounding noise
    ``1e-9 * max(1, |L|)``; the deepest such triple is the witness.
    """
    t = default_grid(m, lower) if grid is None else np.unique(np.asarray(grid, dtype=float))
    L = np.asarray(vrlai(m, t, lower, cfg) if values is None else values, dtype=float)
    dev = float(np.max(np.abs(L - 1.0)))
    if dev <= tol:
        return AgeingClass(Label.CONSTANT_UNITY, (), tol, dev)
    noise = NOISE * np.maximum(1.0, np.abs(L))
    found = [s for s in (_best_swing(L, noise, "valley"), _best_swing(L, noise, "peak")) if s is not None]
    if found:
        idx, _ = max(found, key=lambda s: s[1])
        return AgeingClass(Label.NON_MONOTONE, tuple((float(t[i]), float(L[i])) for i in idx), tol, dev)
    label = Label.IVRLAI if L[-1] >= L[0] else Label.DVRLAI
    ends = (0, int(np.argmax(np.abs(L - 1.0))), L.size - 1)
    return AgeingClass(label, tuple((float(t[i]), float(L[i])) for i in sorted(set(ends))), tol, dev)
