"""Named reference distributions and the closed-form expressions printed for them.

``build_fixture`` builds the survival models; ``EXPRESSIONS`` holds the
printed closed forms (MRL, VRL, intensities, comparison curves) as plain
callables so they can be checked against the numeric pipeline. Expressions
flagged ``consistent=False`` disagree with direct computation from the
survival function and are kept for reporting only.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import UnknownFixture
from .models import (
    Piece,
    Piecewise,
    SurvivalModel,
    erlang,
    exponential,
    iid_convolution,
    lomax,
    order_statistic,
    parallel,
    pareto,
)

E = math.e

# piecewise laws ---------------------------------------------------------------


def _ex2_1() -> Piecewise:
    return Piecewise(
        (
            Piece(0.0, lambda t: np.exp(-t), lambda t: np.exp(-t)),
            Piece(1.0, lambda t: np.exp(-1.0) / t**2, lambda t: 2.0 * np.exp(-1.0) / t**3),
        ),
        name="ex2_1",
    )


# The printed second branch exp((e-1) + t - e^t) equals 1 at t = 1+, so the
# printed function jumps upward. The constant e-2 restores continuity.
_EX2_2_SHIFT = E - 2.0


def _ex2_2() -> Piecewise:
    def log_tail(t):
        return _EX2_2_SHIFT + t - np.exp(t)

    def tail(t):
        return np.exp(log_tail(t))

    return Piecewise(
        (
            Piece(0.0, lambda t: np.exp(-t), lambda t: np.exp(-t), lambda t: -t),
            Piece(1.0, tail, lambda t: (np.exp(t) - 1.0) * tail(t), log_tail),
        ),
        name="ex2_2",
    )


def _ex2_3() -> Piecewise:
    return Piecewise(
        (
            Piece(0.0, lambda t: np.ones_like(t), lambda t: np.zeros_like(t)),
            Piece(0.5, lambda t: np.exp(-(math.log(2.0) - 0.5 + t)), lambda t: np.exp(-(math.log(2.0) - 0.5 + t))),
        ),
        name="ex2_3",
    )


def _ex2_4() -> Piecewise:
    flat = math.exp(-2.0 / 3.0)
    return Piecewise(
        (
            Piece(0.0, lambda t: np.exp(-2.0 * t), lambda t: 2.0 * np.exp(-2.0 * t)),
            Piece(1.0 / 3.0, lambda t: np.full_like(t, flat), lambda t: np.zeros_like(t)),
            Piece(2.0 / 3.0, lambda t: np.exp(-2.0 * t + 2.0 / 3.0), lambda t: 2.0 * np.exp(-2.0 * t + 2.0 / 3.0)),
        ),
        name="ex2_4",
    )


# The comparison examples write Pareto laws as t^{-alpha} on t >= 1, which is
# shape a = alpha - 1 here.
def _pareto_alpha3(mode: str) -> SurvivalModel:
    return pareto(2.0, 1.0, formula=(mode == "formula"))


_SINGLE: dict[str, Callable[[], SurvivalModel]] = {
    "ex2_1": _ex2_1,
    "ex2_2": _ex2_2,
    "ex2_3": _ex2_3,
    "ex2_4": _ex2_4,
    "eg2_1_cube": lambda: lomax(2.0, 1.0),
    "ex3_1_conv": lambda: iid_convolution(exponential(1.0), 2),
    "ex3_2_ostat": lambda: order_statistic(exponential(1.0), 2, 3),
}

_PAIRS: dict[str, Callable[[str], tuple[SurvivalModel, SurvivalModel]]] = {
    "ex4_2_pair": lambda mode: (exponential(0.5), _pareto_alpha3(mode)),
    "ex4_3_pair": lambda mode: (exponential(3.0), _pareto_alpha3(mode)),
    "ex4_4_pair": lambda mode: (erlang(2, 5.0), erlang(2, 4.0)),
    "ex4_5_pair": lambda mode: (parallel(erlang(2, 1.0), 2), parallel(exponential(2.0), 2)),
    "ex4_6_pair": lambda mode: (lomax(2.0, 1.0), _pareto_alpha3(mode)),
}

# pairs whose Pareto member changes with the evaluation mode
FORMULA_SENSITIVE = frozenset({"ex4_2_pair", "ex4_3_pair", "ex4_6_pair"})

FIXTURE_IDS = tuple(_SINGLE) + tuple(_PAIRS)

_PARAM = re.compile(r"^\s*(exp|pareto|erlang|lomax)\s*\(([^()]*)\)\s*$")


def _parametric(fid: str, mode: str) -> SurvivalModel | None:
    match = _PARAM.match(fid)
    if not match:
        return None
    kind, raw = match.groups()
    try:
        args = [float(x) for x in raw.split(",") if x.strip()]
    except ValueError as exc:
        raise UnknownFixture(fid) from exc
    try:
        if kind == "exp" and len(args) == 1:
            return exponential(args[0])
        if kind == "pareto" and len(args) in (1, 2):
            return pareto(*args, formula=(mode == "formula"))
        if kind == "erlang" and len(args) == 2:
            return erlang(int(args[0]), args[1])
        if kind == "lomax" and len(args) in (1, 2):
            return lomax(*args)
    except ValueError as exc:
        raise UnknownFixture(f"{fid}: {exc}") from exc
    raise UnknownFixture(fid)


def build_fixture(fid: str, mode: str = "model"):
    """Model (or ``(X, Y)`` pair) registered under ``fid``.

    Accepts the named ids in ``FIXTURE_IDS``, pair ids with or without the
    ``_pair`` suffix, and parametric ids ``exp(rate)``, ``pareto(a,b)``,
    ``erlang(k,rate)``, ``lomax(a,scale)``. ``mode="formula"`` extends
    Pareto members below their support start.
    """
    if mode not in ("model", "formula"):
        raise ValueError(f"mode must be 'model' or 'formula', got {mode!r}")
    if fid in _SINGLE:
        return _SINGLE[fid]()
    key = fid if fid.endswith("_pair") else f"{fid}_pair"
    if key in _PAIRS:
        return _PAIRS[key](mode)
    found = _parametric(fid, mode)
    if found is None:
        raise UnknownFixture(fid)
    return found


def is_pair(fid: str) -> bool:
    key = fid if fid.endswith("_pair") else f"{fid}_pair"
    return key in _PAIRS


# printed expressions ----------------------------------------------------------------


@dataclass(frozen=True)
class Expression:
    fixture: str
    quantity: str
    fn: Callable[[np.ndarray], np.ndarray]
    consistent: bool = True
    note: str = ""
    # evaluation points overriding the fixture default, for forms valid on part of the axis
    times: tuple[float, ...] | None = None

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(self.fn(arr), dtype=float)
        return float(out) if arr.ndim == 0 else out


def _pw(t, cut, left, right, closed_left=True):
    t = np.asarray(t, dtype=float)
    mask = t <= cut if closed_left else t < cut
    with np.errstate(all="ignore"):
        return np.where(mask, left(t), right(t))


def _ex2_1_vrlai(t):
    lo = t * (np.exp(2 * t) - 2) / ((t - 1) * np.exp(2 * t) + 1)
    hi = 3 * E**2 * t**3 * (np.exp(t) - 2 * E) / (
        E**2 * ((t**3 - 31) * np.exp(t) + 6 * E * (t**2 + 2 * t + 2)) + 3 * np.exp(t)
    )
    return np.where(t <= 1, lo, hi)


def _ex2_2_vrlai(t):
    et = np.exp(t)
    num = 2 * E**2 * t * (2 * et * (et + 1) - 1)
    den = et * (2 * E * (E * ((2 * t - 1) * et - 2) + 2 * et) - et) + E**2
    return np.where(t <= 1, 1.0, num / den)


def _ex2_4_vrlai(t):
    e23, e43 = math.exp(2 / 3), math.exp(4 / 3)
    e2t = np.exp(2 * t)
    lo = t * (4 * e2t * (e2t + 3 * e23 * (2 * t - 1)) - 9 * e43) / (
        np.exp(4 * t) + 12 * e23 * ((t - 1) * e2t + 1) - 9 * e43 * t - 1
    )
    hi = 9 * e43 * t / (e23 * (e23 * (9 * t + 7) - 12) + 1)
    return np.where(t < 1 / 3, lo, hi)


def _ex3_2_cum(t):
    et = np.exp(t)
    return ((15 * et - 10) * np.log(3 * et - 2) + (12 * t - 6) * et - 8 * t + 6) / (108 * et - 72)


def _ex3_2_vrlai(t):
    et = np.exp(t)
    return t * (81 * np.exp(2 * t) - 84 * et + 16) / (
        (3 * et - 2) * ((15 * et - 10) * np.log(3 * et - 2) + (12 * t - 6) * et - 8 * t + 6)
    )


def _ex3_1_vrlai(t):
    return t * (t**2 + 4 * t + 2) / ((t + 1) * (2 * (t + 1) * np.log(t + 1) + t**2))


def _ex4_4_c(t):
    return ((128 * t + 32) * ((10 * t + 2) * np.log(5 * t + 1) + 25 * t**2)) / (
        (625 * t + 125) * ((4 * t + 1) * np.log(4 * t + 1) + 8 * t**2)
    )


def _ex4_5_mu_x(t):
    et = np.exp(t)
    return (2 * (4 * (t + 2) * et - t * (t + 3)) - 5) / (4 * (t + 1) * (2 * et - t - 1))


def _ex4_5_vrl_x(t):
    et = np.exp(t)
    d = 2 * et - t - 1
    return (2 * (8 * (t + 3) * et - t * (t + 4)) - 9) / (4 * (t + 1) * d) - (
        2 * (4 * (t + 2) * et - t * (t + 3)) - 5
    ) ** 2 / (16 * (t + 1) ** 2 * d**2)


def _ex4_5_vrlai_y(t):
    e2, e4 = np.exp(2 * t), np.exp(4 * t)
    return (2 * t * (16 * e4 - 12 * e2 + 1)) / (
        (2 * e2 - 1) * ((6 * e2 - 3) * np.log(2 * e2 - 1) + (4 * t - 2) * e2 - 2 * t + 2)
    )


def _pareto_vrl_printed(a):
    return lambda t: t**2 * (3 * a - 1) / (a**2 * (a - 1))


def _pareto_vrl_derived(a):
    return lambda t: t**2 * (a + 1) / (a**2 * (a - 1))


_E = Expression
_EXPRESSION_LIST = [
    # ex2_1: the printed moments contradict the survival function
    _E("ex2_1", "mrl", lambda t: _pw(t, 1, lambda t: np.ones_like(t), lambda t: t)),
    _E("ex2_1", "mrlai", lambda t: _pw(t, 1, lambda t: np.ones_like(t), lambda t: (1 + t**2) / 2), False,
       "beyond 1 this is the running integral of the MRL, not the intensity 2t^2/(1+t^2)"),
    _E("ex2_1", "vrl", lambda t: _pw(t, 1, lambda t: 2 * np.exp(-2 * t) - 1, lambda t: t**2 * (2 * np.exp(1 - t) - 1)), False,
       "negative for t > ln sqrt 2; true second moment is infinite"),
    _E("ex2_1", "vrlai", _ex2_1_vrlai, False),
    # ex2_2 (repaired survival): the MRL beyond 1 survives the repair, the rest does not
    _E("ex2_2", "mrl", lambda t: _pw(t, 1, lambda t: np.ones_like(t), lambda t: np.exp(-t)), False,
       "MRL 1 below t = 1 needs the upward jump of the printed survival"),
    _E("ex2_2", "mrl_beyond_1", lambda t: np.exp(-t), times=(1.5, 3.0, 5.0)),
    _E("ex2_2", "mrlai", lambda t: _pw(t, 1, lambda t: np.ones_like(t), lambda t: t * np.exp(-t) / (1 + np.exp(-1) - np.exp(-t))),
       False, "built on the unrepaired MRL"),
    _E("ex2_2", "vrl", lambda t: _pw(t, 1, lambda t: np.ones_like(t), lambda t: 2 + (2 - np.exp(-t)) * np.exp(-t)), False,
       "tends to 2 although the tail is doubly exponential"),
    _E("ex2_2", "vrlai", _ex2_2_vrlai, False),
    _E("eg2_1_cube", "survival", lambda t: (t + 1) ** -3.0),
    _E("eg2_1_cube", "mrl", lambda t: (t + 1) / 2),
    _E("eg2_1_cube", "vrl", lambda t: 3 * (t + 1) ** 2 / 4),
    _E("eg2_1_cube", "vrlai", lambda t: 3 * (t + 1) ** 2 / (t**2 + 3 * t + 3)),
    _E("ex2_3", "mrl", lambda t: _pw(t, 0.5, lambda t: 1 - t, lambda t: np.ones_like(t), closed_left=False)),
    _E("ex2_3", "vrl", lambda t: _pw(t, 0.5, lambda t: np.full_like(t, 0.75), lambda t: np.ones_like(t), closed_left=False)),
    _E("ex2_3", "vrlai", lambda t: _pw(t, 0.5, lambda t: np.ones_like(t), lambda t: 1 / (1 - 1 / (8 * t)), closed_left=False)),
    _E("ex2_4", "mrl", lambda t: np.select(
        [t < 1 / 3, t < 2 / 3], [0.5 + np.exp(2 * t - 2 / 3) / 3, 7 / 6 - t], 0.5)),
    _E("ex2_4", "vrl", lambda t: _pw(t, 1 / 3,
        lambda t: 0.25 + (1 - 2 * t) / 3 * np.exp(2 * t - 2 / 3) - np.exp(4 * t - 4 / 3) / 9,
        lambda t: np.full_like(t, 0.25), closed_left=False)),
    _E("ex2_4", "vrlai", _ex2_4_vrlai),
    _E("ex3_1_conv", "survival", lambda t: (t + 1) * np.exp(-t)),
    _E("ex3_1_conv", "mrl", lambda t: (t + 2) / (t + 1)),
    _E("ex3_1_conv", "vrl", lambda t: (t**2 + 4 * t + 2) / (t + 1) ** 2),
    _E("ex3_1_conv", "vrlai", _ex3_1_vrlai),
    _E("ex3_2_ostat", "density", lambda t: 6 * np.exp(-3 * t) * (np.exp(t) - 1)),
    _E("ex3_2_ostat", "survival", lambda t: np.exp(-3 * t) * (3 * np.exp(t) - 2)),
    _E("ex3_2_ostat", "mrl", lambda t: (9 * np.exp(t) - 4) / (6 * (3 * np.exp(t) - 2))),
    _E("ex3_2_ostat", "vrl_display", _ex3_2_cum, False, "labelled as the VRL but equals its running integral"),
    _E("ex3_2_ostat", "cum_vrl", _ex3_2_cum),
    _E("ex3_2_ostat", "vrlai", _ex3_2_vrlai),
    _E("ex4_2_pair", "h", lambda t: 2 * np.exp(-t / 2)),
    _E("ex4_2_pair", "k", lambda t: 1 / (2 * t**2), note="formula mode below t = 1"),
    _E("ex4_3_pair", "z", lambda t: 2 * t * np.exp(-3 * t) / 9, note="formula mode below t = 1"),
    _E("ex4_4_pair", "vrl_x", lambda t: (25 * t**2 + 20 * t + 2) / (25 * (5 * t + 1) ** 2)),
    _E("ex4_4_pair", "a", lambda t: ((10 * t + 2) * np.log(5 * t + 1) + 25 * t**2) / (625 * t + 125)),
    _E("ex4_4_pair", "vrl_y", lambda t: (8 * t**2 + 8 * t + 1) / (8 * (4 * t + 1) ** 2)),
    _E("ex4_4_pair", "b", lambda t: ((4 * t + 1) * np.log(4 * t + 1) + 8 * t**2) / (128 * t + 32)),
    _E("ex4_4_pair", "c", _ex4_4_c),
    _E("ex4_5_pair", "vrl_xi_display", lambda t: ((2 * t + 2) * np.log(t + 1) + t**2) / (t + 1), False,
       "labelled as the component VRL but equals its running integral"),
    _E("ex4_5_pair", "cum_vrl_xi", lambda t: ((2 * t + 2) * np.log(t + 1) + t**2) / (t + 1)),
    _E("ex4_5_pair", "vrlai_xi", _ex3_1_vrlai),
    _E("ex4_5_pair", "mrl_x", _ex4_5_mu_x),
    _E("ex4_5_pair", "vrl_x", _ex4_5_vrl_x),
    _E("ex4_5_pair", "mrl_y", lambda t: (4 * np.exp(2 * t) - 1) / (8 * np.exp(2 * t) - 4)),
    _E("ex4_5_pair", "vrl_y", lambda t: (16 * np.exp(4 * t) - 12 * np.exp(2 * t) + 1) / (16 * (2 * np.exp(2 * t) - 1) ** 2)),
    _E("ex4_5_pair", "vrlai_y", _ex4_5_vrlai_y),
    _E("ex4_6_pair", "vrl_x", lambda t: 3 * (t + 1) ** 2 / 4),
    _E("ex4_6_pair", "vrl_y", lambda t: 3 * t**2 / 4, note="t >= 1"),
    _E("ex4_6_pair", "avg_cum_vrl_x", lambda t: (t**2 + 3 * t + 3) / 4),
    _E("ex4_6_pair", "avg_cum_vrl_y", lambda t: (t**3 - 1) / (4 * t), note="integral from the support start"),
    _E("ex4_6_pair", "vrlai_y", lambda t: 3 * t**3 / (t**3 - 1), note="integral from the support start"),
    _E("pareto(3,1)", "vrl_printed", _pareto_vrl_printed(3.0), False, "coefficient 3a-1 instead of a+1"),
    _E("pareto(3,1)", "vrl_derived", _pareto_vrl_derived(3.0)),
    _E("pareto(2,1)", "vrl_printed", _pareto_vrl_printed(2.0), False, "coefficient 3a-1 instead of a+1"),
    _E("pareto(2,1)", "vrl_derived", _pareto_vrl_derived(2.0)),
]

EXPRESSIONS: dict[tuple[str, str], Expression] = {(e.fixture, e.quantity): e for e in _EXPRESSION_LIST}


def expression(fixture: str, quantity: str) -> Expression:
    try:
        return EXPRESSIONS[(fixture, quantity)]
    except KeyError:
        raise UnknownFixture(f"no printed expression for {quantity!r} of {fixture!r}") from None
