"""Independent checks of the residual pipeline.

Two oracles share nothing adaptive with :mod:`vrlai.numerics`:

* Monte Carlo: inverse-survival sampling and empirical residual moments.
* A dense trapezoid reference for μ, σ², Σ and L^σ² on a uniform grid.

Random streams come from numpy's PCG64. A draw set is identified by
``(seed, stream, chunk)``: each chunk of ``CHUNK`` variates is generated from
``SeedSequence(seed, spawn_key=(stream, chunk))``, so chunks can be produced
independently and concatenated in index order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import residual
from .errors import DivergentIntegral, TooFewSurvivors, VrlaiError
from .models import SurvivalModel
from .numerics import invert_monotone_many

__all__ = [
    "CHUNK",
    "MIN_SURVIVORS",
    "MC_SURVIVORS",
    "EmpiricalMoments",
    "CheckRecord",
    "OracleReport",
    "sample",
    "empirical_residual_moments",
    "dense_reference",
    "cross_validate",
    "finite_fourth_moment",
]

CHUNK = 1 << 18
MIN_SURVIVORS = 100
MC_SURVIVORS = 1000
MC_BAND = 4.0


def _generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream, chunk))))


def _upper_bracket(m: SurvivalModel, u: np.ndarray, lo: float) -> np.ndarray:
    hi = np.full(u.shape, lo + m.time_scale)
    for _ in range(2000):
        open_ = np.asarray(m.survival(hi)) > u
        if not open_.any():
            return hi
        hi[open_] = lo + 2.0 * (hi[open_] - lo)
    raise VrlaiError(f"could not bracket the quantiles of {m!r}")


def sample(m: SurvivalModel, n: int, seed: int = 0, stream: int = 0) -> np.ndarray:
    """``n`` draws of ``X`` by inverting the survival function.

    ``u = 1 - U`` lies in ``(0, 1]`` and maps to the smallest ``t`` with
    ``F̄(t) <= u``. Draws that land in an atom's mass are snapped to the
    atom's exact location.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    lo = float(m.support_start)
    parts = []
    for chunk in range(-(-n // CHUNK)):
        size = min(CHUNK, n - chunk * CHUNK)
        u = 1.0 - _generator(seed, stream, chunk).random(size)
        hi = _upper_bracket(m, u, lo)
        x = invert_monotone_many(m.survival, u, lo, hi)
        x[u >= m.survival(lo)] = lo
        for loc, _ in m.atoms():
            x[(u >= m.survival(loc)) & (u < m.left_survival(loc))] = loc
        parts.append(x)
    return np.concatenate(parts)


class EmpiricalMoments(NamedTuple):
    mu: float
    var: float
    n_eff: int
    se_mu: float
    se_var: float


def empirical_residual_moments(samples, t: float, min_survivors: int = MIN_SURVIVORS) -> EmpiricalMoments:
    """Sample mean and variance of ``x - t`` over draws with ``x > t``."""
    x = np.asarray(samples, dtype=float)
    r = x[x > t] - t
    n = r.size
    if n < min_survivors:
        raise TooFewSurvivors(f"{n} draws exceed t={t}, need {min_survivors}")
    mu = float(r.mean())
    c = r - mu
    var = float(c @ c / (n - 1))
    m4 = float(np.mean(c**4))
    return EmpiricalMoments(mu, var, n, math.sqrt(var / n), math.sqrt(max(m4 - var * var, 0.0) / n))


def finite_fourth_moment(m: SurvivalModel) -> bool:
    """Heuristic: does ``u^4 F̄(u)`` decay far out in the tail?"""
    s = m.time_scale
    a, b = 1e3 * s + m.support_start, 1e4 * s + m.support_start
    fa, fb = a**4 * m.survival(a), b**4 * m.survival(b)
    return bool(fa == 0 or fb < 0.5 * fa)


# dense trapezoid reference ---------------------------------------------------


def _nodes(m: SurvivalModel, start: float, stop: float, t_list, step: float):
    n = max(2, int(math.ceil((stop - start) / step)) + 1)
    x = np.union1d(np.linspace(start, stop, n), t_list)
    bps = np.asarray([b for b in m.breakpoints if start < b < stop], dtype=float)
    x = np.union1d(x, bps)
    s = np.asarray(m.survival(x), dtype=float)
    if bps.size:
        # a jump at b is a zero-width trapezoid between its left and right values
        at = np.searchsorted(x, bps)
        x = np.insert(x, at, bps)
        s = np.insert(s, at, np.asarray(m.left_survival(bps), dtype=float))
    return x, s


def _reverse_cumtrapz(x, y):
    seg = 0.5 * np.diff(x) * (y[1:] + y[:-1])
    return np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])


def _mapped_tail(g, start: float, c: float, n: int = 200_001):
    """``∫_start^∞ g`` with ``u = start + c w / (1 - w)``, trapezoid in ``w``."""
    w = np.linspace(0.0, 1.0 - 1e-12, n)
    u = start + c * w / (1.0 - w)
    vals = np.asarray(g(u), dtype=float) * c / (1.0 - w) ** 2
    near, far = np.asarray(g(start + c * np.array([1e6, 1e12])), dtype=float) * c * np.array([1e12, 1e24])
    return float(np.trapezoid(vals, w)), bool(far > 10.0 * near + 1e-300)


@dataclass(frozen=True)
class DenseReference:
    t: np.ndarray
    mrl: np.ndarray
    vrl: np.ndarray
    cum_vrl: np.ndarray
    vrlai: np.ndarray
    divergent: bool


def _dense(m: SurvivalModel, t_list, fine_step: float = 1e-3, lower: str = "zero") -> DenseReference:
    if fine_step > 1e-3:
        raise ValueError("fine_step must be at most 1e-3")
    t = np.asarray(t_list, dtype=float)
    lo = residual.lower_limit(m, lower)
    if np.any(t < lo):
        raise ValueError(f"reference times must be >= {lo}")
    stop = 2.0 * float(t.max()) + 10.0 * m.time_scale + m.support_start
    x, s = _nodes(m, lo, stop, t, fine_step)
    c = max(1.0, stop)
    T_inf, div1 = _mapped_tail(m.survival, stop, c)
    T = _reverse_cumtrapz(x, s) + T_inf
    D_inf, div2 = _mapped_tail(lambda u: (u - stop) * np.asarray(m.survival(u)), stop, c)
    # D(x) = ∫_x^stop T + ∫_stop^∞ T, and the latter equals ∫_stop^∞ (u - stop) F̄
    D = _reverse_cumtrapz(x, T) + D_inf
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = T / s
        var = 2.0 * D / s - mu**2
    divergent = div1 or div2
    if divergent:
        var = np.full_like(var, np.nan)
    # nodes are sorted with a jump's left value first; the last copy is the right limit
    right = np.searchsorted(x, t, side="right") - 1
    seg = 0.5 * np.diff(x) * (var[1:] + var[:-1])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.where(t == 0, 1.0, t * var[right] / cum[right])
    return DenseReference(t, mu[right], var[right], cum[right], L, divergent)


def dense_reference(m: SurvivalModel, t_list, fine_step: float = 1e-3, lower: str = "zero") -> DenseReference:
    """Reference μ, σ², Σ and L^σ² from uniform trapezoid sums.

    Raises DivergentIntegral when the second-moment tail does not settle.
    """
    ref = _dense(m, t_list, fine_step, lower)
    if ref.divergent:
        raise DivergentIntegral(f"second moment of {m!r} diverges in the reference tail")
    return ref


# reports ---------------------------------------------------------------------


def _sig(x):
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None if math.isnan(x) else str(x)
    return float(f"{x:.12g}")


@dataclass(frozen=True)
class CheckRecord:
    quantity: str
    t: float
    analytic: float
    oracle: float
    tol: float
    passed: bool
    note: str = ""

    @property
    def diff(self) -> float:
        return abs(self.analytic - self.oracle)

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "t": _sig(self.t),
            "analytic": _sig(self.analytic),
            "oracle": _sig(self.oracle),
            "abs_diff": _sig(self.diff),
            "tol": _sig(self.tol),
            "pass": bool(self.passed),
            "note": self.note,
        }


@dataclass
class OracleReport:
    model: str
    records: list[CheckRecord] = field(default_factory=list)
    seed: int | None = None
    sample_size: int = 0
    fine_step: float = 1e-3
    skipped: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "seed": self.seed,
            "sample_size": self.sample_size,
            "fine_step": self.fine_step,
            "passed": self.passed,
            "records": [r.to_dict() for r in self.records],
            "skipped": self.skipped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_table(self) -> str:
        head = f"{'quantity':<10} {'t':>12} {'analytic':>19} {'oracle':>19} {'abs diff':>12} {'tol':>9}  ok"
        lines = [f"# {self.model}", head]
        for r in self.records:
            lines.append(
                f"{r.quantity:<10} {r.t:>12.6g} {r.analytic:>19.12g} {r.oracle:>19.12g} "
                f"{r.diff:>12.3g} {r.tol:>9.2g}  {'ok' if r.passed else 'FAIL'}"
                + (f"  {r.note}" if r.note else "")
            )
        lines.extend(f"skipped: {s}" for s in self.skipped)
        return "\n".join(lines) + "\n"


def _close(a, b, tol):
    return bool(np.isfinite(a) and np.isfinite(b) and abs(a - b) <= tol * max(1.0, abs(b)))


def cross_validate(
    m: SurvivalModel,
    grid,
    tol: float = 1e-4,
    mc: int = 0,
    seed: int = 0,
    stream: int = 0,
    lower: str = "zero",
    mc_times: Sequence[float] | None = None,
    fine_step: float = 1e-3,
) -> OracleReport:
    """Compare the adaptive pipeline with the dense reference, and with Monte
    Carlo when ``mc > 0``. Failures and divergences become report rows."""
    t = np.unique(np.asarray(grid, dtype=float))
    report = OracleReport(repr(m), seed=seed if mc else None, sample_size=int(mc), fine_step=fine_step)
    dead = np.asarray(m.survival(t), dtype=float) == 0.0
    if dead.any():
        # the linear-space reference has no value where the survival underflows
        report.skipped.append(f"reference: survival underflows at {int(dead.sum())} points from t={t[dead][0]:.6g}")
        t = t[~dead]
    prof = residual.profile(m, t, lower, strict=False)
    ref = _dense(m, t, fine_step, lower)
    pipeline = {"mrl": prof.mrl, "vrl": prof.vrl, "cum_vrl": prof.cum_vrl, "vrlai": prof.vrlai}
    reference = {"mrl": ref.mrl, "vrl": ref.vrl, "cum_vrl": ref.cum_vrl, "vrlai": ref.vrlai}
    for q in pipeline:
        for i, ti in enumerate(t):
            a, o = float(pipeline[q][i]), float(reference[q][i])
            note = ""
            if q in prof.divergent or (q != "mrl" and ref.divergent):
                note = "DivergentIntegral"
            report.records.append(CheckRecord(q, float(ti), a, o, tol, _close(a, o, tol), note))
    if mc:
        _mc_rows(report, m, t, prof, int(mc), seed, stream, mc_times)
    return report


def _mc_rows(report, m, t, prof, n, seed, stream, mc_times):
    xs = np.sort(sample(m, n, seed, stream))
    if mc_times is None:
        survivors = xs.size - np.searchsorted(xs, t, side="right")
        ok = np.flatnonzero(survivors >= MC_SURVIVORS)
        pick = ok[np.unique(np.linspace(0, ok.size - 1, 5).round().astype(int))] if ok.size else []
        times = t[pick]
    else:
        times = np.asarray(mc_times, dtype=float)
    mu_a = np.atleast_1d(residual.mrl(m, times)) if len(times) else []
    try:
        var_a = np.atleast_1d(residual.vrl(m, times)) if len(times) else []
    except DivergentIntegral:
        var_a = np.full(len(times), np.nan)
    fourth = finite_fourth_moment(m)
    if not fourth:
        report.skipped.append("vrl_mc: infinite fourth moment, no standard error")
    for ti, ma, va in zip(times, mu_a, var_a):
        try:
            e = empirical_residual_moments(xs, float(ti), MC_SURVIVORS)
        except TooFewSurvivors as exc:
            report.skipped.append(f"mc at t={ti:.6g}: {exc}")
            continue
        band = MC_BAND * e.se_mu
        report.records.append(CheckRecord("mrl_mc", float(ti), float(ma), e.mu, band, abs(ma - e.mu) <= band, "4 se"))
        if fourth:
            band = MC_BAND * e.se_var
            ok = bool(np.isfinite(va) and abs(va - e.var) <= band)
            report.records.append(CheckRecord("vrl_mc", float(ti), float(va), e.var, band, ok, "4 se"))
