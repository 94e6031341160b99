"""Regenerate the frozen reference values in tests/frozen.py.

Independent of the package: every number comes from mpmath quadrature at
20 digits or from a closed form. Requires mpmath (not a package dependency).

    python3 tools/derive_frozen.py [NAME ...]
"""

import sys

import mpmath as mp

mp.mp.dps = 20
E = mp.e


def moments(S, t, bps=()):
    cuts = sorted({t, t + 1, t + 10, *[b for b in bps if b > t]})
    T = mp.quad(S, cuts + [mp.inf])
    D = mp.quad(lambda u: (u - t) * S(u), cuts + [mp.inf])
    s = S(t)
    mu = T / s
    return T, D, mu, 2 * D / s - mu**2


def vrl(S, t, bps=()):
    return moments(S, t, bps)[3]


def cum_vrl(S, t, lo=0, bps=()):
    pts = [lo] + [b for b in bps if lo < b < t] + [t]
    return mp.quad(lambda u: vrl(S, u, bps), pts)


def L(S, t, lo=0, bps=()):
    return t * vrl(S, t, bps) / cum_vrl(S, t, lo, bps)


erl2 = lambda t: (1 + t) * E**-t  # noqa: E731
os23 = lambda t: E ** (-3 * t) * (3 * E**t - 2)  # noqa: E731
e5 = lambda t: (1 + 5 * t) * E ** (-5 * t)  # noqa: E731
e4 = lambda t: (1 + 4 * t) * E ** (-4 * t)  # noqa: E731
par_x = lambda t: 1 - (1 - erl2(t)) ** 2  # noqa: E731
par_y = lambda t: 1 - (1 - E ** (-2 * t)) ** 2  # noqa: E731
ex2_3 = lambda u: mp.mpf(1) if u < 0.5 else E ** (-(mp.log(2) - 0.5 + u))  # noqa: E731
ex2_4 = lambda u: E ** (-2 * u) if u < mp.mpf(1) / 3 else (E ** (-mp.mpf(2) / 3) if u < mp.mpf(2) / 3 else E ** (-2 * u + mp.mpf(2) / 3))  # noqa: E731
# exp(-e^50) is zero at any working precision; the cut keeps tanh-sinh off huge nodes
ex2_2 = lambda u: E**-u if u <= 1 else (E ** ((E - 2) + u - E**u) if u < 50 else mp.mpf(0))  # noqa: E731

values = {
    "EX3_1_L": lambda: [L(erl2, t) for t in (4, 6, 10)],
    "EX3_2_L": lambda: [L(os23, t) for t in (0.5, 1.5, 3.5)],
    "EX4_4_C": lambda: [cum_vrl(e5, t) / cum_vrl(e4, t) for t in (0.1, 1.8, 6.5)],
    "EX4_5_L001": lambda: [L(par_x, 0.01), L(par_y, 0.01)],
    "EX3_1_T1": lambda: moments(erl2, 1)[0],
    "EX3_1_CUM4": lambda: cum_vrl(erl2, 4),
    "EX3_1_VRL4": lambda: vrl(erl2, 4),
    "EXP3_D05": lambda: moments(lambda u: E ** (-3 * u), 0.5)[1],
    "PARETO21_D2": lambda: moments(lambda u: u**-3, 2)[1],
    "EX3_2_VRL0": lambda: vrl(os23, 0),
    "EX3_2_CUM05": lambda: cum_vrl(os23, 0.5),
    "EX3_2_SF1": lambda: os23(1),
    "PARALLEL_EXP2_SF05": lambda: par_y(0.5),
    "EX3_1_MRLAI1": lambda: 1 * moments(erl2, 1)[2] / mp.quad(lambda u: moments(erl2, u)[2], [0, 1]),
    "EX3_1_AI1": lambda: mp.mpf(0.5) / (1 - mp.log(2)),
    "EX3_1_MEDIAN": lambda: mp.findroot(lambda t: erl2(t) - 0.5, 1.7),
    "EX2_3_VRL025": lambda: vrl(ex2_3, 0.25, (0.5,)),
    "EX2_4_L": lambda: [L(ex2_4, t, 0, (1 / 3, 2 / 3)) for t in (0.2, 0.5, 1.0)],
    "EX2_2_VRL": lambda: [vrl(ex2_2, t, (1,)) for t in (0.5, 1.5, 3.0)],
    "EX2_2_L": lambda: [L(ex2_2, t, 0, (1,)) for t in (0.5, 1.5)],
    "EG2_1_L1": lambda: L(lambda u: (1 + u) ** -3, 1),
    "EX4_2_H1": lambda: 2 * E**-0.5,
    "EX4_3_Z": lambda: [2 * t * E ** (-3 * t) / 9 for t in (0.1, 0.5, 2.0)],
    "EX4_6_LY": lambda: [3 * mp.mpf(t) ** 3 / (mp.mpf(t) ** 3 - 1) for t in (2, 5, 10)],
}

wanted = set(sys.argv[1:]) or set(values)
for k, thunk in values.items():
    if k not in wanted:
        continue
    v = thunk()
    if isinstance(v, list):
        print(f"{k} = ({', '.join(mp.nstr(x, 17) for x in v)})", flush=True)
    else:
        print(f"{k} = {mp.nstr(v, 17)}", flush=True)
