"""Slow reference implementations written straight from the definitions.

Exact rational arithmetic (fractions.Fraction) and explicit indicator sums;
nothing here shares code with the package.
"""
from fractions import Fraction
from itertools import permutations


def _frac(x):
    return Fraction(x) if not isinstance(x, Fraction) else x


def km_steps(time, event):
    """[(t, Y, d, S(t))] over distinct event times; events precede censorings."""
    time = [_frac(t) for t in time]
    out = []
    s = Fraction(1)
    for t in sorted({t for t, e in zip(time, event) if e == 1}):
        y = sum(1 for x in time if x >= t)
        d = sum(1 for x, e in zip(time, event) if x == t and e == 1)
        s *= 1 - Fraction(d, y)
        out.append((t, y, d, s))
    return out


def survival_at(steps, t):
    s = Fraction(1)
    for u, _, _, su in steps:
        if u <= t:
            s = su
    return s


def integral(steps, a, b):
    """int_a^b S(t) dt by walking every breakpoint."""
    a, b = _frac(a), _frac(b)
    if b <= a:
        return Fraction(0)
    knots = sorted({a, b} | {u for u, *_ in steps if a < u < b})
    return sum(survival_at(steps, lo) * (hi - lo) for lo, hi in zip(knots, knots[1:]))


def rmst(time, event, tau):
    return integral(km_steps(time, event), 0, tau)


def hosmer_variance(time, event, tau):
    tau = _frac(tau)
    steps = [s for s in km_steps(time, event) if s[0] < tau]
    m = sum(d for _, _, d, _ in steps)
    total = Fraction(0)
    for t, y, d, _ in steps:
        a = integral(km_steps(time, event), t, tau)
        if y == d:
            assert a == 0
            continue
        total += d * a * a / (y * (y - d))
    return Fraction(m, m - 1) * total


def g01(time0, time1, event0, event1, tau=None):
    """{(u, v): G} from the indicator sums of the paired counting processes."""
    x0 = [_frac(t) for t in time0]
    x1 = [_frac(t) for t in time1]
    n = len(x0)
    cut = (lambda t: True) if tau is None else (lambda t: t < _frac(tau))
    us = sorted({x for x, e in zip(x0, event0) if e == 1 and cut(x)})
    vs = sorted({x for x, e in zip(x1, event1) if e == 1 and cut(x)})
    out = {}
    for u in us:
        for v in vs:
            y0 = sum(1 for k in range(n) if x0[k] >= u)
            y1 = sum(1 for k in range(n) if x1[k] >= v)
            y01 = sum(1 for k in range(n) if x0[k] >= u and x1[k] >= v)
            dn0 = sum(1 for k in range(n) if x0[k] == u and event0[k] == 1)
            dn1 = sum(1 for k in range(n) if x1[k] == v and event1[k] == 1)
            dn01 = sum(1 for k in range(n) if x0[k] == u and event0[k] == 1
                       and x1[k] == v and event1[k] == 1)
            dn0_1 = sum(1 for k in range(n) if x0[k] == u and event0[k] == 1 and x1[k] >= v)
            dn1_0 = sum(1 for k in range(n) if x1[k] == v and event1[k] == 1 and x0[k] >= u)
            if y01 == 0:
                g = Fraction(0)
            else:
                g = n * Fraction(y01, y0 * y1) * (
                    Fraction(dn01, y01)
                    - Fraction(dn0_1, y01) * Fraction(dn1, y1)
                    - Fraction(dn1_0, y01) * Fraction(dn0, y0)
                    + Fraction(dn0 * dn1, y0 * y1))
            out[(u, v)] = g
    return out


def murray_cov(time0, time1, event0, event1, tau):
    """(1/n) sum_u sum_v A0(u) A1(v) G(u, v) with tails of each arm's own KM."""
    s0 = km_steps(time0, event0)
    s1 = km_steps(time1, event1)
    n = len(time0)
    total = Fraction(0)
    for (u, v), g in g01(time0, time1, event0, event1, tau).items():
        total += integral(s0, u, tau) * integral(s1, v, tau) * g
    return total / n


def murray_marginal(time, event, tau):
    """Closed form sum A^2 d (Y - d) / Y^3."""
    tau = _frac(tau)
    steps = km_steps(time, event)
    return sum(integral(steps, t, tau) ** 2 * d * (y - d) / Fraction(y) ** 3
               for t, y, d, _ in steps if t < tau)


def brute_force_match(cost):
    """Minimum total cost over every injective treated -> control map."""
    nt, nc = len(cost), len(cost[0])
    best = None
    for perm in permutations(range(nc), nt):
        c = sum(cost[i][perm[i]] for i in range(nt))
        if best is None or c < best:
            best = c
    return best
