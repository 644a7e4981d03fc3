"""Pure-Python Dormand-Prince 5(4) kernel; mirror of ``_kernel.pyx``.

Integrates y' = dy, dy' = (q(x) - lam) y from ``x0`` through each abscissa in
``nodes`` (all on one side of ``x0``, monotone in the direction of travel),
landing exactly on every node. The potential is a piecewise polynomial
``sum_k coefs[i][k] * (x - bases[i])**k`` on ``[breaks[i], breaks[i+1]]``.

Returns ``(ys, dys, status, fail_x, nsteps)``; ``status`` is 0 on success,
1 on step-size underflow, 2 on a non-finite state.
"""

import math
from bisect import bisect_right

import numpy as np

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


def _make_q(breaks, bases, coefs):
    breaks = [float(b) for b in breaks]
    bases = [float(b) for b in bases]
    rows = [[float(c) for c in row] for row in coefs]
    last = len(bases) - 1
    if last == 0:
        base, row = bases[0], rows[0][::-1]

        def q(x):
            t = x - base
            acc = 0.0
            for c in row:
                acc = acc * t + c
            return acc
        return q
    inner = breaks[1:-1]
    rev = [r[::-1] for r in rows]

    def q(x):
        i = bisect_right(inner, x)
        t = x - bases[i]
        acc = 0.0
        for c in rev[i]:
            acc = acc * t + c
        return acc
    return q


def integrate(lam, x0, y0, dy0, nodes, breaks, bases, coefs, rtol, atol, hmax, hfixed):
    nodes = [float(v) for v in nodes]
    n = len(nodes)
    ys = np.empty(n)
    dys = np.empty(n)
    if n == 0:
        return ys, dys, 0, x0, 0
    q = _make_q(breaks, bases, coefs)
    lam = float(lam)
    x = float(x0)
    y = float(y0)
    d = float(dy0)
    direction = 1.0 if nodes[-1] >= x else -1.0
    h = abs(hmax)
    nsteps = 0

    # FSAL: derivative of (y, d) at x
    k1y = d
    k1d = (q(x) - lam) * y

    for i in range(n):
        target = nodes[i]
        if hfixed > 0.0:
            span = target - x
            m = max(1, math.ceil(abs(span) / hfixed)) if span != 0.0 else 0
            hs = span / m if m else 0.0
            for step in range(m):
                xs = target if step == m - 1 else x + hs
                hh = xs - x
                y, d, k1y, k1d, _, _ = _dp_step(q, lam, x, y, d, hh, k1y, k1d)
                x = xs
                nsteps += 1
            ys[i] = y
            dys[i] = d
            continue
        while direction * (target - x) > 0.0:
            remaining = abs(target - x)
            clipped = h >= remaining
            hh = remaining if clipped else h
            hmin = 1e-14 * max(1.0, abs(x))
            if hh < hmin and not clipped:
                return ys, dys, 1, x, nsteps
            yn, dn, k7y, k7d, ey, ed = _dp_step(q, lam, x, y, d, direction * hh, k1y, k1d)
            if not (math.isfinite(yn) and math.isfinite(dn)):
                return ys, dys, 2, x, nsteps
            sy = atol + rtol * max(abs(y), abs(yn))
            sd = atol + rtol * max(abs(d), abs(dn))
            err = math.sqrt(0.5 * ((ey / sy) ** 2 + (ed / sd) ** 2))
            if err <= 1.0:
                x = target if clipped else x + direction * hh
                y, d, k1y, k1d = yn, dn, k7y, k7d
                nsteps += 1
                fac = FAC_MAX if err == 0.0 else min(FAC_MAX, max(FAC_MIN, SAFETY * err ** -0.2))
                hnew = hh * fac
                h = max(hnew, h) if clipped else hnew
                h = min(h, hmax)
            else:
                h = hh * max(FAC_MIN, SAFETY * err ** -0.2)
                if h < hmin:
                    return ys, dys, 1, x, nsteps
        ys[i] = y
        dys[i] = d
    return ys, dys, 0, x, nsteps


def _dp_step(q, lam, x, y, d, h, k1y, k1d):
    y2 = y + h * A21 * k1y
    d2 = d + h * A21 * k1d
    k2y = d2
    k2d = (q(x + C2 * h) - lam) * y2
    y3 = y + h * (A31 * k1y + A32 * k2y)
    d3 = d + h * (A31 * k1d + A32 * k2d)
    k3y = d3
    k3d = (q(x + C3 * h) - lam) * y3
    y4 = y + h * (A41 * k1y + A42 * k2y + A43 * k3y)
    d4 = d + h * (A41 * k1d + A42 * k2d + A43 * k3d)
    k4y = d4
    k4d = (q(x + C4 * h) - lam) * y4
    y5 = y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y)
    d5 = d + h * (A51 * k1d + A52 * k2d + A53 * k3d + A54 * k4d)
    k5y = d5
    k5d = (q(x + C5 * h) - lam) * y5
    y6 = y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y)
    d6 = d + h * (A61 * k1d + A62 * k2d + A63 * k3d + A64 * k4d + A65 * k5d)
    k6y = d6
    k6d = (q(x + h) - lam) * y6
    yn = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
    dn = d + h * (B1 * k1d + B3 * k3d + B4 * k4d + B5 * k5d + B6 * k6d)
    k7y = dn
    k7d = (q(x + h) - lam) * yn
    ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
    ed = h * (E1 * k1d + E3 * k3d + E4 * k4d + E5 * k5d + E6 * k6d + E7 * k7d)
    return yn, dn, k7y, k7d, ey, ed
