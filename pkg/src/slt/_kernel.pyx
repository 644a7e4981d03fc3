# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) kernel; same contract as ``_kernel_py.integrate``."""

from libc.math cimport fabs, sqrt, pow, ceil, isfinite

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40

cdef double SAFETY = 0.9, FAC_MIN = 0.2, FAC_MAX = 5.0


cdef struct Pot:
    const double *breaks
    const double *bases
    const double *coefs
    Py_ssize_t npieces
    Py_ssize_t ncoef


cdef inline double qeval(Pot *p, double x) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = p.npieces - 1, mid, k
    # last piece whose left break is <= x, clamped to [0, npieces-1]
    while lo < hi:
        mid = (lo + hi + 1) >> 1
        if p.breaks[mid] <= x:
            lo = mid
        else:
            hi = mid - 1
    cdef const double *row = p.coefs + lo * p.ncoef
    cdef double t = x - p.bases[lo]
    cdef double acc = 0.0
    for k in range(p.ncoef - 1, -1, -1):
        acc = acc * t + row[k]
    return acc


cdef inline void dp_step(Pot *p, double lam, double x, double y, double d, double h,
                         double k1y, double k1d, double *out) noexcept nogil:
    cdef double y2, d2, k2y, k2d, y3, d3, k3y, k3d, y4, d4, k4y, k4d
    cdef double y5, d5, k5y, k5d, y6, d6, k6y, k6d, yn, dn, k7y, k7d
    y2 = y + h * A21 * k1y
    d2 = d + h * A21 * k1d
    k2y = d2
    k2d = (qeval(p, x + C2 * h) - lam) * y2
    y3 = y + h * (A31 * k1y + A32 * k2y)
    d3 = d + h * (A31 * k1d + A32 * k2d)
    k3y = d3
    k3d = (qeval(p, x + C3 * h) - lam) * y3
    y4 = y + h * (A41 * k1y + A42 * k2y + A43 * k3y)
    d4 = d + h * (A41 * k1d + A42 * k2d + A43 * k3d)
    k4y = d4
    k4d = (qeval(p, x + C4 * h) - lam) * y4
    y5 = y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y)
    d5 = d + h * (A51 * k1d + A52 * k2d + A53 * k3d + A54 * k4d)
    k5y = d5
    k5d = (qeval(p, x + C5 * h) - lam) * y5
    y6 = y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y)
    d6 = d + h * (A61 * k1d + A62 * k2d + A63 * k3d + A64 * k4d + A65 * k5d)
    k6y = d6
    k6d = (qeval(p, x + h) - lam) * y6
    yn = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
    dn = d + h * (B1 * k1d + B3 * k3d + B4 * k4d + B5 * k5d + B6 * k6d)
    k7y = dn
    k7d = (qeval(p, x + h) - lam) * yn
    out[0] = yn
    out[1] = dn
    out[2] = k7y
    out[3] = k7d
    out[4] = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
    out[5] = h * (E1 * k1d + E3 * k3d + E4 * k4d + E5 * k5d + E6 * k6d + E7 * k7d)


def integrate(double lam, double x0, double y0, double dy0, nodes, breaks, bases, coefs,
              double rtol, double atol, double hmax, double hfixed):
    cdef const double[::1] nv = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(breaks, dtype=np.float64)
    cdef const double[::1] sv = np.ascontiguousarray(bases, dtype=np.float64)
    cdef const double[:, ::1] cv = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef Py_ssize_t n = nv.shape[0]
    ys_arr = np.empty(n)
    dys_arr = np.empty(n)
    if n == 0:
        return ys_arr, dys_arr, 0, x0, 0
    cdef double[::1] ys = ys_arr
    cdef double[::1] dys = dys_arr
    cdef Pot p
    p.breaks = &bv[0]
    p.bases = &sv[0]
    p.coefs = &cv[0, 0]
    p.npieces = sv.shape[0]
    p.ncoef = cv.shape[1]

    cdef double x = x0, y = y0, d = dy0
    cdef double direction = 1.0 if nv[n - 1] >= x else -1.0
    cdef double h = fabs(hmax)
    cdef double k1y, k1d, target, span, hs, hh, xs, remaining, hmin, sy, sd, err, fac, hnew
    cdef double out[6]
    cdef long nsteps = 0
    cdef long m, step
    cdef int status = 0
    cdef bint clipped
    cdef Py_ssize_t i

    with nogil:
        k1y = d
        k1d = (qeval(&p, x) - lam) * y
        for i in range(n):
            target = nv[i]
            if hfixed > 0.0:
                span = target - x
                if span != 0.0:
                    m = <long> ceil(fabs(span) / hfixed)
                    if m < 1:
                        m = 1
                    hs = span / m
                    for step in range(m):
                        if step == m - 1:
                            xs = target
                        else:
                            xs = x + hs
                        dp_step(&p, lam, x, y, d, xs - x, k1y, k1d, out)
                        y = out[0]
                        d = out[1]
                        k1y = out[2]
                        k1d = out[3]
                        x = xs
                        nsteps += 1
                ys[i] = y
                dys[i] = d
                continue
            while direction * (target - x) > 0.0:
                remaining = fabs(target - x)
                clipped = h >= remaining
                hh = remaining if clipped else h
                hmin = 1e-14 * (fabs(x) if fabs(x) > 1.0 else 1.0)
                if hh < hmin and not clipped:
                    status = 1
                    break
                dp_step(&p, lam, x, y, d, direction * hh, k1y, k1d, out)
                if not (isfinite(out[0]) and isfinite(out[1])):
                    status = 2
                    break
                sy = atol + rtol * (fabs(y) if fabs(y) > fabs(out[0]) else fabs(out[0]))
                sd = atol + rtol * (fabs(d) if fabs(d) > fabs(out[1]) else fabs(out[1]))
                err = sqrt(0.5 * ((out[4] / sy) * (out[4] / sy) + (out[5] / sd) * (out[5] / sd)))
                if err <= 1.0:
                    if clipped:
                        x = target
                    else:
                        x = x + direction * hh
                    y = out[0]
                    d = out[1]
                    k1y = out[2]
                    k1d = out[3]
                    nsteps += 1
                    if err == 0.0:
                        fac = FAC_MAX
                    else:
                        fac = SAFETY * pow(err, -0.2)
                        if fac < FAC_MIN:
                            fac = FAC_MIN
                        if fac > FAC_MAX:
                            fac = FAC_MAX
                    hnew = hh * fac
                    if clipped and h > hnew:
                        hnew = h
                    h = hnew if hnew < hmax else hmax
                else:
                    fac = SAFETY * pow(err, -0.2)
                    h = hh * (fac if fac > FAC_MIN else FAC_MIN)
                    if h < hmin:
                        status = 1
                        break
            if status != 0:
                break
            ys[i] = y
            dys[i] = d
    return ys_arr, dys_arr, status, x, nsteps
