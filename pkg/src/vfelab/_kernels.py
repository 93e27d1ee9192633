"""Compiled inner loops for the velocity field and the Dormand-Prince step."""

import numba as nb
import numpy as np

# centered 8th-order weights, offsets 1..4
_W1 = np.array([4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0])
_W2 = np.array([8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0])
_W2C = -205.0 / 72.0

_A = np.zeros((7, 6))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@nb.njit(cache=True)
def velocity_kernel(y, mirror, shift, h, eps, rc2, active, out):
    n = y.shape[0]
    ext = np.empty((n + 8, 3))
    for i in range(n):
        for c in range(3):
            ext[i + 4, c] = y[i, c]
    for g in range(4):
        for c in range(3):
            lo = y[n - 4 + g, c]
            hi = y[g, c]
            if mirror:
                if c != 1:
                    lo = -lo
                    hi = -hi
            else:
                lo -= shift[c]
                hi += shift[c]
            ext[g, c] = lo
            ext[n + 4 + g, c] = hi
    inv_h = 1.0 / h
    inv_h2 = inv_h * inv_h
    w10, w11, w12, w13 = _W1[0], _W1[1], _W1[2], _W1[3]
    w20, w21, w22, w23 = _W2[0], _W2[1], _W2[2], _W2[3]
    for i in range(n):
        j = i + 4
        a0 = (w10 * (ext[j + 1, 0] - ext[j - 1, 0]) + w11 * (ext[j + 2, 0] - ext[j - 2, 0])
              + w12 * (ext[j + 3, 0] - ext[j - 3, 0]) + w13 * (ext[j + 4, 0] - ext[j - 4, 0])) * inv_h
        a1 = (w10 * (ext[j + 1, 1] - ext[j - 1, 1]) + w11 * (ext[j + 2, 1] - ext[j - 2, 1])
              + w12 * (ext[j + 3, 1] - ext[j - 3, 1]) + w13 * (ext[j + 4, 1] - ext[j - 4, 1])) * inv_h
        a2 = (w10 * (ext[j + 1, 2] - ext[j - 1, 2]) + w11 * (ext[j + 2, 2] - ext[j - 2, 2])
              + w12 * (ext[j + 3, 2] - ext[j - 3, 2]) + w13 * (ext[j + 4, 2] - ext[j - 4, 2])) * inv_h
        b0 = (_W2C * ext[j, 0] + w20 * (ext[j + 1, 0] + ext[j - 1, 0]) + w21 * (ext[j + 2, 0] + ext[j - 2, 0])
              + w22 * (ext[j + 3, 0] + ext[j - 3, 0]) + w23 * (ext[j + 4, 0] + ext[j - 4, 0])) * inv_h2
        b1 = (_W2C * ext[j, 1] + w20 * (ext[j + 1, 1] + ext[j - 1, 1]) + w21 * (ext[j + 2, 1] + ext[j - 2, 1])
              + w22 * (ext[j + 3, 1] + ext[j - 3, 1]) + w23 * (ext[j + 4, 1] + ext[j - 4, 1])) * inv_h2
        b2 = (_W2C * ext[j, 2] + w20 * (ext[j + 1, 2] + ext[j - 1, 2]) + w21 * (ext[j + 2, 2] + ext[j - 2, 2])
              + w22 * (ext[j + 3, 2] + ext[j - 3, 2]) + w23 * (ext[j + 4, 2] + ext[j - 4, 2])) * inv_h2
        sp2 = a0 * a0 + a1 * a1 + a2 * a2
        if sp2 == 0.0:
            return i
        sp = np.sqrt(sp2)
        inv = 1.0 / (sp2 * sp)
        out[i, 0] = (a1 * b2 - a2 * b1) * inv
        out[i, 1] = (a2 * b0 - a0 * b2) * inv
        out[i, 2] = (a0 * b1 - a1 * b0) * inv
        if active:
            x1 = ext[j, 0]
            coef = eps * x1 / (x1 * x1 + rc2) / sp
            # X_s ∧ e1 = (0, X_s3, -X_s2)
            out[i, 1] -= coef * a2
            out[i, 2] += coef * a1
    return -1


@nb.njit(cache=True)
def dp54_kernel(y0, k1, have_k1, mirror, shift, h, eps, rc2, active, tau, y_new, err, k7):
    n = y0.shape[0]
    k = np.empty((7, n, 3))
    if have_k1:
        k[0] = k1
    else:
        bad = velocity_kernel(y0, mirror, shift, h, eps, rc2, active, k[0])
        if bad >= 0:
            return bad
    ytmp = np.empty((n, 3))
    for s in range(1, 7):
        for i in range(n):
            for c in range(3):
                acc = y0[i, c]
                for j in range(s):
                    a = _A[s, j]
                    if a != 0.0:
                        acc += tau * a * k[j, i, c]
                ytmp[i, c] = acc
        bad = velocity_kernel(ytmp, mirror, shift, h, eps, rc2, active, k[s])
        if bad >= 0:
            return bad
    for i in range(n):
        for c in range(3):
            y_new[i, c] = ytmp[i, c]
            e = 0.0
            for j in range(7):
                e += _E[j] * k[j, i, c]
            err[i, c] = tau * e
            k7[i, c] = k[6, i, c]
    return -1
