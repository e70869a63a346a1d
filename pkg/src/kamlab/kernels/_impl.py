"""Hot inner loops, written once and compiled with numba when enabled.

Every function here takes plain ndarrays/scalars so the same source runs
under ``numba.njit`` and as uncompiled Python (the fallback backend).  A
trigonometric generator is passed as a pair ``(kmat, cmat)``:

    kmat : (m, d) int64   -- integer frequency vectors
    cmat : (m, 2, 2) complex128 -- matrix Fourier coefficients

and evaluates to ``A(phi) = Re( sum_j cmat[j] * exp(2 pi i <kmat[j], phi>) )``.
Ordering of floating-point operations is fixed so a given backend replays
bit-identically.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def eval_generator(kmat, cmat, phi, out):
    """Evaluate a matrix trigonometric series at a single phase into out (2,2)."""
    a00 = 0.0
    a01 = 0.0
    a10 = 0.0
    a11 = 0.0
    m = kmat.shape[0]
    d = kmat.shape[1]
    for j in range(m):
        s = 0.0
        for t in range(d):
            s += kmat[j, t] * phi[t]
        ang = TWO_PI * s
        c = math.cos(ang)
        sn = math.sin(ang)
        a00 += cmat[j, 0, 0].real * c - cmat[j, 0, 0].imag * sn
        a01 += cmat[j, 0, 1].real * c - cmat[j, 0, 1].imag * sn
        a10 += cmat[j, 1, 0].real * c - cmat[j, 1, 0].imag * sn
        a11 += cmat[j, 1, 1].real * c - cmat[j, 1, 1].imag * sn
    out[0, 0] = a00
    out[0, 1] = a01
    out[1, 0] = a10
    out[1, 1] = a11


def track_rotation(kmat, cmat, alpha, phi0, x0, n):
    """Continuous-angle tracking of the projective orbit.

    Returns the accumulated angle increment over n steps; the per-step
    increment is folded into (-1/2, 1/2] after removing the integer part.
    """
    d = alpha.shape[0]
    phi = np.empty(d, dtype=np.float64)
    for t in range(d):
        phi[t] = phi0[t] % 1.0
    A = np.empty((2, 2), dtype=np.float64)
    x = x0
    total = 0.0
    for _ in range(n):
        eval_generator(kmat, cmat, phi, A)
        cx = math.cos(TWO_PI * x)
        sx = math.sin(TWO_PI * x)
        w0 = A[0, 0] * cx + A[0, 1] * sx
        w1 = A[1, 0] * cx + A[1, 1] * sx
        xn = math.atan2(w1, w0) / TWO_PI
        delta = xn - x
        delta -= math.floor(delta)
        if delta > 0.5:
            delta -= 1.0
        total += delta
        x += delta
        x -= math.floor(x)
        for t in range(d):
            phi[t] += alpha[t]
            phi[t] -= math.floor(phi[t])
    return total


def spectral_norm_2x2(a00, a01, a10, a11):
    """Largest singular value of a real 2x2 matrix (closed form)."""
    p = a00 * a00 + a01 * a01 + a10 * a10 + a11 * a11
    det = a00 * a11 - a01 * a10
    disc = p * p - 4.0 * det * det
    if disc < 0.0:
        disc = 0.0
    s = math.sqrt(disc)
    lam = 0.5 * (p + s)
    if lam < 0.0:
        lam = 0.0
    return math.sqrt(lam)


def lyapunov_orbit(kmat, cmat, alpha, phi0, n):
    """(1/n) log ||A^(n)(phi0)|| with renormalized accumulation."""
    d = alpha.shape[0]
    phi = np.empty(d, dtype=np.float64)
    for t in range(d):
        phi[t] = phi0[t] % 1.0
    A = np.empty((2, 2), dtype=np.float64)
    b00 = 1.0
    b01 = 0.0
    b10 = 0.0
    b11 = 1.0
    acc = 0.0
    for _ in range(n):
        eval_generator(kmat, cmat, phi, A)
        n00 = A[0, 0] * b00 + A[0, 1] * b10
        n01 = A[0, 0] * b01 + A[0, 1] * b11
        n10 = A[1, 0] * b00 + A[1, 1] * b10
        n11 = A[1, 0] * b01 + A[1, 1] * b11
        b00, b01, b10, b11 = n00, n01, n10, n11
        nrm = spectral_norm_2x2(b00, b01, b10, b11)
        if nrm > 1.0e50 or nrm < 1.0e-50:
            acc += math.log(nrm)
            inv = 1.0 / nrm
            b00 *= inv
            b01 *= inv
            b10 *= inv
            b11 *= inv
        for t in range(d):
            phi[t] += alpha[t]
            phi[t] -= math.floor(phi[t])
    nrm = spectral_norm_2x2(b00, b01, b10, b11)
    return (acc + math.log(nrm)) / n


def bounded_orbit(kmat, cmat, alpha, phi0, nmax):
    """Running sup of log ||A^(n)(phi0)|| for n <= nmax.

    Returns (sup_log, argmax_n, overflow_flag); overflow at 1e+100.
    """
    d = alpha.shape[0]
    phi = np.empty(d, dtype=np.float64)
    for t in range(d):
        phi[t] = phi0[t] % 1.0
    A = np.empty((2, 2), dtype=np.float64)
    b00 = 1.0
    b01 = 0.0
    b10 = 0.0
    b11 = 1.0
    acc = 0.0
    best = 0.0
    best_n = 0
    overflow = False
    log_cap = math.log(1.0e100)
    for step in range(1, nmax + 1):
        eval_generator(kmat, cmat, phi, A)
        n00 = A[0, 0] * b00 + A[0, 1] * b10
        n01 = A[0, 0] * b01 + A[0, 1] * b11
        n10 = A[1, 0] * b00 + A[1, 1] * b10
        n11 = A[1, 0] * b01 + A[1, 1] * b11
        b00, b01, b10, b11 = n00, n01, n10, n11
        nrm = spectral_norm_2x2(b00, b01, b10, b11)
        cur = acc + math.log(nrm)
        if cur > best:
            best = cur
            best_n = step
        if cur > log_cap:
            overflow = True
            return best, best_n, overflow
        if nrm > 1.0e50:
            acc += math.log(nrm)
            inv = 1.0 / nrm
            b00 *= inv
            b01 *= inv
            b10 *= inv
            b11 *= inv
        for t in range(d):
            phi[t] += alpha[t]
            phi[t] -= math.floor(phi[t])
    return best, best_n, overflow


def sturm_count_leq(diag, energy):
    """Number of eigenvalues <= energy of the Jacobi matrix with unit off-diagonals.

    diag holds the diagonal entries; uses the LDL^T pivot sign count with a
    tiny-pivot guard.
    """
    count = 0
    d = 0.0
    first = True
    for i in range(diag.shape[0]):
        if first:
            d = diag[i] - energy
            first = False
        else:
            d = diag[i] - energy - 1.0 / d
        if d == 0.0:
            d = 1.0e-300
        if d < 0.0:
            count += 1
    return count


def winding_samples(kmat, cmat, axis, npts, d):
    """Angles of A(t e_axis) e(0) over a closed loop; caller unwraps."""
    out = np.empty(npts, dtype=np.float64)
    phi = np.zeros(d, dtype=np.float64)
    A = np.empty((2, 2), dtype=np.float64)
    for i in range(npts):
        phi[axis] = i / npts
        eval_generator(kmat, cmat, phi, A)
        out[i] = math.atan2(A[1, 0], A[0, 0])
    return out
