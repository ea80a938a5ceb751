"""Compiled inner loops for the iterative solvers.

Both solvers are compiled so that timing comparisons reflect iteration
counts and per-iteration work rather than interpreter overhead.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

# status codes shared with solvers.py
OK = 0
NONFINITE = 1
DIVERGED = 2


@njit(cache=True)
def _objective(f, coupling, direct_power, phi):
    n_el = f.shape[0]
    quad = 0.0
    cross = 0.0
    for n in range(n_el):
        acc = 0j
        for m in range(n_el):
            acc += coupling[n, m] * phi[m]
        quad += (phi[n].conjugate() * acc).real
        cross += (phi[n] * f[n].conjugate()).real
    return direct_power + 2.0 * cross + quad


@njit(cache=True)
def dsm_run(f, coupling, direct_power, theta, eps, max_iters, degenerate_tol, record):
    """Gauss-Seidel sweeps of the closed-form element update, in place on theta.

    The maximizer of element n is the unit phasor w_n/|w_n|, so the sweep
    works on phasors and converts moved elements back to angles only once
    at the end.  The objective is tracked incrementally: moving element n
    from phi_old raises psi by 2(|w_n| - Re(phi_old conj(w_n))), so a sweep
    costs N(N-1) multiply-adds and its psi change is a sum of non-negative
    terms.  With ``record`` set, psi is also re-evaluated from scratch after
    every element update (O(N^2) each) and returned in ``updates``.

    Returns (iterations, converged, status, psi_initial, trace, updates).
    """
    n_el = f.shape[0]
    phi = np.empty(n_el, dtype=np.complex128)
    moved = np.zeros(n_el, dtype=np.bool_)
    for n in range(n_el):
        phi[n] = complex(math.cos(theta[n]), math.sin(theta[n]))
    psi = _objective(f, coupling, direct_power, phi)
    psi_initial = psi
    trace = np.empty(max_iters)
    updates = np.empty(max_iters * n_el + 1 if record else 0)
    if record:
        updates[0] = psi
    if not math.isfinite(psi):
        return 0, False, NONFINITE, psi_initial, trace[:0], updates[:0]
    iterations, converged, status = max_iters, False, OK
    for it in range(max_iters):
        gain = 0.0
        for n in range(n_el):
            z = f[n]
            row = coupling[n]
            for m in range(n):
                z += row[m] * phi[m]
            for m in range(n + 1, n_el):
                z += row[m] * phi[m]
            mag = math.sqrt(z.real * z.real + z.imag * z.imag)
            if mag > degenerate_tol:
                gain += 2.0 * (mag - (phi[n] * z.conjugate()).real)
                phi[n] = complex(z.real / mag, z.imag / mag)
                moved[n] = True
            if record:
                updates[it * n_el + n + 1] = _objective(f, coupling, direct_power, phi)
        psi += gain
        trace[it] = psi
        if not math.isfinite(psi):
            iterations, status = it + 1, NONFINITE
            break
        if gain <= eps:
            iterations, converged = it + 1, True
            break
    for n in range(n_el):
        if moved[n]:
            ang = math.atan2(phi[n].imag, phi[n].real)
            if ang < 0.0:
                ang += TWO_PI
            if ang >= TWO_PI:
                ang = 0.0
            theta[n] = ang
    used = iterations * n_el + 1 if record else 0
    return iterations, converged, status, psi_initial, trace[:iterations], updates[:used]


@njit(cache=True)
def _weights(f, coupling, phi, out):
    n_el = f.shape[0]
    for n in range(n_el):
        acc = f[n]
        for m in range(n_el):
            acc += coupling[n, m] * phi[m]
        out[n] = acc


@njit(cache=True)
def ga_run(f, coupling, direct_power, theta, step, eps, max_iters, blowup):
    """Fixed-step gradient ascent on the phases, in place on theta.

    Stops with DIVERGED when the objective becomes non-finite, exceeds
    ``blowup`` times its starting value, or falls below its starting value.
    Returns (iterations, converged, status, psi_initial, trace).
    """
    n_el = f.shape[0]
    phi = np.empty(n_el, dtype=np.complex128)
    w = np.empty(n_el, dtype=np.complex128)
    for n in range(n_el):
        phi[n] = complex(math.cos(theta[n]), math.sin(theta[n]))
    _weights(f, coupling, phi, w)
    psi_prev = _objective(f, coupling, direct_power, phi)
    psi_initial = psi_prev
    trace = np.empty(max_iters)
    if not math.isfinite(psi_prev):
        return 0, False, NONFINITE, psi_initial, trace[:0]
    floor = psi_initial - 1e-12 * abs(psi_initial)
    for it in range(max_iters):
        for n in range(n_el):
            # w already holds f + coupling @ phi for the current iterate
            grad = -2.0 * (phi[n] * w[n].conjugate()).imag
            theta[n] = theta[n] + step * grad
        for n in range(n_el):
            phi[n] = complex(math.cos(theta[n]), math.sin(theta[n]))
        _weights(f, coupling, phi, w)
        psi = direct_power
        for n in range(n_el):
            psi += 2.0 * (phi[n] * f[n].conjugate()).real
            psi += (phi[n].conjugate() * (w[n] - f[n])).real
        trace[it] = psi
        if not math.isfinite(psi) or psi > blowup * abs(psi_initial):
            return it + 1, False, DIVERGED, psi_initial, trace[: it + 1]
        if abs(psi - psi_prev) <= eps:
            return it + 1, True, OK, psi_initial, trace[: it + 1]
        if psi < floor:
            return it + 1, False, DIVERGED, psi_initial, trace[: it + 1]
        psi_prev = psi
    return max_iters, False, OK, psi_initial, trace
