"""Compiled inner loops of the optimistic planner.

All per-timestep arrays are zero-padded to a common feature dimension
``dmax`` so that they fit in rectangular arrays; padded coordinates carry no
weight and stay at zero. Timestep indices are 0-based here.

Layout (``H`` steps, ``S`` states, ``A`` actions):

    phi    (H, S, A, dmax)   features
    center (H, dmax)         Sigma_t^{-1} sum_i phi_i r_i
    coupl  (H, dmax, S)      Sigma_t^{-1} sum_i phi_i e_{s'_i}^T
    pert   (H, dmax, dmax)   radius_t * L_t^{-T}
    caps   (H,)              value cap H - t at 0-based t
    bonus  (A,)              closed-form optimism at step 0, start state
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def objective(u, phi, center, coupl, pert, caps, bonus, s1, grad, want_grad):
    """Planned start value for perturbations ``u`` (row 0 unused) and its supergradient.

    The maximization over the first step's perturbation is done in closed
    form, which leaves ``u[1:]`` as the free variables.
    """
    H, S, A, dm = phi.shape
    theta = np.zeros((H, dm))
    vnext = np.zeros(S)
    best = np.zeros((H, S), dtype=np.int64)
    active = np.zeros((H, S))
    for t in range(H - 1, 0, -1):
        for i in range(dm):
            acc = center[t, i]
            for s in range(S):
                acc += coupl[t, i, s] * vnext[s]
            for j in range(dm):
                acc += pert[t, i, j] * u[t, j]
            theta[t, i] = acc
        vcur = np.zeros(S)
        for s in range(S):
            bq = -np.inf
            ba = 0
            for a in range(A):
                q = 0.0
                for i in range(dm):
                    q += phi[t, s, a, i] * theta[t, i]
                if q > bq:
                    bq = q
                    ba = a
            best[t, s] = ba
            if bq < 0.0:
                vcur[s] = 0.0
            elif bq >= caps[t]:
                vcur[s] = caps[t]
            else:
                vcur[s] = bq
                active[t, s] = 1.0
            # moving up from exactly zero is feasible
            if bq == 0.0 and caps[t] > 0.0:
                active[t, s] = 1.0
        vnext = vcur
    for i in range(dm):
        acc = center[0, i]
        for s in range(S):
            acc += coupl[0, i, s] * vnext[s]
        theta[0, i] = acc
    jbest = -np.inf
    a1 = 0
    for a in range(A):
        q = bonus[a]
        for i in range(dm):
            q += phi[0, s1, a, i] * theta[0, i]
        if q > jbest:
            jbest = q
            a1 = a
    if not want_grad:
        return jbest
    grad[:, :] = 0.0
    gtheta = np.zeros(dm)
    for i in range(dm):
        gtheta[i] = phi[0, s1, a1, i]
    for t in range(1, H):
        gv = np.zeros(S)
        for s in range(S):
            for i in range(dm):
                gv[s] += coupl[t - 1, i, s] * gtheta[i]
        gnew = np.zeros(dm)
        for s in range(S):
            w = gv[s] * active[t, s]
            if w != 0.0:
                for i in range(dm):
                    gnew[i] += w * phi[t, s, best[t, s], i]
        for j in range(dm):
            acc = 0.0
            for i in range(dm):
                acc += pert[t, i, j] * gnew[i]
            grad[t, j] = acc
        gtheta = gnew
    return jbest


@njit(cache=True)
def _project_rows(u, dims):
    for t in range(u.shape[0]):
        n2 = 0.0
        for j in range(dims[t]):
            n2 += u[t, j] * u[t, j]
        n = np.sqrt(n2)
        if n > 1.0:
            for j in range(dims[t]):
                u[t, j] /= n


@njit(cache=True)
def _fd_grad(u, phi, center, coupl, pert, caps, bonus, s1, dims, h, grad):
    dummy = np.zeros_like(u)
    grad[:, :] = 0.0
    for t in range(1, u.shape[0]):
        for j in range(dims[t]):
            old = u[t, j]
            u[t, j] = old + h
            fp = objective(u, phi, center, coupl, pert, caps, bonus, s1, dummy, False)
            u[t, j] = old - h
            fm = objective(u, phi, center, coupl, pert, caps, bonus, s1, dummy, False)
            u[t, j] = old
            grad[t, j] = (fp - fm) / (2.0 * h)


@njit(cache=True)
def _direction(u, phi, center, coupl, pert, caps, bonus, s1, dims, fd_step, grad):
    if fd_step > 0.0:
        _fd_grad(u, phi, center, coupl, pert, caps, bonus, s1, dims, fd_step, grad)
        return objective(u, phi, center, coupl, pert, caps, bonus, s1, grad.copy(), False)
    return objective(u, phi, center, coupl, pert, caps, bonus, s1, grad, True)


@njit(cache=True)
def ascend(u0, phi, center, coupl, pert, caps, bonus, s1, dims, iters, step0, min_step, fd_step):
    """Projected normalized-gradient ascent from ``u0``.

    The ascent direction is the analytic supergradient, or a central finite
    difference with spacing ``fd_step`` when that is positive. A step is
    accepted only if it strictly improves the objective; otherwise the step
    length halves. Returns the best point and its value.
    """
    u = u0.copy()
    _project_rows(u, dims)
    grad = np.zeros_like(u)
    J = _direction(u, phi, center, coupl, pert, caps, bonus, s1, dims, fd_step, grad)
    step = step0
    cand = np.zeros_like(u)
    cgrad = np.zeros_like(u)
    for _ in range(iters):
        gn = 0.0
        for t in range(u.shape[0]):
            for j in range(u.shape[1]):
                gn += grad[t, j] * grad[t, j]
        gn = np.sqrt(gn)
        if gn == 0.0 or step < min_step:
            break
        for t in range(u.shape[0]):
            for j in range(u.shape[1]):
                cand[t, j] = u[t, j] + step * grad[t, j] / gn
        _project_rows(cand, dims)
        Jc = _direction(cand, phi, center, coupl, pert, caps, bonus, s1, dims, fd_step, cgrad)
        if Jc > J:
            J = Jc
            u[:, :] = cand
            grad[:, :] = cgrad
        else:
            step *= 0.5
    return u, J
