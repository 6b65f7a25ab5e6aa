"""Compiled inner loops for the MCMC kernels.

Conventions: rows and columns are 0-based, ``diag`` is indexed by
``row - col + n - 1`` and ``anti`` by ``row + col``.  Every proposal consumes
exactly three uniforms ``(u1, u2, u3)``; callers pre-draw them from a numpy
Generator so compiled and pure-Python paths see the same stream.
"""
import numpy as np
from numba import njit

UNIFORM_SWAP = 0
ADJACENT_SWAP = 1
ROW_REASSIGN = 2


@njit(cache=True, nogil=True)
def tally_energy(cols, diag, anti):
    e = 0
    for t in cols:
        e += t * (t - 1) // 2
    for t in diag:
        e += t * (t - 1) // 2
    for t in anti:
        e += t * (t - 1) // 2
    return e


@njit(cache=True, nogil=True)
def _remove(x, cols, diag, anti, n, r):
    c = x[r]
    d = cols[c] - 1 + diag[r - c + n - 1] - 1 + anti[r + c] - 1
    cols[c] -= 1
    diag[r - c + n - 1] -= 1
    anti[r + c] -= 1
    return d


@njit(cache=True, nogil=True)
def _place(x, cols, diag, anti, n, r, c):
    d = cols[c] + diag[r - c + n - 1] + anti[r + c]
    cols[c] += 1
    diag[r - c + n - 1] += 1
    anti[r + c] += 1
    x[r] = c
    return d


@njit(cache=True, nogil=True)
def swap_in_place(x, cols, diag, anti, n, i, j):
    """Swap the columns of rows i and j; returns the energy change."""
    a = x[i]
    b = x[j]
    d = -_remove(x, cols, diag, anti, n, i)
    d -= _remove(x, cols, diag, anti, n, j)
    d += _place(x, cols, diag, anti, n, i, b)
    d += _place(x, cols, diag, anti, n, j, a)
    return d


@njit(cache=True, nogil=True)
def reassign_in_place(x, cols, diag, anti, n, r, c):
    """Move the queen of row r to column c; returns the energy change."""
    d = -_remove(x, cols, diag, anti, n, r)
    d += _place(x, cols, diag, anti, n, r, c)
    return d


@njit(cache=True, nogil=True)
def propose(x, free, move_kind, n, u1, u2):
    """Return (row_a, row_b, new_col); row_b is -1 for reassignments."""
    k = free.shape[0]
    if move_kind == UNIFORM_SWAP:
        a = int(u1 * k)
        b = int(u2 * (k - 1))
        if b >= a:
            b += 1
        return free[a], free[b], -1
    if move_kind == ADJACENT_SWAP:
        a = int(u1 * (k - 1))
        return free[a], free[a + 1], -1
    r = free[int(u1 * k)]
    c = int(u2 * (n - 1))
    if c >= x[r]:
        c += 1
    return r, -1, c


@njit(cache=True, nogil=True)
def step(x, cols, diag, anti, energy, free, move_kind, log_w, u1, u2, u3):
    """One Metropolis update targeting exp(log_w[S(x)]).

    Returns (new_energy, accepted).
    """
    n = x.shape[0]
    ra, rb, c = propose(x, free, move_kind, n, u1, u2)
    if rb >= 0:
        d = swap_in_place(x, cols, diag, anti, n, ra, rb)
    else:
        old = x[ra]
        d = reassign_in_place(x, cols, diag, anti, n, ra, c)
    e_new = energy + d
    dlw = log_w[e_new] - log_w[energy]
    if dlw >= 0.0 or np.log(u3) < dlw:
        return e_new, True
    if rb >= 0:
        swap_in_place(x, cols, diag, anti, n, ra, rb)
    else:
        reassign_in_place(x, cols, diag, anti, n, ra, old)
    return energy, False


@njit(cache=True, nogil=True)
def run_single(x, cols, diag, anti, energy, free, move_kind, log_w, rand, trace):
    """Run len(rand) steps of one chain; trace[s] receives the energy after step s."""
    acc = 0
    for s in range(rand.shape[0]):
        energy, ok = step(x, cols, diag, anti, energy, free, move_kind, log_w,
                          rand[s, 0], rand[s, 1], rand[s, 2])
        if ok:
            acc += 1
        trace[s] = energy
    return energy, acc


@njit(cache=True, nogil=True)
def run_population(X, COLS, DIAG, ANTI, E, free, move_kind, log_w, rand):
    """Advance every particle by rand.shape[1] steps; rand has shape (N, steps, 3)."""
    acc = 0
    for p in range(X.shape[0]):
        e = E[p]
        for s in range(rand.shape[1]):
            e, ok = step(X[p], COLS[p], DIAG[p], ANTI[p], e, free, move_kind, log_w,
                         rand[p, s, 0], rand[p, s, 1], rand[p, s, 2])
            if ok:
                acc += 1
        E[p] = e
    return acc


@njit(cache=True, nogil=True)
def population_tallies(X, COLS, DIAG, ANTI, E):
    n = X.shape[1]
    for p in range(X.shape[0]):
        COLS[p, :] = 0
        DIAG[p, :] = 0
        ANTI[p, :] = 0
        for r in range(n):
            c = X[p, r]
            COLS[p, c] += 1
            DIAG[p, r - c + n - 1] += 1
            ANTI[p, r + c] += 1
        E[p] = tally_energy(COLS[p], DIAG[p], ANTI[p])


@njit(cache=True, nogil=True)
def wang_landau_run(x, cols, diag, anti, energy, free, move_kind, log_n, hist,
                    visited, ln_f, ln_f_final, flat_c, check_every, rand):
    """Wang-Landau updates over len(rand) proposals.

    Returns (energy, ln_f, steps_used, stages_completed).  Stops early once
    ln_f drops below ln_f_final.
    """
    stages = 0
    used = 0
    for s in range(rand.shape[0]):
        used += 1
        e_old = energy
        n = x.shape[0]
        ra, rb, c = propose(x, free, move_kind, n, rand[s, 0], rand[s, 1])
        if rb >= 0:
            d = swap_in_place(x, cols, diag, anti, n, ra, rb)
        else:
            old = x[ra]
            d = reassign_in_place(x, cols, diag, anti, n, ra, c)
        e_new = e_old + d
        dlw = log_n[e_old] - log_n[e_new]
        if dlw >= 0.0 or np.log(rand[s, 2]) < dlw:
            energy = e_new
        else:
            if rb >= 0:
                swap_in_place(x, cols, diag, anti, n, ra, rb)
            else:
                reassign_in_place(x, cols, diag, anti, n, ra, old)
        log_n[energy] += ln_f
        hist[energy] += 1
        visited[energy] = True
        if used % check_every == 0:
            total = 0.0
            cnt = 0
            lo = -1
            for k in range(hist.shape[0]):
                if visited[k]:
                    total += hist[k]
                    cnt += 1
                    if lo < 0 or hist[k] < lo:
                        lo = hist[k]
            if cnt > 0 and lo >= flat_c * total / cnt:
                hist[:] = 0
                ln_f = ln_f / 2.0
                stages += 1
                if ln_f < ln_f_final:
                    return energy, ln_f, used, stages
    return energy, ln_f, used, stages


@njit(cache=True, nogil=True)
def split_sampling_run(x, cols, diag, anti, energy, free, move_kind, level_of,
                       log_omega, nu, boost, adapt, occupancy, batch_sums, batch_len,
                       batch_start, rand):
    """Discrete split-sampling refinement over len(rand) proposals.

    ``level_of[s]`` is the deepest level whose threshold admits energy s and
    the state weight is Omega at that level.  After every proposal the current
    state adds 1/Omega to nu_t for all levels t it satisfies and is tallied in
    ``occupancy``.  With ``adapt`` set, Z_t = nu_t / nu_0 and
    log Omega_t = boost_t - log Z_t are refreshed every step.  Increments are
    also summed into ``batch_sums[b, t]`` for batch-means error estimates.
    """
    T = nu.shape[0]
    n = x.shape[0]
    for s in range(rand.shape[0]):
        e_old = energy
        ra, rb, c = propose(x, free, move_kind, n, rand[s, 0], rand[s, 1])
        if rb >= 0:
            d = swap_in_place(x, cols, diag, anti, n, ra, rb)
        else:
            old = x[ra]
            d = reassign_in_place(x, cols, diag, anti, n, ra, c)
        e_new = e_old + d
        dlw = log_omega[level_of[e_new]] - log_omega[level_of[e_old]]
        if dlw >= 0.0 or np.log(rand[s, 2]) < dlw:
            energy = e_new
        else:
            if rb >= 0:
                swap_in_place(x, cols, diag, anti, n, ra, rb)
            else:
                reassign_in_place(x, cols, diag, anti, n, ra, old)
        top = level_of[energy]
        occupancy[top] += 1
        inc = np.exp(-log_omega[top])
        b = (batch_start + s) // batch_len
        for t in range(top + 1):
            nu[t] += inc
            if b < batch_sums.shape[0]:
                batch_sums[b, t] += inc
        if adapt:
            for t in range(T):
                log_omega[t] = boost[t] - np.log(nu[t] / nu[0])
    return energy


@njit(cache=True, nogil=True)
def batch_pair_energy(X):
    """Attacking pairs (columns and diagonals) for each row of X, by pairwise check."""
    N, n = X.shape
    out = np.zeros(N, dtype=np.int64)
    for p in range(N):
        e = 0
        for i in range(n):
            a = X[p, i]
            for j in range(i + 1, n):
                b = X[p, j]
                if a == b or a - b == j - i or b - a == j - i:
                    e += 1
        out[p] = e
    return out


@njit(cache=True, nogil=True)
def nested_refill(x, cols, diag, anti, energy, label, free, move_kind, s_star, u_star, rand):
    """Constrained walk on (placement, label) pairs ranked below (s_star, u_star).

    A pair is admissible when its energy is below s_star, or equal to it with
    a label above u_star.  Each proposal moves the placement and draws a
    fresh uniform label (rand[:, 2]); the target is uniform on the
    admissible set.  Returns (energy, label, accepted).
    """
    n = x.shape[0]
    acc = 0
    for s in range(rand.shape[0]):
        ra, rb, c = propose(x, free, move_kind, n, rand[s, 0], rand[s, 1])
        if rb >= 0:
            d = swap_in_place(x, cols, diag, anti, n, ra, rb)
        else:
            old = x[ra]
            d = reassign_in_place(x, cols, diag, anti, n, ra, c)
        e_new = energy + d
        u_new = rand[s, 2]
        if e_new < s_star or (e_new == s_star and u_new > u_star):
            energy = e_new
            label = u_new
            acc += 1
        elif rb >= 0:
            swap_in_place(x, cols, diag, anti, n, ra, rb)
        else:
            reassign_in_place(x, cols, diag, anti, n, ra, old)
    return energy, label, acc
