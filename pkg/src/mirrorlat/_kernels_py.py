"""Pure-Python Metropolis sweep kernels.

Fallback used when the compiled extension is unavailable (or when
``MIRRORLAT_PURE_PYTHON=1``).  The loops mirror ``_kernels.pyx`` statement
for statement and both call the same libm routines, so the two backends
produce bit-identical trajectories from identical pre-drawn randoms.

All random numbers are drawn by the caller: ``prop`` holds one proposal per
site/link and ``unif`` one acceptance uniform, consumed in visit order.
"""
import math

BACKEND = "python"


def scalar_sweep(phi, nbr, off, c2, c4, prop, unif):
    """One fixed-order sweep of single-site Metropolis updates.

    ``nbr``/``off`` is the CSR neighbor table (endpoint multiplicity counts
    doubled links).  Returns the number of accepted updates; ``phi`` is
    mutated in place.
    """
    n_acc = 0
    n = phi.shape[0]
    for x in range(n):
        old = phi[x]
        new = old + prop[x]
        # kinetic: sum over attached links of 1/2 (phi_x - phi_n)^2
        ds = 0.0
        for j in range(off[x], off[x + 1]):
            pn = phi[nbr[j]]
            ds += 0.5 * (new - pn) * (new - pn) - 0.5 * (old - pn) * (old - pn)
        ds += c2 * (new * new - old * old) + c4 * (new ** 4 - old ** 4)
        if ds <= 0.0 or unif[x] < math.exp(-ds):
            phi[x] = new
            n_acc += 1
    return n_acc


def u1_sweep(theta, st_links, st_signs, st_off, kappa, prop, unif):
    """One fixed-order sweep of link Metropolis updates for U(1).

    The staple tables are CSR over links with three (link, sign) entries per
    staple; signs are folded so each plaquette enters the action as
    ``-kappa * cos(theta_l + staple_phase)``.
    """
    n_acc = 0
    n = theta.shape[0]
    for l in range(n):
        old = theta[l]
        new = old + prop[l]
        ds = 0.0
        for s in range(st_off[l], st_off[l + 1]):
            b = 3 * s
            r = (st_signs[b] * theta[st_links[b]]
                 + st_signs[b + 1] * theta[st_links[b + 1]]
                 + st_signs[b + 2] * theta[st_links[b + 2]])
            ds -= kappa * (math.cos(new + r) - math.cos(old + r))
        if ds <= 0.0 or unif[l] < math.exp(-ds):
            # wrap exactly like the C kernel: fmod then sign fix
            w = math.fmod(new, 6.283185307179586)
            if w < 0.0:
                w += 6.283185307179586
            theta[l] = w
            n_acc += 1
    return n_acc


def zn_sweep(digits, n_group, st_links, st_signs, st_off, kappa, cos_table, prop, unif):
    """One fixed-order sweep of link Metropolis updates for Z_N.

    ``prop`` holds uniformly drawn nonzero digit shifts; ``cos_table[k]`` is
    ``cos(2 pi k / N)``.
    """
    n_acc = 0
    n = digits.shape[0]
    for l in range(n):
        old = digits[l]
        new = (old + prop[l]) % n_group
        ds = 0.0
        for s in range(st_off[l], st_off[l + 1]):
            b = 3 * s
            r = (st_signs[b] * digits[st_links[b]]
                 + st_signs[b + 1] * digits[st_links[b + 1]]
                 + st_signs[b + 2] * digits[st_links[b + 2]])
            ds -= kappa * (cos_table[(new + r) % n_group] - cos_table[(old + r) % n_group])
        if ds <= 0.0 or unif[l] < math.exp(-ds):
            digits[l] = new
            n_acc += 1
    return n_acc
