# Compiled Metropolis sweep kernels.
#
# Must stay statement-for-statement equivalent to _kernels_py.py: both
# backends consume the same pre-drawn randoms and must produce bit-identical
# trajectories (no -ffast-math, same libm calls, same wrap conventions).

from libc.math cimport cos, exp, fmod

BACKEND = "cython"

cdef double TAU = 6.283185307179586


cdef inline long imod(long x, long n) nogil:
    cdef long r = x % n
    if r < 0:
        r += n
    return r


def scalar_sweep(double[::1] phi, const long[::1] nbr, const long[::1] off,
                 double c2, double c4, const double[::1] prop, const double[::1] unif):
    cdef Py_ssize_t n = phi.shape[0]
    cdef Py_ssize_t x, j
    cdef long n_acc = 0
    cdef double old, new, ds, pn
    for x in range(n):
        old = phi[x]
        new = old + prop[x]
        ds = 0.0
        for j in range(off[x], off[x + 1]):
            pn = phi[nbr[j]]
            ds += 0.5 * (new - pn) * (new - pn) - 0.5 * (old - pn) * (old - pn)
        ds += c2 * (new * new - old * old) + c4 * (new ** 4 - old ** 4)
        if ds <= 0.0 or unif[x] < exp(-ds):
            phi[x] = new
            n_acc += 1
    return n_acc


def u1_sweep(double[::1] theta, const long[::1] st_links, const signed char[::1] st_signs,
             const long[::1] st_off, double kappa, const double[::1] prop, const double[::1] unif):
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t l, s, b
    cdef long n_acc = 0
    cdef double old, new, ds, r, w
    for l in range(n):
        old = theta[l]
        new = old + prop[l]
        ds = 0.0
        for s in range(st_off[l], st_off[l + 1]):
            b = 3 * s
            r = (st_signs[b] * theta[st_links[b]]
                 + st_signs[b + 1] * theta[st_links[b + 1]]
                 + st_signs[b + 2] * theta[st_links[b + 2]])
            ds -= kappa * (cos(new + r) - cos(old + r))
        if ds <= 0.0 or unif[l] < exp(-ds):
            w = fmod(new, TAU)
            if w < 0.0:
                w += TAU
            theta[l] = w
            n_acc += 1
    return n_acc


def zn_sweep(long[::1] digits, long n_group, const long[::1] st_links,
             const signed char[::1] st_signs, const long[::1] st_off, double kappa,
             const double[::1] cos_table, const long[::1] prop, const double[::1] unif):
    cdef Py_ssize_t n = digits.shape[0]
    cdef Py_ssize_t l, s, b
    cdef long n_acc = 0
    cdef long old, new, r
    cdef double ds
    for l in range(n):
        old = digits[l]
        new = imod(old + prop[l], n_group)
        ds = 0.0
        for s in range(st_off[l], st_off[l + 1]):
            b = 3 * s
            r = (st_signs[b] * digits[st_links[b]]
                 + st_signs[b + 1] * digits[st_links[b + 1]]
                 + st_signs[b + 2] * digits[st_links[b + 2]])
            ds -= kappa * (cos_table[imod(new + r, n_group)] - cos_table[imod(old + r, n_group)])
        if ds <= 0.0 or unif[l] < exp(-ds):
            digits[l] = new
            n_acc += 1
    return n_acc
