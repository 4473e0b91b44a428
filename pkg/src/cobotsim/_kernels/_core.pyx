# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors _pure.py operation-for-operation; compiled with
-ffp-contract=off so results stay bitwise identical to the pure backend."""

BACKEND = "compiled"

cdef extern from "math.h":
    double fabs(double x) nogil


def admittance_run(coeffs, double e0, double v0, double f, long n):
    cdef double a11, a12, a21, a22, b1, b2
    a11, a12, a21, a22, b1, b2 = coeffs
    cdef double e = e0
    cdef double v = v0
    cdef double e_new
    cdef long i
    for i in range(n):
        e_new = a11 * e + a12 * v + b1 * f
        v = a21 * e + a22 * v + b2 * f
        e = e_new
    return e, v


def admittance_settle(coeffs, double e0, double v0, double threshold, long max_steps):
    cdef double a11, a12, a21, a22, b1, b2
    a11, a12, a21, a22, b1, b2 = coeffs
    cdef double e = e0
    cdef double v = v0
    cdef double e_new
    cdef long i
    if fabs(e) < threshold:
        return 0, e, v
    for i in range(1, max_steps + 1):
        e_new = a11 * e + a12 * v
        v = a21 * e + a22 * v
        e = e_new
        if fabs(e) < threshold:
            return i, e, v
    return -1, e, v


def fnv1a64(data: bytes) -> int:
    cdef unsigned long long h = 0xCBF29CE484222325ULL
    cdef unsigned long long prime = 0x100000001B3ULL
    cdef const unsigned char[:] view = data
    cdef Py_ssize_t i
    cdef Py_ssize_t n = view.shape[0]
    for i in range(n):
        h = (h ^ view[i]) * prime
    return h
