"""Pure-Python kernels: reference implementation of the hot loops.

The compiled Cython module (`_core`) mirrors these functions exactly; both
perform the same sequence of IEEE double operations so trajectories and
hashes are bitwise identical across backends.
"""

from __future__ import annotations

BACKEND = "pure"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def admittance_run(coeffs, e0: float, v0: float, f: float, n: int):
    """Advance (e, v) by n zero-order-hold steps under constant force f.

    coeffs is the per-axis affine update (a11, a12, a21, a22, b1, b2):
    e' = a11*e + a12*v + b1*f ; v' = a21*e + a22*v + b2*f.
    """
    a11, a12, a21, a22, b1, b2 = coeffs
    e = e0
    v = v0
    for _ in range(n):
        e_new = a11 * e + a12 * v + b1 * f
        v = a21 * e + a22 * v + b2 * f
        e = e_new
    return e, v


def admittance_settle(coeffs, e0: float, v0: float, threshold: float, max_steps: int):
    """Step until |e| < threshold; returns (steps_taken or -1, e, v).

    steps_taken counts updates applied before the first sub-threshold |e|
    (0 if already below). -1 means the budget ran out.
    """
    a11, a12, a21, a22, b1, b2 = coeffs
    e = e0
    v = v0
    if abs(e) < threshold:
        return 0, e, v
    for i in range(1, max_steps + 1):
        e_new = a11 * e + a12 * v
        v = a21 * e + a22 * v
        e = e_new
        if abs(e) < threshold:
            return i, e, v
    return -1, e, v


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a over a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h
