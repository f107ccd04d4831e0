"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``EXTDEP_DISABLE_NUMBA`` is unset or ``0``. Both paths evaluate the
same formulas; results agree to rounding (not bit-for-bit, since libm and
numba's intrinsics may differ in the last ulp).
"""

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def _flag_disabled():
    return os.environ.get("EXTDEP_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and not _flag_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def positive_stable_np(theta, u, e):
    """Kanter's representation of a positive stable variable.

    With ``u ~ Uniform(0, pi)`` and ``e ~ Exp(1)``,

        S = sin(theta u)/sin(u)^(1/theta) * (sin((1-theta) u)/e)^((1-theta)/theta)

    has Laplace transform exp(-s^theta) (Kanter 1975; Chambers, Mallows and
    Stuck 1976 for the general stable case).
    """
    if theta == 1.0:
        return np.ones_like(u)
    a = np.sin(theta * u) / np.sin(u) ** (1.0 / theta)
    b = (np.sin((1.0 - theta) * u) / e) ** ((1.0 - theta) / theta)
    return a * b


def logistic_frechet_np(s, e, gamma):
    # Z_i = (S / E_i)^gamma has exponent (sum z_i^(-1/gamma))^gamma
    return (s[:, None] / e) ** gamma


def block_maxima_np(u, block_of, p):
    n = u.shape[0]
    out = np.empty((n, p))
    for j in range(p):
        out[:, j] = u[:, block_of == j].max(axis=1)
    return out


def max_power_np(bm, lam):
    return (bm ** lam[None, :]).max(axis=1)


def min_pair_tail_np(bm, j, k):
    # T = 1 / (1 - min(M_j, M_k)); 1 - min(a, b) = max(1 - a, 1 - b)
    return 1.0 / np.maximum(1.0 - bm[:, j], 1.0 - bm[:, k])


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def positive_stable_nb(theta, u, e):
        n = u.shape[0]
        out = np.empty(n)
        if theta == 1.0:
            out[:] = 1.0
            return out
        inv = 1.0 / theta
        q = (1.0 - theta) / theta
        for i in range(n):
            ui = u[i]
            a = np.sin(theta * ui) / np.sin(ui) ** inv
            out[i] = a * (np.sin((1.0 - theta) * ui) / e[i]) ** q
        return out

    @numba.njit(cache=True, nogil=True)
    def logistic_frechet_nb(s, e, gamma):
        n, d = e.shape
        out = np.empty((n, d))
        for i in range(n):
            si = s[i]
            for k in range(d):
                out[i, k] = (si / e[i, k]) ** gamma
        return out

    @numba.njit(cache=True, nogil=True)
    def block_maxima_nb(u, block_of, p):
        n, d = u.shape
        out = np.full((n, p), -np.inf)
        for i in range(n):
            for k in range(d):
                j = block_of[k]
                v = u[i, k]
                if v > out[i, j]:
                    out[i, j] = v
        return out

    @numba.njit(cache=True, nogil=True)
    def max_power_nb(bm, lam):
        n, p = bm.shape
        out = np.empty(n)
        for i in range(n):
            m = -np.inf
            for j in range(p):
                v = bm[i, j] ** lam[j]
                if v > m:
                    m = v
            out[i] = m
        return out

    @numba.njit(cache=True, nogil=True)
    def min_pair_tail_nb(bm, j, k):
        n = bm.shape[0]
        out = np.empty(n)
        for i in range(n):
            a = 1.0 - bm[i, j]
            b = 1.0 - bm[i, k]
            out[i] = 1.0 / (a if a > b else b)
        return out


NUMPY_IMPL = {
    "positive_stable": positive_stable_np,
    "logistic_frechet": logistic_frechet_np,
    "block_maxima": block_maxima_np,
    "max_power": max_power_np,
    "min_pair_tail": min_pair_tail_np,
}

NUMBA_IMPL = (
    {
        "positive_stable": positive_stable_nb,
        "logistic_frechet": logistic_frechet_nb,
        "block_maxima": block_maxima_nb,
        "max_power": max_power_nb,
        "min_pair_tail": min_pair_tail_nb,
    }
    if HAVE_NUMBA
    else {}
)

_ACTIVE = NUMBA_IMPL if USE_NUMBA else NUMPY_IMPL


def positive_stable(theta, u, e):
    return _ACTIVE["positive_stable"](float(theta), np.ascontiguousarray(u, float), np.ascontiguousarray(e, float))


def logistic_frechet(s, e, gamma):
    return _ACTIVE["logistic_frechet"](np.ascontiguousarray(s, float), np.ascontiguousarray(e, float), float(gamma))


def block_maxima(u, block_of, p):
    return _ACTIVE["block_maxima"](np.ascontiguousarray(u, float), np.ascontiguousarray(block_of, np.int64), int(p))


def max_power(bm, lam):
    return _ACTIVE["max_power"](np.ascontiguousarray(bm, float), np.ascontiguousarray(lam, float))


def min_pair_tail(bm, j, k):
    return _ACTIVE["min_pair_tail"](np.ascontiguousarray(bm, float), int(j), int(k))
