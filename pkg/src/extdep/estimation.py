"""Estimators: rank-based plug-in coefficients, Frechet ML fits and a Hill kappa.

The plug-in extremal dependence estimator inverts the moment identity,

    eps_hat = 1 / (1 - mean_l max_j max_{i in I_j} Fhat_i(X_i^(l))^lambda_j) - 1,

with ``Fhat_i`` the rescaled empirical df (rank / (n + 1)) by default.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from scipy.stats import rankdata

from . import _kernels
from .errors import ConfigError, ConvergenceError, DataError, ExtdepError
from .model import MarginSpec, Partition

MIN_ROWS = 20
MIN_ROWS_ML = 100
MIN_HILL_K = 50
BOOTSTRAP_RETRIES = 10


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    names: tuple = ()
    scale: str = "raw"

    def __post_init__(self):
        v = np.array(self.values, dtype=float, ndmin=2)
        object.__setattr__(self, "values", v)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i + 1}" for i in range(v.shape[1])))
        if v.shape[0] < MIN_ROWS:
            raise DataError(f"need at least {MIN_ROWS} observations, got {v.shape[0]}")
        if np.any(~np.isfinite(v)):
            raise DataError("data contains missing or non-finite values")
        if len(self.names) != v.shape[1]:
            raise DataError("column names do not match the number of columns")
        if self.scale == "uniform" and np.any((v <= 0) | (v >= 1)):
            raise DataError("uniform-scale data must lie strictly inside (0, 1)")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]


@dataclass
class EstimateResult:
    estimate: float
    se: float | None
    method: str
    tuning: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def to_dict(self):
        return {
            "estimate": self.estimate,
            "se": self.se,
            "method": self.method,
            "tuning": dict(self.tuning),
            "flags": list(self.flags),
        }


def _as_dataset(data):
    return data if isinstance(data, Dataset) else Dataset(data)


def empirical_margins(data):
    """Average ranks divided by ``n + 1``, column by column."""
    x = _as_dataset(data).values
    const = np.all(x == x[0], axis=0)
    if np.any(const):
        raise DataError(f"constant column(s) {list(np.flatnonzero(const) + 1)}: all ranks tied")
    return rankdata(x, method="average", axis=0) / (x.shape[0] + 1)


def _uniform(data, margins):
    """Pseudo-uniform matrix under the chosen margin estimator."""
    if margins is None:
        return empirical_margins(data)
    if isinstance(margins, str) and margins == "identity":
        return data.values
    if isinstance(margins, MarginSpec):
        if margins.d != data.d:
            raise DataError("margin spec dimension does not match data")
        if np.any(data.values <= 0):
            raise DataError("known Frechet margins need positive raw data")
        return margins.cdf(data.values)
    raise ConfigError(f"unknown margin estimator {margins!r}")


def _default_margins(data, margins):
    if margins is None and data.scale == "uniform":
        return "identity"
    return margins


def _margin_tag(margins):
    if margins is None:
        return "empirical"
    return margins if isinstance(margins, str) else "known"


def _eps_from_uniform(u, partition, lam):
    w, _ = _block_max_power(u, partition, lam)
    m = float(np.mean(w))
    if not m < 1.0:
        raise DataError("degenerate sample: mean block maximum equals 1")
    return m / (1.0 - m)


def _block_max_power(u, partition, lam):
    bm = _kernels.block_maxima(u, partition.block_of, partition.p)
    return _kernels.max_power(bm, np.asarray(lam, float)), bm


def _lam(lam, p):
    lam = np.ones(p) if lam is None else np.broadcast_to(np.asarray(lam, float), (p,)).copy()
    if np.any(~(lam > 0)) or np.any(~np.isfinite(lam)):
        raise ConfigError("lambda values must be positive and finite")
    return lam


def _check_partition(data, partition):
    if partition.d != data.d:
        raise DataError(f"partition covers d={partition.d} columns but data has {data.d}")


# --------------------------------------------------------------------------
# bootstrap
# --------------------------------------------------------------------------

def bootstrap_se(estimator, data, reps=200, seed=0, threads=1):
    """Standard deviation of ``estimator`` over nonparametric row resamples.

    ``estimator`` maps an ``(n, d)`` array to a float. A replicate whose
    estimator raises is redrawn from a fresh derived stream, at most 10 times.
    """
    if reps < 100:
        raise ConfigError(f"bootstrap needs reps >= 100, got {reps}")
    x = data.values if isinstance(data, Dataset) else np.asarray(data, float)
    n = x.shape[0]

    def replicate(b):
        last = None
        for attempt in range(BOOTSTRAP_RETRIES + 1):
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(b, attempt))))
            idx = rng.integers(0, n, n)
            try:
                return float(estimator(x[idx]))
            except (ExtdepError, ValueError, FloatingPointError, ZeroDivisionError) as exc:
                last = exc
        raise DataError(f"bootstrap replicate {b} failed {BOOTSTRAP_RETRIES + 1} times: {last}")

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(replicate, range(reps)))
    else:
        vals = [replicate(b) for b in range(reps)]
    return float(np.std(vals, ddof=1))


def _with_se(point, fn, data, reps, seed, threads):
    if not reps:
        return None
    return bootstrap_se(fn, data, reps, seed, threads)


def _tuning(reps, seed, margins, **extra):
    out = {"margins": _margin_tag(margins), "bootstrap_reps": int(reps or 0)}
    if reps:
        out["bootstrap_seed"] = int(seed)
    out.update(extra)
    return out


# --------------------------------------------------------------------------
# nonparametric plug-in estimators
# --------------------------------------------------------------------------

def estimate_epsilon_np(data, partition, lam=None, margins=None, reps=0, seed=0, threads=1):
    """Plug-in extremal dependence function among the blocks of ``partition``.

    ``margins`` selects ``Fhat``: ``None`` for the empirical df,
    ``"identity"`` for data already on the uniform scale, or a
    :class:`MarginSpec` for known Frechet margins.
    """
    data = _as_dataset(data)
    _check_partition(data, partition)
    margins = _default_margins(data, margins)
    lam = _lam(lam, partition.p)

    def fn(x):
        return _eps_from_uniform(_uniform(Dataset(x, data.names, data.scale), margins), partition, lam)

    point = fn(data.values)
    se = _with_se(point, fn, data, reps, seed, threads)
    return EstimateResult(point, se, "np", _tuning(reps, seed, margins, **{"lambda": lam.tolist(), "n": data.n, "denominator": "n+1"}))


def _sub_estimate(data, idx, lam, margins, reps, seed, threads):
    idx = list(idx)
    sub = Dataset(data.values[:, idx], tuple(data.names[i] for i in idx), data.scale)
    if isinstance(margins, MarginSpec):
        margins = margins.subset(idx)
    return estimate_epsilon_np(sub, Partition.whole(len(idx)), [lam], margins, reps, seed, threads)


def estimate_block_epsilon_np(data, partition, j, lam=1.0, margins=None, reps=0, seed=0, threads=1):
    data = _as_dataset(data)
    _check_partition(data, partition)
    return _sub_estimate(data, partition.blocks[j], lam, _default_margins(data, margins), reps, seed, threads)


def _chi_from_uniform(u, partition, j, k):
    ej = _eps_from_uniform(u[:, list(partition.blocks[j])], Partition.whole(len(partition.blocks[j])), [1.0])
    ek = _eps_from_uniform(u[:, list(partition.blocks[k])], Partition.whole(len(partition.blocks[k])), [1.0])
    union = list(partition.blocks[j]) + list(partition.blocks[k])
    ejk = _eps_from_uniform(u[:, union], Partition.whole(len(union)), [1.0])
    return ej + ek - ejk, ej, ek


def estimate_chi_np(data, partition, j, k, margins=None, reps=0, seed=0, threads=1):
    """Plug-in tail dependence coefficient of blocks ``j`` and ``k``.

    The raw estimate is returned; values outside
    ``[-0.05, min(eps_j, eps_k) + 0.05]`` are flagged and the clipped value is
    recorded in the tuning record.
    """
    if j == k:
        raise ConfigError("chi needs two distinct blocks")
    data = _as_dataset(data)
    _check_partition(data, partition)
    margins = _default_margins(data, margins)

    def fn(x):
        return _chi_from_uniform(_uniform(Dataset(x, data.names, data.scale), margins), partition, j, k)[0]

    chi, ej, ek = _chi_from_uniform(_uniform(data, margins), partition, j, k)
    se = _with_se(chi, fn, data, reps, seed, threads)
    upper = min(ej, ek)
    flags = []
    if chi < -0.05 or chi > upper + 0.05:
        flags.append(f"chi estimate {chi:.6g} outside [-0.05, {upper + 0.05:.6g}]")
    tuning = _tuning(reps, seed, margins, blocks=[j + 1, k + 1], epsilon_j=ej, epsilon_k=ek,
                     clipped=float(np.clip(chi, 0.0, upper)))
    return EstimateResult(chi, se, "np", tuning, flags)


def _nu_from_uniform(u, partition, lam):
    e = _eps_from_uniform(u, partition, lam)
    parts = []
    for j, b in enumerate(partition.blocks):
        ej = _eps_from_uniform(u[:, list(b)], Partition.whole(len(b)), [lam[j]])
        parts.append(ej / (1 + ej))
    return e / (1 + e) - float(np.mean(parts))


def estimate_nu_np(data, partition, lam=None, margins=None, reps=0, seed=0, threads=1):
    data = _as_dataset(data)
    _check_partition(data, partition)
    margins = _default_margins(data, margins)
    lam = _lam(lam, partition.p)

    def fn(x):
        return _nu_from_uniform(_uniform(Dataset(x, data.names, data.scale), margins), partition, lam)

    point = fn(data.values)
    se = _with_se(point, fn, data, reps, seed, threads)
    return EstimateResult(point, se, "np", _tuning(reps, seed, margins, **{"lambda": lam.tolist()}))


# --------------------------------------------------------------------------
# maximum likelihood
# --------------------------------------------------------------------------

@dataclass
class FrechetFit:
    sigma: np.ndarray
    eta: float | np.ndarray
    se_sigma: np.ndarray
    se_eta: float | np.ndarray
    loglik: float
    iterations: int
    shared_eta: bool = True

    def margins(self):
        if not self.shared_eta:
            raise ValueError("per-column eta fits do not form a single MarginSpec")
        return MarginSpec(tuple(self.sigma), self.eta)

    def to_dict(self):
        return {
            "sigma": np.atleast_1d(self.sigma).tolist(),
            "eta": np.atleast_1d(self.eta).tolist() if not self.shared_eta else float(self.eta),
            "se_sigma": np.atleast_1d(self.se_sigma).tolist(),
            "se_eta": np.atleast_1d(self.se_eta).tolist() if not self.shared_eta else float(self.se_eta),
            "loglik": self.loglik,
            "iterations": self.iterations,
            "shared_eta": self.shared_eta,
        }


def _profile(y, a):
    """Profile log-likelihood pieces in the shape ``a = 1/eta``.

    ``y`` holds log-data, shape (n, m). Returns (loglik, gradient, hessian,
    log sigma_hat, weighted first/second moments of y).
    """
    n, m = y.shape
    z = -a * y
    lse = logsumexp(z, axis=0)
    w = np.exp(z - lse)
    m1 = np.sum(w * y, axis=0)
    m2 = np.sum(w * y * y, axis=0)
    log_sigma = math.log(n) - lse
    ll = float(np.sum(n * log_sigma + n * math.log(a) - (a + 1) * y.sum(axis=0) - n))
    grad = float(np.sum(n / a - y.sum(axis=0) + n * m1))
    hess = float(np.sum(-n / a**2 - n * (m2 - m1**2)))
    return ll, grad, hess, log_sigma, m1, m2


def fit_frechet_margin(x, shared_eta=True, tol=1e-10, max_iter=200):
    """ML fit of ``F(t) = exp(-sigma t^(-1/eta))`` to each column.

    With ``shared_eta`` one tail exponent is fitted jointly for all columns
    and each column gets its own scale. Newton iterations run on the profile
    likelihood in ``1/eta`` until the per-observation gradient falls to
    ``tol``.
    """
    x = np.array(x, dtype=float, ndmin=1)
    if x.ndim == 1:
        x = x[:, None]
    n, m = x.shape
    if n < MIN_ROWS_ML:
        raise DataError(f"ML margin fit needs at least {MIN_ROWS_ML} observations, got {n}")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DataError("ML margin fit needs positive finite raw data")
    if np.any(np.all(x == x[0], axis=0)):
        raise DataError("ML margin fit: constant column")
    if not shared_eta and m > 1:
        fits = [fit_frechet_margin(x[:, i], True, tol, max_iter) for i in range(m)]
        return FrechetFit(
            np.array([float(f.sigma[0]) for f in fits]),
            np.array([f.eta for f in fits]),
            np.array([float(f.se_sigma[0]) for f in fits]),
            np.array([f.se_eta for f in fits]),
            float(sum(f.loglik for f in fits)),
            max(f.iterations for f in fits),
            shared_eta=False,
        )

    y = np.log(x)
    # Frechet log-data are Gumbel with standard deviation pi / (sqrt(6) a)
    sd = float(np.mean(np.std(y, axis=0)))
    a = math.pi / (math.sqrt(6.0) * sd)
    ll, g, h, *_ = _profile(y, a)
    scale = n * m
    it = 0
    while abs(g) / scale > tol:
        if it >= max_iter:
            raise ConvergenceError(f"ML margin fit did not converge in {max_iter} iterations")
        it += 1
        step = -g / h if h < 0 else math.copysign(0.5 * a, g)
        while True:
            a_new = a + step
            if a_new > 0:
                ll_new, g_new, h_new, *_ = _profile(y, a_new)
                if ll_new >= ll - 1e-12 * abs(ll):
                    break
            step *= 0.5
            if abs(step) < 1e-15 * a:
                raise ConvergenceError("ML margin fit: line search failed")
        a, ll, g, h = a_new, ll_new, g_new, h_new

    _, _, _, log_sigma, m1, m2 = _profile(y, a)
    sigma = np.exp(log_sigma)
    # observed information in (sigma_1..sigma_m, a)
    info = np.zeros((m + 1, m + 1))
    info[np.arange(m), np.arange(m)] = n / sigma**2
    info[:m, m] = info[m, :m] = -(n / sigma) * m1
    info[m, m] = np.sum(n / a**2 + n * m2)
    cov = np.linalg.inv(info)
    se = np.sqrt(np.diag(cov))
    eta = 1.0 / a
    return FrechetFit(sigma, eta, se[:m], se[m] / a**2, ll, it)


def estimate_epsilon_ml(data, partition, j=None, fit=None, reps=0, seed=0, threads=1):
    """ML estimate of ``eps`` for block ``j``, a pair ``(j, k)`` or all blocks (``None``).

    Uses ``P(max_{i in A} X_i / sigma_i^eta <= t) = exp(-eps_A(1) t^(-1/eta))``:
    margins are fitted first (shared eta), then the Frechet scale of the
    rescaled block maximum is fitted with the shape held at ``1/eta_hat``.
    """
    data = _as_dataset(data)
    _check_partition(data, partition)
    if data.scale != "raw":
        raise DataError("ML estimation needs positive raw-scale data")
    if j is None:
        idx = list(range(data.d))
    elif isinstance(j, (tuple, list)):
        idx = list(partition.union(*j))
    else:
        idx = list(partition.blocks[j])

    def fn(x, f=None):
        f = f or fit_frechet_margin(x, shared_eta=True)
        logt = np.max(np.log(x[:, idx]) - f.eta * np.log(f.sigma[idx]), axis=1)
        # scale MLE with known shape: n / sum T^(-1/eta)
        return math.exp(math.log(x.shape[0]) - logsumexp(-logt / f.eta))

    f = fit or fit_frechet_margin(data.values, shared_eta=True)
    point = fn(data.values, f)
    se = _with_se(point, fn, data, reps, seed, threads)
    tuning = {
        "blocks": "all" if j is None else ([b + 1 for b in j] if isinstance(j, (tuple, list)) else [j + 1]),
        "structure": "max_i X_i / sigma_i^eta",
        "eta_hat": float(f.eta),
        "sigma_hat": f.sigma.tolist(),
        "bootstrap_reps": int(reps or 0),
    }
    if reps:
        tuning["bootstrap_seed"] = int(seed)
    return EstimateResult(point, se, "ml", tuning)


# --------------------------------------------------------------------------
# Hill estimator of kappa
# --------------------------------------------------------------------------

def default_k(n):
    return int(math.ceil(2.0 * math.sqrt(n)))


def _hill_curve(log_t_desc, ks):
    cs = np.cumsum(log_t_desc)
    ks = np.asarray(ks, dtype=int)
    return cs[ks - 1] / ks - log_t_desc[ks]


def _pair_tail(data, partition, j, k, margins):
    u = _uniform(data, margins)
    bm = _kernels.block_maxima(u, partition.block_of, partition.p)
    t = _kernels.min_pair_tail(bm, j, k)
    return np.sort(np.log(t))[::-1]


def _check_k(k, n):
    if k < MIN_HILL_K:
        raise ConfigError(f"Hill k={k} is too small (minimum {MIN_HILL_K})")
    if k >= n / 2:
        raise ConfigError(f"Hill k={k} is too large for n={n} (need k < n/2)")


def estimate_kappa_hill(data, partition, j, k, top_k=None, margins=None, reps=0, seed=0, threads=1):
    """Hill estimate of the block coefficient of asymptotic tail independence.

    Forms ``T = 1 / (1 - min(M_j, M_k))`` from the block maxima of the
    (pseudo-)uniform margins; ``P(T > t) = t^(-1/kappa) L(t)``, so the Hill
    estimate of the tail index of ``T`` over the ``top_k`` largest values
    estimates kappa.
    """
    if j == k:
        raise ConfigError("kappa needs two distinct blocks")
    data = _as_dataset(data)
    _check_partition(data, partition)
    margins = _default_margins(data, margins)
    top_k = default_k(data.n) if top_k is None else int(top_k)
    _check_k(top_k, data.n)

    def fn(x):
        lt = _pair_tail(Dataset(x, data.names, data.scale), partition, j, k, margins)
        return float(_hill_curve(lt, [top_k])[0])

    point = fn(data.values)
    se = _with_se(point, fn, data, reps, seed, threads)
    tuning = _tuning(reps, seed, margins, k=top_k, blocks=[j + 1, k + 1], n=data.n)
    return EstimateResult(point, se, "hill", tuning)


def kappa_stability_curve(data, partition, j, k, ks=None, margins=None):
    """Hill estimates over a grid of ``k``; returns ``(ks, kappa_hat)``."""
    data = _as_dataset(data)
    _check_partition(data, partition)
    margins = _default_margins(data, margins)
    n = data.n
    if ks is None:
        hi = max(MIN_HILL_K + 1, (n - 1) // 2)
        ks = np.unique(np.geomspace(MIN_HILL_K, hi, 40).astype(int))
    ks = np.asarray(ks, dtype=int)
    for kk in (ks.min(), ks.max()):
        _check_k(int(kk), n)
    lt = _pair_tail(data, partition, j, k, margins)
    return ks, _hill_curve(lt, ks)
