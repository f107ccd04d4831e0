"""Margins, partitions, exponent functions and the exact laws of block maxima.

A model is a d-variate df

    F(t) = exp(-l(t)),   F_i(t) = exp(-sigma_i t^(-1/eta)),

where the exponent function ``l`` is homogeneous of order ``-1/eta``. The
copula is recovered through the canonical quantile path
``F_i^{-1}(u) = (-sigma_i / ln u)^eta``.

Every catalog exponent function is stored as a finite sum of logistic-type
components

    l(t) = sum_j ( sum_i (w_ji t_i^(-1/eta))^(1/g_j) )^(g_j),

with ``g_j`` in ``[0, 1]`` and ``g_j = 0`` read as a maximum. Product,
minimum, logistic, asymmetric logistic and the weighted geometric-mean
mixtures all have this form, so marginalising a coordinate (``t_i = +inf``)
is analytic: its term is dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import ModelError

T_MIN = 1e-300
T_MAX = 1e300
# stand-in for +inf when a generic (non-catalog) evaluator is marginalised
_INF_SUBSTITUTE = 1e300


@dataclass(frozen=True)
class MarginSpec:
    """Frechet margins ``F_i(t) = exp(-sigma_i t^(-1/eta))``."""

    sigma: tuple
    eta: float

    def __post_init__(self):
        sigma = tuple(float(s) for s in np.atleast_1d(self.sigma))
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "eta", float(self.eta))
        if len(sigma) < 1:
            raise ModelError("MarginSpec: dimension d must be >= 1")
        if not all(np.isfinite(s) and s > 0 for s in sigma):
            raise ModelError("MarginSpec: every sigma_i must be a positive finite real")
        if not (0.0 < self.eta <= 1.0):
            raise ModelError(f"MarginSpec: eta must lie in (0, 1], got {self.eta}")

    @classmethod
    def unit(cls, d, eta=1.0):
        return cls((1.0,) * d, eta)

    @property
    def d(self):
        return len(self.sigma)

    @property
    def sigma_array(self):
        return np.asarray(self.sigma)

    def subset(self, idx):
        return MarginSpec(tuple(self.sigma[i] for i in idx), self.eta)

    def cdf(self, x):
        """Apply F_i column-wise to an ``(n, d)`` array of positive reals."""
        x = np.asarray(x, dtype=float)
        return np.exp(-self.sigma_array * x ** (-1.0 / self.eta))

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return (-self.sigma_array / np.log(u)) ** self.eta


@dataclass(frozen=True)
class Partition:
    """Disjoint blocks covering ``{0, ..., d-1}`` (0-based internally).

    Blocks need not be contiguous.
    """

    d: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if self.d < 1:
            raise ModelError("Partition: d must be >= 1")
        if not blocks or any(len(b) == 0 for b in blocks):
            raise ModelError("Partition: blocks must be nonempty")
        flat = [i for b in blocks for i in b]
        if len(flat) != len(set(flat)):
            raise ModelError("Partition: blocks must be pairwise disjoint")
        if sorted(flat) != list(range(self.d)):
            raise ModelError(f"Partition: union of blocks must be {{1..{self.d}}}")

    @classmethod
    def singletons(cls, d):
        return cls(d, tuple((i,) for i in range(d)))

    @classmethod
    def whole(cls, d):
        return cls(d, (tuple(range(d)),))

    @classmethod
    def from_lists(cls, lists, d, one_based=True):
        off = 1 if one_based else 0
        try:
            return cls(d, tuple(tuple(int(i) - off for i in b) for b in lists))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"Partition: cannot read blocks {lists!r}") from exc

    @classmethod
    def parse(cls, text, d):
        """Parse the CLI syntax ``"1,2|3,4"`` (1-based, pipe-separated)."""
        try:
            lists = [[int(tok) for tok in part.split(",") if tok.strip()] for part in text.split("|")]
        except ValueError as exc:
            raise ModelError(f"Partition: cannot parse {text!r}") from exc
        return cls.from_lists(lists, d)

    @property
    def p(self):
        return len(self.blocks)

    @property
    def block_of(self):
        out = np.empty(self.d, dtype=np.int64)
        for j, b in enumerate(self.blocks):
            out[list(b)] = j
        return out

    def delta(self, i, j):
        return int(i in self.blocks[j])

    def union(self, *js):
        return tuple(sorted(i for j in js for i in self.blocks[j]))

    def to_lists(self, one_based=True):
        off = 1 if one_based else 0
        return [[i + off for i in b] for b in self.blocks]

    def __str__(self):
        return "|".join(",".join(str(i + 1) for i in b) for b in self.blocks)


class ExponentFunction:
    """Evaluable exponent function, homogeneous of order ``-1/eta``.

    Parameters
    ----------
    eta : float
        Tail exponent in ``(0, 1]``.
    weights : array_like, shape (r, d)
        Nonnegative component weights ``w_ji`` (already multiplied by the
        margin scales).
    dependence : array_like, shape (r,)
        Component dependence exponents ``g_j`` in ``[0, 1]``; 1 is
        independence, 0 is the comonotone maximum.
    kind : str
        Catalog tag, purely descriptive.
    """

    def __init__(self, eta, weights, dependence, kind="mixture", func=None, d=None):
        self.eta = float(eta)
        if not (0.0 < self.eta <= 1.0):
            raise ModelError(f"exponent function: eta must lie in (0, 1], got {eta}")
        self.kind = kind
        self._func = func
        if func is not None:
            self.d = int(d)
            self.weights = None
            self.dependence = None
            return
        w = np.array(weights, dtype=float, ndmin=2)
        g = np.array(dependence, dtype=float, ndmin=1)
        if w.shape[0] != g.shape[0]:
            raise ModelError("exponent function: weights and dependence disagree on r")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ModelError("exponent function: weights must be finite and nonnegative")
        if np.any((g < 0) | (g > 1)):
            raise ModelError("exponent function: component dependence must lie in [0, 1]")
        keep = w.sum(axis=1) > 0
        w, g = w[keep], g[keep]
        if w.shape[0] == 0:
            raise ModelError("exponent function: all components are degenerate")
        w.setflags(write=False)
        g.setflags(write=False)
        self.weights = w
        self.dependence = g
        self.d = w.shape[1]
        with np.errstate(divide="ignore"):
            self._logw = np.log(w)

    @classmethod
    def from_callable(cls, d, eta, func, kind="custom"):
        """Wrap a user function of a length-d vector ``t`` (no catalog structure).

        Marginalisation substitutes ``1e300`` for ``+inf``; values obtained
        that way are accurate to a relative tolerance of about ``1e-8``.
        """
        return cls(eta, None, None, kind=kind, func=func, d=d)

    @property
    def is_catalog(self):
        return self._func is None

    @property
    def r(self):
        return None if self.weights is None else self.weights.shape[0]

    @property
    def marginal_scales(self):
        """``s_i`` with ``l(inf, .., t_i, .., inf) = s_i t_i^(-1/eta)``."""
        if self.is_catalog:
            return self.weights.sum(axis=0)
        out = np.empty(self.d)
        for i in range(self.d):
            t = np.full(self.d, np.inf)
            t[i] = 1.0
            out[i] = self.log_eval(np.log(t))
        return np.exp(out)

    def log_eval(self, logt):
        """``log l`` at ``t = exp(logt)``; ``logt`` may contain ``+inf``."""
        logt = np.asarray(logt, dtype=float)
        if not self.is_catalog:
            t = np.exp(np.minimum(logt, np.log(_INF_SUBSTITUTE)))
            if t.ndim == 1:
                return np.log(float(self._func(t)))
            return np.log(np.array([float(self._func(row)) for row in t]))
        a = self._logw[:, None, :] - logt.reshape(1, -1, self.d) / self.eta
        comps = np.empty(a.shape[:2])
        with np.errstate(invalid="ignore", divide="ignore"):
            for j, g in enumerate(self.dependence):
                if g == 0.0:
                    comps[j] = a[j].max(axis=-1)
                else:
                    comps[j] = g * logsumexp(a[j] / g, axis=-1)
            out = logsumexp(comps, axis=0)
        return out[0] if logt.ndim == 1 else out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return np.exp(self.log_eval(np.log(t)))

    def restrict(self, idx):
        idx = list(idx)
        if not idx:
            raise ModelError("restrict: subset must be nonempty")
        if self.is_catalog:
            return ExponentFunction(self.eta, self.weights[:, idx], self.dependence, kind=self.kind)
        parent, d = self._func, self.d

        def sub(ts):
            full = np.full(d, _INF_SUBSTITUTE)
            full[idx] = ts
            return parent(full)

        return ExponentFunction.from_callable(len(idx), self.eta, sub, kind=self.kind)

    def __repr__(self):
        return f"ExponentFunction(kind={self.kind!r}, d={self.d}, eta={self.eta}, r={self.r})"


@dataclass(frozen=True)
class MaxStableModel:
    """Exponent function paired with its margin specification."""

    exponent: ExponentFunction
    margins: MarginSpec
    family: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.exponent.d != self.margins.d:
            raise ModelError(
                f"model: exponent dimension {self.exponent.d} != margin dimension {self.margins.d}"
            )
        if abs(self.exponent.eta - self.margins.eta) > 1e-15:
            raise ModelError("model: exponent and margins disagree on eta")

    @property
    def d(self):
        return self.margins.d

    @property
    def eta(self):
        return self.margins.eta

    @property
    def kind(self):
        return self.exponent.kind

    @property
    def margins_consistent(self):
        """True when the exponent's univariate margins equal the MarginSpec."""
        return bool(np.allclose(self.exponent.marginal_scales, self.margins.sigma_array, rtol=1e-12, atol=0))

    def with_margins(self, margins):
        return MaxStableModel(self.exponent, margins, self.family)

    def consistent(self):
        """Copy whose MarginSpec is read off the exponent's own margins."""
        return self.with_margins(MarginSpec(tuple(self.exponent.marginal_scales), self.eta))


def _check_t(model, t):
    t = np.asarray(t, dtype=float)
    if t.shape[-1] != model.d or t.ndim > 2:
        raise ModelError(f"expected a length-{model.d} vector, got shape {t.shape}")
    if np.any(np.isnan(t)) or np.any(t <= 0):
        raise ModelError("coordinates must be positive (or +inf)")
    fin = np.isfinite(t)
    if np.any(~fin.any(axis=-1)):
        raise ModelError("at least one coordinate must be finite")
    if np.any(fin & ((t < T_MIN) | (t > T_MAX))):
        raise ModelError(f"finite coordinates must lie in [{T_MIN:g}, {T_MAX:g}]")
    return t


def _check_u(model_d, u):
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != model_d or u.ndim > 2:
        raise ModelError(f"expected a length-{model_d} vector, got shape {u.shape}")
    if np.any(~((u > 0) & (u < 1))):
        raise ModelError("copula arguments must lie in the open interval (0, 1)")
    return u


def eval_exponent(model, t):
    """Exponent function ``l(t) = -ln F(t)``; coordinates may be ``+inf``."""
    t = _check_t(model, t)
    with np.errstate(divide="ignore"):
        out = np.exp(model.exponent.log_eval(np.log(t)))
    return float(out) if np.ndim(out) == 0 else out


def joint_cdf(model, t):
    t = _check_t(model, t)
    if np.any(~np.isfinite(t)):
        raise ModelError("joint_cdf needs finite coordinates")
    out = np.exp(-np.exp(model.exponent.log_eval(np.log(t))))
    return float(out) if np.ndim(out) == 0 else out


def _copula_logt(margins, u):
    # log F_i^{-1}(u) = eta * (log sigma_i - log(-log u))
    return margins.eta * (np.log(margins.sigma_array) - np.log(-np.log(u)))


def copula_eval(model, u):
    """Max-stable copula ``C(u) = exp(-l(F_1^{-1}(u_1), ..., F_d^{-1}(u_d)))``."""
    u = _check_u(model.d, u)
    out = np.exp(-np.exp(model.exponent.log_eval(_copula_logt(model.margins, u))))
    return float(out) if np.ndim(out) == 0 else out


def partition_maxima_cdf(model, partition, u):
    """Joint df of the block maxima ``M(I_j) = max_{i in I_j} F_i(X_i)``."""
    if partition.d != model.d:
        raise ModelError(f"partition dimension {partition.d} != model dimension {model.d}")
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != partition.p:
        raise ModelError(f"expected {partition.p} block levels, got {u.shape[-1]}")
    return copula_eval(model, u[..., partition.block_of])


def check_max_stability(model, u, s):
    if not s > 0:
        raise ModelError("max-stability exponent s must be positive")
    u = np.asarray(u, dtype=float)
    return float(abs(copula_eval(model, u ** s) - copula_eval(model, u) ** s))


def restrict(model, subset: Sequence[int]):
    """Sub-model on the 0-based index subset (the marginal law of ``X_A``)."""
    subset = list(subset)
    if not subset:
        raise ModelError("restrict: subset must be nonempty")
    if min(subset) < 0 or max(subset) >= model.d or len(set(subset)) != len(subset):
        raise ModelError(f"restrict: invalid subset {subset}")
    return MaxStableModel(model.exponent.restrict(subset), model.margins.subset(subset), model.family)


def custom_model(func: Callable, margins: MarginSpec, kind="custom"):
    return MaxStableModel(ExponentFunction.from_callable(margins.d, margins.eta, func, kind), margins)
