"""Parametric max-stable families built from a mixture of MEV copulas.

The mixture copula with weights ``beta_ji`` (columns summing to one),
exponents ``alpha_j`` and max-stable components ``C_j`` has exponent function

    l(t) = sum_j ( -ln C_j(exp(-(beta_j1 sigma_1 t_1^(-1/eta))^(eta/alpha_j)), ...) )^(alpha_j/eta).

For the component catalog {product, minimum, logistic(theta)} each summand
collapses to a logistic-type term with dependence exponent
``(alpha_j/eta) * theta_j`` (theta = 1 for product, 0 for minimum), which is
how the families are stored (see :class:`~extdep.model.ExponentFunction`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError, UnknownComponentError
from .model import ExponentFunction, MarginSpec, MaxStableModel, Partition, copula_eval

COMPONENT_KINDS = ("product", "minimum", "logistic")


@dataclass(frozen=True)
class CopulaComponent:
    kind: str
    theta: float = 1.0

    def __post_init__(self):
        if self.kind not in COMPONENT_KINDS:
            raise UnknownComponentError(f"unknown component copula {self.kind!r}; catalog is {COMPONENT_KINDS}")
        if self.kind == "logistic" and not (0.0 < self.theta <= 1.0):
            raise ModelError(f"logistic component needs theta in (0, 1], got {self.theta}")

    @property
    def dependence(self):
        return {"product": 1.0, "minimum": 0.0}.get(self.kind, self.theta)


def _as_component(c):
    if isinstance(c, CopulaComponent):
        return c
    if isinstance(c, str):
        return CopulaComponent(c)
    kind, theta = c
    return CopulaComponent(kind, float(theta))


@dataclass(frozen=True)
class MixtureModelSpec:
    beta: np.ndarray
    alpha: tuple
    components: tuple
    margins: MarginSpec
    family: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float, ndmin=2)
        alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        comps = tuple(_as_component(c) for c in self.components)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "components", comps)
        r, d = beta.shape
        if not (len(alpha) == len(comps) == r):
            raise ModelError("mixture: beta rows, alpha and components must all have length r")
        if d != self.margins.d:
            raise ModelError(f"mixture: beta has {d} columns but margins have d={self.margins.d}")
        if np.any(beta < 0) or np.any(~np.isfinite(beta)):
            raise ModelError("mixture: weights beta_ji must be nonnegative")
        colsum = beta.sum(axis=0)
        if np.any(np.abs(colsum - 1.0) > 1e-12):
            raise ModelError(f"mixture: weights must sum to 1 over components for every i, got {colsum}")
        eta = self.margins.eta
        for a in alpha:
            if not (0.0 < a <= eta * (1 + 1e-15)):
                raise ModelError(f"mixture: need 0 < alpha_j <= eta={eta}, got alpha_j={a}")

    @property
    def r(self):
        return self.beta.shape[0]

    @property
    def dependence(self):
        eta = self.margins.eta
        return np.array([min(a / eta, 1.0) * c.dependence for a, c in zip(self.alpha, self.components)])


def _margins(d, eta, sigma):
    if sigma is None:
        sigma = (1.0,) * d
    m = MarginSpec(tuple(np.broadcast_to(np.asarray(sigma, float), (d,))), eta)
    return m


def _theta(alpha, eta):
    if not (0.0 < alpha <= eta * (1 + 1e-15)):
        raise ModelError(f"need 0 < alpha <= eta, got alpha={alpha}, eta={eta}")
    return min(alpha / eta, 1.0)


def make_mixture(spec: MixtureModelSpec) -> MaxStableModel:
    weights = spec.beta * spec.margins.sigma_array[None, :]
    fam = spec.family or {
        "kind": "mixture",
        "components": [
            {"copula": c.kind, **({"theta": c.theta} if c.kind == "logistic" else {}), "alpha": a, "beta": list(b)}
            for c, a, b in zip(spec.components, spec.alpha, spec.beta.tolist())
        ],
    }
    return MaxStableModel(ExponentFunction(spec.margins.eta, weights, spec.dependence, kind="mixture"), spec.margins, fam)


def make_independence(d, eta=1.0, sigma=None):
    m = _margins(d, eta, sigma)
    return MaxStableModel(ExponentFunction(eta, m.sigma_array[None, :], [1.0], kind="independence"), m, {"kind": "independence"})


def make_comonotone(d, eta=1.0, sigma=None):
    m = _margins(d, eta, sigma)
    return MaxStableModel(ExponentFunction(eta, m.sigma_array[None, :], [0.0], kind="comonotone"), m, {"kind": "comonotone"})


def make_logistic(d, alpha, eta=1.0, sigma=None):
    """Symmetric logistic: ``l(t) = (sum sigma_i^(eta/alpha) t_i^(-1/alpha))^(alpha/eta)``."""
    m = _margins(d, eta, sigma)
    th = _theta(alpha, eta)
    return MaxStableModel(
        ExponentFunction(eta, m.sigma_array[None, :], [th], kind="logistic"), m, {"kind": "logistic", "alpha": float(alpha)}
    )


def make_asymmetric_logistic(beta, alpha, eta=1.0, sigma=None):
    """Logistic exponent with scales ``beta_i * sigma_i``.

    The returned model keeps ``sigma`` as its nominal MarginSpec, so the
    coefficients evaluate to ``(sum beta_i^(eta/alpha))^(alpha/eta)`` and
    friends. The exponent's own univariate scales are ``beta_i sigma_i``; use
    ``model.consistent()`` for the version whose margins match them (which
    has the same copula as the symmetric logistic).
    """
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 1 or np.any(~(beta > 0)):
        raise ModelError("asymmetric logistic: every beta_i must be positive")
    d = beta.size
    m = _margins(d, eta, sigma)
    th = _theta(alpha, eta)
    return MaxStableModel(
        ExponentFunction(eta, (beta * m.sigma_array)[None, :], [th], kind="asym_logistic"),
        m,
        {"kind": "asym_logistic", "alpha": float(alpha), "beta": beta.tolist()},
    )


def make_min_product_mixture(beta1, alpha, eta=1.0, sigma=None, d=2):
    """Weighted geometric mean of the minimum copula and a logistic.

    ``l(t) = beta1 max_i sigma_i t_i^(-1/eta)
           + (1 - beta1) (sum_i (sigma_i t_i^(-1/eta))^(eta/alpha))^(alpha/eta)``.
    Boundary weights 0 and 1 are accepted; the empty component is dropped.
    """
    if not (0.0 <= beta1 <= 1.0):
        raise ModelError(f"min-product mixture: beta1 must lie in [0, 1], got {beta1}")
    m = _margins(d, eta, sigma)
    th = _theta(alpha, eta)
    s = m.sigma_array
    weights = np.vstack([beta1 * s, (1.0 - beta1) * s])
    return MaxStableModel(
        ExponentFunction(eta, weights, [0.0, th], kind="min_product"),
        m,
        {"kind": "min_product", "beta1": float(beta1), "alpha": float(alpha)},
    )


@dataclass(frozen=True)
class InvertedMevSpec:
    generator: MaxStableModel
    margins: MarginSpec = None

    def __post_init__(self):
        if self.margins is None:
            object.__setattr__(self, "margins", self.generator.margins)
        if self.margins.d != self.generator.d:
            raise ModelError("inverted MEV: generator dimension does not match margins")


class InvertedMev:
    """Inverted MEV model: survival copula ``Cbar(u) = C_Y(1 - u)``.

    ``C_Y`` is the copula of the generator. For a pair this gives
    ``P(U_i > 1 - 1/t, U_j > 1 - 1/t) = t^(-l_Y(sigma_i^eta, sigma_j^eta))``
    exactly, with ``sigma``/``eta`` the generator's margins.
    """

    def __init__(self, spec: InvertedMevSpec):
        self.spec = spec
        self.generator = spec.generator
        self.margins = spec.margins
        self.family = {"kind": "inverted", "generator": self.generator.family}

    @property
    def d(self):
        return self.generator.d

    @property
    def eta(self):
        return self.margins.eta

    @property
    def kind(self):
        return "inverted"

    def survival_copula(self, u):
        u = np.asarray(u, dtype=float)
        return copula_eval(self.generator, 1.0 - u)

    def tail_exponent(self, subset):
        """``l_{Y_A}(sigma_A^eta)``, the decay rate of the joint survival of ``A``."""
        from .coefficients import epsilon_subset

        return epsilon_subset(self.generator, subset)

    def joint_survival(self, t, subset):
        """``P(U_i > 1 - 1/t for all i in subset) = t^(-l_{Y_A}(sigma_A^eta))``."""
        return float(t) ** (-self.tail_exponent(subset))


def make_inverted_mev(spec: InvertedMevSpec) -> InvertedMev:
    return InvertedMev(spec)


# ---------------------------------------------------------------------------
# closed forms for the three worked families
# ids: 1 symmetric logistic, 2 asymmetric logistic, 3 min-product mixture
# ---------------------------------------------------------------------------

def _example_block_fn(example_id, params, d):
    th = _theta(params["alpha"], params.get("eta", 1.0))
    if example_id == 1:
        return lambda idx: float(len(idx)) ** th
    if example_id == 2:
        beta = np.asarray(params["beta"], dtype=float)
        if beta.size != d:
            raise ModelError("asymmetric logistic closed form: beta must have one entry per coordinate")
        return lambda idx: float(np.sum(beta[list(idx)] ** (1.0 / th)) ** th)
    if example_id == 3:
        b1 = float(params["beta1"])
        return lambda idx: b1 + (1.0 - b1) * float(len(idx)) ** th
    raise ModelError(f"unknown example id {example_id!r}; expected 1, 2 or 3")


def closed_form_coefficients(example_id, params, partition: Partition):
    """Coefficients at unit levels, straight from the examples' closed forms.

    Returns a dict with ``epsilon_joint``, ``epsilon_blocks``,
    ``epsilon_pairs`` and ``chi_pairs`` (keyed by 0-based ``(j, k)``), and
    ``nu``.
    """
    f = _example_block_fn(example_id, params, partition.d)
    blocks = partition.blocks
    eps_joint = f(range(partition.d))
    eps_blocks = [f(b) for b in blocks]
    eps_pairs, chi_pairs = {}, {}
    for j in range(partition.p):
        for k in range(j + 1, partition.p):
            e = f(blocks[j] + blocks[k])
            eps_pairs[(j, k)] = e
            if example_id == 3:
                b1 = float(params["beta1"])
                th = _theta(params["alpha"], params.get("eta", 1.0))
                nj, nk = float(len(blocks[j])), float(len(blocks[k]))
                chi = b1 * (1 - nj**th - nk**th + (nj + nk) ** th) + nj**th + nk**th - (nj + nk) ** th
            else:
                chi = eps_blocks[j] + eps_blocks[k] - e
            chi_pairs[(j, k)] = chi
    nu = eps_joint / (1 + eps_joint) - float(np.mean([e / (1 + e) for e in eps_blocks]))
    return {
        "epsilon_joint": eps_joint,
        "epsilon_blocks": eps_blocks,
        "epsilon_pairs": eps_pairs,
        "chi_pairs": chi_pairs,
        "nu": nu,
    }


def example_model(example_id, params, d, sigma=None):
    """Build the model whose coefficients ``closed_form_coefficients`` describes."""
    eta = params.get("eta", 1.0)
    if example_id == 1:
        return make_logistic(d, params["alpha"], eta, sigma)
    if example_id == 2:
        return make_asymmetric_logistic(params["beta"], params["alpha"], eta, sigma)
    if example_id == 3:
        return make_min_product_mixture(params["beta1"], params["alpha"], eta, sigma, d)
    raise ModelError(f"unknown example id {example_id!r}; expected 1, 2 or 3")
