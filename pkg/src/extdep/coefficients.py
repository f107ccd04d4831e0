"""Extremal dependence coefficients of block-partitioned max-stable vectors.

Everything is evaluated through the exponent function: the extremal
dependence function at ``lambda`` is ``l`` at ``t_i = (sigma_i lambda_j(i))^eta``
(no numerical integration). The moment identity
``E(max_j M(I_j)^lambda_j) = eps / (1 + eps)`` is only used as a Monte Carlo
cross-check elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError
from .families import InvertedMev
from .model import MaxStableModel, Partition

MAX_REPORT_BLOCKS = 32
INDEPENDENCE_TOL = 1e-12


def _lambda(lam, p):
    if lam is None:
        return np.ones(p)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (p,)).copy()
    if np.any(~np.isfinite(lam)) or np.any(lam <= 0):
        raise ModelError("lambda values must be positive and finite")
    return lam


def _check(model, partition):
    if partition.d != model.d:
        raise ModelError(f"partition dimension {partition.d} != model dimension {model.d}")


def _eps_at(model, idx, levels):
    """``l_{X_A}`` at ``t_i = (sigma_i level_i)^eta`` for ``i`` in ``idx``."""
    idx = list(idx)
    m = model.margins
    logt = np.full(model.d, np.inf)
    logt[idx] = m.eta * (np.log(m.sigma_array[idx]) + np.log(np.asarray(levels, dtype=float)))
    return float(np.exp(model.exponent.log_eval(logt)))


def epsilon(model: MaxStableModel, partition: Partition, lam=None):
    """Extremal dependence function among the blocks of ``partition``."""
    _check(model, partition)
    lam = _lambda(lam, partition.p)
    return _eps_at(model, range(model.d), lam[partition.block_of])


def epsilon_subset(model, subset, lam=1.0):
    """Extremal dependence function of the single block ``subset`` at level ``lam``."""
    subset = list(subset)
    if not subset:
        raise ModelError("subset must be nonempty")
    return _eps_at(model, subset, np.full(len(subset), float(lam)))


def epsilon_block(model, partition, j, lam=1.0):
    _check(model, partition)
    return epsilon_subset(model, partition.blocks[j], lam)


def epsilon_pair(model, partition, j, k, lam_j=1.0, lam_k=1.0):
    """Extremal dependence function of blocks ``j`` and ``k`` jointly."""
    _check(model, partition)
    if j == k:
        raise ModelError("block pair needs j != k")
    bj, bk = partition.blocks[j], partition.blocks[k]
    idx = list(bj) + list(bk)
    levels = [lam_j] * len(bj) + [lam_k] * len(bk)
    return _eps_at(model, idx, levels)


def moment_e(model, partition, lam=None):
    """``E(max_j M(I_j)^lambda_j)``, in ``(0, 1)``."""
    e = epsilon(model, partition, lam)
    return e / (1.0 + e)


def madogram_nu(model, partition, lam=None):
    """Generalised madogram ``eps/(1+eps) - mean_j eps_j(lam_j)/(1+eps_j(lam_j))``."""
    lam = _lambda(lam, partition.p)
    e = epsilon(model, partition, lam)
    blocks = [epsilon_block(model, partition, j, lam[j]) for j in range(partition.p)]
    return e / (1.0 + e) - float(np.mean([b / (1.0 + b) for b in blocks]))


def chi_pair(model, partition, j, k, lam_j=1.0, lam_k=1.0):
    """Tail dependence function of blocks ``j`` and ``k``.

    ``lam_j eps_j(1) + lam_k eps_k(1) - eps_jk(1/lam_j, 1/lam_k)``.
    """
    if j == k:
        raise ModelError("chi_pair needs two distinct blocks")
    if not (lam_j > 0 and lam_k > 0):
        raise ModelError("lambda values must be positive")
    ej = epsilon_block(model, partition, j)
    ek = epsilon_block(model, partition, k)
    return lam_j * ej + lam_k * ek - epsilon_pair(model, partition, j, k, 1.0 / lam_j, 1.0 / lam_k)


def chi_margin_pair(model, i, j):
    """Upper tail dependence ``2 - l_{(X_i, X_j)}(sigma_i^eta, sigma_j^eta)`` of two coordinates."""
    if i == j:
        raise ModelError("chi_margin_pair needs i != j")
    return 2.0 - _eps_at(model, [i, j], [1.0, 1.0])


def epsilon_bounds(model, partition, lam=None):
    """``(max_j eps_j(1)/lam_j, sum_j eps_j(1)/lam_j)``.

    The lower value is the sharp bound from ``max_j l_{I_j} <= l``; it is
    attained by comonotone margins. The upper one is attained by independent
    blocks.
    """
    lam = _lambda(lam, partition.p)
    vals = np.array([epsilon_block(model, partition, j) for j in range(partition.p)]) / lam
    return float(vals.max()), float(vals.sum())


def _require_inverted(model):
    if not isinstance(model, InvertedMev):
        raise ModelError("kappa needs an inverted MEV model")


def kappa_pair(model, i, j):
    """Coefficient of asymptotic tail independence ``1/l_Y(sigma_i^eta, sigma_j^eta)``."""
    _require_inverted(model)
    if i == j:
        raise ModelError("kappa_pair needs i != j")
    return 1.0 / _eps_at(model.generator, [i, j], [1.0, 1.0])


def kappa_block(model, partition, j, k):
    """Block coefficient: the largest pairwise kappa across the two blocks."""
    _require_inverted(model)
    if j == k:
        raise ModelError("kappa_block needs j != k")
    if partition.d != model.d:
        raise ModelError("partition/model dimension mismatch")
    return max(kappa_pair(model, a, b) for a in partition.blocks[j] for b in partition.blocks[k])


def kappa_mev_pair(model, i, j):
    """Ledford-Tawn kappa for a max-stable pair: 1/2 at exact independence, 1 otherwise."""
    ell = _eps_at(model, [i, j], [1.0, 1.0])
    return 0.5 if abs(ell - 2.0) <= INDEPENDENCE_TOL else 1.0


def kappa_mev_block(model, partition, j, k):
    return max(kappa_mev_pair(model, a, b) for a in partition.blocks[j] for b in partition.blocks[k])


@dataclass
class CoefficientReport:
    kind: str
    partition: Partition
    lam: list
    epsilon_joint: float
    moment: float
    epsilon_blocks: list
    pairs: list = field(default_factory=list)
    nu: float = 0.0
    bounds: tuple = (0.0, 0.0)
    coefficients_of: str = "model"

    def to_dict(self):
        return {
            "kind": self.kind,
            "coefficients_of": self.coefficients_of,
            "d": self.partition.d,
            "partition": self.partition.to_lists(),
            "lambda": list(self.lam),
            "epsilon_joint": self.epsilon_joint,
            "moment_e": self.moment,
            "epsilon_blocks": list(self.epsilon_blocks),
            "pairs": [dict(p) for p in self.pairs],
            "nu": self.nu,
            "bounds": {"lower": self.bounds[0], "upper": self.bounds[1]},
        }


def coefficient_report(model, partition, lam=None, allow_large=False):
    """Every coefficient for one partition.

    For an inverted MEV model the extremal dependence quantities refer to
    the generator and each pair carries the exact block kappa.
    """
    if partition.p > MAX_REPORT_BLOCKS and not allow_large:
        raise ModelError(f"report with p={partition.p} > {MAX_REPORT_BLOCKS} blocks needs allow_large=True")
    inverted = isinstance(model, InvertedMev)
    base = model.generator if inverted else model
    _check(base, partition)
    lam = _lambda(lam, partition.p)
    pairs = []
    for j in range(partition.p):
        for k in range(j + 1, partition.p):
            pairs.append(
                {
                    "blocks": [j + 1, k + 1],
                    "epsilon": epsilon_pair(base, partition, j, k),
                    "chi": chi_pair(base, partition, j, k),
                    "kappa": kappa_block(model, partition, j, k) if inverted else kappa_mev_block(base, partition, j, k),
                }
            )
    e = epsilon(base, partition, lam)
    return CoefficientReport(
        kind=model.kind,
        partition=partition,
        lam=[float(x) for x in lam],
        epsilon_joint=e,
        moment=e / (1 + e),
        epsilon_blocks=[epsilon_block(base, partition, j, lam[j]) for j in range(partition.p)],
        pairs=pairs,
        nu=madogram_nu(base, partition, lam),
        bounds=epsilon_bounds(base, partition, lam),
        coefficients_of="generator" if inverted else "model",
    )
