"""Monte Carlo self-validation: closed-form coefficients against simulated data.

Each check compares an exact target with a Monte Carlo estimate and passes
when ``|estimate - target| <= tol_se * se + floor``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .coefficients import chi_pair, epsilon, kappa_block, madogram_nu, moment_e
from .estimation import _hill_curve, default_k
from .families import InvertedMev
from .model import Partition
from .simulation import simulate

DETERMINISTIC_FLOOR = 1e-12


@dataclass
class Check:
    name: str
    target: float
    estimate: float
    se: float
    tolerance: float

    @property
    def passed(self):
        return bool(abs(self.estimate - self.target) <= self.tolerance)

    def to_dict(self):
        return {
            "check": self.name,
            "target": self.target,
            "estimate": self.estimate,
            "se": self.se,
            "tolerance": self.tolerance,
            "status": "PASS" if self.passed else "FAIL",
        }


def _mean_se(x):
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def _odds(m):
    return m / (1.0 - m)


def _mev_checks(model, partition, lam, n, seed, tol_se, floor, threads):
    u = model.margins.cdf(simulate(model, n, seed, threads).values)
    bm = _kernels.block_maxima(u, partition.block_of, partition.p)
    w = _kernels.max_power(bm, lam)
    tol = lambda se: tol_se * se + floor
    out = []

    m, se = _mean_se(w)
    out.append(Check("moment_e", moment_e(model, partition, lam), m, se, tol(se)))
    se_eps = se / (1.0 - m) ** 2
    out.append(Check("epsilon", epsilon(model, partition, lam), _odds(m), se_eps, tol(se_eps)))

    for j in range(partition.p):
        for k in range(j + 1, partition.p):
            cols = np.column_stack([bm[:, j], bm[:, k], np.maximum(bm[:, j], bm[:, k])])
            means = cols.mean(axis=0)
            grad = np.array([1.0, 1.0, -1.0]) / (1.0 - means) ** 2
            cov = np.atleast_2d(np.cov(cols, rowvar=False))
            se_chi = float(math.sqrt(max(grad @ cov @ grad, 0.0) / n))
            est = _odds(means[0]) + _odds(means[1]) - _odds(means[2])
            out.append(Check(f"chi[{j + 1},{k + 1}]", chi_pair(model, partition, j, k), est, se_chi, tol(se_chi)))

    diff = w - (bm ** lam[None, :]).mean(axis=1)
    m_nu, se_nu = _mean_se(diff)
    out.append(Check("nu", madogram_nu(model, partition, lam), m_nu, se_nu, tol(se_nu)))
    return out


def _inverted_checks(model, partition, n, seed, tol_se, floor, threads, k, t_level=10.0):
    u = simulate(model, n, seed, threads).values
    bm = _kernels.block_maxima(u, partition.block_of, partition.p)
    k = default_k(n) if k is None else int(k)
    tol = lambda se: tol_se * se + floor
    out = []
    for j in range(partition.p):
        for kk in range(j + 1, partition.p):
            target = kappa_block(model, partition, j, kk)
            lt = np.sort(np.log(_kernels.min_pair_tail(bm, j, kk)))[::-1]
            est = float(_hill_curve(lt, [k])[0])
            se = est / math.sqrt(k)
            out.append(Check(f"kappa[{j + 1},{kk + 1}]", target, est, se, tol(se)))

            # exact pair survival for the pair attaining the block kappa
            a, b = min(((a, b) for a in partition.blocks[j] for b in partition.blocks[kk]), key=model.tail_exponent)
            hit = ((u[:, a] > 1 - 1 / t_level) & (u[:, b] > 1 - 1 / t_level)).astype(float)
            p_target = model.joint_survival(t_level, (a, b))
            se_p = math.sqrt(p_target * (1 - p_target) / n)
            out.append(Check(f"survival[{a + 1},{b + 1}]@t={t_level:g}", p_target, float(hit.mean()), se_p, tol(se_p)))
    return out


def run_validation(model, partition=None, lam=None, n=200_000, seed=0, tol_se=3.0, floor=DETERMINISTIC_FLOOR,
                   threads=None, k=None):
    """Run every applicable check and return the list of :class:`Check`."""
    partition = partition or Partition.singletons(model.d)
    if isinstance(model, InvertedMev):
        return _inverted_checks(model, partition, n, seed, tol_se, floor, threads, k)
    lam = np.ones(partition.p) if lam is None else np.broadcast_to(np.asarray(lam, float), (partition.p,)).copy()
    return _mev_checks(model, partition, lam, n, seed, tol_se, floor, threads)


def format_table(checks):
    rows = [("check", "target", "estimate", "se", "tolerance", "status")]
    for c in checks:
        d = c.to_dict()
        rows.append((c.name, f"{c.target:.8g}", f"{c.estimate:.8g}", f"{c.se:.3g}", f"{c.tolerance:.3g}", d["status"]))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows) + "\n"
