"""Exact samplers for the catalog models.

Rows are generated in fixed-size chunks. Chunk ``c`` draws from its own
PCG64 stream seeded by ``SeedSequence(seed, spawn_key=(c,))``, so output is
bit-identical for any number of worker threads.

Constructions (each reproduces the closed-form df exactly):

* logistic-type component with dependence ``g`` in (0, 1): with ``S``
  positive stable of index ``g`` and ``E_i`` iid Exp(1), ``Z_i = (S/E_i)^g``
  gives ``P(Z <= z) = E exp(-S sum z_i^(-1/g)) = exp(-(sum z_i^(-1/g))^g)``;
* ``g = 1`` is ``Z_i = 1/E_i`` (independent unit Frechet), ``g = 0`` is a
  single ``V = 1/E`` copied to every coordinate;
* a component with weights ``w_ji`` contributes ``(w_ji Z_i)^eta`` and the
  mixture is the componentwise maximum over independent components, so
  the dfs multiply and the exponents add;
* inverted MEV: ``U_i = 1 - F_Yi(Y_i)`` with ``Y`` drawn from the generator.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ModelError, NotSimulableError
from .families import InvertedMev, InvertedMevSpec, MixtureModelSpec, make_logistic, make_mixture
from .model import MarginSpec, MaxStableModel

CHUNK = 1 << 16


def resolve_threads(threads=None):
    if threads is None:
        threads = int(os.environ.get("EXTDEP_THREADS", "1") or 1)
    return max(1, int(threads))


def _chunk_rng(seed, c):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(c,))))


def _run_chunks(fn, n, seed, threads):
    sizes = [min(CHUNK, n - s) for s in range(0, n, CHUNK)]
    jobs = [(c, m) for c, m in enumerate(sizes)]
    call = lambda job: fn(_chunk_rng(seed, job[0]), job[1])
    threads = resolve_threads(threads)
    if threads == 1 or len(jobs) <= 1:
        parts = [call(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(call, jobs))
    if not parts:
        return fn(_chunk_rng(seed, 0), 0)
    return np.concatenate(parts, axis=0)


def fingerprint(model):
    from .io import model_to_dict

    doc = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    scale: str
    seed: int
    fingerprint: str

    def __post_init__(self):
        if self.scale not in ("raw", "uniform"):
            raise ValueError(f"scale must be 'raw' or 'uniform', got {self.scale!r}")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]


def to_uniform(batch, margins: MarginSpec):
    """``U_i = F_i(X_i)`` under the given margins."""
    if batch.scale != "raw":
        raise ValueError("batch is already on the uniform scale")
    return SampleBatch(margins.cdf(batch.values), "uniform", batch.seed, batch.fingerprint)


def to_raw(batch, margins: MarginSpec):
    """``X_i = F_i^{-1}(U_i) = (-sigma_i / ln U_i)^eta``."""
    if batch.scale != "uniform":
        raise ValueError("batch is already on the raw scale")
    return SampleBatch(margins.quantile(batch.values), "raw", batch.seed, batch.fingerprint)


def sample_positive_stable(theta, n, seed=0):
    """Draws with Laplace transform ``exp(-s^theta)``; ``theta = 1`` gives ones."""
    if not (0.0 < theta <= 1.0):
        raise ModelError(f"positive stable index must lie in (0, 1], got {theta}")

    def chunk(rng, m):
        u = rng.uniform(0.0, np.pi, m)
        e = rng.standard_exponential(m)
        return _kernels.positive_stable(theta, u, e)

    return _run_chunks(chunk, int(n), seed, 1)


def _unit_frechet_logistic(rng, m, d, g):
    if g == 0.0:
        v = 1.0 / rng.standard_exponential(m)
        return np.repeat(v[:, None], d, axis=1)
    if g == 1.0:
        return 1.0 / rng.standard_exponential((m, d))
    u = rng.uniform(0.0, np.pi, m)
    e0 = rng.standard_exponential(m)
    s = _kernels.positive_stable(g, u, e0)
    e = rng.standard_exponential((m, d))
    return _kernels.logistic_frechet(s, e, g)


def _raw_chunk(model: MaxStableModel):
    ex = model.exponent
    if not ex.is_catalog:
        raise NotSimulableError(f"model kind {ex.kind!r} has no exact sampler")
    w, gs, eta, d = ex.weights, ex.dependence, ex.eta, ex.d

    def chunk(rng, m):
        x = np.zeros((m, d))
        for j, g in enumerate(gs):
            z = _unit_frechet_logistic(rng, m, d, float(g))
            np.maximum(x, (w[j] * z) ** eta, out=x)
        return x

    return chunk


def _generator_uniform_chunk(model):
    raw = _raw_chunk(model)
    s = model.margins.sigma_array
    inv_eta = 1.0 / model.margins.eta

    def chunk(rng, m):
        y = raw(rng, m)
        # 1 - F_Y(y) = -expm1(-sigma y^(-1/eta)), accurate near the upper tail of U
        return -np.expm1(-s * y ** (-inv_eta))

    return chunk


def simulate(model, n, seed=0, threads=None):
    """Exact sample of ``n`` rows. Inverted models come back on the uniform scale."""
    n = int(n)
    if n < 0:
        raise ModelError("n must be nonnegative")
    fp = fingerprint(model)
    if isinstance(model, InvertedMev):
        vals = _run_chunks(_generator_uniform_chunk(model.generator), n, seed, threads)
        return SampleBatch(vals, "uniform", int(seed), fp)
    vals = _run_chunks(_raw_chunk(model), n, seed, threads)
    return SampleBatch(vals, "raw", int(seed), fp)


def sample_logistic_mev(d, alpha, eta, sigma, n, seed=0, threads=None):
    return simulate(make_logistic(d, alpha, eta, sigma), n, seed, threads)


def sample_mixture_model(spec, n, seed=0, threads=None):
    model = make_mixture(spec) if isinstance(spec, MixtureModelSpec) else spec
    return simulate(model, n, seed, threads)


def sample_inverted_mev(spec, n, seed=0, threads=None):
    model = InvertedMev(spec) if isinstance(spec, InvertedMevSpec) else spec
    if not isinstance(model, InvertedMev):
        raise ModelError("sample_inverted_mev needs an inverted MEV spec")
    return simulate(model, n, seed, threads)


def uniform_values(model, batch):
    """Uniform-scale matrix for a batch, using the model's own margins."""
    if batch.scale == "uniform":
        return batch.values
    return model.margins.cdf(batch.values)


def block_max_power(u, partition, lam):
    """Per-row ``max_j M(I_j)^lambda_j`` together with the block maxima."""
    bm = _kernels.block_maxima(u, partition.block_of, partition.p)
    return _kernels.max_power(bm, np.asarray(lam, float)), bm
