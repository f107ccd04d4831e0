"""JSON model documents, CSV data files and reproducible JSON rendering."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, ModelError
from .families import (
    CopulaComponent,
    InvertedMev,
    InvertedMevSpec,
    MixtureModelSpec,
    make_asymmetric_logistic,
    make_comonotone,
    make_independence,
    make_logistic,
    make_min_product_mixture,
    make_mixture,
)
from .model import MarginSpec, Partition

SPEC_VERSION = 1


def _req(block, key, where):
    try:
        return block[key]
    except (KeyError, TypeError):
        raise ConfigError(f"{where}: missing required key {key!r}") from None


def family_from_dict(fam, d, eta, sigma):
    """Build a model from a ``family`` block given the top-level margins."""
    if not isinstance(fam, dict):
        raise ConfigError("family: expected a JSON object")
    kind = _req(fam, "kind", "family")
    try:
        if kind == "independence":
            return make_independence(d, eta, sigma)
        if kind == "comonotone":
            return make_comonotone(d, eta, sigma)
        if kind == "logistic":
            return make_logistic(d, float(_req(fam, "alpha", "family")), eta, sigma)
        if kind == "asym_logistic":
            beta = _req(fam, "beta", "family")
            if len(beta) != d:
                raise ModelError(f"asym_logistic: beta has {len(beta)} entries, expected d={d}")
            return make_asymmetric_logistic(beta, float(_req(fam, "alpha", "family")), eta, sigma)
        if kind == "min_product":
            return make_min_product_mixture(
                float(_req(fam, "beta1", "family")), float(_req(fam, "alpha", "family")), eta, sigma, d
            )
        if kind == "mixture":
            comps = _req(fam, "components", "family")
            if not isinstance(comps, list) or not comps:
                raise ConfigError("mixture: 'components' must be a nonempty list")
            beta, alpha, cat = [], [], []
            for c in comps:
                cat.append(CopulaComponent(_req(c, "copula", "mixture component"), float(c.get("theta", 1.0))))
                alpha.append(float(c.get("alpha", eta)))
                b = _req(c, "beta", "mixture component")
                beta.append(np.broadcast_to(np.asarray(b, float), (d,)))
            spec = MixtureModelSpec(np.array(beta), tuple(alpha), tuple(cat), MarginSpec(sigma, eta), family=dict(fam))
            return make_mixture(spec)
        if kind == "inverted":
            gen = family_from_dict(_req(fam, "generator", "family"), d, eta, sigma)
            if isinstance(gen, InvertedMev):
                raise ModelError("inverted: generator must be a max-stable family")
            return InvertedMev(InvertedMevSpec(gen))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (ConfigError, ModelError)):
            raise
        raise ConfigError(f"family {kind!r}: {exc}") from exc
    raise ConfigError(f"family: unknown kind {kind!r}")


def model_from_dict(doc):
    """Return ``(model, partition_or_None)`` from a parsed model document."""
    if not isinstance(doc, dict):
        raise ConfigError("model document must be a JSON object")
    version = doc.get("spec_version")
    if version != SPEC_VERSION:
        raise ConfigError(f"unsupported or missing spec_version {version!r}; expected {SPEC_VERSION}")
    d = _req(doc, "d", "model")
    if not isinstance(d, int) or d < 1:
        raise ConfigError("model: 'd' must be a positive integer")
    eta = float(doc.get("eta", 1.0))
    sigma = doc.get("sigma", [1.0] * d)
    if not isinstance(sigma, list) or len(sigma) != d:
        raise ConfigError(f"model: 'sigma' must be a list of length d={d}")
    sigma = tuple(float(s) for s in sigma)
    MarginSpec(sigma, eta)  # validates
    model = family_from_dict(_req(doc, "family", "model"), d, eta, sigma)
    partition = None
    if "partition" in doc:
        partition = Partition.from_lists(doc["partition"], d)
    return model, partition


def model_to_dict(model, partition=None):
    m = model.margins
    doc = {
        "spec_version": SPEC_VERSION,
        "d": m.d,
        "eta": m.eta,
        "sigma": list(m.sigma),
        "family": model.family,
    }
    if partition is not None:
        doc["partition"] = partition.to_lists()
    return doc


def load_model(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read model file {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return model_from_dict(doc)


# --------------------------------------------------------------------------
# reproducible rendering
# --------------------------------------------------------------------------

def fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _render(obj, out):
    if isinstance(obj, dict):
        out.append("{")
        for n, (k, v) in enumerate(obj.items()):
            if n:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _render(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for n, v in enumerate(obj):
            if n:
                out.append(", ")
            _render(v, out)
        out.append("]")
    elif isinstance(obj, (bool, np.bool_)) or obj is None:
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt_float(obj))
    elif isinstance(obj, np.ndarray):
        _render(obj.tolist(), out)
    else:
        out.append(json.dumps(str(obj)))


def dumps(obj):
    """JSON with insertion key order and 17-significant-digit floats."""
    out = []
    _render(obj, out)
    return "".join(out) + "\n"


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def format_csv(values, header=None):
    values = np.asarray(values, dtype=float)
    n, d = values.shape
    header = header or [f"x{i + 1}" for i in range(d)]
    lines = [",".join(header)]
    lines.extend(",".join(fmt_float(v) for v in row) for row in values)
    return "\n".join(lines) + "\n"


def write_csv(path, values, header=None):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_csv(values, header))


def read_csv(source):
    """Read a headed numeric CSV. Returns ``(names, values)``."""
    try:
        text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    except OSError as exc:
        raise DataError(f"cannot read data file {source}: {exc.strerror}") from exc
    rows = list(csv.reader(_io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError("data file needs a header row and at least one observation")
    names = [c.strip() for c in rows[0]]
    try:
        values = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise DataError(f"non-numeric entry in data: {exc}") from exc
    if values.ndim != 2 or values.shape[1] != len(names):
        raise DataError("ragged rows in data file")
    if np.any(~np.isfinite(values)):
        raise DataError("data contains missing or non-finite values")
    return names, values
