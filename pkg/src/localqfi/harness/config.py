"""Model specification files and sweep configuration.

Both are JSON documents stamped with ``schema_version``.  A model file is
either explicit::

    {"schema_version": 1, "sites": 4, "edges": [[0, 1], [1, 2], [2, 3]],
     "terms": {"ising": {"h": 0.5}}}

with ``terms`` alternatively ``{"matrices": [M_0, M_1, ...]}`` (one matrix
per edge, entries as ``[re, im]`` pairs), or a builder shorthand such as
``{"schema_version": 1, "lattice": {"type": "chain", "n": 8, "h": 0.5}}``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..lattice import DEFAULT_MAX_DIM, LatticeModel, build_chain, build_square, ising_terms

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "ConfigError",
    "SweepConfig",
    "model_from_spec",
    "model_to_spec",
    "load_model",
    "load_config",
    "parse_subsystem",
    "encode_matrix",
    "decode_matrix",
]


class ConfigError(ValueError):
    """Malformed model or sweep configuration."""


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError("matrices must be square nested arrays of [re, im] pairs")
    m = arr[..., 0] + 1j * arr[..., 1]
    return m.real.copy() if not np.any(arr[..., 1]) else m


def _check_version(spec: dict, what: str):
    version = spec.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{what} has schema_version {version!r}, expected {SCHEMA_VERSION}")


def _site(s):
    # JSON has no tuples; list site ids (e.g. square-lattice coordinates) come back as lists
    return tuple(s) if isinstance(s, list) else s


def model_from_spec(spec: dict) -> LatticeModel:
    """Build a :class:`LatticeModel` from a parsed model document."""
    if not isinstance(spec, dict):
        raise ConfigError("model specification must be a JSON object")
    _check_version(spec, "model")
    max_dim = int(spec.get("max_dim", DEFAULT_MAX_DIM))
    try:
        if "lattice" in spec:
            lat = dict(spec["lattice"])
            kind = lat.pop("type")
            if kind == "chain":
                return build_chain(int(lat.pop("n")), max_dim=max_dim, **lat)
            if kind == "square":
                return build_square(int(lat.pop("width")), int(lat.pop("height")), max_dim=max_dim, **lat)
            raise ConfigError(f"unknown lattice type {kind!r}")
        sites = spec["sites"]
        sites = list(range(sites)) if isinstance(sites, int) else [_site(s) for s in sites]
        edges = [tuple(_site(s) for s in e) for e in spec["edges"]]
        terms = spec["terms"]
        local_dims = spec.get("local_dims", 2)
        if "ising" in terms:
            opts = terms["ising"]
            order = {s: i for i, s in enumerate(sites)}
            edges = [tuple(sorted(e, key=order.__getitem__)) for e in edges]
            mats = ising_terms(sites, edges, h=float(opts.get("h", 0.0)), coupling=float(opts.get("coupling", 1.0)))
        elif "matrices" in terms:
            mats = [decode_matrix(m) for m in terms["matrices"]]
        else:
            raise ConfigError("terms must be {'ising': {...}} or {'matrices': [...]}")
        return LatticeModel(sites, edges, mats, local_dims=local_dims, max_dim=max_dim)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model specification: {exc}") from exc


def model_to_spec(model: LatticeModel) -> dict:
    """Explicit-matrix document that round-trips through :func:`model_from_spec`."""
    return {
        "schema_version": SCHEMA_VERSION,
        "sites": list(model.sites),
        "local_dims": list(model.local_dims),
        "edges": [list(e) for e in model.edges],
        "terms": {"matrices": [encode_matrix(model.terms[e]) for e in model.edges]},
    }


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def load_model(path) -> LatticeModel:
    return model_from_spec(_read_json(path))


def parse_subsystem(text: str) -> list[int]:
    """Site positions from ``"i..j"`` (inclusive) or ``"i,j,k"``."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ConfigError(f"empty subsystem range {text!r}")
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse subsystem {text!r}") from exc


@dataclass
class SweepConfig:
    """Everything a sweep or verification run needs.

    ``subsystems`` holds site-position lists, or ``{"centered": [k1, ...]}``
    for windows of those sizes centred on a chain.  ``betas`` are inverse
    temperatures unless ``beta_in_J_units`` is set, in which case each value
    is ``beta * J`` with ``J`` the model's interaction strength.  ``xi`` is
    ``"ising"``, ``"fit"`` or a positive number; ``R=None`` optimizes the
    layer width up to ``R_max`` (default: the lattice diameter).
    """

    model: dict
    subsystems: list | dict
    betas: list
    beta_in_J_units: bool = False
    xi: str | float = "ising"
    R: int | None = None
    R_max: int | None = None
    threshold: float = 0.1
    tolerance: float = 1e-9
    seed: int = 0
    out_csv: str | None = None
    out_json: str | None = None
    schema_version: int = SCHEMA_VERSION
    base_dir: str = field(default=".", repr=False)

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"config schema_version {self.schema_version!r} unsupported")
        if not all(isinstance(b, (int, float)) and math.isfinite(b) for b in self.betas):
            raise ConfigError("betas must be finite numbers")
        if isinstance(self.xi, str):
            if self.xi not in ("ising", "fit"):
                try:
                    self.xi = float(self.xi)
                except ValueError:
                    raise ConfigError(f"xi must be 'ising', 'fit' or a number, got {self.xi!r}") from None
        if not isinstance(self.xi, str) and not self.xi > 0:
            raise ConfigError("a constant xi must be positive")
        if self.R is not None and self.R < 1:
            raise ConfigError("R must be a positive integer")
        if self.threshold <= 0:
            raise ConfigError("threshold must be positive")

    def build_model(self) -> LatticeModel:
        spec = self.model
        if isinstance(spec, str):
            spec = _read_json(Path(self.base_dir) / spec)
        return model_from_spec(spec)

    def subsystem_list(self, model: LatticeModel) -> list[tuple]:
        spec = self.subsystems
        if isinstance(spec, dict):
            if set(spec) != {"centered"}:
                raise ConfigError("subsystem ladder must be a list or {'centered': [sizes]}")
            n = model.n_sites
            out = []
            for k in spec["centered"]:
                if not 1 <= k <= n:
                    raise ConfigError(f"window size {k} outside 1..{n}")
                start = (n - k) // 2
                out.append(tuple(model.sites[start:start + k]))
            return out
        out = []
        for positions in spec:
            if not positions:
                raise ConfigError("subsystems must be nonempty")
            try:
                out.append(tuple(model.sites[int(p)] for p in positions))
            except (IndexError, ValueError, TypeError) as exc:
                raise ConfigError(f"bad subsystem {positions!r}: {exc}") from exc
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> "SweepConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data = dict(data)
        if "schema_version" not in data:
            raise ConfigError("config lacks schema_version")
        if "betaJ" in data:
            if "betas" in data:
                raise ConfigError("give either betas or betaJ, not both")
            data["betas"] = data.pop("betaJ")
            data["beta_in_J_units"] = True
        known = set(cls.__dataclass_fields__) - {"base_dir"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data, base_dir=str(base_dir))
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path) -> SweepConfig:
    path = Path(path)
    return SweepConfig.from_dict(_read_json(path), base_dir=path.parent)
