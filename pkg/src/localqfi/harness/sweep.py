"""Config-driven sweeps over inverse temperatures and subsystems."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..bounds import BoundReport, XiProvider, bound_report
from ..lattice import GeometryConstants, LatticeModel, Subsystem, geometry_constants
from ..thermometry import global_state
from .config import SCHEMA_VERSION, SweepConfig
from .fit import fit_xi_empirical

__all__ = [
    "CSV_COLUMNS",
    "RunRecord",
    "make_xi_provider",
    "resolve_betas",
    "error_report",
    "run_sweep",
    "write_atomic",
]

CSV_COLUMNS = (
    "beta", "size_A", "edges_A", "boundary_A", "F", "var_HA", "var_HCR", "lhs",
    "rhs_thm1", "rhs_cor", "rhs_1d", "R_star", "xi", "xi_mode", "ratio_edges",
    "ratio_surface", "satisfied", "error_code",
)


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


@dataclass
class RunRecord:
    """Rows of one sweep plus provenance.  Rows are sorted by ``(beta, |A|)``."""

    rows: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            d = r.as_dict()
            writer.writerow([_cell(d[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "provenance": self.provenance,
            "columns": list(CSV_COLUMNS),
            "rows": [{k: _jsonable(v) for k, v in r.as_dict().items()} for r in self.rows],
        }


def write_atomic(path, text: str):
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def resolve_betas(config: SweepConfig, g: GeometryConstants) -> list[float]:
    scale = g.J if config.beta_in_J_units else 1.0
    return sorted(float(b) / scale for b in config.betas)


def make_xi_provider(config: SweepConfig, model: LatticeModel, g: GeometryConstants,
                     states: dict | None = None) -> XiProvider:
    if config.xi == "ising":
        return XiProvider.ising(g.J)
    if config.xi == "fit":
        states = {} if states is None else states
        return XiProvider.empirical(lambda b: fit_xi_empirical(model, b, omega=states.get(b)))
    return XiProvider.constant(float(config.xi))


def error_report(model: LatticeModel, A, beta: float, code: str, xi_mode: str) -> BoundReport:
    sub = Subsystem(model, A)
    nan = math.nan
    return BoundReport(beta=beta, size_A=len(sub), edges_A=len(sub.interior), boundary_A=len(sub.boundary),
                       F=nan, var_HA=nan, var_HCR=nan, lhs=nan, rhs_thm1=nan, rhs_cor=nan, rhs_1d=nan,
                       R_star=0, xi=nan, xi_mode=xi_mode, ratio_edges=nan, ratio_surface=nan,
                       satisfied=False, error_code=code)


def _ordered(subsystems):
    return sorted(subsystems, key=len)


def run_sweep(config: SweepConfig, write: bool = True, constants: GeometryConstants | None = None) -> RunRecord:
    """Evaluate every ``(beta, A)`` point of the config.

    One global eigendecomposition is made per ``beta`` and shared by all
    subsystems.  A failing point is kept as a row with ``error_code`` set.
    Output files named in the config are written atomically when ``write``.
    """
    model = config.build_model()
    g = constants or geometry_constants(model)
    subsystems = _ordered(config.subsystem_list(model))
    states: dict = {}
    provider = make_xi_provider(config, model, g, states)
    rows = []
    for beta in resolve_betas(config, g):
        try:
            omega = global_state(model, beta)
        except (np.linalg.LinAlgError, ValueError, FloatingPointError):
            rows.extend(error_report(model, A, beta, "numerical", provider.short_mode) for A in subsystems)
            continue
        states[beta] = omega
        for A in subsystems:
            try:
                rows.append(bound_report(model, A, beta, provider, R=config.R, R_max=config.R_max, omega=omega,
                                         constants=g, threshold=config.threshold, tol=config.tolerance))
            except (np.linalg.LinAlgError, ValueError, FloatingPointError):
                rows.append(error_report(model, A, beta, "numerical", provider.short_mode))
        states.pop(beta, None)
    record = RunRecord(rows=rows, provenance={
        "config_hash": config.digest(),
        "code_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "schema_version": SCHEMA_VERSION,
        "seed": config.seed,
    })
    if write:
        if config.out_csv:
            write_atomic(Path(config.base_dir) / config.out_csv, record.to_csv())
        if config.out_json:
            write_atomic(Path(config.base_dir) / config.out_json, json.dumps(record.to_json(), indent=2) + "\n")
    return record
