"""Every locality inequality as a numeric assertion.

Each check records the two sides of one inequality, the margin
``rhs - lhs`` and a status.  A check fails when ``lhs > rhs + tolerance``.
Equalities are checked as ``|difference| <= allowance``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..bounds import (
    DomainError,
    clustering_rhs,
    corollary_rhs,
    example_1d_rhs,
    is_chain_like,
    min_R,
    theorem1_rhs,
    theorem2_bound,
)
from ..lattice import PAULI, GeometryConstants, LatticeModel, Subsystem, boundary_edges, geometry_constants, set_distance
from ..operators import SpectralState, assemble, connected_correlator, local_operator, variance
from ..thermometry import (
    RankDeficientError,
    bures_norm,
    canonical_qfi,
    decompose,
    drho_dbeta,
    edge_images,
    global_state,
    local_qfi,
    whitened_norm,
)
from .config import SweepConfig
from .sweep import make_xi_provider, resolve_betas

__all__ = ["Check", "VerifyReport", "verify_point", "verify_global", "verify_suite"]

IDENTITY_REL_TOL = 1e-8
DECOUPLED_REL_TOL = 1e-10


@dataclass
class Check:
    name: str
    beta: float
    subsystem: tuple
    R: int | None
    lhs: float
    rhs: float
    status: str = "pass"

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def as_dict(self) -> dict:
        d = asdict(self)
        d["subsystem"] = [str(s) for s in self.subsystem]
        d["margin"] = self.margin
        for k in ("lhs", "rhs", "margin"):
            if not math.isfinite(d[k]):
                d[k] = None
        return d


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)
    tolerance: float = 1e-9

    @property
    def violations(self) -> list:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.violations

    def counts(self) -> dict:
        out = {"pass": 0, "fail": 0, "skip": 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    def to_dict(self) -> dict:
        return {"ok": self.ok, "tolerance": self.tolerance, "counts": self.counts(),
                "checks": [c.as_dict() for c in self.checks]}


class _Recorder:
    def __init__(self, tol):
        self.tol = tol
        self.checks = []

    def le(self, name, beta, A, R, lhs, rhs):
        status = "pass" if lhs <= rhs + self.tol else "fail"
        self.checks.append(Check(name, beta, tuple(A), R, float(lhs), float(rhs), status))

    def skip(self, name, beta, A, R):
        self.checks.append(Check(name, beta, tuple(A), R, math.nan, math.nan, "skip"))


def verify_point(model: LatticeModel, A, beta: float, xi: float | None, g: GeometryConstants,
                 omega: SpectralState, R_max: int | None = None, tol: float = 1e-9) -> list[Check]:
    """All subsystem-level checks at one ``(beta, A)``, for every layer width.

    The proof-step inequalities are checked for ``1 <= R <= R_max``; the
    closed-form bounds only for admissible ``R >= 2 xi + 1``.  ``xi=None``
    marks an out-of-domain correlation length and skips the latter.
    """
    rec = _Recorder(tol)
    sub = Subsystem(model, A)
    A = sub.sites
    R_max = model.diameter if R_max is None else R_max
    F = local_qfi(model, A, beta, omega)
    H_A = assemble(model, sub.interior, support=A)
    var_ha = variance(H_A, omega)
    lhs = abs(math.sqrt(F) - math.sqrt(var_ha))

    if len(A) == model.n_sites:
        rec.le("canonical_identity", beta, A, None, abs(F - var_ha), IDENTITY_REL_TOL * max(var_ha, 1e-12))
    elif not sub.boundary and sub.interior:
        can = canonical_qfi(model, A, beta)
        rec.le("decoupled_exactness", beta, A, None, abs(F - can), DECOUPLED_REL_TOL * max(can, 1e-12))

    images = edge_images(model, A, beta, omega)
    d1 = decompose(model, A, beta, 1, omega, images)
    rho = d1.rho
    rec.le("a_term_identity", beta, A, None, abs(bures_norm(d1.a_term, rho) - math.sqrt(var_ha)), IDENTITY_REL_TOL)
    recon = float(np.max(np.abs(d1.total() - drho_dbeta(model, A, beta, omega))))
    rec.le("decomposition_reconstruction", beta, A, None, recon, 1e-10)
    full_rank = rho.eigenvalues.min() > 1e-12

    for R in range(1, max(R_max, 1) + 1):
        dec = d1 if R == 1 else decompose(model, A, beta, R, omega, images)
        shell = sub.shell(R)
        var_hcr = variance(assemble(model, shell), omega)
        c_norm = bures_norm(dec.c_term, rho)
        b_norms = [bures_norm(b, rho) for b in dec.b_terms.values()]
        rec.le("contractivity", beta, A, R, c_norm**2, var_hcr)
        rec.le("triangle", beta, A, R, lhs, c_norm + sum(b_norms))
        if full_rank:
            for X, b in dec.b_terms.items():
                rec.le("whitened_far_term", beta, A, R, whitened_norm(b, rho), 2 * g.J)
        if xi is None:
            rec.skip("theorem1", beta, A, R)
            continue
        if R < min_R(xi):
            continue
        rhs1 = theorem1_rhs(math.sqrt(var_hcr), g.J, g.M, len(A), g.N_b, xi, R)
        rhsc = corollary_rhs(g.J, g.M, g.N, g.N_b, xi, len(shell), len(A), R)
        rec.le("theorem1", beta, A, R, lhs, rhs1)
        rec.le("corollary", beta, A, R, lhs, rhsc)
        rec.le("corollary_dominates_theorem1", beta, A, R, rhs1, rhsc)
        rec.le("theorem2_shell", beta, A, R, var_hcr, theorem2_bound(g.N_b, g.J, len(shell), g.N, g.M, xi))
        if is_chain_like(g) and var_ha > 0 and len(shell) <= 2 * R:
            rec.le("chain_bound", beta, A, R, lhs / math.sqrt(var_ha), example_1d_rhs(g.J, xi, R, len(A), var_ha))
    if xi is not None:
        rec.le("theorem2_interior", beta, A, None, var_ha, theorem2_bound(g.N_b, g.J, len(sub.interior), g.N, g.M, xi))
    return rec.checks


def _random_observable(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = (m + m.conj().T) / 2
    return m / np.linalg.norm(m, 2)


def verify_global(model: LatticeModel, beta: float, xi: float | None, g: GeometryConstants,
                  omega: SpectralState, tol: float = 1e-9, rng=None, n_random: int = 1) -> list[Check]:
    """Checks on the whole lattice: the clustering inequality and Var H bound.

    Clustering is tested for every pair of sites, a site with itself
    included, with all Pauli observables plus ``n_random`` random unit-norm
    Hermitian pairs per site pair when ``rng`` is given.
    """
    rec = _Recorder(tol)
    sites = model.sites
    if xi is None:
        rec.skip("clustering", beta, sites, None)
        rec.skip("theorem2_full", beta, sites, None)
        return rec.checks
    var_h = variance(assemble(model, model.edges, support=sites), omega)
    rec.le("theorem2_full", beta, sites, None, var_h, theorem2_bound(g.N_b, g.J, len(model.edges), g.N, g.M, xi))
    nb = {s: len(boundary_edges(model, [s])) for s in sites}
    paulis = [PAULI[k] for k in "xyz"]
    for x, y in itertools.combinations_with_replacement(sites, 2):
        if model.local_dims[model.index[x]] != 2 or model.local_dims[model.index[y]] != 2:
            continue
        d = set_distance(model, [x], [y])
        bound_unit = clustering_rhs(xi, min(nb[x], nb[y]), 1.0, 1.0, d)
        pairs = [(p, q) for p in paulis for q in paulis]
        if rng is not None:
            pairs += [(_random_observable(rng, 2), _random_observable(rng, 2)) for _ in range(n_random)]
        worst = 0.0
        for p, q in pairs:
            c = connected_correlator(local_operator(model, [x], p), local_operator(model, [y], q), omega)
            worst = max(worst, abs(c) / (np.linalg.norm(p, 2) * np.linalg.norm(q, 2)))
        rec.le("clustering", beta, (x, y), None, worst, bound_unit)
    return rec.checks


def verify_suite(config: SweepConfig, J_scale: float = 1.0) -> VerifyReport:
    """Run every check on every ``(beta, A)`` of the config.

    ``J_scale`` multiplies the interaction strength fed to the bounds (and
    to the correlation length); values below 1 inject a fault.
    """
    model = config.build_model()
    true_g = geometry_constants(model)
    g = true_g.with_J(true_g.J * J_scale)
    provider = make_xi_provider(config, model, g)
    rng = np.random.default_rng(config.seed)
    report = VerifyReport(tolerance=config.tolerance)
    subsystems = config.subsystem_list(model)
    for beta in resolve_betas(config, true_g):
        omega = global_state(model, beta)
        try:
            xi = provider(beta)
        except DomainError:
            xi = None
        report.checks.extend(verify_global(model, beta, xi, g, omega, config.tolerance, rng))
        for A in subsystems:
            try:
                report.checks.extend(verify_point(model, A, beta, xi, g, omega, config.R_max, config.tolerance))
            except RankDeficientError:
                report.checks.append(Check("rank", beta, tuple(A), None, math.nan, math.nan, "skip"))
    return report
