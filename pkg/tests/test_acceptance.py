"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import json
import math

import numpy as np
import pytest

from localqfi.bounds import (
    corollary_rhs,
    example_1d_rhs,
    full_sum_upper,
    ising_xi,
    locality_conditions,
    min_R,
    tail_sum_upper,
    theorem2_bound,
)
from localqfi.harness import SweepConfig, run_sweep, verify_suite
from localqfi.harness.verify import verify_global
from localqfi.lattice import LatticeModel, PAULI, Subsystem, build_chain, build_square, geometry_constants
from localqfi.operators import assemble, hamiltonian, variance
from localqfi.thermometry import canonical_qfi, global_state, local_qfi, qfi_fd_oracle

BETA_J = (0.05, 0.1)


def chain_spec(n, h=0.5, periodic=False):
    return {"schema_version": 1, "lattice": {"type": "chain", "n": n, "h": h, "periodic": periodic}}


def all_windows(n, periodic=False):
    if periodic:
        return [[(s + k) % n for k in range(w)] for w in range(1, n + 1) for s in range(n if w < n else 1)]
    return [list(range(i, j)) for i in range(n) for j in range(i + 1, n + 1)]


@pytest.fixture(scope="module")
def suite_checks():
    """Every verification check on the shared suite of chain points."""
    checks = []
    for n, periodic in ((6, False), (8, False), (10, False), (8, True)):
        cfg = SweepConfig(model=chain_spec(n, periodic=periodic), subsystems=all_windows(n, periodic),
                          betas=list(BETA_J), beta_in_J_units=True, schema_version=1)
        checks.extend(verify_suite(cfg).checks)
    return checks


def select(checks, *names):
    return [c for c in checks if c.name in names]


def test_criterion_01_canonical_identity(record_criterion):
    models = [build_chain(n, h=0.5) for n in range(2, 11)]
    models += [build_chain(6, h=0.5, periodic=True), build_square(2, 2, h=0.3), build_square(3, 2, h=0.3)]
    worst = 0.0
    for m in models:
        J = geometry_constants(m).J
        for bj in (0.0, 0.05, 0.1, 0.2):
            omega = global_state(m, bj / J)
            var = variance(hamiltonian(m), omega)
            F = local_qfi(m, m.sites, bj / J, omega)
            worst = max(worst, abs(F - var) / max(var, 1e-12))
    ok = worst < 1e-8
    record_criterion(1, "canonical identity F = Var H for A = V", ok, f"worst rel err {worst:.2e} < 1e-8")
    assert ok


def _decoupled_models():
    t = np.kron(PAULI["x"], PAULI["x"]) + 0.5 * np.kron(PAULI["z"], PAULI["i"])
    # two disjoint chains
    edges = [(0, 1), (1, 2), (3, 4), (4, 5), (5, 6)]
    yield LatticeModel(range(7), edges, [t] * len(edges)), [0, 1, 2]
    yield LatticeModel(range(7), edges, [t] * len(edges)), [3, 4, 5, 6]
    # a plaquette next to an isolated pair
    sq = build_square(2, 2, h=0.4)
    sites = list(sq.sites) + ["a", "b"]
    terms = {e: sq.terms[e] for e in sq.edges}
    terms[("a", "b")] = 0.8 * t
    yield LatticeModel(sites, list(terms), terms), list(sq.sites)


def test_criterion_02_decoupled_exactness(record_criterion):
    worst = 0.0
    for m, A in _decoupled_models():
        assert not Subsystem(m, A).boundary
        for beta in (0.05, 0.3, 1.0):
            F = local_qfi(m, A, beta)
            can = canonical_qfi(m, A, beta)
            worst = max(worst, abs(F - can) / can)
    ok = worst < 1e-10
    record_criterion(2, "decoupled exactness F = canonical_qfi", ok, f"worst rel err {worst:.2e} < 1e-10")
    assert ok


def _oracle_points():
    for n in (4, 6, 8):
        m = build_chain(n, h=0.5)
        J = geometry_constants(m).J
        for A in ([0], [1, 2], list(range(n // 2)), list(range(1, n - 1))):
            for bj in (0.05, 0.1, 0.2):
                yield m, A, bj / J


def test_criterion_03_oracle_agreement(record_criterion):
    points = list(_oracle_points())
    worst = 0.0
    for m, A, beta in points:
        F = local_qfi(m, A, beta)
        worst = max(worst, abs(qfi_fd_oracle(m, A, beta, 1e-4) - F) / F)
    # at delta = 1e-4 round-off dominates, so the order is read off at larger steps
    ratios = []
    for m, A, beta in points[::6]:
        F = local_qfi(m, A, beta)
        errs = [abs(qfi_fd_oracle(m, A, beta, d) - F) for d in (4e-2, 2e-2, 1e-2)]
        ratios += [a / b for a, b in zip(errs, errs[1:])]
    second_order = all(3.5 < r < 4.5 for r in ratios)
    ok = len(points) >= 20 and worst < 1e-4 and second_order
    record_criterion(3, "fidelity oracle agreement", ok,
                     f"{len(points)} points, worst rel err {worst:.2e} < 1e-4, "
                     f"halving ratios {min(ratios):.2f}..{max(ratios):.2f}")
    assert ok


def test_criterion_04_clustering(record_criterion):
    worst_margin = math.inf
    count = 0
    for n in range(6, 11):
        m = build_chain(n, h=0.5)
        g = geometry_constants(m)
        for bj in BETA_J:
            beta = bj / g.J
            checks = verify_global(m, beta, ising_xi(beta, g.J), g, global_state(m, beta))
            clus = select(checks, "clustering")
            count += len(clus)
            worst_margin = min(worst_margin, min(c.margin for c in clus))
    ok = worst_margin >= 0
    record_criterion(4, "clustering inequality", ok, f"{count} site pairs x 9 Paulis, min margin {worst_margin:.3e}")
    assert ok


def test_criterion_05_theorem1(suite_checks, record_criterion):
    checks = select(suite_checks, "theorem1")
    bad = [c for c in checks if c.lhs > c.rhs + 1e-9]
    ok = bool(checks) and not bad
    record_criterion(5, "theorem1_rhs for all admissible R", ok,
                     f"{len(checks)} (beta, A, R) points, {len(bad)} violations, "
                     f"min margin {min(c.margin for c in checks):.3e}")
    assert ok


def test_criterion_06_theorem2(suite_checks, record_criterion):
    checks = select(suite_checks, "theorem2_interior", "theorem2_shell", "theorem2_full")
    bad = [c for c in checks if c.lhs > c.rhs + 1e-9]
    kinds = {c.name for c in checks}
    # slope of Var H_G over nested centred windows of a 10-spin chain
    m = build_chain(10, h=0.5)
    g = geometry_constants(m)
    slopes_ok = True
    detail = []
    for bj in BETA_J:
        beta = bj / g.J
        omega = global_state(m, beta)
        sizes, vars_ = [], []
        for k in range(2, 11):
            start = (10 - k) // 2
            sub = Subsystem(m, m.sites[start:start + k])
            sizes.append(len(sub.interior))
            vars_.append(variance(assemble(m, sub.interior), omega))
        slope = np.polyfit(sizes, vars_, 1)[0]
        bound_slope = theorem2_bound(g.N_b, g.J, 1, g.N, g.M, ising_xi(beta, g.J))
        slopes_ok &= 0 < slope < bound_slope
        detail.append(f"slope {slope:.3f} < {bound_slope:.1f}")
    ok = not bad and kinds == {"theorem2_interior", "theorem2_shell", "theorem2_full"} and slopes_ok
    record_criterion(6, "theorem2_bound and linear growth", ok, f"{len(checks)} checks, {len(bad)} violations; " + "; ".join(detail))
    assert ok


def test_criterion_07_corollary_and_chain_identity(suite_checks, record_criterion):
    dom = select(suite_checks, "corollary_dominates_theorem1")
    cor = select(suite_checks, "corollary")
    dominated = all(c.lhs <= c.rhs for c in dom) and all(c.status == "pass" for c in cor)
    worst = 0.0
    for xi in np.linspace(0.1, 5.0, 25):
        for R in range(min_R(xi), min_R(xi) + 20):
            for size_a, var in ((2, 0.3), (5, 2.0), (10, 7.5)):
                lhs = corollary_rhs(1.2, 2, 2, 2, xi, 2 * R, size_a, R) / math.sqrt(var)
                rhs = example_1d_rhs(1.2, xi, R, size_a, var)
                worst = max(worst, abs(lhs - rhs) / rhs)
    ok = bool(dom) and dominated and worst < 1e-12
    record_criterion(7, "corollary_rhs >= theorem1_rhs and 1D substitution", ok,
                     f"{len(dom)} pointwise comparisons, identity rel err {worst:.1e} < 1e-12")
    assert ok


def test_criterion_08_proof_steps(suite_checks, record_criterion):
    parts = {name: select(suite_checks, name) for name in
             ("a_term_identity", "contractivity", "triangle", "whitened_far_term", "decomposition_reconstruction")}
    bad = {name: sum(c.status == "fail" for c in cs) for name, cs in parts.items()}
    ok = all(parts.values()) and not any(bad.values())
    record_criterion(8, "proof-step inequalities", ok,
                     ", ".join(f"{k} {len(v)}/{bad[k]} fail" for k, v in parts.items()))
    assert ok


def test_criterion_09_summation_lemmas(record_criterion):
    grid = np.concatenate([np.linspace(0.01, 1.0, 100), np.linspace(1.0, 10.0, 181)[1:]])
    n_checks = 0
    worst = 0.0
    for xi in grid:
        ok_full = full_sum_upper(xi) <= 2 * (xi + 1) ** 3
        worst = max(worst, full_sum_upper(xi) / (2 * (xi + 1) ** 3))
        assert ok_full
        for R in range(min_R(xi), 51):
            ratio = tail_sum_upper(xi, R, scaled=True) / (10 * R**2 * (xi + 1))
            worst = max(worst, ratio)
            n_checks += 1
    ok = worst <= 1.0
    record_criterion(9, "summation lemmas", ok, f"{n_checks} (xi, R) points, worst lhs/rhs {worst:.3f} <= 1")
    assert ok


@pytest.mark.slow
def test_criterion_10_regime_behaviour(record_criterion):
    n, bj, threshold = 12, 0.05, 0.25
    m = build_chain(n, h=0.5)
    g = geometry_constants(m)
    beta = bj / g.J
    xi = ising_xi(beta, g.J)
    omega = global_state(m, beta)
    gaps, flags = [], []
    for k in (2, 4, 6, 8, 10):
        start = (n - k) // 2
        A = m.sites[start:start + k]
        sub = Subsystem(m, A)
        F = local_qfi(m, A, beta, omega)
        var = variance(assemble(m, sub.interior, support=sub.sites), omega)
        gaps.append(abs(math.sqrt(F) - math.sqrt(var)) / math.sqrt(var))
        flags.append(locality_conditions(m, A, xi, threshold).local)
    monotone = all(b <= a + 1e-6 for a, b in zip(gaps, gaps[1:]))
    flips = not flags[0] and flags[-1] and flags == sorted(flags)
    ok = monotone and flips
    record_criterion(10, "regime behaviour on a 12-spin chain", ok,
                     "gaps " + ", ".join(f"{x:.4f}" for x in gaps) + f"; local flags {flags}")
    assert ok


def test_criterion_11_reproducibility(tmp_path, record_criterion):
    csvs, jsons = [], []
    for run in ("a", "b"):
        cfg = SweepConfig(model=chain_spec(8), subsystems={"centered": [2, 4, 6]}, betas=[0.05, 0.1],
                          beta_in_J_units=True, seed=11, out_csv="run.csv", out_json="run.json",
                          schema_version=1, base_dir=str(tmp_path / run))
        run_sweep(cfg)
        csvs.append((tmp_path / run / "run.csv").read_bytes())
        doc = json.loads((tmp_path / run / "run.json").read_text())
        doc["provenance"].pop("timestamp")
        jsons.append(doc)
    ok = csvs[0] == csvs[1] and jsons[0] == jsons[1]
    record_criterion(11, "byte-identical CSV on rerun", ok, f"{len(csvs[0])} bytes, JSON equal modulo timestamp")
    assert ok
