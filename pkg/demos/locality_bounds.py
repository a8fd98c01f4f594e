"""
How close is F to the local energy variance?
============================================

The gap |sqrt(F) - sqrt(Var H_A)| is controlled by the edges just outside
the block (the shell C_R) plus an exponentially small tail.  This script
walks through the pieces for one block of an eight-spin chain.
"""

import math

import localqfi as lq
from localqfi import bounds

chain = lq.build_chain(8, h=0.5)
g = lq.geometry_constants(chain)
beta = 0.1 / g.J
xi = bounds.ising_xi(beta, g.J)
omega = lq.global_state(chain, beta)

A = [2, 3, 4, 5]
sub = lq.Subsystem(chain, A)
print("interior edges:", sub.interior)
print("boundary edges:", sub.boundary)

F = lq.local_qfi(chain, A, beta, omega)
var_a = lq.variance(lq.assemble(chain, sub.interior, support=sub.sites), omega)
gap = abs(math.sqrt(F) - math.sqrt(var_a))
print(f"\nF = {F:.6f}, Var H_A = {var_a:.6f}, gap = {gap:.3e}")

# the derivative of rho_A splits into interior, shell and far-edge parts
R0 = bounds.min_R(xi)
dec = lq.decompose(chain, A, beta, R0, omega)
rho = dec.rho
print(f"\nat R = {R0}: shell edges {sub.shell(R0)}, far edges {list(dec.b_terms)}")
print("||A-term||   =", lq.thermometry.bures_norm(dec.a_term, rho), "= sqrt(Var H_A) =", math.sqrt(var_a))
print("||C-term||   =", lq.thermometry.bures_norm(dec.c_term, rho))
print("far terms    =", [round(lq.thermometry.bures_norm(b, rho), 6) for b in dec.b_terms.values()])

# the closed-form bounds, for every admissible layer width
print(f"\nxi = {xi:.3f}, admissible R >= {R0}")
print(f"{'R':>3} {'|C_R|':>6} {'thm1':>10} {'corollary':>10}")
for R in range(R0, chain.diameter + 1):
    shell = sub.shell(R)
    s = math.sqrt(lq.variance(lq.assemble(chain, shell), omega))
    t1 = bounds.theorem1_rhs(s, g.J, g.M, len(A), g.N_b, xi, R)
    c = bounds.corollary_rhs(g.J, g.M, g.N, g.N_b, xi, len(shell), len(A), R)
    print(f"{R:>3} {len(shell):>6} {t1:>10.3f} {c:>10.3f}")

report = bounds.bound_report(chain, A, beta, bounds.XiProvider.ising(g.J), omega=omega, constants=g)
print(f"\noptimal R = {report.R_star}, satisfied = {report.satisfied}")

# the bounds only bite for large blocks; the raw ratios say how far we are
cond = bounds.locality_conditions(chain, A, xi)
print(f"ratio |C_xi|/|A| = {cond.ratio_edges:.3f}, xi |A_b|/|A| = {cond.ratio_surface:.3f}, local = {cond.local}")
