"""
Local thermometry on an Ising chain
===================================

How much does a block of spins know about the temperature?  The quantum
Fisher information of the block's reduced state, F, answers that.  Here it
is compared with two naive guesses: the variance of the block's own
Hamiltonian in the true state, and the same variance in a Gibbs state that
ignores the rest of the chain.
"""

import numpy as np

import localqfi as lq

# ten spins, open ends, transverse field h = 0.5
chain = lq.build_chain(10, h=0.5)
g = lq.geometry_constants(chain)
print(f"J = {g.J:.4f}, M = {g.M}, N = {g.N}, N_b = {g.N_b}")

beta = 0.1 / g.J
omega = lq.global_state(chain, beta)  # one diagonalization, reused below

print(f"\nbeta J = 0.1,  xi = {lq.bounds.ising_xi(beta, g.J):.3f}")
print(f"{'|A|':>4} {'F':>10} {'Var H_A':>10} {'canonical':>10} {'rel gap':>9}")
for k in range(2, 11, 2):
    start = (10 - k) // 2
    A = chain.sites[start:start + k]
    sub = lq.Subsystem(chain, A)
    F = lq.local_qfi(chain, A, beta, omega)
    var = lq.variance(lq.assemble(chain, sub.interior, support=sub.sites), omega)
    can = lq.canonical_qfi(chain, A, beta)
    gap = abs(np.sqrt(F) - np.sqrt(var)) / np.sqrt(var)
    print(f"{k:>4} {F:>10.5f} {var:>10.5f} {can:>10.5f} {gap:>9.4f}")

# for the whole chain the three numbers coincide: F is the energy variance
print("\nwhole chain:", lq.local_qfi(chain, chain.sites, beta, omega),
      lq.variance(lq.hamiltonian(chain), omega))

# the fidelity between neighbouring reduced states gives the same F
A = chain.sites[3:7]
print("fidelity estimate:", lq.qfi_fd_oracle(chain, A, beta, delta=1e-4),
      " analytic:", lq.local_qfi(chain, A, beta, omega))

# best achievable mean-square error of a temperature estimate from A alone
print("Cramer-Rao precision 1/F:", lq.cramer_rao_precision(lq.local_qfi(chain, A, beta, omega)))
