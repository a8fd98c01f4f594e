"""Local quantum thermal susceptibility of a subsystem.

The susceptibility is the quantum Fisher information of the reduced thermal
states ``rho_A(beta) = Tr_B omega(beta)`` with respect to ``beta``, i.e. the
squared Bures norm of ``d rho_A / d beta`` in the state ``rho_A``.  The
derivative is taken analytically from the spectral form of the global Gibbs
state; a fidelity-based finite-difference estimate serves as an independent
check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeModel, Subsystem
from .operators import (
    SpectralState,
    anticommutator,
    assemble,
    gibbs,
    hamiltonian,
    reduce_matrix,
    reduced_density,
    spectral_state,
    variance,
)

__all__ = [
    "RANK_EPS",
    "RankDeficientError",
    "DerivativeDecomposition",
    "global_state",
    "reduced_state",
    "bures_norm_sq",
    "bures_norm",
    "whitened_quadratic",
    "whitened_norm",
    "drho_dbeta",
    "drho_fd",
    "edge_images",
    "decompose",
    "local_qfi",
    "fidelity",
    "qfi_fd_oracle",
    "canonical_qfi",
    "cramer_rao_precision",
]

RANK_EPS = 1e-12


class RankDeficientError(ValueError):
    """The reduced state is too close to singular for the requested quantity."""


def global_state(model: LatticeModel, beta: float) -> SpectralState:
    """Gibbs state of the full Hamiltonian, with energies attached."""
    return gibbs(hamiltonian(model), beta)


def _omega(model, beta, omega):
    if omega is None:
        return global_state(model, beta)
    if omega.beta is not None and omega.beta != beta:
        raise ValueError(f"cached state is at beta={omega.beta}, requested {beta}")
    return omega


def reduced_state(model: LatticeModel, A, beta: float, omega: SpectralState | None = None) -> SpectralState:
    """``Tr_B omega(beta)`` on the sites ``A``, diagonalized."""
    omega = _omega(model, beta, omega)
    sites = model.canonical(A)
    rho = reduced_density(omega, sites, model)
    return spectral_state(rho, support=sites, dims=model.dims_of(sites), beta=beta)


def _spectral(rho) -> SpectralState:
    return rho if isinstance(rho, SpectralState) else spectral_state(rho)


def bures_norm_sq(O, rho, eps_rank: float = RANK_EPS) -> float:
    """``sum_ij 2 |<i|O|j>|^2 / (p_i + p_j)`` in the eigenbasis of ``rho``.

    Pairs with ``p_i + p_j < eps_rank`` are dropped, which restricts the sum
    to the support of ``rho``.
    """
    rho = _spectral(rho)
    O = np.asarray(O)
    if O.shape != (rho.dim, rho.dim):
        raise ValueError(f"operator shape {O.shape} does not match state dimension {rho.dim}")
    v = rho.eigenvectors
    o = v.conj().T @ O @ v
    p = rho.eigenvalues
    denom = p[:, None] + p[None, :]
    keep = denom >= eps_rank
    return float(np.sum(2 * np.abs(o[keep]) ** 2 / denom[keep]))


def bures_norm(O, rho, eps_rank: float = RANK_EPS) -> float:
    return math.sqrt(bures_norm_sq(O, rho, eps_rank))


def _inv_sqrt(rho: SpectralState, eps: float) -> np.ndarray:
    if rho.eigenvalues.min() < eps:
        raise RankDeficientError(f"smallest eigenvalue {rho.eigenvalues.min():.3e} below {eps}")
    return rho.power(-0.5)


def whitened_quadratic(O, rho, eps: float = RANK_EPS) -> float:
    """``Tr[rho^-1/2 O rho^-1/2 O]``, an upper bound on the squared Bures norm."""
    rho = _spectral(rho)
    s = _inv_sqrt(rho, eps)
    O = np.asarray(O)
    return float(np.trace(s @ O @ s @ O).real)


def whitened_norm(O, rho, eps: float = RANK_EPS) -> float:
    """Operator norm of ``rho^-1/2 O rho^-1/2``."""
    rho = _spectral(rho)
    s = _inv_sqrt(rho, eps)
    return float(np.linalg.norm(s @ np.asarray(O) @ s, 2))


def drho_dbeta(model: LatticeModel, A, beta: float, omega: SpectralState | None = None) -> np.ndarray:
    """Analytic ``d/dbeta Tr_B omega(beta)``.

    Since ``[H, omega] = 0`` the derivative of the global state is
    ``(<H> - H) omega``, which is diagonal in the energy basis.
    """
    omega = _omega(model, beta, omega)
    p = omega.eigenvalues
    w = (omega.mean_energy() - omega.energies) * p
    d = reduced_density(omega, model.canonical(A), model, weights=w)
    return (d + d.conj().T) / 2


def drho_fd(model: LatticeModel, A, beta: float, delta: float = 1e-5, richardson: bool = False) -> np.ndarray:
    """Central finite difference of ``rho_A`` in ``beta``, error O(delta**2).

    With ``richardson=True`` the steps ``delta`` and ``2 delta`` are combined
    to cancel the leading error term, leaving O(delta**4).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")

    def central(h):
        return (reduced_state(model, A, beta + h).matrix() - reduced_state(model, A, beta - h).matrix()) / (2 * h)

    d = central(delta)
    if richardson:
        d = (4 * d - central(2 * delta)) / 3
    return d


@dataclass
class DerivativeDecomposition:
    """Split of ``d rho_A / d beta`` by where the Hamiltonian terms sit.

    ``a_term`` comes from the interior edges of A, ``c_term`` from the shell
    ``C_R`` and ``b_terms[X]`` from each far edge ``X`` in ``F_R``.
    """

    a_term: np.ndarray
    c_term: np.ndarray
    b_terms: dict = field(default_factory=dict)
    R: int = 1
    rho: SpectralState | None = None

    def total(self) -> np.ndarray:
        out = self.a_term + self.c_term
        for b in self.b_terms.values():
            out = out + b
        return out


def _centred_image(model, omega, edges, A) -> np.ndarray:
    """``Tr_B {<H_G> - H_G, omega} / 2`` for the edge set ``G``."""
    dA = int(np.prod(model.dims_of(A)))
    if not edges:
        return np.zeros((dA, dA))
    H_G = assemble(model, edges)
    T = model.canonical(set(A) | set(H_G.support))
    rho_T = reduced_density(omega, T, model)
    h = H_G.on(T)
    mean = np.sum(h.T * rho_T).real
    c = mean * np.eye(h.shape[0]) - h
    return reduce_matrix(model, anticommutator(c, rho_T) / 2, T, A)


def edge_images(model: LatticeModel, A, beta: float, omega: SpectralState | None = None) -> dict:
    """``Tr_B {<H_X> - H_X, omega} / 2`` on A for every edge not inside A.

    The map is linear in the term, so the shell and far contributions of
    any layer width are sums of these per-edge images.
    """
    omega = _omega(model, beta, omega)
    sub = Subsystem(model, A)
    inside = set(sub.interior)
    return {X: _centred_image(model, omega, [X], sub.sites) for X in model.edges if X not in inside}


def decompose(model: LatticeModel, A, beta: float, R: int, omega: SpectralState | None = None,
              images: dict | None = None) -> DerivativeDecomposition:
    """Interior, shell and far-edge parts of ``d rho_A / d beta`` at layer width R.

    ``images`` may carry precomputed :func:`edge_images` to reuse across R.
    """
    if R < 1:
        raise ValueError("R must be a positive integer")
    omega = _omega(model, beta, omega)
    sub = Subsystem(model, A)
    rho = reduced_density(omega, sub.sites, model)
    H_A = assemble(model, sub.interior, support=sub.sites).matrix
    mean = np.sum(H_A.T * rho).real
    a = anticommutator(mean * np.eye(H_A.shape[0]) - H_A, rho) / 2
    if images is None:
        c = _centred_image(model, omega, sub.shell(R), sub.sites)
        b = {X: _centred_image(model, omega, [X], sub.sites) for X in sub.far(R)}
    else:
        c = np.zeros_like(a)
        for X in sub.shell(R):
            c = c + images[X]
        b = {X: images[X] for X in sub.far(R)}
    state = spectral_state(rho, support=sub.sites, dims=model.dims_of(sub.sites), beta=beta)
    return DerivativeDecomposition(a_term=a, c_term=c, b_terms=b, R=R, rho=state)


def local_qfi(model: LatticeModel, A, beta: float, omega: SpectralState | None = None) -> float:
    """Quantum Fisher information of ``rho_A(beta)`` with respect to ``beta``."""
    omega = _omega(model, beta, omega)
    rho = reduced_state(model, A, beta, omega)
    return bures_norm_sq(drho_dbeta(model, A, beta, omega), rho)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    The squared-trace convention is used, so identical states give 1.
    """
    r, s = _spectral(rho), _spectral(sigma)
    root = np.linalg.svd(r.power(0.5) @ s.power(0.5), compute_uv=False).sum()
    return float(root**2)


def qfi_fd_oracle(model: LatticeModel, A, beta: float, delta: float = 1e-4, rank_tol: float = 1e-10) -> float:
    """QFI from the fidelity of the reduced states at ``beta -/+ delta``.

    Uses ``F ~ 8 (1 - sqrt(fid)) / (2 delta)**2``, accurate to O(delta**2)
    for full-rank states.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    centre = reduced_state(model, A, beta)
    if centre.eigenvalues.min() < rank_tol:
        raise RankDeficientError("reduced state is rank deficient; fidelity oracle undefined")
    lo = reduced_state(model, A, beta - delta)
    hi = reduced_state(model, A, beta + delta)
    root = math.sqrt(fidelity(lo, hi))
    return max(8 * (1 - root) / (2 * delta) ** 2, 0.0)


def canonical_qfi(model: LatticeModel, A, beta: float) -> float:
    """Variance of ``H_A`` in its own Gibbs state, ignoring the environment."""
    sub = Subsystem(model, A)
    if not sub.interior:
        raise ValueError("subsystem contains no edge; local Hamiltonian is empty")
    H_A = assemble(model, sub.interior, support=sub.sites)
    return variance(H_A, gibbs(H_A, beta))


def cramer_rao_precision(F: float) -> float:
    """Smallest mean-square error ``1/F`` of an unbiased temperature estimate.

    Returns ``inf`` for an uninformative state (``F == 0``).
    """
    if F < 0:
        raise ValueError("Fisher information must be nonnegative")
    if F == 0:
        return math.inf
    return 1.0 / F
