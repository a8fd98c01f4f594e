"""Dense operator algebra on the tensor-product space of a lattice.

Operators carry their support (a tuple of sites in model order), so that
expectations with respect to a global state only ever touch the reduced
state on that support.  Thermal states are stored in spectral form; the
exponential is taken through a Hermitian eigendecomposition after shifting
the exponent so that its largest entry is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .lattice import LatticeModel

__all__ = [
    "EmbeddedOperator",
    "SpectralState",
    "embed",
    "assemble",
    "hamiltonian",
    "local_operator",
    "gibbs",
    "spectral_state",
    "partial_trace",
    "reduce_matrix",
    "reduced_density",
    "expectation",
    "variance",
    "connected_correlator",
    "anticommutator",
]

PSD_TOL = 1e-12
TRACE_TOL = 1e-10
IMAG_TOL = 1e-10
VAR_TOL = 1e-10
# reduced states up to this dimension are memoized on their SpectralState
CACHE_MAX_DIM = 256


@dataclass(frozen=True, eq=False)
class EmbeddedOperator:
    """A matrix acting on ``support`` and as the identity elsewhere."""

    model: LatticeModel
    support: tuple
    matrix: np.ndarray

    def __post_init__(self):
        support = self.model.canonical(self.support) if self.support else ()
        if tuple(support) != tuple(self.support):
            raise ValueError("support must be listed in model site order")
        d = math.prod(self.model.dims_of(support))
        if self.matrix.shape != (d, d):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match support dimension {d}")

    @property
    def dims(self) -> tuple:
        return self.model.dims_of(self.support)

    def on(self, sites: Sequence) -> np.ndarray:
        """Matrix of this operator on the larger support ``sites``."""
        sites = self.model.canonical(sites)
        return embed(self.matrix, self.support, sites, self.model.dims_of(sites))

    def full(self) -> np.ndarray:
        return self.on(self.model.sites)

    def __add__(self, other: "EmbeddedOperator") -> "EmbeddedOperator":
        union = self.model.canonical(set(self.support) | set(other.support))
        return EmbeddedOperator(self.model, union, self.on(union) + other.on(union))

    def __mul__(self, c) -> "EmbeddedOperator":
        return EmbeddedOperator(self.model, self.support, c * self.matrix)

    __rmul__ = __mul__


def embed(matrix: np.ndarray, support: Sequence, target: Sequence, target_dims: Sequence) -> np.ndarray:
    """Embed ``matrix`` (on ``support``) into the space of ``target``.

    ``support`` must be a subset of ``target``; both are read in the given
    order, and ``target_dims`` lists the local dimensions along ``target``.
    """
    support, target = list(support), list(target)
    if support == target:
        return np.asarray(matrix)
    pos = {s: i for i, s in enumerate(target)}
    try:
        sup_pos = [pos[s] for s in support]
    except KeyError as exc:
        raise ValueError(f"support site {exc.args[0]!r} not in target") from None
    rest_pos = [i for i in range(len(target)) if i not in set(sup_pos)]
    dims = list(target_dims)
    d_rest = math.prod(dims[i] for i in rest_pos)
    big = np.kron(matrix, np.eye(d_rest, dtype=matrix.dtype))
    n = len(target)
    order = sup_pos + rest_pos
    shape = [dims[i] for i in order]
    t = big.reshape(shape + shape)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    D = math.prod(dims)
    return np.ascontiguousarray(t.reshape(D, D))


def local_operator(model: LatticeModel, sites: Sequence, matrix) -> EmbeddedOperator:
    """Wrap ``matrix`` given in the order of ``sites`` as an operator on the model."""
    sites = list(sites)
    canon = model.canonical(sites)
    matrix = np.asarray(matrix)
    if sites != list(canon):
        # reorder tensor factors into model order
        dims = model.dims_of(sites)
        n = len(sites)
        perm = [sites.index(s) for s in canon]
        t = matrix.reshape(list(dims) * 2).transpose(perm + [n + p for p in perm])
        d = math.prod(dims)
        matrix = t.reshape(d, d)
    return EmbeddedOperator(model, canon, np.ascontiguousarray(matrix))


def assemble(model: LatticeModel, edges: Iterable, support: Sequence | None = None) -> EmbeddedOperator:
    """Sum of the Hamiltonian terms on ``edges``.

    The result lives on the union of the edge supports unless a larger
    ``support`` is requested.  An empty edge set gives the zero operator.
    """
    edges = list(edges)
    sites = set(s for e in edges for s in e)
    if support is not None:
        extra = sites - set(support)
        if extra:
            raise ValueError(f"edges reach outside the requested support: {sorted(extra, key=model.index.get)}")
        sites = set(support)
    union = model.canonical(sites)
    dims = model.dims_of(union)
    d = math.prod(dims)
    dtype = np.result_type(float, *[model.terms[e].dtype for e in edges]) if edges else float
    out = np.zeros((d, d), dtype=dtype)
    for e in edges:
        if e not in model.terms:
            raise KeyError(f"{e} is not an edge of the model")
        out += embed(model.terms[e], e, union, dims)
    return EmbeddedOperator(model, union, out)


def hamiltonian(model: LatticeModel) -> EmbeddedOperator:
    """The full Hamiltonian on every site of the model."""
    return assemble(model, model.edges, support=model.sites)


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Eigendecomposition of a density operator or thermal state.

    ``eigenvalues`` are sorted nonincreasing.  ``energies`` holds the
    Hamiltonian eigenvalue paired with each column when the state is a
    Gibbs state; ``support``/``dims`` locate the state on the lattice.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    beta: float | None = None
    trace_normalized: bool = True
    support: tuple | None = None
    dims: tuple | None = None
    energies: np.ndarray | None = None
    _reduced: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def matrix(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def power(self, exponent: float) -> np.ndarray:
        """Matrix power on the support of the state."""
        p = self.eigenvalues
        if np.any(p <= 0) and exponent < 0:
            raise ValueError("negative power of a rank-deficient state")
        v = self.eigenvectors
        return (v * p**exponent) @ v.conj().T

    def mean_energy(self) -> float:
        if self.energies is None:
            raise ValueError("state carries no energies")
        return float(np.dot(self.eigenvalues, self.energies))


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, EmbeddedOperator):
        return op.matrix
    return np.asarray(op)


def _check_hermitian(m: np.ndarray, what: str = "operator"):
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.conj().T)) > 1e-10 * scale:
        raise ValueError(f"{what} is not Hermitian")


def gibbs(H, beta: float) -> SpectralState:
    """Thermal state ``exp(-beta H) / Tr exp(-beta H)`` in spectral form."""
    m = _as_matrix(H)
    _check_hermitian(m, "Hamiltonian")
    energies, vecs = np.linalg.eigh(m)
    x = -beta * energies
    x -= x.max()
    w = np.exp(x)
    p = w / w.sum()
    order = np.argsort(-p, kind="stable")
    support = dims = None
    if isinstance(H, EmbeddedOperator):
        support, dims = H.support, H.dims
    return SpectralState(
        eigenvalues=p[order],
        eigenvectors=vecs[:, order],
        beta=float(beta),
        support=support,
        dims=dims,
        energies=energies[order],
    )


def spectral_state(rho: np.ndarray, support=None, dims=None, beta=None) -> SpectralState:
    """Diagonalize a density matrix, clamping round-off negativity.

    Eigenvalues in ``[-1e-12, 0)`` are set to zero and the spectrum is
    renormalized; anything more negative is rejected.
    """
    rho = np.asarray(rho)
    _check_hermitian(rho, "density matrix")
    p, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    if p.min() < -PSD_TOL:
        raise ValueError(f"density matrix has eigenvalue {p.min():.3e} below -{PSD_TOL}")
    p = np.clip(p, 0.0, None)
    tr = p.sum()
    if abs(tr - 1) > TRACE_TOL:
        raise ValueError(f"density matrix has trace {tr!r}")
    p = p / tr
    order = np.argsort(-p, kind="stable")
    return SpectralState(p[order], v[:, order], beta=beta, support=support, dims=dims)


def partial_trace(rho: np.ndarray, keep: Iterable[int], dims: Sequence[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep``.

    ``dims`` are the local dimensions of the factors of ``rho`` and ``keep``
    holds factor positions.  The kept factors stay in their original order.
    """
    dims = list(dims)
    n = len(dims)
    keep = sorted(set(keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep positions {keep} outside 0..{n - 1}")
    D = math.prod(dims)
    rho = np.asarray(rho)
    if rho.shape != (D, D):
        raise ValueError(f"matrix of shape {rho.shape} does not match dims {dims}")
    drop = [i for i in range(n) if i not in keep]
    dk = math.prod(dims[i] for i in keep)
    dd = math.prod(dims[i] for i in drop)
    t = rho.reshape(dims + dims).transpose(keep + drop + [n + i for i in keep] + [n + i for i in drop])
    return np.einsum("ijkj->ik", t.reshape(dk, dd, dk, dd))


def reduce_matrix(model: LatticeModel, matrix: np.ndarray, support: Sequence, keep: Iterable) -> np.ndarray:
    """Partial trace of an operator on ``support`` down to the sites ``keep``."""
    support = list(support)
    pos = {s: i for i, s in enumerate(support)}
    try:
        idx = [pos[s] for s in keep]
    except KeyError as exc:
        raise ValueError(f"site {exc.args[0]!r} is not in the operator support") from None
    return partial_trace(matrix, idx, model.dims_of(support))


def reduced_density(state: SpectralState, keep: Iterable, model: LatticeModel, weights=None) -> np.ndarray:
    """``Tr_B sum_k w_k |k><k|`` straight from the spectral form.

    With ``weights=None`` the eigenvalues are used and the result is the
    reduced state on ``keep``; other weights give reduced images of any
    operator diagonal in the same basis.
    """
    if state.support is None:
        raise ValueError("state has no lattice support")
    support = list(state.support)
    keep = model.canonical(keep)
    pos = {s: i for i, s in enumerate(support)}
    try:
        kpos = [pos[s] for s in keep]
    except KeyError as exc:
        raise ValueError(f"site {exc.args[0]!r} is not in the state support") from None
    cacheable = weights is None and math.prod(model.dims_of(keep)) <= CACHE_MAX_DIM
    if cacheable and keep in state._reduced:
        return state._reduced[keep].copy()
    w = state.eigenvalues if weights is None else np.asarray(weights)
    vecs = state.eigenvectors
    if len(kpos) == len(support):
        out = (vecs * w) @ vecs.conj().T
    else:
        dims = list(state.dims)
        K = vecs.shape[1]
        rest = [i for i in range(len(dims)) if i not in set(kpos)]
        dk = math.prod(dims[i] for i in kpos)
        t = vecs.reshape(dims + [K]).transpose(kpos + rest + [len(dims)]).reshape(dk, -1)
        tw = (t.reshape(dk, -1, K) * w).reshape(dk, -1)
        out = tw @ t.conj().T
    if cacheable:
        state._reduced[keep] = out.copy()
    return out


def _state_on(state, support: tuple, model: LatticeModel | None) -> np.ndarray:
    """Density matrix of ``state`` restricted to ``support``."""
    if isinstance(state, SpectralState):
        if state.support is None or model is None:
            return state.matrix()
        return reduced_density(state, support, model)
    return np.asarray(state)


def _operator_and_state(O, state):
    if isinstance(O, EmbeddedOperator):
        model = O.model
        if isinstance(state, SpectralState) and state.support is not None:
            if not set(O.support) <= set(state.support):
                raise ValueError("operator support is not inside the state support")
            return O.matrix, _state_on(state, O.support, model)
        rho = _state_on(state, O.support, None)
        return O.full() if rho.shape[0] == model.dim else O.matrix, rho
    m = np.asarray(O)
    rho = _state_on(state, None, None)
    return m, rho


def _real(z: complex, scale: float) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, scale):
        raise ValueError(f"expectation has imaginary part {z.imag:.3e}")
    return float(z.real)


def expectation(O, state) -> float:
    """``Tr[O rho]`` for a Hermitian operator."""
    m, rho = _operator_and_state(O, state)
    if m.shape != rho.shape:
        raise ValueError(f"operator shape {m.shape} does not match state shape {rho.shape}")
    z = complex(np.sum(m.T * rho))
    return _real(z, abs(z))


def variance(O, state) -> float:
    """``<O^2> - <O>^2``, computed on the mean-centred operator and clamped at 0."""
    m, rho = _operator_and_state(O, state)
    if m.shape != rho.shape:
        raise ValueError(f"operator shape {m.shape} does not match state shape {rho.shape}")
    mean = _real(complex(np.sum(m.T * rho)), float(np.abs(m).max()) if m.size else 1.0)
    c = m - mean * np.eye(m.shape[0])
    z = complex(np.sum((c @ c).T * rho))
    var = _real(z, abs(z))
    if var < -VAR_TOL * max(1.0, mean**2):
        raise ValueError(f"negative variance {var:.3e}")
    return max(var, 0.0)


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def connected_correlator(O_X: EmbeddedOperator, O_Y: EmbeddedOperator, omega: SpectralState) -> float:
    """``<O_X O_Y> - <O_X><O_Y>`` in the global state ``omega``.

    For observables on a common support that do not commute the real part
    is returned, i.e. the symmetrized correlator.
    """
    model = O_X.model
    union = model.canonical(set(O_X.support) | set(O_Y.support))
    rho = reduced_density(omega, union, model)
    x, y = O_X.on(union), O_Y.on(union)
    mx = np.sum(x.T * rho).real
    my = np.sum(y.T * rho).real
    xy = np.sum((x @ y).T * rho)
    return float(xy.real - mx * my)
