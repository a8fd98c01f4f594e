"""Interaction hypergraphs of locally interacting spin lattices.

A :class:`LatticeModel` is a finite set of sites, a list of edges (site
subsets) and one Hermitian term per edge, so that ``H = sum_X H_X``.  All
geometric quantities consumed by the locality bounds live here: the edge
distance between sites and sets, boundary edge sets, the shell ``C_R`` and
far set ``F_R`` around a subsystem, and the constants ``J, N, N_b, M``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "UNREACHABLE",
    "DEFAULT_MAX_DIM",
    "LatticeModel",
    "Subsystem",
    "GeometryConstants",
    "site_distance",
    "set_distance",
    "edge_set_distance",
    "interior_edges",
    "boundary_edges",
    "shell_edges",
    "far_edges",
    "geometry_constants",
    "growth_counts",
    "build_chain",
    "build_square",
    "ising_terms",
    "PAULI",
]

#: Distance between sites that no edge chain connects.
UNREACHABLE = math.inf

DEFAULT_MAX_DIM = 2**14
HERMITIAN_TOL = 1e-12

PAULI = {
    "i": np.eye(2),
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "y": np.array([[0.0, -1j], [1j, 0.0]]),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}

Site = Hashable
Edge = tuple


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """Sites, edges and per-edge Hamiltonian terms.

    Parameters
    ----------
    sites : sequence of hashable
        Site identifiers.  Their order fixes the tensor-factor order of the
        global Hilbert space.
    edges : sequence of site collections
        Supports of the Hamiltonian terms.  Each edge is canonicalized to a
        tuple sorted by site order.
    terms : mapping or sequence
        One Hermitian matrix per edge, either aligned with ``edges`` or keyed
        by edge.  The matrix basis follows the canonical edge order.
    local_dims : int or sequence of int
        Local Hilbert-space dimension of every site (default 2).
    max_dim : int
        Cap on the total Hilbert-space dimension.
    """

    sites: tuple
    edges: tuple
    terms: Mapping
    local_dims: tuple = field(default=None)
    max_dim: int = DEFAULT_MAX_DIM

    def __init__(self, sites, edges, terms, local_dims=2, max_dim=DEFAULT_MAX_DIM):
        sites = tuple(sites)
        if len(set(sites)) != len(sites):
            raise ValueError("duplicate site identifiers")
        if not sites:
            raise ValueError("a lattice needs at least one site")
        index = {s: i for i, s in enumerate(sites)}
        if isinstance(local_dims, (int, np.integer)):
            dims = (int(local_dims),) * len(sites)
        else:
            dims = tuple(int(d) for d in local_dims)
        if len(dims) != len(sites) or any(d < 1 for d in dims):
            raise ValueError("local_dims must give a positive dimension per site")
        total = math.prod(dims)
        if total > max_dim:
            raise ValueError(f"total Hilbert dimension {total} exceeds the cap {max_dim}")

        canon = []
        for e in edges:
            e = tuple(e)
            if not e:
                raise ValueError("edges must be nonempty")
            for s in e:
                if s not in index:
                    raise KeyError(f"edge {e} references unknown site {s!r}")
            if len(set(e)) != len(e):
                raise ValueError(f"edge {e} repeats a site")
            canon.append(tuple(sorted(e, key=index.__getitem__)))
        if len(set(canon)) != len(canon):
            raise ValueError("duplicate edge supports; merge their terms first")

        if isinstance(terms, Mapping):
            keyed = {}
            for key, mat in terms.items():
                k = tuple(sorted(key, key=index.__getitem__))
                keyed[k] = mat
            missing = [e for e in canon if e not in keyed]
            if missing or len(keyed) != len(canon):
                raise ValueError(f"terms do not match edges (missing {missing})")
            mats = [keyed[e] for e in canon]
        else:
            mats = list(terms)
            if len(mats) != len(canon):
                raise ValueError("need exactly one term per edge")

        checked = {}
        for e, mat in zip(canon, mats):
            mat = np.asarray(mat)
            if not np.iscomplexobj(mat):
                mat = mat.astype(float)
            d = math.prod(dims[index[s]] for s in e)
            if mat.shape != (d, d):
                raise ValueError(f"term on {e} has shape {mat.shape}, expected {(d, d)}")
            if mat.size and np.max(np.abs(mat - mat.conj().T)) >= HERMITIAN_TOL:
                raise ValueError(f"term on {e} is not Hermitian")
            mat = mat.copy()
            mat.setflags(write=False)
            checked[e] = mat

        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "edges", tuple(canon))
        object.__setattr__(self, "terms", checked)
        object.__setattr__(self, "local_dims", dims)
        object.__setattr__(self, "max_dim", max_dim)

    def __repr__(self):
        return f"LatticeModel(sites={len(self.sites)}, edges={len(self.edges)}, dim={self.dim})"

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def dim(self) -> int:
        return math.prod(self.local_dims)

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.sites)}

    def site_index(self, site) -> int:
        try:
            return self.index[site]
        except KeyError:
            raise KeyError(f"unknown site {site!r}") from None

    def canonical(self, sites: Iterable) -> tuple:
        """Sort a site collection into model order, rejecting unknown sites."""
        idx = {self.site_index(s): s for s in sites}
        return tuple(idx[i] for i in sorted(idx))

    def dims_of(self, sites: Iterable) -> tuple:
        return tuple(self.local_dims[self.site_index(s)] for s in sites)

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """All-pairs site distances; ``inf`` marks unreachable pairs."""
        n = self.n_sites
        nbrs = [set() for _ in range(n)]
        for e in self.edges:
            ids = [self.index[s] for s in e]
            for i in ids:
                nbrs[i].update(ids)
        dist = np.full((n, n), UNREACHABLE)
        # Two sites sharing an edge are one edge apart, so the edge-chain
        # distance is the BFS distance on the site adjacency graph.
        for src in range(n):
            dist[src, src] = 0
            queue = deque([src])
            while queue:
                u = queue.popleft()
                for v in nbrs[u]:
                    if dist[src, v] == UNREACHABLE:
                        dist[src, v] = dist[src, u] + 1
                        queue.append(v)
        dist.setflags(write=False)
        return dist

    @cached_property
    def diameter(self) -> int:
        """Largest finite site distance."""
        d = self.distance_matrix
        return int(d[np.isfinite(d)].max())

    def is_connected(self) -> bool:
        return bool(np.all(np.isfinite(self.distance_matrix)))


def _as_int(d):
    return d if d == UNREACHABLE else int(d)


def site_distance(model: LatticeModel, x, y):
    """Length of the shortest chain of pairwise-intersecting edges from x to y.

    Returns 0 when ``x == y`` and :data:`UNREACHABLE` when no chain exists.
    """
    return _as_int(model.distance_matrix[model.site_index(x), model.site_index(y)])


def set_distance(model: LatticeModel, X: Iterable, Y: Iterable):
    """Minimum site distance between two nonempty site sets (0 if they meet)."""
    ix = [model.site_index(s) for s in X]
    iy = [model.site_index(s) for s in Y]
    if not ix or not iy:
        raise ValueError("set_distance needs nonempty site sets")
    return _as_int(model.distance_matrix[np.ix_(ix, iy)].min())


def edge_set_distance(model: LatticeModel, A: Iterable) -> dict:
    """Map every edge to its distance from the site set ``A``."""
    ia = [model.site_index(s) for s in A]
    if not ia:
        raise ValueError("edge distances need a nonempty site set")
    to_a = model.distance_matrix[:, ia].min(axis=1)
    return {e: _as_int(min(to_a[model.index[s]] for s in e)) for e in model.edges}


def interior_edges(model: LatticeModel, A: Iterable) -> tuple:
    """Edges contained in ``A``."""
    a = set(model.canonical(A))
    return tuple(e for e in model.edges if a.issuperset(e))


def boundary_edges(model: LatticeModel, A: Iterable) -> tuple:
    """Edges overlapping both ``A`` and its complement."""
    a = set(model.canonical(A))
    return tuple(e for e in model.edges if a.intersection(e) and not a.issuperset(e))


def shell_edges(model: LatticeModel, A: Iterable, R: int) -> tuple:
    """Edges not contained in ``A`` whose distance from ``A`` is below ``R``."""
    if R < 1:
        raise ValueError("R must be a positive integer")
    a = set(model.canonical(A))
    dist = edge_set_distance(model, a)
    return tuple(e for e in model.edges if not a.issuperset(e) and dist[e] < R)


def far_edges(model: LatticeModel, A: Iterable, R: int) -> tuple:
    """Edges at distance at least ``R`` from ``A``."""
    if R < 1:
        raise ValueError("R must be a positive integer")
    dist = edge_set_distance(model, A)
    return tuple(e for e in model.edges if dist[e] >= R)


@dataclass(frozen=True, eq=False)
class Subsystem:
    """A site subset ``A`` of a lattice together with its derived edge sets."""

    model: LatticeModel
    sites: tuple

    def __init__(self, model: LatticeModel, sites: Iterable):
        sites = model.canonical(sites)
        if not sites:
            raise ValueError("subsystem must be nonempty")
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "sites", sites)

    def __len__(self):
        return len(self.sites)

    @cached_property
    def complement(self) -> tuple:
        a = set(self.sites)
        return tuple(s for s in self.model.sites if s not in a)

    @cached_property
    def interior(self) -> tuple:
        return interior_edges(self.model, self.sites)

    @cached_property
    def boundary(self) -> tuple:
        return boundary_edges(self.model, self.sites)

    @cached_property
    def edge_distance(self) -> dict:
        return edge_set_distance(self.model, self.sites)

    def shell(self, R: int) -> tuple:
        return shell_edges(self.model, self.sites, R)

    def far(self, R: int) -> tuple:
        return far_edges(self.model, self.sites, R)


@dataclass(frozen=True)
class GeometryConstants:
    """Interaction strength and lattice-growth constants of a model.

    ``J`` is the largest term norm, ``N`` the largest edge size, ``N_b`` the
    largest boundary edge set of an edge and ``M`` the smallest constant with
    ``#{Y : d(x, Y) = n} <= M (n + 1)**2`` for all sites and radii.
    """

    J: float
    N: int
    N_b: int
    M: float

    def with_J(self, J: float) -> "GeometryConstants":
        return GeometryConstants(J=J, N=self.N, N_b=self.N_b, M=self.M)


def growth_counts(model: LatticeModel) -> np.ndarray:
    """``counts[x, n]`` = number of edges at distance exactly ``n`` from site x."""
    dist = model.distance_matrix
    counts = np.zeros((model.n_sites, model.diameter + 1), dtype=int)
    for e in model.edges:
        cols = [model.index[s] for s in e]
        d_to_edge = dist[:, cols].min(axis=1)
        for x, d in enumerate(d_to_edge):
            if np.isfinite(d):
                counts[x, int(d)] += 1
    return counts


def _round_up(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) >= q else math.nextafter(f, math.inf)


def geometry_constants(model: LatticeModel) -> GeometryConstants:
    if not model.edges:
        raise ValueError("geometry constants need at least one edge")
    J = max(float(np.linalg.norm(m, 2)) if m.size else 0.0 for m in model.terms.values())
    N = max(len(e) for e in model.edges)
    N_b = max(len(boundary_edges(model, e)) for e in model.edges)
    counts = growth_counts(model)
    M = max(Fraction(int(c), (n + 1) ** 2) for row in counts for n, c in enumerate(row))
    return GeometryConstants(J=J, N=N, N_b=N_b, M=_round_up(M))


def _field_owner(sites: Sequence, edges: Sequence) -> dict:
    """Assign each site to the edge whose first site it is, else its last edge."""
    owner = {}
    for e in edges:
        owner.setdefault(e[0], e)
    for s in sites:
        if s not in owner:
            containing = [e for e in edges if s in e]
            if containing:
                owner[s] = containing[-1]
    return owner


def ising_terms(model_sites: Sequence, edges: Sequence, h: float = 0.0, coupling: float = 1.0) -> list:
    """Per-edge terms ``coupling * XX + h * sum(Z_s)`` over the sites the edge owns.

    ``edges`` must already be sorted in site order.  Every single-site field
    is folded into exactly one incident two-site edge.
    """
    owner = _field_owner(model_sites, edges)
    x, z, eye = PAULI["x"], PAULI["z"], PAULI["i"]
    mats = []
    for e in edges:
        if len(e) != 2:
            raise ValueError(f"Ising terms need two-site edges, got {e}")
        m = coupling * np.kron(x, x)
        if owner.get(e[0]) == e:
            m = m + h * np.kron(z, eye)
        if owner.get(e[1]) == e:
            m = m + h * np.kron(eye, z)
        mats.append(m)
    return mats


def build_chain(n: int, h: float = 0.0, periodic: bool = False, coupling: float = 1.0,
                max_dim: int = DEFAULT_MAX_DIM) -> LatticeModel:
    """Ising chain ``sum_i (X_i X_{i+1} + h Z_i)`` on sites ``0..n-1``.

    The field of site i sits on edge ``{i, i+1}``; on open chains the last
    site's field joins the last edge.
    """
    if n < 2:
        raise ValueError("a chain needs at least two sites")
    if periodic and n < 3:
        raise ValueError("a periodic chain needs at least three sites")
    if 2**n > max_dim:
        raise ValueError(f"total Hilbert dimension {2**n} exceeds the cap {max_dim}")
    sites = list(range(n))
    edges = [(i, i + 1) for i in range(n - 1)]
    if periodic:
        edges.append((0, n - 1))
    terms = ising_terms(sites, edges, h=h, coupling=coupling)
    return LatticeModel(sites, edges, terms, max_dim=max_dim)


def build_square(width: int, height: int, h: float = 0.0, coupling: float = 1.0,
                 periodic: bool = False, max_dim: int = DEFAULT_MAX_DIM) -> LatticeModel:
    """Nearest-neighbour Ising model on a ``width x height`` square lattice.

    Sites are ``(x, y)`` tuples in row-major order.
    """
    if width < 1 or height < 1 or width * height < 2:
        raise ValueError("square lattice needs at least two sites")
    if 2 ** (width * height) > max_dim:
        raise ValueError(f"total Hilbert dimension {2 ** (width * height)} exceeds the cap {max_dim}")
    sites = [(x, y) for y in range(height) for x in range(width)]
    order = {s: i for i, s in enumerate(sites)}
    edges = []
    for y in range(height):
        for x in range(width):
            nbrs = []
            if x + 1 < width or (periodic and width > 2):
                nbrs.append(((x + 1) % width, y))
            if y + 1 < height or (periodic and height > 2):
                nbrs.append((x, (y + 1) % height))
            for nb in nbrs:
                edges.append(tuple(sorted([(x, y), nb], key=order.__getitem__)))
    terms = ising_terms(sites, edges, h=h, coupling=coupling)
    return LatticeModel(sites, edges, terms, max_dim=max_dim)
