"""Empirical correlation length from exact two-point functions."""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from ..bounds import DomainError
from ..lattice import PAULI, LatticeModel, site_distance
from ..operators import SpectralState, connected_correlator, local_operator
from ..thermometry import global_state

__all__ = ["XiFitRejected", "fit_xi_empirical", "NOISE_FLOOR"]

NOISE_FLOOR = 1e-12


class XiFitRejected(DomainError):
    """The correlators do not support an exponential fit."""


def fit_xi_empirical(
    model: LatticeModel,
    beta: float,
    observable=None,
    max_distance: int | None = None,
    omega: SpectralState | None = None,
    correlator: Callable | None = None,
) -> float:
    """Fit ``|<O_x O_y>_c| ~ exp(-d(x, y) / xi)`` by least squares on the log.

    Every site pair with ``1 <= d <= max_distance`` and a correlator above
    :data:`NOISE_FLOOR` contributes one point.  ``observable`` defaults to
    Pauli Z.  ``correlator(x, y)`` replaces the exact computation when
    given, which lets callers inject synthetic data.

    Raises
    ------
    XiFitRejected
        Lattice too small, fewer than three usable points, or a
        non-decaying fit.
    """
    if model.diameter < 3:
        raise XiFitRejected(f"lattice diameter {model.diameter} < 3")
    max_distance = model.diameter if max_distance is None else max_distance
    if correlator is None:
        obs = PAULI["z"] if observable is None else np.asarray(observable)
        omega = global_state(model, beta) if omega is None else omega

        def correlator(x, y):
            return connected_correlator(local_operator(model, [x], obs), local_operator(model, [y], obs), omega)

    dist, logc = [], []
    for x, y in itertools.combinations(model.sites, 2):
        d = site_distance(model, x, y)
        if not 1 <= d <= max_distance:
            continue
        c = abs(correlator(x, y))
        if c > NOISE_FLOOR:
            dist.append(d)
            logc.append(np.log(c))
    if len(dist) < 3 or len(set(dist)) < 2:
        raise XiFitRejected(f"only {len(dist)} usable correlators above {NOISE_FLOOR}")
    slope, _ = np.polyfit(np.asarray(dist, float), np.asarray(logc), 1)
    if slope >= 0:
        raise XiFitRejected(f"correlators do not decay (slope {slope:.3g})")
    return float(-1.0 / slope)
