"""Closed-form right-hand sides of the locality inequalities.

Besides the raw formulas this module supplies correlation-length providers,
a scan over the layer width ``R``, the volume-to-surface locality ratios and
:func:`bound_report`, which evaluates every inequality at one
``(model, A, beta)`` point.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .lattice import GeometryConstants, LatticeModel, Subsystem, geometry_constants
from .operators import SpectralState, assemble, variance
from .thermometry import global_state, local_qfi

__all__ = [
    "DomainError",
    "ising_xi",
    "ising_beta_star",
    "XiProvider",
    "clustering_rhs",
    "min_R",
    "theorem1_rhs",
    "theorem2_bound",
    "corollary_rhs",
    "example_1d_rhs",
    "optimize_R",
    "LocalityConditions",
    "locality_conditions",
    "tail_sum_upper",
    "full_sum_upper",
    "BoundReport",
    "bound_report",
    "is_chain_like",
]

ADMISSIBLE_TOL = 1e-12


class DomainError(ValueError):
    """Parameters lie outside the validity domain of a formula."""


def _ising_argument(beta: float, J: float) -> float:
    u = math.exp(2 * beta * J)
    return 3 ** (1 / 3) * u * (u - 1)


def ising_beta_star(J: float) -> float:
    """Largest ``beta`` at which the 1D Ising correlation length is finite."""
    if J <= 0:
        return math.inf
    # cbrt(3) u (u - 1) = 1 with u = exp(2 beta J)
    u = (1 + math.sqrt(1 + 4 * 3 ** (-1 / 3))) / 2
    return math.log(u) / (2 * J)


def ising_xi(beta: float, J: float) -> float:
    """Correlation length ``-1 / ln(cbrt(3) e^{2 beta J} (e^{2 beta J} - 1))``."""
    if beta <= 0 or J <= 0:
        raise DomainError(f"closed-form correlation length needs beta*J > 0 (beta={beta}, J={J})")
    arg = _ising_argument(beta, J)
    if arg >= 1:
        raise DomainError(f"beta*J = {beta * J:.4g} is beyond the high-temperature regime (argument {arg:.4g} >= 1)")
    return -1.0 / math.log(arg)


@dataclass(frozen=True)
class XiProvider:
    """Source of the correlation length at a given inverse temperature.

    ``mode`` is ``"closed_form_ising"`` (needs ``J``), ``"user_constant"``
    (needs ``value``) or ``"empirical_fit"`` (needs a ``fit`` callable).
    """

    mode: str
    J: float | None = None
    value: float | None = None
    fit: Callable[[float], float] | None = field(default=None, compare=False)

    @classmethod
    def ising(cls, J: float) -> "XiProvider":
        return cls("closed_form_ising", J=J)

    @classmethod
    def constant(cls, value: float) -> "XiProvider":
        if value <= 0:
            raise ValueError("correlation length must be positive")
        return cls("user_constant", value=value)

    @classmethod
    def empirical(cls, fit: Callable[[float], float]) -> "XiProvider":
        return cls("empirical_fit", fit=fit)

    @property
    def short_mode(self) -> str:
        return {"closed_form_ising": "ising", "user_constant": "constant", "empirical_fit": "fit"}[self.mode]

    def domain(self) -> tuple:
        """Open interval of ``beta`` on which the provider is defined."""
        if self.mode == "closed_form_ising":
            return (0.0, ising_beta_star(self.J))
        return (-math.inf, math.inf)

    def __call__(self, beta: float) -> float:
        if self.mode == "closed_form_ising":
            return ising_xi(beta, self.J)
        if self.mode == "user_constant":
            return float(self.value)
        if self.mode == "empirical_fit":
            return float(self.fit(beta))
        raise ValueError(f"unknown correlation-length mode {self.mode!r}")


def clustering_rhs(xi: float, min_boundary: int, norm_x: float, norm_y: float, d) -> float:
    """``4 (xi + 1) min|boundary| ||O_X|| ||O_Y|| exp(-d / xi)``."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    decay = 0.0 if d == math.inf else math.exp(-d / xi)
    return 4 * (xi + 1) * min_boundary * norm_x * norm_y * decay


def min_R(xi: float) -> int:
    """Smallest integer ``R >= 2 xi + 1``."""
    return max(1, math.ceil(2 * xi + 1 - ADMISSIBLE_TOL))


def _check_R(R, xi):
    if R < 2 * xi + 1 - ADMISSIBLE_TOL:
        raise DomainError(f"R={R} is below 2*xi+1={2 * xi + 1:.6g}")


def _tail(J, M, size_a, n_b, xi, R):
    return 40 * J * M * size_a * math.sqrt(n_b) * (xi + 1) ** 1.5 * R**2 * math.exp(-R / (2 * xi))


def theorem1_rhs(sqrt_var_cr: float, J: float, M: float, size_a: int, n_b: int, xi: float, R: int) -> float:
    """``sqrt(Var H_CR) + 40 J M |A| sqrt(N_b) (xi+1)^{3/2} R^2 e^{-R/(2 xi)}``."""
    _check_R(R, xi)
    return sqrt_var_cr + _tail(J, M, size_a, n_b, xi, R)


def theorem2_bound(n_b: int, J: float, size_g: int, N: int, M: float, xi: float) -> float:
    """``8 N_b J^2 |G| N M (xi+1)^4``, a bound on ``Var H_G``."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    return 8 * n_b * J**2 * size_g * N * M * (xi + 1) ** 4


def corollary_rhs(J: float, M: float, N: int, n_b: int, xi: float, size_cr: int, size_a: int, R: int) -> float:
    _check_R(R, xi)
    shell = 2 * J * math.sqrt(2 * M * N * n_b) * (xi + 1) ** 2 * math.sqrt(size_cr)
    return shell + _tail(J, M, size_a, n_b, xi, R)


def example_1d_rhs(J: float, xi: float, R: int, size_a: int, var_ha: float) -> float:
    """Bound on ``|sqrt(F / Var H_A) - 1|`` for nearest-neighbour chains."""
    _check_R(R, xi)
    if var_ha <= 0:
        raise DomainError("the relative chain bound needs Var H_A > 0")
    first = math.sqrt(R / var_ha)
    second = 10 * size_a * R**2 * math.exp(-R / (2 * xi)) / math.sqrt((xi + 1) * var_ha)
    return 8 * J * math.sqrt(2) * (xi + 1) ** 2 * (first + second)


def optimize_R(evaluate: Callable[[int], float], xi: float, R_max: int) -> tuple[int, float]:
    """Integer scan for the minimum of ``evaluate`` over ``ceil(2 xi + 1) <= R <= R_max``.

    Ties go to the smaller ``R``.
    """
    lo = min_R(xi)
    if R_max < lo:
        raise ValueError(f"empty range: R_max={R_max} < {lo}")
    best_R, best = lo, evaluate(lo)
    for R in range(lo + 1, R_max + 1):
        v = evaluate(R)
        if v < best:
            best_R, best = R, v
    return best_R, best


def tail_sum_upper(xi: float, R: int, cutoff: int | None = None, scaled: bool = False) -> float:
    """Upper bound on ``sum_{n >= R} (n+1)^2 e^{-n/(2 xi)}``.

    Explicit partial sum to ``cutoff`` plus a geometric bound on the rest:
    beyond ``cutoff`` successive terms shrink by at most
    ``((cutoff+2)/(cutoff+1))^2 e^{-1/(2 xi)}``.  With ``scaled=True`` the
    result is multiplied by ``e^{R/(2 xi)}``, which avoids underflow at
    small ``xi``.
    """
    return _series_upper(1 / (2 * xi), R, cutoff, scaled)


def full_sum_upper(xi: float, cutoff: int | None = None) -> float:
    """Upper bound on ``sum_{n >= 0} (n+1)^2 e^{-n/xi}``."""
    return _series_upper(1 / xi, 0, cutoff, True)


def _series_upper(rate: float, start: int, cutoff: int | None, scaled: bool) -> float:
    # terms are scaled by exp(rate * start) to stay representable
    if cutoff is None:
        cutoff = start + max(200, int(60 / rate))
    n = np.arange(start, cutoff + 1, dtype=float)
    terms = (n + 1) ** 2 * np.exp(-rate * (n - start))
    ratio = ((cutoff + 2) / (cutoff + 1)) ** 2 * math.exp(-rate)
    if ratio >= 1:
        raise ValueError("cutoff too small for a convergent tail bound")
    nxt = (cutoff + 2) ** 2 * math.exp(-rate * (cutoff + 1 - start))
    total = float(terms.sum()) + nxt / (1 - ratio)
    return total if scaled else total * math.exp(-rate * start)


@dataclass(frozen=True)
class LocalityConditions:
    ratio_edges: float
    ratio_surface: float
    flags: dict

    @property
    def local(self) -> bool:
        return self.flags["local"]


def locality_conditions(model: LatticeModel, A, xi: float, threshold: float = 0.1) -> LocalityConditions:
    """Volume-to-surface ratios ``|C_ceil(xi)| / |interior|`` and ``xi |boundary| / |interior|``."""
    sub = Subsystem(model, A)
    n_int = len(sub.interior)
    if n_int == 0:
        flags = {"edges": False, "surface": False, "local": False}
        return LocalityConditions(math.inf, math.inf, flags)
    r_edges = len(sub.shell(max(1, math.ceil(xi)))) / n_int
    r_surface = xi * len(sub.boundary) / n_int
    flags = {"edges": r_edges < threshold, "surface": r_surface < threshold}
    flags["local"] = flags["edges"] and flags["surface"]
    return LocalityConditions(r_edges, r_surface, flags)


def is_chain_like(g: GeometryConstants) -> bool:
    """Whether the chain constants ``M = N = N_b = 2`` dominate ``g``."""
    return g.M <= 2 and g.N <= 2 and g.N_b <= 2


@dataclass
class BoundReport:
    beta: float
    size_A: int
    edges_A: int
    boundary_A: int
    F: float
    var_HA: float
    var_HCR: float
    lhs: float
    rhs_thm1: float
    rhs_cor: float
    rhs_1d: float
    R_star: int
    xi: float
    xi_mode: str
    ratio_edges: float
    ratio_surface: float
    satisfied: bool
    error_code: str = ""
    local: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def _satisfied(lhs, rhs_thm1, rhs_cor, rhs_1d, var_ha, tol):
    ok = lhs <= rhs_thm1 + tol and lhs <= rhs_cor + tol
    if not math.isnan(rhs_1d):
        ok = ok and lhs <= rhs_1d * math.sqrt(var_ha) + tol
    return ok


def bound_report(
    model: LatticeModel,
    A,
    beta: float,
    xi_provider: XiProvider,
    R: int | None = None,
    R_max: int | None = None,
    omega: SpectralState | None = None,
    constants: GeometryConstants | None = None,
    threshold: float = 0.1,
    tol: float = 1e-9,
) -> BoundReport:
    """Evaluate every inequality at one point.

    With ``R=None`` the layer width minimizing :func:`corollary_rhs` over
    ``[ceil(2 xi + 1), R_max]`` is used (``R_max`` defaults to the lattice
    diameter).  A correlation length outside its domain still yields ``F``
    and ``Var H_A``; the bound columns are then NaN and ``error_code`` is set.
    """
    sub = Subsystem(model, A)
    g = constants or geometry_constants(model)
    if omega is None:
        omega = global_state(model, beta)
    F = local_qfi(model, sub.sites, beta, omega)
    var_ha = variance(assemble(model, sub.interior, support=sub.sites), omega)
    lhs = abs(math.sqrt(F) - math.sqrt(var_ha))
    nan = math.nan
    base = dict(beta=beta, size_A=len(sub), edges_A=len(sub.interior), boundary_A=len(sub.boundary),
                F=F, var_HA=var_ha, lhs=lhs, xi_mode=xi_provider.short_mode)
    try:
        xi = xi_provider(beta)
    except DomainError:
        return BoundReport(**base, var_HCR=nan, rhs_thm1=nan, rhs_cor=nan, rhs_1d=nan, R_star=0, xi=nan,
                           ratio_edges=nan, ratio_surface=nan, satisfied=False, error_code="xi_domain")

    def cor(r):
        return corollary_rhs(g.J, g.M, g.N, g.N_b, xi, len(sub.shell(r)), len(sub), r)

    if R is None:
        hi = max(R_max if R_max is not None else model.diameter, min_R(xi))
        R, _ = optimize_R(cor, xi, hi)
    try:
        var_hcr = variance(assemble(model, sub.shell(R)), omega)
        rhs1 = theorem1_rhs(math.sqrt(var_hcr), g.J, g.M, len(sub), g.N_b, xi, R)
        rhsc = cor(R)
    except DomainError:
        return BoundReport(**base, var_HCR=nan, rhs_thm1=nan, rhs_cor=nan, rhs_1d=nan, R_star=R, xi=xi,
                           ratio_edges=nan, ratio_surface=nan, satisfied=False, error_code="R_domain")
    rhs_1d = nan
    if is_chain_like(g) and var_ha > 0 and len(sub.shell(R)) <= 2 * R:
        rhs_1d = example_1d_rhs(g.J, xi, R, len(sub), var_ha)
    cond = locality_conditions(model, sub.sites, xi, threshold)
    return BoundReport(
        **base,
        var_HCR=var_hcr,
        rhs_thm1=rhs1,
        rhs_cor=rhsc,
        rhs_1d=rhs_1d,
        R_star=R,
        xi=xi,
        ratio_edges=cond.ratio_edges,
        ratio_surface=cond.ratio_surface,
        satisfied=_satisfied(lhs, rhs1, rhsc, rhs_1d, var_ha, tol),
        local=cond.local,
    )
