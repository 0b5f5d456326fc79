"""Quantum bounds containing the D-tilde quantities, reported as lhs <= rhs.

Every check returns an :class:`InequalityReport`.  Profiles with
``side='alice'`` evaluate the counterpart inequalities, obtained by exchanging
the two parties (the correlator matrix is transposed and the marginals swap).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

from .core import Correlators
from .distance import DistanceProfile
from .errors import DegenerateMarginals, DomainError, WeightConstraintViolation

ANALYTIC_TOL = 1e-9
OPTIMIZER_TOL = 1e-6
WEIGHT_TOL = 1e-10
CTILDE_OVERSHOOT = 1e-9


class ReportName(str, enum.Enum):
    TSIRELSON2 = "Tsirelson2"
    ICTYPE4 = "ICtype4"
    WEIGHTED_CHSH5 = "WeightedCHSH5"
    EXTENDED_LANDAU6 = "ExtendedLandau6"
    CLASSIC_LANDAU = "ClassicLandau"
    NPATYPE_B4 = "NPAtypeB4"
    TILTED_B1 = "TiltedB1"


@dataclass(frozen=True)
class WeightSet:
    """Weights t_y, s_x of the weighted CHSH expression and the u_xy refinement."""

    t: tuple[float, float] = (1.0, 1.0)
    s: tuple[float, float] = (1.0, 1.0)
    u: tuple[tuple[float, float], tuple[float, float]] = ((1.0, 1.0), (1.0, 1.0))
    constrained: bool = True

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))
        object.__setattr__(self, "u", tuple(tuple(float(v) for v in row) for row in self.u))
        if min(self.t) < 0 or min(self.s) < 0:
            raise ValueError("t and s must be non-negative")

    @property
    def u_defect(self) -> float:
        u = self.u
        return u[0][0] * u[0][1] - u[1][0] * u[1][1]

    def check_u(self) -> None:
        if self.constrained and abs(self.u_defect) > WEIGHT_TOL:
            raise WeightConstraintViolation(f"u00*u01 - u10*u11 = {self.u_defect:.3e}")

    def to_json(self) -> dict:
        return {"t": list(self.t), "s": list(self.s), "u": [list(r) for r in self.u]}


@dataclass(frozen=True)
class InequalityReport:
    name: ReportName
    lhs: float
    rhs: float
    tol: float = ANALYTIC_TOL
    inputs: dict = field(default_factory=dict, compare=False)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def saturated(self) -> bool:
        return abs(self.margin) <= self.tol

    @property
    def inputs_digest(self) -> str:
        return json.dumps(self.inputs, sort_keys=True)

    def to_json(self) -> dict:
        return {
            "name": self.name.value,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "saturated": self.saturated,
            "inputs_digest": self.inputs_digest,
        }


def _oriented(corr: Correlators, prof: DistanceProfile) -> Correlators:
    """Correlators indexed so that the first index labels the conditioning setting."""
    return corr.transposed() if prof.side == "alice" else corr


def _digest(prof: DistanceProfile, **extra) -> dict:
    d = {"side": prof.side, "dtilde": list(prof.dtilde)}
    d.update(extra)
    return d


def biases(corr: Correlators, s=(0.5, 0.5)) -> tuple[float, float]:
    """E_y = s_0 C_0y + s_1 (-1)^y C_1y."""
    C = corr.C
    return (s[0] * C[0][0] + s[1] * C[1][0], s[0] * C[0][1] - s[1] * C[1][1])


def tsirelson_bound(corr: Correlators, prof: DistanceProfile, w: WeightSet = WeightSet(), tol=ANALYTIC_TOL):
    """sum_y t_y E_y <= sqrt(2 (t0^2 + t1^2)(s0^2 D0^2 + s1^2 D1^2))."""
    c = _oriented(corr, prof)
    E = biases(c, w.s)
    D = prof.dtilde
    lhs = w.t[0] * E[0] + w.t[1] * E[1]
    rhs = math.sqrt(2 * (w.t[0] ** 2 + w.t[1] ** 2) * (w.s[0] ** 2 * D[0] ** 2 + w.s[1] ** 2 * D[1] ** 2))
    return InequalityReport(ReportName.TSIRELSON2, lhs, rhs, tol, _digest(prof, weights=w.to_json()))


def ic_type_check(corr: Correlators, prof: DistanceProfile, tol=ANALYTIC_TOL):
    """E0^2 + E1^2 <= (D0^2 + D1^2) / 2 with s = (1/2, 1/2)."""
    E = biases(_oriented(corr, prof))
    D = prof.dtilde
    return InequalityReport(
        ReportName.ICTYPE4, E[0] ** 2 + E[1] ** 2, (D[0] ** 2 + D[1] ** 2) / 2, tol, _digest(prof)
    )


def _weighted_lhs(C, s, u) -> float:
    return sum(s[x] * u[x][y] * (-1) ** (x * y) * C[x][y] for x in range(2) for y in range(2))


def weighted_chsh_check(corr: Correlators, prof: DistanceProfile, w: WeightSet, tol=ANALYTIC_TOL):
    """sum s_x u_xy (-1)^xy C_xy <= |u| sqrt(sum_x s_x^2 D_x^2), u00 u01 = u10 u11."""
    w.check_u()
    c = _oriented(corr, prof)
    D = prof.dtilde
    unorm = math.sqrt(sum(v * v for row in w.u for v in row))
    lhs = _weighted_lhs(c.C, w.s, w.u)
    rhs = unorm * math.sqrt(sum(w.s[x] ** 2 * D[x] ** 2 for x in range(2)))
    return InequalityReport(ReportName.WEIGHTED_CHSH5, lhs, rhs, tol, _digest(prof, weights=w.to_json()))


def _clamp_ctilde(v: float) -> float:
    if abs(v) > 1 + CTILDE_OVERSHOOT:
        raise DomainError(f"normalized correlator {v!r} outside [-1, 1]")
    return max(-1.0, min(1.0, v))


def landau_sides(Ct) -> tuple[float, float]:
    """(lhs, rhs) of |C00 C01 - C10 C11| <= sqrt(1-C00^2)sqrt(1-C01^2) + sqrt(1-C10^2)sqrt(1-C11^2)."""
    lhs = abs(Ct[0][0] * Ct[0][1] - Ct[1][0] * Ct[1][1])
    root = [[math.sqrt(max(1.0 - v * v, 0.0)) for v in row] for row in Ct]
    return lhs, root[0][0] * root[0][1] + root[1][0] * root[1][1]


def normalized_correlators(corr: Correlators, prof: DistanceProfile):
    """C~_xy = C_xy / D~_x, with the row zeroed when D~_x vanishes."""
    c = _oriented(corr, prof)
    D = prof.dtilde
    out = []
    for x in range(2):
        row = []
        for y in range(2):
            cxy = c.C[x][y]
            if abs(cxy) > D[x] + 1e-8:
                raise DomainError(f"|C_{x}{y}| = {abs(cxy)!r} exceeds D~_{x} = {D[x]!r}")
            row.append(0.0 if D[x] <= 1e-12 else _clamp_ctilde(cxy / D[x]))
        out.append(tuple(row))
    return tuple(out)


def extended_landau_margin(corr: Correlators, prof: DistanceProfile, tol=ANALYTIC_TOL):
    Ct = normalized_correlators(corr, prof)
    lhs, rhs = landau_sides(Ct)
    return InequalityReport(ReportName.EXTENDED_LANDAU6, lhs, rhs, tol, _digest(prof, ctilde=[list(r) for r in Ct]))


def classic_landau_margin(corr: Correlators, tol=ANALYTIC_TOL):
    """The Landau inequality on the raw correlators (D~ = 1)."""
    Ct = tuple(tuple(_clamp_ctilde(v) for v in row) for row in corr.C)
    lhs, rhs = landau_sides(Ct)
    return InequalityReport(ReportName.CLASSIC_LANDAU, lhs, rhs, tol, {"dtilde": [1.0, 1.0]})


def npa_type_margin(corr: Correlators, prof: DistanceProfile, tol=ANALYTIC_TOL):
    """Landau form on C~_xy = (C_xy - <A_x><B_y>) / sqrt((D~_x^2 - <A_x>^2)(1 - <B_y>^2))."""
    c = _oriented(corr, prof)
    D = prof.dtilde
    for x in range(2):
        if D[x] ** 2 <= c.mA[x] ** 2 + 1e-12:
            raise DegenerateMarginals(f"D~_{x}^2 = {D[x] ** 2!r} does not exceed <A_{x}>^2 = {c.mA[x] ** 2!r}")
    for y in range(2):
        if c.mB[y] ** 2 >= 1 - 1e-12:
            raise DegenerateMarginals(f"<B_{y}> = {c.mB[y]!r} is deterministic")
    Ct = tuple(
        tuple(
            _clamp_ctilde(
                (c.C[x][y] - c.mA[x] * c.mB[y]) / (math.sqrt(D[x] ** 2 - c.mA[x] ** 2) * math.sqrt(1 - c.mB[y] ** 2))
            )
            for y in range(2)
        )
        for x in range(2)
    )
    lhs, rhs = landau_sides(Ct)
    return InequalityReport(ReportName.NPATYPE_B4, lhs, rhs, tol, _digest(prof, ctilde=[list(r) for r in Ct]))


def tilted_bound_check(corr: Correlators, prof: DistanceProfile, w: WeightSet, eps, tol=ANALYTIC_TOL):
    """sum s_x u_xy (-1)^xy <(A_x + eps_x) B_y> <= |u| sqrt(sum_x s_x^2 (D~^eps_x)^2).

    (D~^eps_x)^2 = D~_x^2 + 2 eps_x <A_x> + eps_x^2.
    """
    w.check_u()
    c = _oriented(corr, prof)
    D = prof.dtilde
    shifted = [[c.C[x][y] + eps[x] * c.mB[y] for y in range(2)] for x in range(2)]
    lhs = _weighted_lhs(shifted, w.s, w.u)
    deps2 = [max(D[x] ** 2 + 2 * eps[x] * c.mA[x] + eps[x] ** 2, 0.0) for x in range(2)]
    unorm = math.sqrt(sum(v * v for row in w.u for v in row))
    rhs = unorm * math.sqrt(sum(w.s[x] ** 2 * deps2[x] for x in range(2)))
    return InequalityReport(
        ReportName.TILTED_B1, lhs, rhs, tol, _digest(prof, weights=w.to_json(), eps=[float(e) for e in eps])
    )


def all_reports(corr: Correlators, prof: DistanceProfile, w: WeightSet = WeightSet(), eps=None, tol=ANALYTIC_TOL):
    """The six standard reports (plus the tilted one when ``eps`` is given).

    The NPA-type report is skipped when its marginal preconditions fail.
    """
    reports = [
        tsirelson_bound(corr, prof, w, tol),
        ic_type_check(corr, prof, tol),
        weighted_chsh_check(corr, prof, w, tol),
        extended_landau_margin(corr, prof, tol),
        classic_landau_margin(corr.transposed() if prof.side == "alice" else corr, tol),
    ]
    try:
        reports.append(npa_type_margin(corr, prof, tol))
    except DegenerateMarginals:
        pass
    if eps is not None:
        reports.append(tilted_bound_check(corr, prof, w, eps, tol))
    return reports
