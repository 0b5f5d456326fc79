"""Extremal two-qubit realizations: local Bloch data, saturation tests, mixtures.

All two-qubit realizations here use a real-symmetric state and observables in
the sigma_1/sigma_3 plane, so every reduced operator tr_other[(obs (x) I) rho]
is a real combination alpha I + beta (cos phi sigma_1 + sin phi sigma_3).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import core
from .bounds import ANALYTIC_TOL, WeightSet, extended_landau_margin
from .core import Behavior, Correlators, GeneralRealization, TwoQubitRealization
from .distance import DistanceProfile, distance_profile
from .errors import DegenerateAngles, DomainError, NonRealSymmetric

SIGMA2_TOL = 1e-10
DEGENERATE_SINE = 1e-12
MIXING_CSV_HEADER = ("lambda", "x", "dtilde_measured", "dtilde_paper_linear", "dtilde_blockform", "landau_margin")


@dataclass(frozen=True)
class LocalBloch:
    """tr_other[(obs_k (x) I) rho] = alpha_k I + beta_k (cos phi_k sigma_1 + sin phi_k sigma_3).

    ``side`` names the party holding the reduced operator; k runs over the
    other party's settings.
    """

    side: str
    alpha: tuple[float, float]
    beta: tuple[float, float]
    phi: tuple[float, float]

    def operator(self, k: int) -> np.ndarray:
        return self.alpha[k] * core.IDENTITY2 + self.beta[k] * core.xz_observable(self.phi[k])


@dataclass(frozen=True)
class SaturationVerdict:
    product_value: float
    satisfied: bool
    u_weights: Optional[tuple[float, float, float, float]] = None
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "product_value": self.product_value,
            "satisfied": self.satisfied,
            "u_weights": None if self.u_weights is None else list(self.u_weights),
            "degenerate": self.degenerate,
        }


def extract_local_bloch(r, side: str = "bob") -> LocalBloch:
    """Local Bloch data of the reduced operators on ``side``."""
    alpha, beta, phi = [], [], []
    for k in range(2):
        cI, c1, c2, c3 = core.pauli_decompose(core.local_operator(r, side, k))
        if abs(c2) > SIGMA2_TOL:
            raise NonRealSymmetric(f"sigma_2 component {c2:.3e} on {side}'s side, setting {k}")
        alpha.append(cI)
        beta.append(math.hypot(c1, c3))
        # atan2 already yields beta >= 0 with phi in (-pi, pi]
        phi.append(core.wrap_angle(math.atan2(c3, c1)))
    return LocalBloch(side, tuple(alpha), tuple(beta), tuple(phi))


def _sines(bloch: LocalBloch, partner) -> list[list[float]]:
    return [[math.sin(bloch.phi[x] - partner[y]) for y in range(2)] for x in range(2)]


def _sine_product(S) -> float:
    return S[0][0] * S[0][1] * S[1][0] * S[1][1]


def solve_u(S) -> tuple[float, float, float, float]:
    """u with u00 = 1 solving sum_y (-1)^xy u_xy sin(phi_x - theta_y) = 0 and u00 u01 = u10 u11."""
    u00 = 1.0
    u01 = -S[0][0] / S[0][1]
    u10 = math.sqrt(max(-S[0][0] * S[1][1] / (S[0][1] * S[1][0]), 0.0))
    u11 = u10 * S[1][0] / S[1][1]
    return (u00, u01, u10, u11)


def saturation_condition(bloch: LocalBloch, partner_angles, tol: float = ANALYTIC_TOL) -> SaturationVerdict:
    """Sign test on sin(phi0-t0) sin(phi0-t1) sin(phi1-t0) sin(phi1-t1).

    ``partner_angles`` are the measurement angles of the party holding the
    reduced operators.  The test is satisfied when the product is <= tol; the
    weights u are then solved with u00 = 1.
    """
    if min(bloch.beta) <= DEGENERATE_SINE:
        raise DegenerateAngles("a reduced operator has no Bloch component")
    S = _sines(bloch, partner_angles)
    if min(abs(v) for row in S for v in row) <= DEGENERATE_SINE:
        raise DegenerateAngles("a measurement direction coincides with a steered Bloch direction")
    prod = _sine_product(S)
    satisfied = prod <= tol
    return SaturationVerdict(prod, satisfied, solve_u(S) if satisfied and prod < 0 else None)


def saturation_verdict(r: TwoQubitRealization, side: str = "bob", tol: float = ANALYTIC_TOL) -> SaturationVerdict:
    """Total version of ``saturation_condition`` for a two-qubit realization.

    Degenerate geometries yield a verdict flagged ``degenerate`` instead of an
    exception; the product is then zero up to rounding and counts as satisfied.
    """
    partner = r.bob if side == "bob" else r.alice
    bloch = extract_local_bloch(r, side)
    try:
        return saturation_condition(bloch, partner, tol)
    except DegenerateAngles:
        S = _sines(bloch, partner)
        prod = _sine_product(S) if min(bloch.beta) > DEGENERATE_SINE else 0.0
        return SaturationVerdict(prod, prod <= tol, None, True)


def saturating_weights(r: TwoQubitRealization, side: str = "bob") -> WeightSet:
    """Weights (s, u) for which the weighted CHSH bound is tight on ``r``.

    Row signs of u are chosen so that each <A_x (x) X_x> >= 0 with
    X_x = sum_y (-1)^xy u_xy B_y, and s_x = ||X_x|| / D~_x.
    """
    verdict = saturation_verdict(r, side)
    if verdict.u_weights is None:
        raise DegenerateAngles("saturation condition fails or is degenerate; no weights")
    u = [list(verdict.u_weights[:2]), list(verdict.u_weights[2:])]
    g = core.as_general(r if side == "bob" else r.swapped())
    prof = distance_profile(g, "bob")
    rho = g.state
    da, db = g.dims
    s = []
    for x in range(2):
        X = sum((-1) ** (x * y) * u[x][y] * g.bob_obs[y] for y in range(2))
        val = np.trace(np.kron(g.alice_obs[x], X) @ rho).real
        if val < 0:
            u[x] = [-v for v in u[x]]
        norm2 = np.trace(np.kron(np.eye(da), X @ X) @ rho).real
        if prof.dtilde[x] <= 1e-12:
            raise DegenerateAngles(f"D~_{x} vanishes")
        s.append(math.sqrt(max(norm2, 0.0)) / prof.dtilde[x])
    return WeightSet(t=(1.0, 1.0), s=tuple(s), u=(tuple(u[0]), tuple(u[1])))


def tilted_family(alpha: float, theta: float):
    """Maximal realization of beta<A0> + alpha(<A0B0> + <A0B1>) + <A1B0> - <A1B1>.

    A0 = sigma_3, A1 = sigma_1 and Bob's directions bisect them so that the
    normalized correlators are alpha/N, alpha/N, s/N, -s/N with s = sin 2 theta
    and N = sqrt(s^2 + alpha^2).  Returns the realization with the expected
    correlators and Bob-side distance profile.
    """
    if not (alpha > 0 and math.isfinite(alpha)):
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if not (0 < theta <= math.pi / 4 + 1e-15):
        raise DomainError(f"theta must lie in (0, pi/4], got {theta!r}")
    s = math.sin(2 * theta)
    c2 = math.cos(2 * theta)
    N = math.hypot(s, alpha)
    r = TwoQubitRealization(theta, (math.pi / 2, 0.0), (math.atan2(alpha, s), math.atan2(alpha, -s)))
    corr = Correlators(
        ((alpha / N, alpha / N), (s * s / N, -s * s / N)),
        (c2, 0.0),
        (alpha * c2 / N, alpha * c2 / N),
    )
    prof = DistanceProfile("bob", (1.0, s), (1.0, s))
    return r, corr, prof


def mix_with_noise(b: Behavior, lam: float) -> Behavior:
    """lam * b + (1 - lam) * (uniform behavior)."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam!r}")
    return Behavior(lam * b.p + (1 - lam) * 0.25)


def realize_mixture(r, lam: float) -> GeneralRealization:
    """Explicit realization of the noisy mixture on three qubits per party.

    The state is rho_p (x) I(x)I/4 (x) [lam |00><00| + (1-lam) |11><11|] on
    the qubit pairs (A1 B1), (A2 B2), (A3 B3).  Each party reads its flag qubit
    and measures either the original observable on qubit 1 (flag 0) or sigma_3
    on the maximally mixed qubit 2 (flag 1).
    """
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam!r}")
    g = core.as_general(r)
    da, db = g.dims
    noise = np.eye(4) / 4
    flag = np.diag([lam, 0.0, 0.0, 1 - lam]).astype(complex)
    # factors ordered (A1 B1)(A2 B2)(A3 B3); reorder to (A1 A2 A3)(B1 B2 B3)
    full = np.kron(np.kron(g.state, noise), flag)
    dims = (da, db, 2, 2, 2, 2)
    t = full.reshape(dims + dims)
    order = (0, 2, 4, 1, 3, 5)
    t = t.transpose(order + tuple(6 + k for k in order))
    D = da * 2 * 2 * db * 2 * 2
    state = t.reshape(D, D)
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)

    def lift(obs, d):
        return np.kron(np.kron(obs, np.eye(2)), p0) + np.kron(np.kron(np.eye(d), core.SIGMA3), p1)

    return GeneralRealization(
        state,
        tuple(lift(o, da) for o in g.alice_obs),
        tuple(lift(o, db) for o in g.bob_obs),
    )


@dataclass(frozen=True)
class MixingRow:
    lam: float
    x: int
    dtilde_measured: float
    dtilde_linear: float
    dtilde_blockform: float
    landau_margin: float


def mixing_experiment(r, lambdas) -> list[MixingRow]:
    """Measured D~ of the explicit mixture against the linear and square-root predictions."""
    base = distance_profile(r, "bob")
    rows = []
    for lam in lambdas:
        lam = float(lam)
        mixed = realize_mixture(r, lam)
        prof = distance_profile(mixed, "bob")
        _, corr = core.evaluate_behavior(mixed)
        margin = extended_landau_margin(corr, prof).margin
        for x in range(2):
            d = base.dtilde[x]
            rows.append(MixingRow(lam, x, prof.dtilde[x], lam * d, math.sqrt(lam) * d, margin))
    return rows


def mixing_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MIXING_CSV_HEADER)
    for row in rows:
        w.writerow(
            [
                repr(row.lam),
                row.x,
                repr(row.dtilde_measured),
                repr(row.dtilde_linear),
                repr(row.dtilde_blockform),
                repr(row.landau_margin),
            ]
        )
    return buf.getvalue()


def biased_boundary_realization() -> TwoQubitRealization:
    """cos(theta) = sqrt(2/3), Alice measuring sigma_3 and sigma_1."""
    theta = math.acos(math.sqrt(2 / 3))
    s = 2 * math.sqrt(2)
    return TwoQubitRealization(theta, (math.pi / 2, 0.0), (math.atan2(3, s), math.atan2(3, -s)))


def chsh_optimal_realization() -> TwoQubitRealization:
    return TwoQubitRealization(math.pi / 4, (0.0, math.pi / 2), (math.pi / 4, -math.pi / 4))


def biased_boundary_correlators() -> Correlators:
    r17 = math.sqrt(17)
    return Correlators(
        ((3 / r17, 3 / r17), (8 / (3 * r17), -8 / (3 * r17))),
        (1 / 3, 0.0),
        (1 / r17, 1 / r17),
    )
