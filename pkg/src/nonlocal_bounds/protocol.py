"""Parity protocol with n identical boxes: bias bound and information gain.

Alice feeds x_i into box i and sends the parity of her outputs, masked by a
private random bit that Bob learns only through the message.  The mask drops
out of Bob's conditional entropy, so the quantities below depend only on the
parity a_p of Alice's outputs and Bob's per-box Helstrom guesses.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import core
from .bounds import biases
from .core import TwoQubitRealization
from .distance import distance_profile
from .errors import DegenerateDifference, DomainError, NonDistribution

MAX_BOUND_N = 64
MAX_EXACT_N = 40
LOG_SPACE_FROM = 20
DEGENERATE_DIFF = 1e-12
LN2 = math.log(2.0)
PROTOCOL_CSV_HEADER = ("n", "lhs", "rhs", "info_exact", "info_asymptotic")


@dataclass(frozen=True)
class BoxModel:
    realization: object
    E: tuple[float, float]
    dbar: tuple[float, float]
    dtilde: tuple[float, float]
    pA0: tuple[float, float]
    pG0: tuple[float, float]

    @property
    def asymptotic_valid(self) -> bool:
        """|2p(0|x) - 1| < D-bar_x < 1 for both x."""
        return all(abs(2 * self.pA0[x] - 1) < self.dbar[x] < 1 for x in range(2))


@dataclass(frozen=True)
class ParityProtocolReport:
    n: int
    lhs: float
    rhs: float
    info_exact: Optional[float] = None
    info_asymptotic: Optional[float] = None
    asymptotic_valid: Optional[bool] = None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "info_exact": self.info_exact,
            "info_asymptotic": self.info_asymptotic,
            "asymptotic_valid": self.asymptotic_valid,
        }


def _helstrom_projector(rho0, rho1, convention: Optional[str]):
    """Projector for guess 0 and whether the pair was degenerate."""
    diff = rho0 - rho1
    if np.max(np.abs(diff)) <= DEGENERATE_DIFF:
        if convention is None:
            raise DegenerateDifference("conditional states coincide; no preferred guess")
        d = diff.shape[0]
        if convention == "zero":
            return np.eye(d), True
        if convention == "uniform":
            return np.eye(d) / 2, True
        raise ValueError(f"unknown convention {convention!r}")
    vals, vecs = core.eig_hermitian(diff)
    pos = vecs[:, vals > 0]
    return pos @ pos.conj().T, False


def helstrom_joint(box: BoxModel, x: int, convention: Optional[str] = None) -> np.ndarray:
    """P[a, g] = tr(Pi_g rho_{a|x}) for the Helstrom measurement on Bob's states.

    Pi_0 projects onto the positive eigenspace of rho_{0|x} - rho_{1|x}.  When
    the two states coincide the measurement is undefined: ``convention=None``
    raises, ``"zero"`` always guesses 0 and ``"uniform"`` guesses by a fair coin.
    """
    if x not in (0, 1):
        raise ValueError("x must be 0 or 1")
    s0, s1 = core.bob_conditional_states(box.realization, x)
    pi0, _ = _helstrom_projector(s0, s1, convention)
    pi1 = np.eye(pi0.shape[0]) - pi0
    return np.array([[np.trace(p @ s).real for p in (pi0, pi1)] for s in (s0, s1)])


def box_model(r) -> BoxModel:
    """Single-box quantities: biases E_y, distances, Alice's and Bob's guess marginals."""
    _, corr = core.evaluate_behavior(r)
    prof = distance_profile(r, "bob")
    E = biases(corr)
    pA0 = tuple((1 + m) / 2 for m in corr.mA)
    pG0 = []
    for x in range(2):
        s0, s1 = core.bob_conditional_states(r, x)
        pi0, _ = _helstrom_projector(s0, s1, "uniform")
        pG0.append(float(np.trace(pi0 @ (s0 + s1)).real))
    return BoxModel(r, E, prof.dbar, prof.dtilde, pA0, tuple(pG0))


def _check_n(n: int, upper: int) -> int:
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= upper:
        raise DomainError(f"n must be an integer in [1, {upper}], got {n!r}")
    return int(n)


def _power(base: float, n: int) -> float:
    if n <= LOG_SPACE_FROM:
        return base**n
    return 0.0 if base <= 0 else math.exp(n * math.log(base))


def parity_bound(box: BoxModel, n: int) -> ParityProtocolReport:
    """sum over Bob's input strings of E^2 against ((D0^2 + D1^2)/2)^n."""
    n = _check_n(n, MAX_BOUND_N)
    E, D = box.E, box.dtilde
    return ParityProtocolReport(n, _power(E[0] ** 2 + E[1] ** 2, n), _power((D[0] ** 2 + D[1] ** 2) / 2, n))


def parity_bias_enumeration(box: BoxModel, n: int) -> float:
    """The same lhs summed explicitly over all 2^n strings y, E_y = prod_i E_{y_i}."""
    n = _check_n(n, 24)
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    per_box = np.where(bits == 0, box.E[0], box.E[1])
    return float(np.sum(np.prod(per_box, axis=1) ** 2))


def _signed_log_product(factors) -> float:
    """prod(factors) evaluated as sign * exp(sum log|f|)."""
    sign, acc = 1.0, 0.0
    for f in factors:
        if f == 0:
            return 0.0
        if f < 0:
            sign = -sign
        acc += math.log(abs(f))
    return sign * math.exp(acc)


def _gain(c: float) -> float:
    """1 - h((1 + c)/2) in bits."""
    up = (1 + c) * math.log1p(c) if c > -1 else 0.0
    down = (1 - c) * math.log1p(-c) if c < 1 else 0.0
    return (up + down) / (2 * LN2)


def _one_minus_conditional_entropy(za: float, zb: float, zab: float) -> float:
    """1 - H(a_p | b_p) for P(a, b) = (1 + (-1)^a za + (-1)^b zb + (-1)^(a+b) zab) / 4."""
    for sa in (1, -1):
        for sb in (1, -1):
            if (1 + sa * za + sb * zb + sa * sb * zab) / 4 < -1e-12:
                raise NonDistribution(f"joint entry negative for z = ({za}, {zb}, {zab})")
    total = 0.0
    for sb in (1, -1):
        pb = (1 + sb * zb) / 2
        if pb <= 0:
            continue
        c = (za + sb * zab) / (1 + sb * zb)
        if abs(c) > 1 + 1e-12:
            raise NonDistribution(f"conditional bias {c!r} outside [-1, 1]")
        total += pb * _gain(max(-1.0, min(1.0, c)))
    return total


def parity_info_exact(box: BoxModel, n: int) -> float:
    """Average of 1 - H(a_p|b_p) over the 2^n input strings, grouped by the number k of zeros."""
    n = _check_n(n, MAX_EXACT_N)
    za1 = [2 * p - 1 for p in box.pA0]
    zb1 = [2 * p - 1 for p in box.pG0]
    D = box.dbar
    out = 0.0
    for k in range(n + 1):
        za = _signed_log_product([za1[0]] * k + [za1[1]] * (n - k))
        zb = _signed_log_product([zb1[0]] * k + [zb1[1]] * (n - k))
        zab = _signed_log_product([D[0]] * k + [D[1]] * (n - k))
        weight = math.exp(math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) - n * LN2)
        out += weight * _one_minus_conditional_entropy(za, zb, zab)
    return out


def parity_info_asymptotic(box: BoxModel, n: int) -> float:
    """((D0^2 + D1^2)/2)^n / (2 ln 2), the leading large-n behavior."""
    base = (box.dbar[0] ** 2 + box.dbar[1] ** 2) / 2
    if base <= 0:
        return 0.0
    return math.exp(n * math.log(base) - math.log(2 * LN2))


def protocol_report(box: BoxModel, n: int) -> ParityProtocolReport:
    b = parity_bound(box, n)
    exact = parity_info_exact(box, n) if n <= MAX_EXACT_N else None
    return ParityProtocolReport(n, b.lhs, b.rhs, exact, parity_info_asymptotic(box, n), box.asymptotic_valid)


def protocol_sweep(box: BoxModel, n_max: int) -> list[ParityProtocolReport]:
    _check_n(n_max, MAX_BOUND_N)
    return [protocol_report(box, n) for n in range(1, n_max + 1)]


def protocol_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROTOCOL_CSV_HEADER)
    for r in reports:
        w.writerow([r.n, repr(r.lhs), repr(r.rhs), "" if r.info_exact is None else repr(r.info_exact), repr(r.info_asymptotic)])
    return buf.getvalue()


def generic_box() -> BoxModel:
    """A partially entangled box inside the asymptotic validity region."""
    return box_model(TwoQubitRealization(0.5, (0.3, 1.1), (0.0, 0.0)))
