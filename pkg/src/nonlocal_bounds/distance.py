"""Distances between Bob's (or Alice's) subnormalized conditional states.

``dbar`` is the generalized trace distance tr|rho - sigma|.  ``dtilde`` is the
trace-distance-like quantity

    max_X  tr X(rho - sigma) / sqrt(tr X^2 (rho + sigma))

over Hermitian X, evaluated in closed form through the eigen-decomposition of
rho + sigma.  ``dtilde_maximize`` computes the same maximum by direct numerical
ascent and serves as an independent check of the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import core
from .errors import ConvergenceFailure, DimensionMismatch, DomainError, NormalizationError, SupportViolation

NULL_CUTOFF = 1e-12
SUPPORT_GUARD = 1e-8
OVERSHOOT_TOL = 1e-9


def _check_pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    r = core.as_hermitian(rho, 1e-10)
    s = core.as_hermitian(sigma, 1e-10)
    if r.shape != s.shape:
        raise DimensionMismatch(f"shapes differ: {r.shape} vs {s.shape}")
    tr = np.trace(r + s).real
    if abs(tr - 1.0) > core.NORMALIZATION_TOL:
        raise NormalizationError(f"tr(rho + sigma) = {tr!r}, expected 1")
    return r, s


def renormalize(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    """Scale a pair so that tr(rho + sigma) = 1."""
    r, s = np.asarray(rho, dtype=complex), np.asarray(sigma, dtype=complex)
    tr = np.trace(r + s).real
    if tr <= 0:
        raise NormalizationError("cannot renormalize a pair with zero total trace")
    return r / tr, s / tr


def _clamp_unit(value: float, what: str) -> float:
    if value > 1 + OVERSHOOT_TOL:
        raise DomainError(f"{what} = {value!r} exceeds 1")
    return min(max(value, 0.0), 1.0)


def dbar(rho, sigma) -> float:
    """tr|rho - sigma| for a pair with tr(rho + sigma) = 1."""
    r, s = _check_pair(rho, sigma)
    vals = np.linalg.eigvalsh(r - s)
    return _clamp_unit(float(np.sum(np.abs(vals))), "dbar")


def dtilde_general(numerator, total) -> float:
    """Closed-form max of tr X N / sqrt(tr X^2 T) over Hermitian X.

    With T = sum_i lam_i |i><i| and a_ij = <i|N|j> the maximum is
    sqrt(sum_ij 2|a_ij|^2 / (lam_i + lam_j)).  Pairs with lam_i + lam_j below
    the null cutoff are dropped; a dropped entry larger than the support guard
    means N leaks out of the support of T.
    """
    lam, vecs = core.eig_hermitian(total)
    a = vecs.conj().T @ np.asarray(numerator, dtype=complex) @ vecs
    denom = lam[:, None] + lam[None, :]
    keep = denom > NULL_CUTOFF
    leak = np.abs(a[~keep])
    if leak.size and leak.max() > SUPPORT_GUARD:
        raise SupportViolation(f"numerator has weight {leak.max():.3e} outside the support")
    total_sum = np.sum(2 * np.abs(a[keep]) ** 2 / denom[keep])
    return math.sqrt(max(float(total_sum), 0.0))


def dtilde_closed_form(rho, sigma) -> float:
    r, s = _check_pair(rho, sigma)
    return _clamp_unit(dtilde_general(r - s, r + s), "dtilde")


def dtilde_eps(rho, sigma, eps: float) -> float:
    """Tilted quantity: X numerator (1+eps) rho - (1-eps) sigma, same denominator.

    Evaluated through D~^2 + 2 eps tr(rho - sigma) + eps^2; ``dtilde_general``
    applied to the tilted numerator gives the same number.
    """
    if not math.isfinite(eps):
        raise DomainError("eps must be finite")
    r, s = _check_pair(rho, sigma)
    d = dtilde_closed_form(r, s)
    bias = float(np.trace(r - s).real)
    return math.sqrt(max(d * d + 2 * eps * bias + eps * eps, 0.0))


def _hermitian_basis(vecs: np.ndarray, keep_pair) -> list[np.ndarray]:
    """Real coordinates of Hermitian X in the given orthonormal basis.

    Diagonal elements |i><i|, and |i><j| + |j><i|, -i|i><j| + i|j><i| for
    i < j; only index pairs accepted by ``keep_pair`` are returned.
    """
    d = vecs.shape[0]
    out = []
    for i in range(d):
        if keep_pair(i, i):
            v = vecs[:, i]
            out.append(np.outer(v, v.conj()))
    for i in range(d):
        for j in range(i + 1, d):
            if keep_pair(i, j):
                vi, vj = vecs[:, i], vecs[:, j]
                m = np.outer(vi, vj.conj())
                out.append(m + m.conj().T)
                out.append(-1j * m + 1j * m.conj().T)
    return out


def _coordinate_ascent(c: list[float], Q: list[list[float]], p: list[float], max_sweeps: int, rel_tol: float):
    """Cyclic coordinate ascent of c.p / sqrt(p.Q.p).

    Along one coordinate the ratio is (n + t c_k) / sqrt(d + 2 t q + t^2 Q_kk),
    whose single stationary point is found from a linear equation; the
    t -> +/-inf limit (the coordinate axis itself) is the other candidate.
    """
    m = len(c)
    Qp = [sum(Q[i][j] * p[j] for j in range(m)) for i in range(m)]
    n = sum(ci * pi for ci, pi in zip(c, p))
    d = sum(pi * qi for pi, qi in zip(p, Qp))
    if d <= 0:
        return 0.0, p, 0
    if n < 0:
        p = [-v for v in p]
        Qp = [-v for v in Qp]
        n = -n
    val = n / math.sqrt(d)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        start = val
        for k in range(m):
            ck, q, qkk = c[k], Qp[k], Q[k][k]
            axis = abs(ck) / math.sqrt(qkk)
            best, step = val, None
            den = ck * q - n * qkk
            if den != 0.0:
                t = (n * q - ck * d) / den
                dd = d + 2 * t * q + t * t * qkk
                if dd > 0:
                    g = (n + t * ck) / math.sqrt(dd)
                    if g > best:
                        best, step = g, t
            if axis > best:
                sgn = 1.0 if ck > 0 else -1.0
                scale = sgn / math.sqrt(qkk)
                p = [0.0] * m
                p[k] = scale
                Qp = [scale * v for v in Q[k]]
                n, d, val = axis, 1.0, axis
                continue
            if step is None:
                continue
            row = Q[k]
            p[k] += step
            n += step * ck
            d += 2 * step * q + step * step * qkk
            inv = 1.0 / math.sqrt(d)
            p = [v * inv for v in p]
            Qp = [(a + step * b) * inv for a, b in zip(Qp, row)]
            n *= inv
            d = 1.0
            val = best
        if val - start <= rel_tol * max(val, 1e-300):
            break
    return val, p, sweeps


def dtilde_maximize(rho, sigma, restarts: int = 64, seed: int = 0, max_sweeps: int = 20000):
    """Numerically maximize tr X(rho - sigma) / sqrt(tr X^2 (rho + sigma)).

    The search runs over real coordinates of X in the eigenbasis of rho + sigma,
    restricted to the support, each coordinate rescaled to unit denominator.
    Numerator and denominator are evaluated as traces of the basis operators,
    so nothing of the closed form enters.  Returns ``(value, diagnostics)``.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    r, s = _check_pair(rho, sigma)
    total, diff = r + s, r - s
    lam, vecs = core.eig_hermitian(total)
    basis = _hermitian_basis(vecs, lambda i, j: lam[i] + lam[j] > NULL_CUTOFF)
    B = np.array(basis)
    c = np.einsum("kij,ji->k", B, diff).real
    BT = B @ total
    Q = np.einsum("kij,lji->kl", B, BT).real
    Q = (Q + Q.T) / 2
    scale = 1.0 / np.sqrt(np.diag(Q))
    c = c * scale
    Q = Q * np.outer(scale, scale)
    rng = np.random.default_rng(seed)
    if np.max(np.abs(c), initial=0.0) <= 1e-15:
        x = np.zeros_like(total)
        return 0.0, {"values": [0.0] * restarts, "sweeps": [0] * restarts, "X": x}
    c_l, Q_l = c.tolist(), Q.tolist()
    runs = []
    for _ in range(restarts):
        p0 = rng.standard_normal(len(c_l)).tolist()
        runs.append(_coordinate_ascent(c_l, Q_l, p0, max_sweeps, 1e-15))
    runs.sort(key=lambda t: -t[0])
    values = [v for v, _, _ in runs]
    if restarts > 1 and values[0] - values[1] > 1e-6:
        raise ConvergenceFailure(f"best restarts disagree: {values[0]!r} vs {values[1]!r}")
    best_p = np.array(runs[0][1]) * scale
    X = np.einsum("k,kij->ij", best_p, B)
    X = X / math.sqrt(np.trace(X @ X @ total).real)
    return _clamp_unit(values[0], "dtilde"), {"values": values, "sweeps": [sw for _, _, sw in runs], "X": X}


@dataclass(frozen=True)
class DistanceProfile:
    """D-bar and D-tilde of one party's conditional states, per setting of the other.

    ``side='bob'`` holds Bob's states indexed by Alice's setting x;
    ``side='alice'`` holds Alice's states indexed by Bob's setting y.
    """

    side: str
    dbar: tuple[float, float]
    dtilde: tuple[float, float]
    dtilde_eps: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.side not in ("alice", "bob"):
            raise ValueError(f"side must be 'alice' or 'bob', got {self.side!r}")
        for x in range(2):
            if not (-1e-10 <= self.dbar[x] <= self.dtilde[x] + 1e-10):
                raise ValueError(f"dbar > dtilde at setting {x}")
            if self.dtilde[x] > math.sqrt(max(self.dbar[x], 0.0)) + 1e-9 or self.dtilde[x] > 1 + 1e-10:
                raise ValueError(f"dtilde out of range at setting {x}")

    def to_json(self) -> dict:
        out = {"side": self.side, "dbar": list(self.dbar), "dtilde": list(self.dtilde)}
        if self.dtilde_eps is not None:
            out["dtilde_eps"] = list(self.dtilde_eps)
        return out


def conditional_pair(r, side: str, x: int):
    if side == "bob":
        return core.bob_conditional_states(r, x)
    if side == "alice":
        return core.alice_conditional_states(r, x)
    raise ValueError(f"unknown side {side!r}")


def distance_profile(r, side: str = "bob", eps=None) -> DistanceProfile:
    """Assemble D-bar, D-tilde (and D-tilde^eps when ``eps`` is given) for both settings."""
    db, dt, de = [], [], []
    for x in range(2):
        s0, s1 = conditional_pair(r, side, x)
        db.append(dbar(s0, s1))
        dt.append(dtilde_closed_form(s0, s1))
        if eps is not None:
            de.append(dtilde_eps(s0, s1, eps[x]))
    return DistanceProfile(side, tuple(db), tuple(dt), tuple(de) if eps is not None else None)
