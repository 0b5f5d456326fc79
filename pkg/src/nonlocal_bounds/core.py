"""Finite-dimensional quantum model for the two-setting, two-outcome Bell scenario.

Matrices are plain ``numpy`` complex arrays.  The dataclasses below bundle a
shared state with one +/-1 observable per party and setting, and the
device-independent objects (behaviors, correlators) computed from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    InvalidObservable,
    InvalidState,
    NotHermitian,
)

HERMITIAN_TOL = 1e-12
INVOLUTION_TOL = 1e-10
NORMALIZATION_TOL = 1e-10
MAX_DIM = 16

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (IDENTITY2, SIGMA1, SIGMA2, SIGMA3)


def as_hermitian(op, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``op`` as a complex square array, checking Hermiticity entrywise."""
    m = np.asarray(op, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise DimensionMismatch(f"dimension {m.shape[0]} exceeds {MAX_DIM}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3e}")
    return m


def check_density(rho, *, normalized: bool = False) -> np.ndarray:
    """Validate a (sub)normalized density matrix and return it as an array."""
    m = as_hermitian(rho)
    lo = np.linalg.eigvalsh(m)[0]
    if lo < -1e-10:
        raise InvalidState(f"negative eigenvalue {lo:.3e}")
    tr = np.trace(m).real
    if normalized and abs(tr - 1.0) > NORMALIZATION_TOL:
        raise InvalidState(f"trace {tr!r} is not 1")
    if tr < -1e-12 or tr > 1 + 1e-12:
        raise InvalidState(f"trace {tr!r} outside [0, 1]")
    return m


def eig_hermitian(op) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    Backed by LAPACK (``numpy.linalg.eigh``); a reconstruction check guards
    against silent failures.
    """
    m = as_hermitian(op)
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc
    err = np.max(np.abs((vecs * vals) @ vecs.conj().T - m)) if m.size else 0.0
    if err > 1e-10 * max(1.0, np.max(np.abs(m))):
        raise ConvergenceFailure(f"reconstruction error {err:.3e}")
    return vals, vecs


def pauli_decompose(op) -> tuple[float, float, float, float]:
    """Coefficients ``(c_I, c_1, c_2, c_3)`` with ``op = c_I I + sum_k c_k sigma_k``."""
    m = np.asarray(op, dtype=complex)
    if m.shape != (2, 2):
        raise DimensionMismatch(f"pauli_decompose needs a 2x2 matrix, got {m.shape}")
    m = as_hermitian(m)
    return tuple(float(np.trace(p @ m).real / 2) for p in PAULIS)


def is_involution(obs, tol: float = INVOLUTION_TOL) -> bool:
    m = np.asarray(obs)
    return bool(np.max(np.abs(m @ m - np.eye(m.shape[0]))) <= tol)


def xz_observable(angle: float) -> np.ndarray:
    """``cos(angle) sigma_1 + sin(angle) sigma_3``."""
    return math.cos(angle) * SIGMA1 + math.sin(angle) * SIGMA3


def wrap_angle(a: float) -> float:
    """Map an angle into (-pi, pi]."""
    w = math.remainder(a, 2 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class TwoQubitRealization:
    """cos(theta)|00> + sin(theta)|11> with x-z plane observables.

    ``alice[x]`` and ``bob[y]`` are the measurement angles: the observable is
    cos(angle) sigma_1 + sin(angle) sigma_3.
    """

    theta: float
    alice: tuple[float, float]
    bob: tuple[float, float]

    def __post_init__(self):
        vals = (self.theta, *self.alice, *self.bob)
        if len(self.alice) != 2 or len(self.bob) != 2:
            raise ValueError("need exactly two angles per party")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("angles must be finite")
        object.__setattr__(self, "alice", tuple(float(a) for a in self.alice))
        object.__setattr__(self, "bob", tuple(float(b) for b in self.bob))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def state_vector(self) -> np.ndarray:
        return np.array([math.cos(self.theta), 0.0, 0.0, math.sin(self.theta)], dtype=complex)

    def general(self) -> "GeneralRealization":
        return build_realization(self.theta, *self.alice, *self.bob)

    def swapped(self) -> "TwoQubitRealization":
        """The same realization with the roles of Alice and Bob exchanged."""
        return TwoQubitRealization(self.theta, self.bob, self.alice)

    def canonical(self) -> "TwoQubitRealization":
        """Local-unitary equivalent with theta in [0, pi/4] and wrapped angles."""
        th = math.remainder(self.theta, math.pi)  # theta -> theta + pi is a global phase
        a, b = list(self.alice), list(self.bob)
        if th < 0:
            # sigma_3 on Alice: cos|00> - sin|11> and sigma_1 -> -sigma_1
            th = -th
            a = [math.pi - v for v in a]
        if th > math.pi / 4:
            # sigma_1 on both qubits swaps the Schmidt vectors and flips sigma_3
            th = math.pi / 2 - th
            a = [-v for v in a]
            b = [-v for v in b]
        return TwoQubitRealization(th, tuple(wrap_angle(v) for v in a), tuple(wrap_angle(v) for v in b))

    def to_json(self) -> dict:
        return {"theta": self.theta, "thetaA": list(self.alice), "thetaB": list(self.bob)}

    @classmethod
    def from_json(cls, obj: dict) -> "TwoQubitRealization":
        return cls(float(obj["theta"]), tuple(obj["thetaA"]), tuple(obj["thetaB"]))


@dataclass(frozen=True, eq=False)
class GeneralRealization:
    """Density matrix on C^dA (x) C^dB plus two +/-1 observables per party."""

    state: np.ndarray
    alice_obs: tuple[np.ndarray, np.ndarray]
    bob_obs: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        a = tuple(np.array(as_hermitian(o, 1e-10)) for o in self.alice_obs)
        b = tuple(np.array(as_hermitian(o, 1e-10)) for o in self.bob_obs)
        if len(a) != 2 or len(b) != 2:
            raise ValueError("need exactly two observables per party")
        if a[0].shape != a[1].shape or b[0].shape != b[1].shape:
            raise DimensionMismatch("observables of one party must share a dimension")
        rho = np.array(self.state, dtype=complex)
        da, db = a[0].shape[0], b[0].shape[0]
        if rho.shape != (da * db, da * db):
            raise DimensionMismatch(f"state shape {rho.shape} does not match {da}x{db}")
        if da * db > 64:
            raise DimensionMismatch("total dimension above 64")
        dev = np.max(np.abs(rho - rho.conj().T))
        if dev > 1e-12:
            raise InvalidState(f"state is not Hermitian ({dev:.3e})")
        if abs(np.trace(rho).real - 1) > NORMALIZATION_TOL:
            raise InvalidState("state must have unit trace")
        for arr in (rho, *a, *b):
            arr.setflags(write=False)
        object.__setattr__(self, "state", rho)
        object.__setattr__(self, "alice_obs", a)
        object.__setattr__(self, "bob_obs", b)

    @property
    def dims(self) -> tuple[int, int]:
        return self.alice_obs[0].shape[0], self.bob_obs[0].shape[0]

    def swapped(self) -> "GeneralRealization":
        da, db = self.dims
        r = self.state.reshape(da, db, da, db).transpose(1, 0, 3, 2).reshape(da * db, da * db)
        return GeneralRealization(r, self.bob_obs, self.alice_obs)

    def to_json(self) -> dict:
        def enc(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]

        return {
            "dims": list(self.dims),
            "state": enc(self.state),
            "alice": [enc(o) for o in self.alice_obs],
            "bob": [enc(o) for o in self.bob_obs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GeneralRealization":
        def dec(m):
            arr = np.asarray(m, dtype=float)
            return arr[..., 0] + 1j * arr[..., 1]

        return cls(dec(obj["state"]), tuple(dec(o) for o in obj["alice"]), tuple(dec(o) for o in obj["bob"]))


def realization_from_json(obj: dict):
    """Decode either JSON realization layout."""
    if "theta" in obj:
        return TwoQubitRealization.from_json(obj)
    return GeneralRealization.from_json(obj)


def as_general(r) -> GeneralRealization:
    return r.general() if isinstance(r, TwoQubitRealization) else r


def build_realization(theta, alice0, alice1, bob0, bob1) -> GeneralRealization:
    """Pure state cos(theta)|00> + sin(theta)|11> with x-z plane observables."""
    psi = np.array([math.cos(theta), 0.0, 0.0, math.sin(theta)], dtype=complex)
    rho = np.outer(psi, psi.conj())
    return GeneralRealization(
        rho,
        (xz_observable(alice0), xz_observable(alice1)),
        (xz_observable(bob0), xz_observable(bob1)),
    )


@dataclass(frozen=True)
class Correlators:
    """C[x][y] = <A_x B_y>, mA[x] = <A_x>, mB[y] = <B_y>."""

    C: tuple[tuple[float, float], tuple[float, float]]
    mA: tuple[float, float]
    mB: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "C", tuple(tuple(float(v) for v in row) for row in self.C))
        object.__setattr__(self, "mA", tuple(float(v) for v in self.mA))
        object.__setattr__(self, "mB", tuple(float(v) for v in self.mB))
        flat = [*self.C[0], *self.C[1], *self.mA, *self.mB]
        if any(abs(v) > 1 + 1e-12 for v in flat):
            raise ValueError(f"correlator outside [-1, 1]: {flat}")

    def transposed(self) -> "Correlators":
        """Correlators seen with Alice and Bob exchanged."""
        C = self.C
        return Correlators(((C[0][0], C[1][0]), (C[0][1], C[1][1])), self.mB, self.mA)

    @property
    def chsh(self) -> float:
        C = self.C
        return C[0][0] + C[0][1] + C[1][0] - C[1][1]

    def to_json(self) -> dict:
        return {"C": [list(r) for r in self.C], "mA": list(self.mA), "mB": list(self.mB)}


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional probabilities, indexed ``p[a, b, x, y]``."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (2, 2, 2, 2):
            raise DimensionMismatch(f"behavior must have shape (2,2,2,2), got {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def uniform(cls) -> "Behavior":
        return cls(np.full((2, 2, 2, 2), 0.25))

    def validate(self, tol: float = 1e-10) -> None:
        p = self.p
        if p.min() < -1e-12 or p.max() > 1 + 1e-12:
            raise ValueError("probability outside [0, 1]")
        if np.max(np.abs(p.sum(axis=(0, 1)) - 1)) > tol:
            raise ValueError("behavior is not normalized")
        pa = p.sum(axis=1)  # [a, x, y]
        pb = p.sum(axis=0)  # [b, x, y]
        if np.max(np.abs(pa[:, :, 0] - pa[:, :, 1])) > tol or np.max(np.abs(pb[:, 0, :] - pb[:, 1, :])) > tol:
            raise ValueError("behavior is signaling")

    def correlators(self) -> Correlators:
        sign = np.array([1.0, -1.0])
        p = self.p
        C = np.einsum("a,b,abxy->xy", sign, sign, p)
        mA = np.einsum("a,abxy->x", sign, p) / 2  # averaged over y
        mB = np.einsum("b,abxy->y", sign, p) / 2  # averaged over x
        return Correlators(tuple(map(tuple, C)), tuple(mA), tuple(mB))

    def to_json(self) -> dict:
        return {"p": self.p.tolist()}


def _projectors(obs) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(obs.shape[0])
    return (eye + obs) / 2, (eye - obs) / 2


def _check_observables(r: GeneralRealization) -> None:
    for name, group in (("Alice", r.alice_obs), ("Bob", r.bob_obs)):
        for k, o in enumerate(group):
            if not is_involution(o):
                raise InvalidObservable(f"{name}'s observable {k} does not square to I")


def evaluate_behavior(r) -> tuple[Behavior, Correlators]:
    """p(ab|xy) = tr[(P_a|x (x) Q_b|y) rho] and the correlators derived from it."""
    r = as_general(r)
    _check_observables(r)
    da, db = r.dims
    rho = r.state.reshape(da, db, da, db)
    P = np.array([_projectors(o) for o in r.alice_obs])  # [x, a, i, j]
    Q = np.array([_projectors(o) for o in r.bob_obs])  # [y, b, k, l]
    # tr[(P (x) Q) rho] = sum P[i,j] Q[k,l] rho[j,l,i,k]
    p = np.einsum("xaij,ybkl,jlik->abxy", P, Q, rho).real
    b = Behavior(p)
    return b, b.correlators()


def correlators_direct(r) -> Correlators:
    """<A_x (x) B_y>, <A_x>, <B_y> evaluated directly as traces (no behavior)."""
    r = as_general(r)
    da, db = r.dims
    rho = r.state
    ia, ib = np.eye(da), np.eye(db)
    C = [[np.trace(np.kron(A, B) @ rho).real for B in r.bob_obs] for A in r.alice_obs]
    mA = [np.trace(np.kron(A, ib) @ rho).real for A in r.alice_obs]
    mB = [np.trace(np.kron(ia, B) @ rho).real for B in r.bob_obs]
    return Correlators(tuple(map(tuple, C)), tuple(mA), tuple(mB))


def partial_trace_a(op, da: int, db: int) -> np.ndarray:
    return np.einsum("ijik->jk", np.asarray(op).reshape(da, db, da, db))


def partial_trace_b(op, da: int, db: int) -> np.ndarray:
    return np.einsum("ijkj->ik", np.asarray(op).reshape(da, db, da, db))


def bob_conditional_states(r, x: int) -> tuple[np.ndarray, np.ndarray]:
    """Bob's subnormalized states rho_{a|x} = tr_A[(P_a|x (x) I) rho], a = 0, 1."""
    if x not in (0, 1):
        raise ValueError("x must be 0 or 1")
    r = as_general(r)
    da, db = r.dims
    rho = r.state.reshape(da, db, da, db)
    return tuple(np.einsum("ki,ijkl->jl", P, rho) for P in _projectors(r.alice_obs[x]))


def alice_conditional_states(r, y: int) -> tuple[np.ndarray, np.ndarray]:
    """Alice's subnormalized states tr_B[(I (x) Q_b|y) rho], b = 0, 1."""
    if y not in (0, 1):
        raise ValueError("y must be 0 or 1")
    return bob_conditional_states(as_general(r).swapped(), y)


def local_operator(r, side: str, k: int) -> np.ndarray:
    """tr_other[(obs_k (x) I) rho] for ``side`` = the party holding the reduced operator.

    ``side='bob'`` traces out Alice after inserting her k-th observable.
    """
    r = as_general(r)
    if side == "alice":
        r = r.swapped()
    elif side != "bob":
        raise ValueError(f"unknown side {side!r}")
    s0, s1 = bob_conditional_states(r, k)
    return s0 - s1


def random_two_qubit(rng: np.random.Generator) -> TwoQubitRealization:
    """Uniform Schmidt angle in [0, pi/4] and uniform measurement angles."""
    th = rng.uniform(0, math.pi / 4)
    a = rng.uniform(-math.pi, math.pi, size=4)
    return TwoQubitRealization(th, (a[0], a[1]), (a[2], a[3]))

