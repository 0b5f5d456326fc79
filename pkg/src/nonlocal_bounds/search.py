"""Random Bell functionals, their maximal two-qubit violation, and the batch experiment.

A functional is the 8-vector (gA0, gA1, gB0, gB1, gC00, gC01, gC10, gC11) of
coefficients of <A_x>, <B_y> and <A_x B_y>.  Its quantum maximum over
two-qubit realizations with real-symmetric states and x-z plane observables is
found by multi-start Nelder-Mead over (theta, a0, a1, b0, b1).
"""

from __future__ import annotations

import itertools
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import qmc

from . import core
from .bounds import OPTIMIZER_TOL, extended_landau_margin
from .core import Correlators, TwoQubitRealization
from .distance import distance_profile
from .errors import ConvergenceFailure, DomainError
from .extremal import SaturationVerdict, saturation_verdict
from .simplex import nelder_mead

NONCLASSICAL_GAP = 1e-7
RESTART_AGREEMENT = 1e-7
PARAM_NAMES = ("theta", "a0", "a1", "b0", "b1")
COARSE_XTOL = 1e-4
POLISH_XTOL = 1e-11
N_POLISH = 8


@dataclass(frozen=True)
class BellFunctional:
    gA: tuple[float, float]
    gB: tuple[float, float]
    gC: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        object.__setattr__(self, "gA", tuple(float(v) for v in self.gA))
        object.__setattr__(self, "gB", tuple(float(v) for v in self.gB))
        object.__setattr__(self, "gC", tuple(tuple(float(v) for v in row) for row in self.gC))

    @classmethod
    def from_vector(cls, v) -> "BellFunctional":
        v = [float(x) for x in v]
        if len(v) != 8:
            raise ValueError("a functional has 8 coefficients")
        return cls(v[0:2], v[2:4], (v[4:6], v[6:8]))

    def vector(self) -> list[float]:
        return [*self.gA, *self.gB, *self.gC[0], *self.gC[1]]

    @property
    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.vector()))

    def normalized(self) -> "BellFunctional":
        n = self.norm
        if n == 0:
            raise DomainError("the zero functional cannot be normalized")
        return BellFunctional.from_vector([v / n for v in self.vector()])

    def flip_b(self, y: int) -> "BellFunctional":
        """The same functional written for B_y -> -B_y."""
        gB = list(self.gB)
        gC = [list(r) for r in self.gC]
        gB[y] = -gB[y]
        for x in range(2):
            gC[x][y] = -gC[x][y]
        return BellFunctional(gB=gB, gA=self.gA, gC=gC)

    def evaluate(self, corr: Correlators) -> float:
        return (
            sum(self.gA[x] * corr.mA[x] for x in range(2))
            + sum(self.gB[y] * corr.mB[y] for y in range(2))
            + sum(self.gC[x][y] * corr.C[x][y] for x in range(2) for y in range(2))
        )

    def to_json(self) -> list[float]:
        return self.vector()


CHSH = BellFunctional((0, 0), (0, 0), ((1, 1), (1, -1)))


def tilted_functional(beta: float, alpha: float = 1.0) -> BellFunctional:
    """beta<A0> + alpha(<A0B0> + <A0B1>) + <A1B0> - <A1B1>."""
    return BellFunctional((beta, 0), (0, 0), ((alpha, alpha), (1, -1)))


def sample_functional(rng_seed) -> BellFunctional:
    """Eight i.i.d. standard normal coefficients, normalized to unit length."""
    rng = np.random.default_rng(rng_seed)
    return BellFunctional.from_vector(rng.standard_normal(8)).normalized()


def classical_max(f: BellFunctional) -> float:
    """Maximum over the 16 deterministic assignments a_x, b_y = +/-1."""
    best = -math.inf
    for a0, a1, b0, b1 in itertools.product((1, -1), repeat=4):
        a, b = (a0, a1), (b0, b1)
        v = sum(f.gA[x] * a[x] for x in range(2)) + sum(f.gB[y] * b[y] for y in range(2))
        v += sum(f.gC[x][y] * a[x] * b[y] for x in range(2) for y in range(2))
        best = max(best, v)
    return best


def _best_deterministic_angles(f: BellFunctional) -> list[float]:
    best, arg = -math.inf, None
    for signs in itertools.product((1, -1), repeat=4):
        a, b = signs[:2], signs[2:]
        v = sum(f.gA[x] * a[x] for x in range(2)) + sum(f.gB[y] * b[y] for y in range(2))
        v += sum(f.gC[x][y] * a[x] * b[y] for x in range(2) for y in range(2))
        if v > best:
            best, arg = v, signs
    return [0.0] + [s * math.pi / 2 for s in arg]


def functional_value(f: BellFunctional, p) -> float:
    """Closed-form value of f on the realization with parameters (theta, a0, a1, b0, b1).

    <A_x> = sin a_x cos 2theta, <B_y> = sin b_y cos 2theta and
    <A_x B_y> = cos a_x cos b_y sin 2theta + sin a_x sin b_y.
    """
    th, a0, a1, b0, b1 = p
    c2, s2 = math.cos(2 * th), math.sin(2 * th)
    sa = (math.sin(a0), math.sin(a1))
    ca = (math.cos(a0), math.cos(a1))
    sb = (math.sin(b0), math.sin(b1))
    cb = (math.cos(b0), math.cos(b1))
    gA, gB, gC = f.gA, f.gB, f.gC
    v = c2 * (gA[0] * sa[0] + gA[1] * sa[1] + gB[0] * sb[0] + gB[1] * sb[1])
    for x in range(2):
        for y in range(2):
            v += gC[x][y] * (ca[x] * cb[y] * s2 + sa[x] * sb[y])
    return v


@dataclass(frozen=True)
class SearchResult:
    functional: BellFunctional
    best_realization: TwoQubitRealization
    quantum_value: float
    classical_value: float
    nonclassical: bool
    verdicts: tuple[SaturationVerdict, SaturationVerdict]
    landau_margins: tuple[float, float]
    seed: int
    restarts: int = 64
    restart_values: tuple[float, ...] = ()

    @property
    def both_satisfied(self) -> bool:
        return self.verdicts[0].satisfied and self.verdicts[1].satisfied

    def to_json(self) -> dict:
        return {
            "functional": self.functional.to_json(),
            "realization": self.best_realization.to_json(),
            "quantum_value": self.quantum_value,
            "classical_value": self.classical_value,
            "nonclassical": self.nonclassical,
            "verdicts": {"bob": self.verdicts[0].to_json(), "alice": self.verdicts[1].to_json()},
            "landau_margins": {"bob": self.landau_margins[0], "alice": self.landau_margins[1]},
            "seed": self.seed,
            "restarts": self.restarts,
        }


def _optimize(f: BellFunctional, restarts: int, seed: int, fixed: Optional[dict]):
    fixed = dict(fixed or {})
    unknown = set(fixed) - set(PARAM_NAMES)
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)}")
    free = [i for i, name in enumerate(PARAM_NAMES) if name not in fixed]
    base = [float(fixed.get(name, 0.0)) for name in PARAM_NAMES]

    def full(z):
        p = list(base)
        for i, v in zip(free, z):
            p[i] = v
        return p

    if not free:
        p = full([])
        return p, [functional_value(f, p)]

    def neg(z):
        return -functional_value(f, full(z))

    lo = np.array([0.0 if i == 0 else -math.pi for i in free])
    hi = np.array([math.pi / 4 if i == 0 else math.pi for i in free])
    sampler = qmc.LatinHypercube(d=len(free), rng=np.random.default_rng(seed))
    starts = qmc.scale(sampler.random(restarts), lo, hi).tolist()
    if not fixed:
        # the best deterministic strategy is always reachable from here
        starts.append(_best_deterministic_angles(f))
    coarse = [nelder_mead(neg, z, step=0.3, xtol=COARSE_XTOL, max_iter=2000) for z in starts]
    coarse.sort(key=lambda r: r.fun)
    polished = []
    for r in coarse[: min(N_POLISH, len(coarse))]:
        res = nelder_mead(neg, r.x, step=1e-3, xtol=POLISH_XTOL, max_iter=20000)
        # one restart guards against a collapsed simplex
        res = nelder_mead(neg, res.x, step=1e-5, xtol=POLISH_XTOL, max_iter=20000)
        polished.append((-res.fun, full(res.x)))
    polished.sort(key=lambda t: -t[0])
    return polished[0][1], [v for v, _ in polished]


def maximize_violation(
    f: BellFunctional, restarts: int = 64, seed: int = 0, fixed: Optional[dict] = None
) -> SearchResult:
    """Maximize ``f`` over two-qubit realizations.

    ``fixed`` optionally pins some of the parameters theta, a0, a1, b0, b1.
    Raises ConvergenceFailure when the two best polished restarts disagree.
    """
    if restarts < 16:
        raise ValueError("restarts must be >= 16")
    p, values = _optimize(f, restarts, seed, fixed)
    if len(values) > 1 and values[0] - values[1] > RESTART_AGREEMENT:
        raise ConvergenceFailure(f"best restarts disagree: {values[0]!r} vs {values[1]!r}")
    r = TwoQubitRealization(p[0], (p[1], p[2]), (p[3], p[4]))
    if not fixed:
        r = r.canonical()
    _, corr = core.evaluate_behavior(r)
    q = f.evaluate(corr)
    if abs(q - values[0]) > 1e-9:
        raise ConvergenceFailure(f"closed-form value {values[0]!r} disagrees with the behavior route {q!r}")
    c = classical_max(f)
    verdicts = (saturation_verdict(r, "bob", OPTIMIZER_TOL), saturation_verdict(r, "alice", OPTIMIZER_TOL))
    margins = tuple(extended_landau_margin(corr, distance_profile(r, side)).margin for side in ("bob", "alice"))
    return SearchResult(
        functional=f,
        best_realization=r,
        quantum_value=q,
        classical_value=c,
        nonclassical=q > c + NONCLASSICAL_GAP,
        verdicts=verdicts,
        landau_margins=margins,
        seed=int(seed),
        restarts=restarts,
        restart_values=tuple(values),
    )


def _child_seeds(seed: int, n: int) -> list[tuple[int, int]]:
    out = []
    for child in np.random.SeedSequence(seed).spawn(n):
        a, b = child.generate_state(2)
        out.append((int(a), int(b)))
    return out


def _run_one(args) -> dict:
    index, fseed, oseed, restarts = args
    f = sample_functional(fseed)
    attempt = restarts
    for _ in range(4):
        try:
            res = maximize_violation(f, restarts=attempt, seed=oseed)
            break
        except ConvergenceFailure:
            attempt *= 2
    else:
        return {"index": index, "functional_seed": fseed, "functional": f.to_json(), "error": "ConvergenceFailure"}
    rec = {"index": index, "functional_seed": fseed, **res.to_json()}
    rec["counterexample"] = bool(res.nonclassical and not res.both_satisfied)
    return rec


def worker_count(requested: Optional[int] = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("NONLOCAL_BOUNDS_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def conjecture_batch(n: int, seed: int = 0, out_path=None, restarts: int = 64, workers: Optional[int] = None):
    """Run the saturation experiment on ``n`` random functionals.

    Returns ``(summary, records)``.  When ``out_path`` is given the records are
    written there as JSON lines, in input order.  Counterexamples (nonclassical
    optima failing either saturation test) stay in the records in full and are
    listed by index in the summary.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    tasks = [(i, a, b, restarts) for i, (a, b) in enumerate(_child_seeds(seed, n))]
    w = min(worker_count(workers), n)
    if w == 1:
        records = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=w) as ex:
            records = list(ex.map(_run_one, tasks, chunksize=max(1, n // (4 * w))))
    nonclassical = [r for r in records if r.get("nonclassical")]
    margins = [abs(m) for r in nonclassical for m in r["landau_margins"].values()]
    summary = {
        "n": n,
        "n_nonclassical": len(nonclassical),
        "n_satisfied": sum(1 for r in nonclassical if not r["counterexample"]),
        "max_landau_margin": max(margins) if margins else 0.0,
        "counterexamples": [r["index"] for r in records if r.get("counterexample")],
        "errors": [r["index"] for r in records if "error" in r],
    }
    if out_path is not None:
        text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
        try:
            atomic_write_text(out_path, text)
        except OSError as exc:
            raise OSError(f"cannot write results to {out_path}: {exc}") from exc
    return summary, records
