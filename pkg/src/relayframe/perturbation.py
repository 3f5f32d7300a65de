"""Stability of relay frames under perturbation of the inner subspaces.

Two systems are compared when they agree in everything except the inner
subspaces (``V`` in the first, ``Z`` in the second).  The deviation
operator

    Delta = sum mu_w mu_{w,v} alpha^2 pi_W Lambda^T (P_V - P_Z)^2 Lambda pi_W

is the exact quadratic form of ``||(T_1 - T_2) f||^2``, so its top
eigenvalue is the smallest constant for the simple (one-constant) test.
"""
from dataclasses import asdict, dataclass
import math

import numpy as np

from . import linalg
from .analysis import FRAME_TOL, frame_bounds, require_frame
from .errors import InvalidConstants, StructureMismatch
from .model import same_structure

STRUCTURE_TOL = 1e-12
BRACKET_TOL = 1e-8
DEFAULT_SEED = 42


@dataclass(frozen=True)
class PerturbationReport:
    variant: str
    c_exact: float
    hypothesis_holds: bool
    predicted_lower: float
    predicted_upper: float
    actual_lower: float
    actual_upper: float
    bracket_ok: bool
    sampled: bool = False
    samples_checked: int = 0
    worst_sample_slack: float = None
    constants: dict = None

    @property
    def passed(self):
        return self.hypothesis_holds and self.bracket_ok

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _same_array(a, b):
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= STRUCTURE_TOL))


def check_structure(sys1, sys2):
    """Raise StructureMismatch unless the systems differ only in inner subspaces."""
    if not same_structure(sys1, sys2):
        raise StructureMismatch("systems differ in ids, masses or index structure")
    for l1, l2 in zip(sys1.locals, sys2.locals):
        wid = l1.atom.id
        if not _same_array(l1.W.projector, l2.W.projector):
            raise StructureMismatch(f"W differs at node {wid!r}")
        if not _same_array(l1.Lambda, l2.Lambda):
            raise StructureMismatch(f"Lambda differs at node {wid!r}")
        for a1, a2 in zip(l1.inner, l2.inner):
            if a1.alpha != a2.alpha:
                raise StructureMismatch(f"alpha differs at atom {wid}/{a1.atom.id}")
            if not _same_array(a1.Lambda, a2.Lambda):
                raise StructureMismatch(f"per-atom Lambda differs at atom {wid}/{a1.atom.id}")


def deviation_operator(sys1, sys2):
    check_structure(sys1, sys2)
    n = sys1.ambient_dim
    D = np.zeros((n, n))
    for loc1, loc2 in zip(sys1.locals, sys2.locals):
        piW = loc1.W.projector
        for a1, a2 in zip(loc1.inner, loc2.inner):
            Y = (a1.V.projector - a2.V.projector) @ loc1.operator_for(a1) @ piW
            D += (loc1.atom.weight * a1.atom.weight * a1.alpha * a1.alpha) * (Y.T @ Y)
    return 0.5 * (D + D.T)


def _difference_norms(sys1, sys2, f):
    """``||(T1 - T2) f||``, ``||T1 f||`` and ``||T2 f||`` in the coefficient norm."""
    dd = t1 = t2 = 0.0
    for c1, c2 in zip(sys1.chains, sys2.chains):
        x1 = c1.alpha * (c1.X @ f)
        x2 = c2.alpha * (c2.X @ f)
        r = x1 - x2
        dd += c1.mass * float(r @ r)
        t1 += c1.mass * float(x1 @ x1)
        t2 += c2.mass * float(x2 @ x2)
    return math.sqrt(dd), math.sqrt(t1), math.sqrt(t2)


def check_perturbation_simple(sys1, sys2, frame_tol=FRAME_TOL):
    """Single-constant test with ``C = lambda_max(Delta)``.

    Applicable when ``C < A``; the predicted bounds are ``(sqrt A - sqrt C)^2``
    and ``(sqrt B + sqrt C)^2``.
    """
    _, rep1 = require_frame(sys1, frame_tol)
    D = deviation_operator(sys1, sys2)
    c = max(linalg.sym_eig(D).max, 0.0)
    rep2 = frame_bounds(sys2, frame_tol=frame_tol)
    lower = (math.sqrt(rep1.a_opt) - math.sqrt(c)) ** 2
    upper = (math.sqrt(rep1.b_opt) + math.sqrt(c)) ** 2
    ok = lower <= rep2.a_opt + BRACKET_TOL and rep2.b_opt <= upper + BRACKET_TOL
    return PerturbationReport(
        variant="simple",
        c_exact=c,
        hypothesis_holds=c < rep1.a_opt,
        predicted_lower=lower,
        predicted_upper=upper,
        actual_lower=rep2.a_opt,
        actual_upper=rep2.b_opt,
        bracket_ok=bool(ok),
    )


def check_perturbation_three_constant(sys1, sys2, C, D, eps, samples=64, seed=DEFAULT_SEED, frame_tol=FRAME_TOL):
    """Three-constant test ``||(T1-T2)f|| <= C||T1 f|| + D||T2 f|| + eps||f||``.

    The inequality is verified on `samples` random unit vectors plus the
    eigenvectors of the deviation operator, so the verdict is a sampled one.
    """
    for name, val in (("C", C), ("D", D), ("eps", eps)):
        if not (math.isfinite(val) and val >= 0):
            raise InvalidConstants(f"{name} must be finite and non-negative, got {val!r}")
    if D >= 1:
        raise InvalidConstants(f"D must lie in [0, 1), got {D!r}")
    if samples < 1:
        raise InvalidConstants("samples must be positive")
    _, rep1 = require_frame(sys1, frame_tol)
    Dop = deviation_operator(sys1, sys2)
    eig = linalg.sym_eig(Dop)
    c = max(eig.max, 0.0)
    n = sys1.ambient_dim
    rng = np.random.default_rng(seed)
    probes = rng.standard_normal((samples, n))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    probes = np.vstack([probes, eig.eigenvectors.T])
    worst = math.inf
    all_pass = True
    for f in probes:
        d, t1, t2 = _difference_norms(sys1, sys2, f)
        rhs = C * t1 + D * t2 + eps * float(np.linalg.norm(f))
        slack = rhs - d
        worst = min(worst, slack)
        if slack < -1e-12 * max(1.0, rhs):
            all_pass = False
    sqa = math.sqrt(rep1.a_opt)
    sqb = math.sqrt(rep1.b_opt)
    lead = C + eps / sqa
    holds = all_pass and max(lead, D) < 1
    lower = rep1.a_opt * ((1 - lead) / (1 + D)) ** 2
    upper = rep1.b_opt * ((1 + C + eps / sqb) / (1 - D)) ** 2
    rep2 = frame_bounds(sys2, frame_tol=frame_tol)
    ok = lower <= rep2.a_opt + BRACKET_TOL and rep2.b_opt <= upper + BRACKET_TOL
    return PerturbationReport(
        variant="three_constant",
        c_exact=c,
        hypothesis_holds=bool(holds),
        predicted_lower=lower,
        predicted_upper=upper,
        actual_lower=rep2.a_opt,
        actual_upper=rep2.b_opt,
        bracket_ok=bool(ok),
        sampled=True,
        samples_checked=int(probes.shape[0]),
        worst_sample_slack=float(worst),
        constants={"C": float(C), "D": float(D), "eps": float(eps), "seed": int(seed)},
    )
