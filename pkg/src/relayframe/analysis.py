"""Frame bounds, injectivity of the analysis operator, reconstruction via
the inverse frame operator, and the cross-duality criterion."""
from dataclasses import asdict, dataclass, field
import math

import numpy as np

from . import linalg
from .errors import IncompatibleSystems, NotAFrame
from .model import same_structure
from .ops import (
    assemble_dense,
    check_family,
    cross_operator,
    frame_operator_apply,
    synthesis,
)

FRAME_TOL = 1e-10
PARSEVAL_TOL = 1e-8
SOLVE_TOL = 1e-12
DUALITY_TOL = 1e-8


@dataclass(frozen=True)
class FrameBoundsReport:
    a_opt: float
    b_opt: float
    is_frame: bool
    is_bessel: bool
    is_parseval: bool
    frame_tol: float
    parseval_tol: float
    spectrum: tuple = field(default=(), repr=False)

    @property
    def condition(self):
        return math.inf if self.a_opt <= 0 else self.b_opt / self.a_opt

    def to_dict(self):
        d = asdict(self)
        d["spectrum"] = list(self.spectrum)
        return d


def _frame_verdict(a_opt, S, frame_tol):
    # lambda_min judged both absolutely and relative to the largest diagonal entry of S
    scale = max(1.0, float(np.max(np.diag(S))))
    return a_opt > frame_tol * scale


def frame_bounds(sys, frame_tol=FRAME_TOL, parseval_tol=PARSEVAL_TOL, handle=None):
    """Optimal bounds ``A = lambda_min(S)`` and ``B = lambda_max(S)``."""
    handle = assemble_dense(sys) if handle is None else handle
    w = linalg.sym_eig(handle.dense).eigenvalues
    a_opt = max(float(w[0]), 0.0)
    b_opt = max(float(w[-1]), 0.0)
    return FrameBoundsReport(
        a_opt=a_opt,
        b_opt=b_opt,
        is_frame=_frame_verdict(a_opt, handle.dense, frame_tol),
        is_bessel=True,
        is_parseval=max(abs(a_opt - 1.0), abs(b_opt - 1.0)) <= parseval_tol,
        frame_tol=frame_tol,
        parseval_tol=parseval_tol,
        spectrum=tuple(float(x) for x in w),
    )


@dataclass(frozen=True)
class AnalysisDiagnostics:
    smallest_singular_value: float
    injective: bool
    closed_range: bool = True
    closed_range_reason: str = "finite-dimensional range is always closed"

    def to_dict(self):
        return asdict(self)


def analysis_diagnostics(sys, frame_tol=FRAME_TOL):
    """Smallest singular value of ``T`` (``sqrt(lambda_min(S))``) and the
    injectivity verdict, which coincides with the frame verdict."""
    handle = assemble_dense(sys)
    rep = frame_bounds(sys, frame_tol=frame_tol, handle=handle)
    return AnalysisDiagnostics(math.sqrt(rep.a_opt), rep.is_frame)


def require_frame(sys, frame_tol=FRAME_TOL):
    """Dense frame operator and bounds of `sys`; raises NotAFrame otherwise."""
    handle = assemble_dense(sys)
    rep = frame_bounds(sys, frame_tol=frame_tol, handle=handle)
    if not rep.is_frame:
        raise NotAFrame(f"lambda_min(S) = {rep.a_opt:.3e} is not above the frame tolerance")
    return handle, rep


def _solver(handle, method):
    S = handle.dense
    if method == "dense":
        return lambda b: linalg.solve_spd(S, b, tol=SOLVE_TOL)
    if method == "cg":
        return lambda b: linalg.conjugate_gradient(handle.apply_matrix_free, b, tol=SOLVE_TOL)
    raise ValueError(f"unknown solve method {method!r}")


def _inner_inverse_sum(sys, c, handle):
    # S^{-1} applied to every term of the synthesis sum separately
    terms = np.column_stack(
        [(ch.mass * ch.alpha) * (ch.X.T @ c.blocks[ch.w][ch.v]) for ch in sys.chains]
    )
    solved = linalg.solve_spd(handle.dense, terms, tol=SOLVE_TOL)
    out = np.zeros(sys.ambient_dim)
    for j in range(solved.shape[1]):
        out += solved[:, j]
    return out


def reconstruct(sys, c, formula="left", method="dense", frame_tol=FRAME_TOL):
    """Vector ``g`` with ``S g = T* c``.

    ``left`` solves once against the synthesized vector; ``right`` applies
    ``S^{-1}`` inside the sum, term by term.  Both return the same ``g``.
    """
    check_family(sys, c)
    handle, _ = require_frame(sys, frame_tol)
    if formula == "left":
        return _solver(handle, method)(synthesis(sys, c))
    if formula == "right":
        return _inner_inverse_sum(sys, c, handle)
    raise ValueError(f"formula must be 'left' or 'right', got {formula!r}")


@dataclass(frozen=True)
class ReconstructionReport:
    reconstructed: np.ndarray
    relative_error: float
    formula_used: str

    def to_dict(self):
        return {
            "reconstructed": [float(x) for x in self.reconstructed],
            "relative_error": self.relative_error,
            "formula_used": self.formula_used,
        }


def reconstruct_vector(sys, f, formula="left", method="dense", frame_tol=FRAME_TOL):
    """Recover `f` as ``S^{-1} (S f)`` (left) or ``S (S^{-1} f)`` (right)."""
    f = linalg.as_vector(f, "f")
    handle, _ = require_frame(sys, frame_tol)
    solve = _solver(handle, method)
    if formula == "left":
        g = solve(frame_operator_apply(sys, f))
    elif formula == "right":
        g = frame_operator_apply(sys, solve(f))
    else:
        raise ValueError(f"formula must be 'left' or 'right', got {formula!r}")
    err = float(np.linalg.norm(g - f)) / max(1.0, float(np.linalg.norm(f)))
    return ReconstructionReport(g, err, formula)


@dataclass(frozen=True)
class CrossDualityReport:
    residual_max: float
    is_dual_pair: bool
    a_first: float
    b_first: float
    a_second: float
    b_second: float
    lower_first_ok: bool
    lower_second_ok: bool

    @property
    def passed(self):
        return self.is_dual_pair and self.lower_first_ok and self.lower_second_ok

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def cross_duality_check(sysR, sysR2, tol=DUALITY_TOL):
    """Test ``T*_{R2} T_R = I`` and, if it holds, the implied lower bounds
    ``A_R >= 1/B_R2`` and ``A_R2 >= 1/B_R``."""
    if not same_structure(sysR, sysR2):
        raise IncompatibleSystems("systems differ in ambient dimension or index structure")
    M = cross_operator(sysR2, sysR)
    resid = float(np.max(np.abs(M - np.eye(sysR.ambient_dim))))
    r1 = frame_bounds(sysR)
    r2 = frame_bounds(sysR2)
    dual = resid <= tol
    ok1 = ok2 = False
    if dual:
        ok1 = r2.b_opt > 0 and r1.a_opt >= 1.0 / r2.b_opt - tol
        ok2 = r1.b_opt > 0 and r2.a_opt >= 1.0 / r1.b_opt - tol
    return CrossDualityReport(resid, dual, r1.a_opt, r1.b_opt, r2.a_opt, r2.b_opt, bool(ok1), bool(ok2))
