"""Dual constructions, Parseval tightening, the minimal-norm identity and
the two invertible-operator transforms.

Every construction returns the new system together with the bounds the
underlying theorem predicts for it, so that callers can compare predicted
and computed frame bounds directly.  Transformed subspaces are always
re-orthonormalized; the transform matrices are kept on the result.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .analysis import FRAME_TOL, frame_bounds, require_frame
from .errors import (
    DimensionMismatch,
    LocalFrameDeficient,
    MissingTransforms,
    NotInSubspace,
    NotPositiveDefinite,
    SingularQ,
)
from .model import Subspace
from .ops import (
    CoefficientFamily,
    analysis,
    assemble_dense,
    coeff_inner,
    cross_operator,
    is_valid_family,
    synthesis,
)

BRACKET_TOL = 1e-9
SANDWICH_TOL = 1e-8
SINGULAR_TOL = 1e-10
IDENTITY_TOL = 1e-8


@dataclass(frozen=True)
class BracketCheck:
    predicted_lower: float
    predicted_upper: float
    actual_lower: float
    actual_upper: float
    tol: float

    @property
    def ok(self):
        return (self.predicted_lower <= self.actual_lower + self.tol
                and self.actual_upper <= self.predicted_upper + self.tol)

    def to_dict(self):
        return {
            "predicted_lower": self.predicted_lower,
            "predicted_upper": self.predicted_upper,
            "actual_lower": self.actual_lower,
            "actual_upper": self.actual_upper,
            "tol": self.tol,
            "ok": self.ok,
        }


def _bracket(system, lower, upper, tol):
    rep = frame_bounds(system)
    return BracketCheck(float(lower), float(upper), rep.a_opt, rep.b_opt, tol)


@dataclass(frozen=True, eq=False)
class DualSystem:
    system: object
    kind: str
    transforms: dict
    predicted_lower: float
    predicted_upper: float

    def verify(self, tol=BRACKET_TOL):
        return _bracket(self.system, self.predicted_lower, self.predicted_upper, tol)


def _transform_outer(sys, R):
    """Replace ``W_w`` by ``orth(R W_w)`` and ``Lambda`` by ``Lambda pi_W R``."""

    def one(loc):
        piW = loc.W.projector
        inner = tuple(
            a if a.Lambda is None else replace(a, Lambda=a.Lambda @ piW @ R) for a in loc.inner
        )
        W = Subspace(linalg.orthonormalize(R @ loc.W.basis))
        return replace(loc, W=W, Lambda=loc.Lambda @ piW @ R, inner=inner)

    return sys.map_locals(one)


def canonical_dual(sys, frame_tol=FRAME_TOL):
    """Dual built from ``S^{-1}``: ``W' = S^{-1} W`` and ``Lambda' = Lambda pi_W S^{-1}``.

    Predicted bounds are ``1/B`` and ``||S^{-1}||^2 B``.
    """
    handle, rep = require_frame(sys, frame_tol)
    Sinv = linalg.inv_spd(handle.dense)
    dual = _transform_outer(sys, Sinv)
    norm_inv = linalg.operator_norm(Sinv)
    return DualSystem(dual, "canonical", {"S_inv": Sinv}, 1.0 / rep.b_opt, norm_inv**2 * rep.b_opt)


def parseval_tighten(sys, frame_tol=FRAME_TOL):
    """Parseval system ``{S^{-1/2} W, V, Lambda pi_W S^{-1/2}, alpha}``."""
    handle, _ = require_frame(sys, frame_tol)
    return _transform_outer(sys, linalg.inv_sqrt_spd(handle.dense))


def _per_local(sys, mats, what):
    """Normalize a per-node matrix collection (list or id-keyed dict) to a list."""
    if mats is None:
        raise MissingTransforms(f"{what} not supplied")
    if isinstance(mats, dict):
        missing = [loc.atom.id for loc in sys.locals if loc.atom.id not in mats]
        if missing:
            raise MissingTransforms(f"{what} missing for nodes {missing}")
        mats = [mats[loc.atom.id] for loc in sys.locals]
    mats = [np.asarray(m, dtype=np.float64) for m in mats]
    if len(mats) != len(sys.locals):
        raise MissingTransforms(f"{what}: expected {len(sys.locals)} matrices, got {len(mats)}")
    return mats


def _block_dual(sys, G, kind):
    Ginv = []
    for loc, g in zip(sys.locals, G):
        k = loc.local_dim
        if g.shape != (k, k):
            raise DimensionMismatch(f"transform for node {loc.atom.id!r} has shape {g.shape}, expected ({k}, {k})")
        try:
            linalg.cholesky(0.5 * (g + g.T))
        except NotPositiveDefinite as exc:
            if kind == "local":
                raise LocalFrameDeficient(f"local frame operator of node {loc.atom.id!r} is singular") from exc
            raise
        Ginv.append(linalg.inv_spd(g))

    def one(loc, gi):
        inner = tuple(
            replace(
                a,
                V=Subspace(linalg.orthonormalize(gi @ a.V.basis)),
                Lambda=gi @ a.V.projector @ loc.operator_for(a),
            )
            for a in loc.inner
        )
        return replace(loc, inner=inner)

    dual = replace(sys, locals=tuple(one(loc, gi) for loc, gi in zip(sys.locals, Ginv)), meta=dict(sys.meta))
    g_norm = max(linalg.operator_norm(g) for g in G)
    ginv_norm = max(linalg.operator_norm(gi) for gi in Ginv)
    return dual, Ginv, g_norm, ginv_norm


def global_dual(sys, G, frame_tol=FRAME_TOL):
    """Dual from a block-diagonal SPD operator ``G = diag(G_w)`` on ``sum K_w``.

    ``V' = G_w^{-1} V`` and, per atom, ``Lambda' = G_w^{-1} P_V Lambda_w``.
    Predicted bounds: ``A / ||G||^2`` and ``||G^{-1}||^2 B``.
    """
    _, rep = require_frame(sys, frame_tol)
    G = _per_local(sys, G, "G_locals")
    dual, Ginv, g_norm, ginv_norm = _block_dual(sys, G, "global")
    return DualSystem(dual, "global", {"G": G, "G_inv": Ginv}, rep.a_opt / g_norm**2, ginv_norm**2 * rep.b_opt)


def local_frame_operator(vectors):
    F = np.asarray(vectors, dtype=np.float64)
    if F.ndim == 1:
        F = F[:, None]
    return F @ F.T


def local_dual(sys, local_frames, frame_tol=FRAME_TOL):
    """Dual from the frame operators ``S_w = sum_j g_j g_j^T`` of local frames.

    ``local_frames[w]`` holds the spanning vectors of ``K_w`` as columns.
    Predicted bounds: ``min_w 1/||S_w||^2 A`` and ``max_w ||S_w^{-1}||^2 B``.
    """
    _, rep = require_frame(sys, frame_tol)
    frames = _per_local(sys, local_frames, "local_frames")
    Sw = []
    for loc, F in zip(sys.locals, frames):
        if F.ndim == 1:
            F = F[:, None]
        if F.shape[0] != loc.local_dim:
            raise DimensionMismatch(f"local frame of node {loc.atom.id!r} has vectors of length {F.shape[0]}")
        Sw.append(local_frame_operator(F))
    dual, Swinv, sw_norm, swinv_norm = _block_dual(sys, Sw, "local")
    return DualSystem(dual, "local", {"S_w": Sw, "S_w_inv": Swinv}, rep.a_opt / sw_norm**2, swinv_norm**2 * rep.b_opt)


def _system_of(dual):
    return dual.system if isinstance(dual, DualSystem) else dual


def canonical_identities(sys, dual):
    """``max|S_R S_dual - I|`` and ``max|T_R^* T_dual - I|``."""
    d = _system_of(dual)
    I = np.eye(sys.ambient_dim)
    SS = assemble_dense(sys).dense @ assemble_dense(d).dense
    TT = cross_operator(sys, d)
    return float(np.max(np.abs(SS - I))), float(np.max(np.abs(TT - I)))


def mixed_reconstruction(sys, dual, f):
    """The two mixed expansions ``T_R^* T_dual f`` and ``T_dual^* T_R f``."""
    d = _system_of(dual)
    return synthesis(sys, analysis(d, f)), synthesis(d, analysis(sys, f))


@dataclass(frozen=True)
class MinimalNormReport:
    f: np.ndarray
    g_norm_sq: float
    canonical_norm_sq: float
    difference_norm_sq: float
    residual: float

    @property
    def holds(self):
        return self.residual <= 1e-8 * (1.0 + self.g_norm_sq)

    def to_dict(self):
        return {
            "f": [float(x) for x in self.f],
            "g_norm_sq": self.g_norm_sq,
            "canonical_norm_sq": self.canonical_norm_sq,
            "difference_norm_sq": self.difference_norm_sq,
            "residual": self.residual,
            "holds": self.holds,
        }


def canonical_coefficients(sys, dual, f):
    """Blocks ``P_V Lambda' pi_{W'} f`` of the canonical dual (no alpha factor)."""
    d = _system_of(dual)
    rows = [[] for _ in d.locals]
    for ch in d.chains:
        rows[ch.w].append(ch.X @ f)
    return CoefficientFamily(tuple(tuple(r) for r in rows))


def minimal_norm_check(sys, g, frame_tol=FRAME_TOL):
    """Pythagorean identity for a family `g` with blocks in the inner subspaces.

    With ``f = sum mu mu alpha^2 pi_W Lambda^T g`` and ``c*`` the canonical
    coefficients of ``f``, verifies ``||g||^2 = ||c*||^2 + ||g - c*||^2`` in
    the ``mu mu alpha^2``-weighted norm.
    """
    if not is_valid_family(sys, g):
        raise NotInSubspace("g has a block outside its inner subspace")
    dual = canonical_dual(sys, frame_tol)
    f = np.zeros(sys.ambient_dim)
    for ch in sys.chains:
        f += (ch.mass * ch.alpha * ch.alpha) * (ch.X.T @ g.blocks[ch.w][ch.v])
    cstar = canonical_coefficients(sys, dual, f)
    diff = g - cstar
    gg = coeff_inner(sys, g, g, alpha_weighted=True)
    cc = coeff_inner(sys, cstar, cstar, alpha_weighted=True)
    dd = coeff_inner(sys, diff, diff, alpha_weighted=True)
    return MinimalNormReport(f, gg, cc, dd, abs(gg - cc - dd))


def _check_invertible(Q, n, what):
    Q = linalg.as_matrix(Q, what)
    if Q.shape != (n, n):
        raise DimensionMismatch(f"{what} has shape {Q.shape}, expected ({n}, {n})")
    smin = linalg.smallest_singular_value(Q)
    if not smin > SINGULAR_TOL:
        raise SingularQ(f"{what} is singular (smallest singular value {smin:.3e})")
    return Q


@dataclass(frozen=True, eq=False)
class QTransformReport:
    system: object
    bracket: BracketCheck
    sandwich_lower_residual: float = None
    sandwich_upper_residual: float = None
    sandwich_tol: float = SANDWICH_TOL
    transform_kind: str = "ambient"
    conditioning: dict = field(default_factory=dict)

    @property
    def sandwich_ok(self):
        if self.sandwich_lower_residual is None:
            return True
        return min(self.sandwich_lower_residual, self.sandwich_upper_residual) >= -self.sandwich_tol

    @property
    def passed(self):
        return self.sandwich_ok and self.bracket.ok

    def to_dict(self):
        d = {
            "transform_kind": self.transform_kind,
            "bracket": self.bracket.to_dict(),
            "conditioning": self.conditioning,
            "passed": self.passed,
        }
        if self.sandwich_lower_residual is not None:
            d["sandwich"] = {
                "lower_residual": self.sandwich_lower_residual,
                "upper_residual": self.sandwich_upper_residual,
                "tol": self.sandwich_tol,
                "ok": self.sandwich_ok,
            }
        return d


def q_transform_ambient(sys, Q, frame_tol=FRAME_TOL):
    """Check ``R_Q = {Q W_w, V, Lambda, alpha}`` against its stated bounds.

    Residuals reported are ``lambda_min(S_Q - Q S Q^T / ||Q||^2)`` and
    ``lambda_min(||Q^{-1}||^2 Q S Q^T - S_Q)``; the bracket compares the
    bounds of ``R_Q`` with ``A / k`` and ``B k``, ``k = ||Q||^2 ||Q^{-1}||^2``.
    """
    handle, rep = require_frame(sys, frame_tol)
    n = sys.ambient_dim
    Q = _check_invertible(Q, n, "Q")
    Qinv = linalg.inverse(Q)
    sysQ = sys.map_locals(lambda loc: replace(loc, W=Subspace(linalg.orthonormalize(Q @ loc.W.basis))))
    SQ = assemble_dense(sysQ).dense
    QSQ = Q @ handle.dense @ Q.T
    nq = linalg.operator_norm(Q)
    nqi = linalg.operator_norm(Qinv)
    low = linalg.sym_eig(_sym(SQ - QSQ / nq**2)).min
    up = linalg.sym_eig(_sym(nqi**2 * QSQ - SQ)).min
    k = (linalg.operator_norm(Q.T) * linalg.operator_norm(Qinv.T)) ** 2
    bracket = _bracket(sysQ, rep.a_opt / k, rep.b_opt * k, BRACKET_TOL)
    return QTransformReport(sysQ, bracket, low, up, transform_kind="ambient",
                            conditioning={"norm_Q": nq, "norm_Q_inv": nqi, "kappa_sq": k})


def q_transform_local(sys, Q_locals, frame_tol=FRAME_TOL):
    """Check ``{W, Q_w V_{w,v}, Lambda, alpha}`` against
    ``[min_w A / k_w, max_w k_w B]`` with ``k_w = ||Q_w||^2 ||Q_w^{-1}||^2``."""
    _, rep = require_frame(sys, frame_tol)
    Qs = _per_local(sys, Q_locals, "Q_locals")
    ks = []
    new_locals = []
    for loc, Qw in zip(sys.locals, Qs):
        Qw = _check_invertible(Qw, loc.local_dim, f"Q_w of node {loc.atom.id!r}")
        ks.append((linalg.operator_norm(Qw) * linalg.operator_norm(linalg.inverse(Qw))) ** 2)
        inner = tuple(replace(a, V=Subspace(linalg.orthonormalize(Qw @ a.V.basis))) for a in loc.inner)
        new_locals.append(replace(loc, inner=inner))
    sysQ = replace(sys, locals=tuple(new_locals), meta=dict(sys.meta))
    lower = min(rep.a_opt / k for k in ks)
    upper = max(ks) * rep.b_opt
    bracket = _bracket(sysQ, lower, upper, BRACKET_TOL)
    return QTransformReport(sysQ, bracket, transform_kind="local",
                            conditioning={"kappa_sq_per_node": ks})


def _sym(M):
    return 0.5 * (M + M.T)
