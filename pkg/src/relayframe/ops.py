"""Analysis, synthesis and frame operators of a relay system.

Coefficient families live in the weighted direct sum of the inner
subspaces: block ``(w, v)`` is a vector of ``K_w`` lying in ``V_{w,v}``,
and the inner product weights block ``(w, v)`` by ``mu_w * mu_{w,v}``.

The frame operator is available matrix-free (``frame_operator_apply``) and
densely assembled (``assemble_dense``); both use ``alpha**2`` so that
``S = T* T`` holds exactly for the analysis operator ``T``.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels, linalg
from .errors import DimensionMismatch, IndexMismatch

MEMBERSHIP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CoefficientFamily:
    """Ragged family of blocks, ``blocks[w][v]`` a vector of ``K_w``."""

    blocks: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "blocks", tuple(tuple(np.asarray(b, dtype=np.float64) for b in row) for row in self.blocks)
        )

    @classmethod
    def zeros(cls, sys):
        return cls(tuple(tuple(np.zeros(loc.local_dim) for _ in loc.inner) for loc in sys.locals))

    @property
    def shape(self):
        return tuple((row[0].shape[0] if row else 0, len(row)) for row in self.blocks)

    def flat(self):
        return np.concatenate([b for row in self.blocks for b in row])

    def _zip(self, other, op):
        return CoefficientFamily(tuple(tuple(op(a, b) for a, b in zip(r, s)) for r, s in zip(self.blocks, other.blocks)))

    def __add__(self, other):
        return self._zip(other, np.add)

    def __sub__(self, other):
        return self._zip(other, np.subtract)

    def __mul__(self, scalar):
        return CoefficientFamily(tuple(tuple(scalar * b for b in row) for row in self.blocks))

    __rmul__ = __mul__


def check_family(sys, c):
    if len(c.blocks) != len(sys.locals):
        raise IndexMismatch(f"family has {len(c.blocks)} outer blocks, system has {len(sys.locals)}")
    for loc, row in zip(sys.locals, c.blocks):
        if len(row) != len(loc.inner):
            raise IndexMismatch(f"node {loc.atom.id!r}: family has {len(row)} blocks, system has {len(loc.inner)}")
        for b in row:
            if b.shape != (loc.local_dim,):
                raise IndexMismatch(f"node {loc.atom.id!r}: block of shape {b.shape}, expected ({loc.local_dim},)")


def membership_defect(sys, c):
    """Largest ``||P_V b - b|| / max(1, ||b||)`` over all blocks."""
    check_family(sys, c)
    worst = 0.0
    for (loc, at), b in zip(sys.iter_atoms(), (b for row in c.blocks for b in row)):
        d = np.linalg.norm(at.V.project(b) - b) / max(1.0, np.linalg.norm(b))
        worst = max(worst, float(d))
    return worst


def is_valid_family(sys, c, tol=MEMBERSHIP_TOL):
    return membership_defect(sys, c) <= tol


def project_family(sys, c):
    """Blockwise projection of an arbitrary family onto the inner subspaces."""
    check_family(sys, c)
    return CoefficientFamily(
        tuple(tuple(at.V.project(b) for at, b in zip(loc.inner, row)) for loc, row in zip(sys.locals, c.blocks))
    )


def coeff_inner(sys, c, d, alpha_weighted=False):
    """``sum_w sum_v mu_w mu_{w,v} <c_{w,v}, d_{w,v}>``, left to right.

    With ``alpha_weighted`` each term is further multiplied by
    ``alpha_{w,v}**2``.
    """
    check_family(sys, c)
    check_family(sys, d)
    total = 0.0
    for loc, rc, rd in zip(sys.locals, c.blocks, d.blocks):
        for at, x, y in zip(loc.inner, rc, rd):
            term = loc.atom.weight * at.atom.weight * float(x @ y)
            if alpha_weighted:
                term *= at.alpha * at.alpha
            total += term
    return total


def coeff_norm(sys, c, alpha_weighted=False):
    return float(np.sqrt(max(coeff_inner(sys, c, c, alpha_weighted), 0.0)))


def _check_vector(sys, f):
    f = linalg.as_vector(f, "f")
    if f.shape[0] != sys.ambient_dim:
        raise DimensionMismatch(f"vector has length {f.shape[0]}, system acts on R^{sys.ambient_dim}")
    return f


def analysis(sys, f):
    """``T f``: block ``(w, v)`` is ``alpha P_V Lambda pi_W f``."""
    f = _check_vector(sys, f)
    rows = [[] for _ in sys.locals]
    for ch in sys.chains:
        rows[ch.w].append(ch.alpha * (ch.X @ f))
    return CoefficientFamily(tuple(tuple(r) for r in rows))


def synthesis(sys, c):
    """``T* c = sum mu_w mu_{w,v} alpha pi_W Lambda^T P_V c_{w,v}``.

    The explicit ``P_V`` is the identity on valid families and makes this the
    exact adjoint of :func:`analysis` on the whole of ``sum K_w``.
    """
    check_family(sys, c)
    out = np.zeros(sys.ambient_dim)
    for ch in sys.chains:
        out += (ch.mass * ch.alpha) * (ch.X.T @ c.blocks[ch.w][ch.v])
    return out


def frame_operator_apply(sys, f):
    """Matrix-free ``S f = T* T f``."""
    return synthesis(sys, analysis(sys, f))


def _chain_stack(sys):
    chains = sys.chains
    kmax = max(ch.X.shape[0] for ch in chains)
    stack = np.zeros((len(chains), kmax, sys.ambient_dim))
    weights = np.empty(len(chains))
    for a, ch in enumerate(chains):
        stack[a, : ch.X.shape[0]] = ch.X
        weights[a] = ch.mass * ch.alpha * ch.alpha
    return stack, weights


@dataclass(frozen=True, eq=False)
class FrameOperatorHandle:
    system: object
    dense: np.ndarray

    def apply(self, f):
        return self.dense @ f

    def apply_matrix_free(self, f):
        return frame_operator_apply(self.system, f)


def assemble_dense(sys):
    """Densely assembled ``S = sum mu mu alpha^2 X^T X`` with ``X = P_V Lambda pi_W``."""
    stack, weights = _chain_stack(sys)
    S = _kernels.gram_accumulate(stack, weights)
    S = 0.5 * (S + S.T)
    S.setflags(write=False)
    return FrameOperatorHandle(sys, S)


def frame_operator(sys):
    return assemble_dense(sys).dense


def dense_operator(n, apply):
    """Matrix of a linear map on ``R^n`` given as a callable."""
    cols = [apply(e) for e in np.eye(n)]
    return np.column_stack(cols)


def cross_operator(sys_synth, sys_anal):
    """Dense matrix of ``f -> T*_{sys_synth} T_{sys_anal} f``."""
    return dense_operator(sys_anal.ambient_dim, lambda e: synthesis(sys_synth, analysis(sys_anal, e)))
