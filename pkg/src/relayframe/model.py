"""Discretized relay fusion frame systems.

A :class:`RelaySystem` on ``H = R^n`` is an ordered list of
:class:`LocalSystem` nodes ``w``, each carrying a measure atom ``mu_w``, an
outer subspace ``W_w`` of ``H``, an operator ``Lambda_w : H -> K_w`` and an
ordered list of :class:`InnerAtom` nodes ``v`` with mass ``mu_{w,v}``,
weight ``alpha_{w,v}`` and inner subspace ``V_{w,v}`` of ``K_w``.

Inner atoms may override the node operator with their own ``Lambda``; dual
systems built from per-atom operators rely on this.
"""
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    DuplicateId,
    EmptyInnerSpace,
    EmptySpace,
    NonOrthonormalBasis,
    RelayFrameError,
    ZeroVector,
)
from .measure import DiscreteMeasureSpace, MeasureAtom, check_weight

ORTHONORMAL_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Subspace:
    """Closed subspace stored as an orthonormal basis (one column per vector)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.float64)
        if b.ndim == 1:
            b = b[:, None]
        object.__setattr__(self, "basis", _frozen(b))

    @classmethod
    def from_spanning(cls, columns, tol=linalg.ORTH_TOL):
        return cls(linalg.orthonormalize(columns, tol))

    @classmethod
    def full(cls, n):
        return cls(np.eye(n))

    @classmethod
    def coordinate(cls, n, indices):
        return cls(np.eye(n)[:, list(indices)])

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    @cached_property
    def projector(self):
        P = self.basis @ self.basis.T
        P = 0.5 * (P + P.T)
        P.setflags(write=False)
        return P

    def project(self, f):
        return linalg.project(self.basis, f)

    def orthonormality_defect(self):
        return float(np.max(np.abs(self.basis.T @ self.basis - np.eye(self.dim))))


@dataclass(frozen=True, eq=False)
class InnerAtom:
    atom: MeasureAtom
    alpha: float
    V: Subspace
    Lambda: np.ndarray = None

    def __post_init__(self):
        if self.Lambda is not None:
            object.__setattr__(self, "Lambda", _frozen(self.Lambda))


@dataclass(frozen=True, eq=False)
class LocalSystem:
    atom: MeasureAtom
    W: Subspace
    Lambda: np.ndarray
    inner: tuple

    def __post_init__(self):
        object.__setattr__(self, "Lambda", _frozen(np.atleast_2d(self.Lambda)))
        object.__setattr__(self, "inner", tuple(self.inner))

    @property
    def local_dim(self):
        return self.Lambda.shape[0]

    @property
    def inner_space(self):
        return DiscreteMeasureSpace(tuple(a.atom for a in self.inner))

    def operator_for(self, atom):
        return self.Lambda if atom.Lambda is None else atom.Lambda


@dataclass(frozen=True)
class AtomChain:
    """Precomputed ``X = P_V Lambda pi_W`` for one (w, v) pair."""

    w: int
    v: int
    mass: float  # mu_w * mu_{w,v}
    alpha: float
    X: np.ndarray


@dataclass(frozen=True, eq=False)
class RelaySystem:
    ambient_dim: int
    locals: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "locals", tuple(self.locals))

    @property
    def outer_space(self):
        return DiscreteMeasureSpace(tuple(loc.atom for loc in self.locals))

    @property
    def shape(self):
        """Index structure: ``((local_dim, n_inner), ...)`` per outer node."""
        return tuple((loc.local_dim, len(loc.inner)) for loc in self.locals)

    @cached_property
    def chains(self):
        out = []
        for i, loc in enumerate(self.locals):
            piW = loc.W.projector
            for j, at in enumerate(loc.inner):
                X = at.V.projector @ loc.operator_for(at) @ piW
                X.setflags(write=False)
                out.append(AtomChain(i, j, loc.atom.weight * at.atom.weight, float(at.alpha), X))
        return tuple(out)

    def iter_atoms(self):
        for loc in self.locals:
            for at in loc.inner:
                yield loc, at

    def map_locals(self, fn):
        return replace(self, locals=tuple(fn(loc) for loc in self.locals), meta=dict(self.meta))

    def map_inner(self, fn):
        """New system with every inner atom replaced by ``fn(local, atom)``."""
        return self.map_locals(lambda loc: replace(loc, inner=tuple(fn(loc, a) for a in loc.inner)))

    def scale_alpha(self, factor):
        return self.map_inner(lambda loc, a: replace(a, alpha=a.alpha * factor))


def validate_system(sys):
    """Raise a :class:`~relayframe.errors.ValidationError` (or
    :class:`DimensionMismatch`) unless `sys` satisfies every structural
    invariant, including orthonormality of all stored bases."""
    n = sys.ambient_dim
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise DimensionMismatch(f"ambient_dim must be a positive integer, got {n!r}")
    if len(sys.locals) == 0:
        raise EmptySpace("system has no outer nodes")
    outer_ids = set()
    for loc in sys.locals:
        wid = loc.atom.id
        if wid in outer_ids:
            raise DuplicateId(f"outer node id {wid!r} appears more than once")
        outer_ids.add(wid)
        check_weight(loc.atom.weight, f"mu of node {wid!r}")
        _check_subspace(loc.W, n, f"W of node {wid!r}")
        L = loc.Lambda
        if L.ndim != 2 or L.shape[1] != n:
            raise DimensionMismatch(f"Lambda of node {wid!r} has shape {L.shape}, expected (K, {n})")
        _check_finite(L, f"Lambda of node {wid!r}")
        if len(loc.inner) == 0:
            raise EmptyInnerSpace(f"node {wid!r} has no inner atoms")
        inner_ids = set()
        for at in loc.inner:
            vid = at.atom.id
            if vid in inner_ids:
                raise DuplicateId(f"inner id {vid!r} repeated in node {wid!r}")
            inner_ids.add(vid)
            check_weight(at.atom.weight, f"mu of atom {wid}/{vid}")
            check_weight(at.alpha, f"alpha of atom {wid}/{vid}")
            _check_subspace(at.V, loc.local_dim, f"V of atom {wid}/{vid}")
            if at.Lambda is not None:
                if at.Lambda.shape != L.shape:
                    raise DimensionMismatch(f"per-atom Lambda of {wid}/{vid} has shape {at.Lambda.shape}, expected {L.shape}")
                _check_finite(at.Lambda, f"Lambda of atom {wid}/{vid}")


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise RelayFrameError(f"{what} has non-finite entries")


def _check_subspace(S, ambient, what):
    b = S.basis
    if b.ndim != 2 or b.shape[0] != ambient:
        raise DimensionMismatch(f"{what} lives in dimension {b.shape[0]}, expected {ambient}")
    if not 1 <= b.shape[1] <= ambient:
        raise DimensionMismatch(f"{what} has {b.shape[1]} basis vectors, expected 1..{ambient}")
    _check_finite(b, what)
    if S.orthonormality_defect() > ORTHONORMAL_TOL:
        raise NonOrthonormalBasis(f"{what} basis is not orthonormal (defect {S.orthonormality_defect():.2e})")


def _as_subspace(s, n):
    if isinstance(s, Subspace):
        return s
    b = np.asarray(s, dtype=np.float64)
    if b.ndim == 1:
        b = b[:, None]
    if b.shape[0] != n:
        raise DimensionMismatch(f"subspace spanning set has {b.shape[0]} rows, expected {n}")
    return Subspace.from_spanning(b)


def from_fusion_frame(weights, subspaces, measure):
    """Relay system realizing the fusion frame ``{(W_w, v_w)}``.

    Each node gets ``K_w = H``, ``Lambda_w = I`` and a single inner atom of
    mass 1 with ``V = W_w`` and ``alpha = v_w``, so the frame operator is
    ``sum_w mu_w v_w^2 pi_{W_w}``.
    """
    atoms = list(measure.atoms)
    if not (len(weights) == len(subspaces) == len(atoms)):
        raise DimensionMismatch("weights, subspaces and measure atoms must have equal length")
    if not subspaces:
        raise EmptySpace("fusion frame has no subspaces")
    first = subspaces[0]
    n = first.ambient_dim if isinstance(first, Subspace) else np.asarray(first).shape[0]
    locals_ = []
    for wt, sub, atom in zip(weights, subspaces, atoms):
        W = _as_subspace(sub, n)
        inner = (InnerAtom(MeasureAtom("v1", 1.0), float(wt), W),)
        locals_.append(LocalSystem(atom, W, np.eye(n), inner))
    sys = RelaySystem(n, tuple(locals_))
    validate_system(sys)
    return sys


def from_plain_frame(vectors, measure):
    """Relay system realizing the (continuous, discretized) frame ``{F(w)}``.

    Node ``w`` uses ``W_w = H``, ``K_w = R``, ``Lambda_w = F(w)^T`` and
    ``V = R`` with ``alpha = 1``, giving ``S = sum_w mu_w F(w) F(w)^T``.
    """
    atoms = list(measure.atoms)
    vecs = [linalg.as_vector(v, "frame vector") for v in vectors]
    if len(vecs) != len(atoms):
        raise DimensionMismatch("vectors and measure atoms must have equal length")
    if not vecs:
        raise EmptySpace("frame has no vectors")
    n = vecs[0].shape[0]
    locals_ = []
    for vec, atom in zip(vecs, atoms):
        if vec.shape[0] != n:
            raise DimensionMismatch("frame vectors have differing lengths")
        if not np.any(vec != 0.0):
            raise ZeroVector(f"frame vector at node {atom.id!r} is zero")
        inner = (InnerAtom(MeasureAtom("v1", 1.0), 1.0, Subspace.full(1)),)
        locals_.append(LocalSystem(atom, Subspace.full(n), vec[None, :], inner))
    sys = RelaySystem(n, tuple(locals_))
    validate_system(sys)
    return sys


def same_structure(a, b):
    """True when `a` and `b` share ids, masses and local dimensions."""
    if a.ambient_dim != b.ambient_dim or len(a.locals) != len(b.locals):
        return False
    for la, lb in zip(a.locals, b.locals):
        if la.atom != lb.atom or la.local_dim != lb.local_dim or len(la.inner) != len(lb.inner):
            return False
        for ia, ib in zip(la.inner, lb.inner):
            if ia.atom != ib.atom:
                return False
    return True
