"""Seeded random systems, transforms and coefficient families.

Every generator takes a :class:`numpy.random.Generator` (or an integer
seed) so that tests and the acceptance suite are reproducible.
"""
from dataclasses import replace
import math

import numpy as np

from . import linalg
from .analysis import frame_bounds
from .measure import DiscreteMeasureSpace, MeasureAtom
from .model import InnerAtom, LocalSystem, RelaySystem, Subspace, from_fusion_frame, validate_system
from .ops import CoefficientFamily
from .perturbation import deviation_operator


def rng_of(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_subspace(rng, ambient, dim):
    rng = rng_of(rng)
    Q, _ = np.linalg.qr(rng.standard_normal((ambient, dim)))
    return Subspace(Q)


def random_orthogonal(rng, n):
    rng = rng_of(rng)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def _with_singular_values(rng, n, cond):
    # log-uniform spectrum pinned to [1, cond] at both ends
    s = np.exp(rng.uniform(0.0, math.log(cond), n))
    s[0] = 1.0
    if n > 1:
        s[-1] = cond
    return s


def random_spd(rng, n, cond=10.0):
    rng = rng_of(rng)
    U = random_orthogonal(rng, n)
    s = _with_singular_values(rng, n, cond)
    A = (U * s) @ U.T
    return 0.5 * (A + A.T)


def random_invertible(rng, n, cond=10.0):
    rng = rng_of(rng)
    U = random_orthogonal(rng, n)
    Vt = random_orthogonal(rng, n)
    return (U * _with_singular_values(rng, n, cond)) @ Vt


def random_system(rng, ambient=None, n_outer=None, max_inner=4, max_local_dim=None, per_atom_lambda=False):
    """Random relay system at desk scale (ambient 2 to 8, up to 8 x 4 atoms).

    Not necessarily a frame: see :func:`random_frame_system`.
    """
    rng = rng_of(rng)
    n = int(ambient if ambient is not None else rng.integers(2, 9))
    m = int(n_outer if n_outer is not None else rng.integers(1, 9))
    kmax = max_local_dim if max_local_dim is not None else n + 2
    locals_ = []
    for i in range(m):
        W = random_subspace(rng, n, int(rng.integers(1, n + 1)))
        k = int(rng.integers(1, kmax + 1))
        L = rng.standard_normal((k, n))
        inner = []
        for j in range(int(rng.integers(1, max_inner + 1))):
            V = random_subspace(rng, k, int(rng.integers(1, k + 1)))
            La = rng.standard_normal((k, n)) if per_atom_lambda and rng.random() < 0.5 else None
            inner.append(InnerAtom(MeasureAtom(f"v{j + 1}", float(rng.uniform(0.2, 2.0))),
                                   float(rng.uniform(0.3, 2.0)), V, La))
        locals_.append(LocalSystem(MeasureAtom(f"w{i + 1}", float(rng.uniform(0.2, 2.0))), W, L, tuple(inner)))
    sys = RelaySystem(n, tuple(locals_))
    validate_system(sys)
    return sys


def random_frame_system(rng, max_cond=1e6, max_tries=200, **kwargs):
    """Random system whose frame operator has condition number at most `max_cond`."""
    rng = rng_of(rng)
    for _ in range(max_tries):
        kw = dict(kwargs)
        if "n_outer" not in kw:
            n = kw.get("ambient")
            kw["n_outer"] = int(rng.integers(2 if n is None else max(2, n // 2 + 1), 9))
        sys = random_system(rng, **kw)
        rep = frame_bounds(sys)
        if rep.is_frame and rep.b_opt <= max_cond * rep.a_opt:
            return sys
    raise RuntimeError(f"no frame system with condition <= {max_cond} in {max_tries} attempts")


def random_ill_conditioned_system(rng, min_cond=1e4, max_cond=1e6, spread=1e3, max_tries=200):
    """Frame system with condition number in ``[min_cond, max_cond]``.

    Each ``Lambda_w`` is composed with one shared SPD map of condition
    `spread`, which stretches the spectrum of ``S`` well past what plain
    random draws reach.
    """
    rng = rng_of(rng)
    for _ in range(max_tries):
        base = random_frame_system(rng)
        R = random_spd(rng, base.ambient_dim, spread)
        sys = base.map_locals(lambda loc: replace(loc, Lambda=loc.Lambda @ R))
        rep = frame_bounds(sys)
        if rep.is_frame and min_cond * rep.a_opt <= rep.b_opt <= max_cond * rep.a_opt:
            return sys
    raise RuntimeError(f"no frame system with condition in [{min_cond:g}, {max_cond:g}] in {max_tries} attempts")


def random_fusion_system(rng, ambient=None, n_outer=None):
    """Random fusion frame (``K = H``, ``Lambda = I``, ``V = W``) that is a frame."""
    rng = rng_of(rng)
    while True:
        n = int(ambient if ambient is not None else rng.integers(2, 9))
        m = int(n_outer if n_outer is not None else rng.integers(n // 2 + 1, 9))
        subs = [random_subspace(rng, n, int(rng.integers(1, n + 1))) for _ in range(m)]
        weights = rng.uniform(0.3, 2.0, m)
        measure = DiscreteMeasureSpace.from_weights(rng.uniform(0.2, 2.0, m))
        sys = from_fusion_frame(list(weights), subs, measure)
        if frame_bounds(sys).is_frame:
            return sys


def random_vector(rng, n):
    return rng_of(rng).standard_normal(n)


def random_family(rng, sys):
    """Arbitrary coefficient family (blocks not constrained to ``V``)."""
    rng = rng_of(rng)
    return CoefficientFamily(tuple(tuple(rng.standard_normal(loc.local_dim) for _ in loc.inner) for loc in sys.locals))


def random_coefficients(rng, sys):
    """Valid family: every block lies in its inner subspace."""
    rng = rng_of(rng)
    return CoefficientFamily(
        tuple(tuple(a.V.basis @ rng.standard_normal(a.V.dim) for a in loc.inner) for loc in sys.locals)
    )


def plane_rotation(rng, k, angle):
    """Rotation of ``R^k`` by `angle` in a random 2-plane (identity when k = 1)."""
    rng = rng_of(rng)
    if k < 2:
        return np.eye(k)
    P, _ = np.linalg.qr(rng.standard_normal((k, 2)))
    c, s = math.cos(angle), math.sin(angle)
    u, v = P[:, 0], P[:, 1]
    return np.eye(k) + (c - 1.0) * (np.outer(u, u) + np.outer(v, v)) + s * (np.outer(v, u) - np.outer(u, v))


def rotate_inner_subspaces(rng, sys, angle):
    """Copy of `sys` with every inner subspace turned by a random plane rotation.

    The rotation draws are made in a fixed order, so a given generator state
    and angle always produce the same perturbation.
    """
    rng = rng_of(rng)
    rots = [plane_rotation(rng, loc.local_dim, angle) for loc in sys.locals for _ in loc.inner]
    it = iter(rots)

    def one(loc, a):
        B = next(it) @ a.V.basis
        # rotation keeps orthonormality up to rounding; re-orthonormalize to be exact
        return replace(a, V=Subspace(linalg.orthonormalize(B)))

    return sys.map_inner(one)


def small_perturbation(rng, sys, angle=0.3, shrink=0.5, max_halvings=40):
    """Rotated copy of `sys` with ``c_exact < a_opt``, shrinking the angle as needed."""
    rng = rng_of(rng)
    a = frame_bounds(sys).a_opt
    state = rng.bit_generator.state
    for _ in range(max_halvings):
        rng.bit_generator.state = state
        sys2 = rotate_inner_subspaces(rng, sys, angle)
        c = linalg.sym_eig(deviation_operator(sys, sys2)).max
        if c < a:
            return sys2, angle
        angle *= shrink
    raise RuntimeError("could not find a perturbation with c_exact < a_opt")
