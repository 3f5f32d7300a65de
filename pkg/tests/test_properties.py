"""Property-based checks of the structural invariants."""
import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from relayframe import generate as gen
from relayframe import io, linalg
from relayframe.analysis import frame_bounds
from relayframe.duality import canonical_dual, minimal_norm_check, parseval_tighten
from relayframe.errors import DuplicateId, NonPositiveWeight
from relayframe.measure import DiscreteMeasureSpace, MeasureAtom, validate
from relayframe.model import Subspace
from relayframe.ops import analysis, coeff_inner, frame_operator, synthesis
from relayframe.perturbation import check_perturbation_simple, deviation_operator

PROP = settings(max_examples=40, deadline=None)
seeds = st.integers(0, 2**32 - 1)
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def matrices(max_dim=6):
    shape = st.tuples(st.integers(1, max_dim), st.integers(1, max_dim))
    return shape.flatmap(lambda s: hnp.arrays(np.float64, s, elements=finite))


@PROP
@given(matrices(), st.floats(-100, 100, allow_nan=False))
def test_operator_norm_homogeneous(A, c):
    n = linalg.operator_norm(A)
    assert n >= 0
    assert abs(linalg.operator_norm(c * A) - abs(c) * n) <= 1e-8 * (1 + abs(c) * n)


@PROP
@given(matrices())
def test_operator_norm_matches_svd(A):
    assert abs(linalg.operator_norm(A) - np.linalg.norm(A, 2)) <= 1e-8 * (1 + np.linalg.norm(A, 2))


@PROP
@given(seeds, st.integers(1, 8), st.integers(1, 8))
def test_orthonormalize_spans_and_orthonormal(seed, n, k):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, k))
    U = linalg.orthonormalize(X)
    assert np.max(np.abs(U.T @ U - np.eye(U.shape[1]))) <= 1e-12
    assert U.shape[1] == min(n, k)
    assert np.max(np.abs(U @ (U.T @ X) - X)) <= 1e-10 * (1 + np.abs(X).max())


@PROP
@given(seeds, st.integers(1, 8))
def test_projector_idempotent_symmetric(seed, n):
    rng = np.random.default_rng(seed)
    P = gen.random_subspace(rng, n, int(rng.integers(1, n + 1))).projector
    assert np.max(np.abs(P @ P - P)) <= 1e-12
    assert np.array_equal(P, P.T)


@PROP
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=6))
def test_validate_rejects_nonpositive(weights):
    sp = DiscreteMeasureSpace(tuple(MeasureAtom(f"w{i}", w) for i, w in enumerate(weights)))
    if all(w > 0 for w in weights):
        validate(sp)
    else:
        try:
            validate(sp)
        except NonPositiveWeight:
            return
        raise AssertionError("non-positive weight accepted")


@PROP
@given(st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=2, max_size=5))
def test_validate_rejects_duplicates(ids):
    sp = DiscreteMeasureSpace(tuple(MeasureAtom(i, 1.0) for i in ids))
    if len(set(ids)) == len(ids):
        validate(sp)
    else:
        try:
            validate(sp)
        except DuplicateId:
            return
        raise AssertionError("duplicate id accepted")


@PROP
@given(seeds)
def test_adjointness_arbitrary_families(seed):
    rng = np.random.default_rng(seed)
    s = gen.random_system(rng, per_atom_lambda=bool(rng.integers(2)))
    f = rng.standard_normal(s.ambient_dim)
    c = gen.random_family(rng, s)
    lhs = coeff_inner(s, analysis(s, f), c)
    rhs = float(f @ synthesis(s, c))
    assert abs(lhs - rhs) <= 1e-10 * (1 + np.linalg.norm(f)) * (1 + math.sqrt(coeff_inner(s, c, c)))


@PROP
@given(seeds)
def test_frame_operator_symmetric_psd(seed):
    rng = np.random.default_rng(seed)
    S = frame_operator(gen.random_system(rng))
    assert np.array_equal(S, S.T)
    assert np.linalg.eigvalsh(S)[0] >= -1e-10 * max(1.0, np.abs(S).max())


@PROP
@given(seeds, st.floats(0.1, 10.0))
def test_bounds_scale_with_alpha(seed, c):
    rng = np.random.default_rng(seed)
    s = gen.random_frame_system(rng)
    r0, r1 = frame_bounds(s), frame_bounds(s.scale_alpha(c))
    assert abs(r1.a_opt - c * c * r0.a_opt) <= 1e-9 * c * c * r0.b_opt
    assert abs(r1.b_opt - c * c * r0.b_opt) <= 1e-9 * c * c * r0.b_opt


@PROP
@given(seeds)
def test_canonical_dual_inverts_frame_operator(seed):
    rng = np.random.default_rng(seed)
    s = gen.random_frame_system(rng, max_cond=1e4)
    d = canonical_dual(s).system
    assert np.max(np.abs(frame_operator(s) @ frame_operator(d) - np.eye(s.ambient_dim))) <= 1e-8
    assert canonical_dual(s).verify(1e-9).ok


@PROP
@given(seeds)
def test_tighten_is_parseval(seed):
    rng = np.random.default_rng(seed)
    t = parseval_tighten(gen.random_frame_system(rng, max_cond=1e4))
    assert np.max(np.abs(np.linalg.eigvalsh(frame_operator(t)) - 1)) <= 1e-8


@PROP
@given(seeds)
def test_minimal_norm_identity(seed):
    rng = np.random.default_rng(seed)
    s = gen.random_frame_system(rng, max_cond=1e4)
    g = gen.random_coefficients(rng, s)
    r = minimal_norm_check(s, g)
    assert r.residual <= 1e-8 * (1 + r.g_norm_sq)


@PROP
@given(seeds, st.floats(0.0, 1.5))
def test_deviation_psd_and_symmetric_in_swap(seed, angle):
    rng = np.random.default_rng(seed)
    s1 = gen.random_system(rng)
    s2 = gen.rotate_inner_subspaces(rng, s1, angle)
    D = deviation_operator(s1, s2)
    assert np.linalg.eigvalsh(D)[0] >= -1e-10
    assert np.max(np.abs(D - deviation_operator(s2, s1))) <= 1e-12


@PROP
@given(seeds)
def test_zero_deviation_gives_exact_bounds(seed):
    rng = np.random.default_rng(seed)
    s = gen.random_frame_system(rng)
    r = check_perturbation_simple(s, s)
    b = frame_bounds(s)
    assert abs(r.predicted_lower - b.a_opt) <= 1e-12 * max(1, b.b_opt)
    assert abs(r.predicted_upper - b.b_opt) <= 1e-12 * max(1, b.b_opt)


@PROP
@given(seeds, st.floats(0.0, 0.3))
def test_simple_perturbation_sound(seed, angle):
    rng = np.random.default_rng(seed)
    s1 = gen.random_frame_system(rng, max_cond=100.0)
    s2 = gen.rotate_inner_subspaces(rng, s1, angle)
    r = check_perturbation_simple(s1, s2)
    assume(r.hypothesis_holds)
    assert r.bracket_ok


@PROP
@given(seeds)
def test_file_round_trip(seed):
    rng = np.random.default_rng(seed)
    s = gen.random_system(rng, per_atom_lambda=True)
    assert np.array_equal(frame_operator(io.loads_system(io.dumps_system(s)).system), frame_operator(s))


@PROP
@given(seeds, st.integers(1, 8))
def test_projection_lemma_property(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    U = Subspace(linalg.orthonormalize(rng.standard_normal((n, int(rng.integers(1, n + 1)))))).basis
    assert linalg.projection_lemma_residual(A, U) <= 1e-10 * max(1.0, np.abs(A).max())
