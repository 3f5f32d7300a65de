"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest -v tests/test_acceptance.py`` or directly as a script.
Every check uses the workload and tolerance stated for its criterion; nothing
is relaxed to make a check pass.
"""
import json
import math
import pathlib
import subprocess
import sys

import numpy as np
import pytest

from relayframe import generate as gen
from relayframe import io, linalg
from relayframe.analysis import frame_bounds, reconstruct, reconstruct_vector
from relayframe.cli import main
from relayframe.duality import (
    canonical_dual,
    canonical_identities,
    global_dual,
    local_dual,
    minimal_norm_check,
    mixed_reconstruction,
    parseval_tighten,
    q_transform_ambient,
    q_transform_local,
)
from relayframe.measure import DiscreteMeasureSpace
from relayframe.model import from_fusion_frame, from_plain_frame
from relayframe.ops import analysis, coeff_norm, frame_operator, frame_operator_apply, synthesis
from relayframe.perturbation import check_perturbation_simple, check_perturbation_three_constant

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
SEED = 20261014


def _report(number, title, ok, detail):
    ok = bool(ok)
    line = f"CRITERION {number:2d} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line, flush=True)
    return ok


def _rng(k):
    return np.random.default_rng([SEED, k])


# -- 1 --------------------------------------------------------------------------

def criterion_1():
    rng = _rng(1)
    worst = 0.0
    for _ in range(200):
        s = gen.random_system(rng, per_atom_lambda=bool(rng.integers(2)))
        f = rng.standard_normal(s.ambient_dim)
        c = gen.random_family(rng, s)
        lhs = float(np.sum([ch.mass * ch.alpha * (ch.X @ f) @ c.blocks[ch.w][ch.v] for ch in s.chains]))
        rhs = float(f @ synthesis(s, c))
        scale = (1 + np.linalg.norm(f)) * (1 + coeff_norm(s, c))
        worst = max(worst, abs(lhs - rhs) / scale)
    return _report(1, "adjointness", worst <= 1e-10, f"200 triples, worst scaled gap {worst:.2e} vs 1e-10")


# -- 2 --------------------------------------------------------------------------

def criterion_2():
    rng = _rng(2)
    worst_rq = worst_mf = 0.0
    for _ in range(30):
        s = gen.random_frame_system(rng)
        S = frame_operator(s)
        lam = np.linalg.eigvalsh(S)
        for _ in range(100):
            f = rng.standard_normal(s.ambient_dim)
            Sf = frame_operator_apply(s, f)
            rq = float(f @ Sf) / float(f @ f)
            worst_rq = max(worst_rq, lam[0] - rq, rq - lam[-1])
        # dense assembly column by column from the matrix-free apply
        M = np.column_stack([frame_operator_apply(s, e) for e in np.eye(s.ambient_dim)])
        worst_mf = max(worst_mf, float(np.max(np.abs(M - S))))
    ok = worst_rq <= 1e-9 and worst_mf <= 1e-11
    return _report(2, "operator sandwich", ok,
                   f"30 systems x 100 f, Rayleigh excess {max(worst_rq, 0):.2e} vs 1e-9, "
                   f"matrix-free gap {worst_mf:.2e} vs 1e-11")


# -- 3 --------------------------------------------------------------------------

def criterion_3():
    rng = _rng(3)
    worst_err = worst_agree = 0.0
    conds = []
    # half the systems are drawn with condition numbers in [1e4, 1e6]
    systems = [gen.random_frame_system(rng, max_cond=1e6) for _ in range(5)]
    systems += [gen.random_ill_conditioned_system(rng) for _ in range(5)]
    for s in systems:
        b = frame_bounds(s)
        conds.append(b.b_opt / b.a_opt)
        for _ in range(5):
            f = rng.standard_normal(s.ambient_dim)
            nf = np.linalg.norm(f)
            gl = reconstruct_vector(s, f, "left").reconstructed
            gr = reconstruct_vector(s, f, "right").reconstructed
            c = analysis(s, f)
            hl, hr = reconstruct(s, c, "left"), reconstruct(s, c, "right")
            for g in (gl, gr, hl, hr):
                worst_err = max(worst_err, np.linalg.norm(g - f) / nf)
            worst_agree = max(worst_agree, np.linalg.norm(gl - gr) / nf, np.linalg.norm(hl - hr) / nf)
    ok = worst_err <= 1e-8 and worst_agree <= 1e-10
    return _report(3, "reconstruction", ok,
                   f"50 vectors, max cond {max(conds):.1e}, rel err {worst_err:.2e} vs 1e-8, "
                   f"agreement {worst_agree:.2e} vs 1e-10")


# -- 4 --------------------------------------------------------------------------

def criterion_4():
    rng = _rng(4)
    worst_s = worst_t = worst_mix = 0.0
    for _ in range(20):
        s = gen.random_frame_system(rng, per_atom_lambda=bool(rng.integers(2)))
        d = canonical_dual(s)
        ss, tt = canonical_identities(s, d)
        worst_s, worst_t = max(worst_s, ss), max(worst_t, tt)
        f = rng.standard_normal(s.ambient_dim)
        a, b = mixed_reconstruction(s, d, f)
        worst_mix = max(worst_mix, np.linalg.norm(a - f) / np.linalg.norm(f), np.linalg.norm(b - f) / np.linalg.norm(f))
    ok = worst_s <= 1e-8 and worst_t <= 1e-8 and worst_mix <= 1e-8
    return _report(4, "canonical dual identities", ok,
                   f"20 systems, |SS'-I| {worst_s:.2e}, |T*T'-I| {worst_t:.2e}, mixed {worst_mix:.2e} vs 1e-8")


# -- 5 --------------------------------------------------------------------------

def criterion_5():
    rng = _rng(5)
    bad = []
    n = 0
    for k in range(20):
        s = gen.random_frame_system(rng)
        G = [gen.random_spd(rng, loc.local_dim, 100.0) for loc in s.locals]
        F = [np.linalg.cholesky(gen.random_spd(rng, loc.local_dim, 100.0)) for loc in s.locals]
        for kind, dual in (("canonical", canonical_dual(s)), ("global", global_dual(s, G)), ("local", local_dual(s, F))):
            b = dual.verify(1e-9)
            n += 1
            if not b.ok:
                bad.append(f"{kind}#{k}")
    return _report(5, "dual bound brackets", not bad, f"{n} duals, {len(bad)} outside the bracket {bad[:3]}")


# -- 6 --------------------------------------------------------------------------

def criterion_6():
    rng = _rng(6)
    worst = 0.0
    for _ in range(20):
        t = parseval_tighten(gen.random_frame_system(rng, per_atom_lambda=bool(rng.integers(2))))
        worst = max(worst, float(np.max(np.abs(np.linalg.eigvalsh(frame_operator(t)) - 1))))
    return _report(6, "Parseval tightening", worst <= 1e-8, f"20 systems, max|lambda-1| {worst:.2e} vs 1e-8")


# -- 7 --------------------------------------------------------------------------

def criterion_7():
    rng = _rng(7)
    worst = 0.0
    systems = [gen.random_frame_system(rng) for _ in range(20)]
    for k in range(100):
        s = systems[k % 20]
        g = gen.random_coefficients(rng, s)
        r = minimal_norm_check(s, g)
        worst = max(worst, r.residual / (1 + r.g_norm_sq))
    return _report(7, "minimal-norm identity", worst <= 1e-8, f"100 families, scaled residual {worst:.2e} vs 1e-8")


# -- 8 --------------------------------------------------------------------------

def criterion_8():
    rng = _rng(8)
    amb_bad = loc_bad = 0
    worst_amb = worst_loc_bracket = math.inf
    for _ in range(20):
        s = gen.random_frame_system(rng)
        r = q_transform_ambient(s, gen.random_invertible(rng, s.ambient_dim, 10.0))
        worst_amb = min(worst_amb, r.sandwich_lower_residual, r.sandwich_upper_residual)
        if not (min(r.sandwich_lower_residual, r.sandwich_upper_residual) >= -1e-8 and r.bracket.ok):
            amb_bad += 1
        rl = q_transform_local(s, [gen.random_invertible(rng, loc.local_dim, 10.0) for loc in s.locals])
        b = rl.bracket
        worst_loc_bracket = min(worst_loc_bracket, b.actual_lower - b.predicted_lower, b.predicted_upper - b.actual_upper)
        if not rl.passed:
            loc_bad += 1
    ok = amb_bad == 0 and loc_bad == 0
    return _report(8, "Q-transform sandwiches", ok,
                   f"20 ambient Q: {amb_bad} violations, worst residual {worst_amb:.2e}; "
                   f"20 per-block Q_w: {loc_bad} violations, worst bracket slack {worst_loc_bracket:.2e}; tol 1e-8")


# -- 9 --------------------------------------------------------------------------

def criterion_9():
    rng = _rng(9)
    simple_bad = three_bad = applicable = 0
    for _ in range(50):
        s1 = gen.random_frame_system(rng, max_cond=1e3)
        s2, _ = gen.small_perturbation(rng, s1, angle=0.2)
        r = check_perturbation_simple(s1, s2)
        if not (r.hypothesis_holds and r.bracket_ok):
            simple_bad += 1
        A = frame_bounds(s1).a_opt
        A2 = frame_bounds(s2).a_opt
        c = r.c_exact
        # valid constant triples, each following from ||(T1-T2)f|| <= sqrt(c) ||f||
        for C, D, eps in ((0.0, 0.0, math.sqrt(c) * 1.01), (math.sqrt(c / A) * 1.01, 0.0, 0.0),
                          (0.0, math.sqrt(c / A2) * 1.01, 0.0)):
            t = check_perturbation_three_constant(s1, s2, C, D, eps)
            if t.hypothesis_holds:
                applicable += 1
                if not t.bracket_ok:
                    three_bad += 1
    ok = simple_bad == 0 and three_bad == 0 and applicable > 0
    return _report(9, "perturbation soundness", ok,
                   f"50 perturbations, single-constant failures {simple_bad}; three-constant: "
                   f"{applicable} applicable, {three_bad} bracket failures")


# -- 10 -------------------------------------------------------------------------

def criterion_10():
    rng = _rng(10)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 17))
        A = rng.standard_normal((n, n))
        U = linalg.orthonormalize(rng.standard_normal((n, int(rng.integers(1, n + 1)))))
        # numpy QR as an independent orthonormalizer for A V
        Qav = np.linalg.qr(A @ U)[0]
        lhs = U @ U.T @ A.T
        worst = max(worst, float(np.max(np.abs(lhs - lhs @ Qav @ Qav.T))))
    return _report(10, "projection lemma", worst <= 1e-10, f"100 pairs, max defect {worst:.2e} vs 1e-10")


# -- 11 -------------------------------------------------------------------------

def criterion_11():
    rng = _rng(11)
    worst_fusion = worst_plain = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, 9))
        subs = [gen.random_subspace(rng, n, int(rng.integers(1, n + 1))) for _ in range(m)]
        v, mu = rng.uniform(0.5, 2, m), rng.uniform(0.5, 2, m)
        S = frame_operator(from_fusion_frame(list(v), subs, DiscreteMeasureSpace.from_weights(mu)))
        ref = sum(x * x * w * (W.basis @ W.basis.T) for x, w, W in zip(v, mu, subs))
        worst_fusion = max(worst_fusion, float(np.max(np.abs(S - ref))))
        vecs = [rng.standard_normal(n) for _ in range(m)]
        S = frame_operator(from_plain_frame(vecs, DiscreteMeasureSpace.from_weights(mu)))
        ref = sum(w * np.outer(x, x) for w, x in zip(mu, vecs))
        worst_plain = max(worst_plain, float(np.max(np.abs(S - ref))))
    t = 2 * np.pi * np.arange(3) / 3
    b = frame_bounds(from_plain_frame(list(np.column_stack([np.cos(t), np.sin(t)])), DiscreteMeasureSpace.counting(3)))
    merc = max(abs(b.a_opt - 1.5), abs(b.b_opt - 1.5))
    ok = worst_fusion <= 1e-12 and worst_plain <= 1e-12 and merc <= 1e-10
    return _report(11, "degenerate cases", ok,
                   f"fusion {worst_fusion:.1e}, plain {worst_plain:.1e} vs 1e-12; Mercedes |A-1.5|,|B-1.5| {merc:.1e} vs 1e-10")


# -- 12 -------------------------------------------------------------------------

_GOLDEN = [
    (["check", "parseval2d.json"], 0),
    (["check", "diag40.json"], 2),
    (["check", "malformed.json"], 1),
    (["bounds", "mercedes.json"], 0),
    (["bounds", "fusion_orthogonal.json"], 0),
    (["reconstruct", "parseval2d.json", "--vector", "3,4"], 0),
    (["reconstruct", "random_frame.json", "--formula", "right"], 0),
    (["dual", "random_frame.json"], 0),
    (["dual", "global_g2.json", "--kind", "global"], 0),
    (["tighten", "diag41.json"], 0),
    (["transform", "parseval2d.json"], 0),
    (["transform", "singular_q.json"], 2),
    (["perturb", "rotation_a.json", "rotation_b.json"], 0),
    (["perturb", "swap_a.json", "swap_b.json"], 2),
    (["perturb", "rotation_a.json", "rotation_b.json", "--constants", "0", "0", "0.2"], 0),
]


def _in_process(argv, out):
    import contextlib
    import io as _io

    buf = _io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(_io.StringIO()):
        code = main([str(FIXTURES / a) if a.endswith(".json") else a for a in argv] + ["--json", str(out), "-q"])
    return code, buf.getvalue(), io.strip_timestamp(out.read_text())


def criterion_12(tmp):
    tmp = pathlib.Path(tmp)
    mismatched, wrong_codes = [], []
    for k, (argv, expected) in enumerate(_GOLDEN):
        out = tmp / f"r{k}.json"
        a = _in_process(argv, out)
        b = _in_process(argv, out)
        if a != b:
            mismatched.append(" ".join(argv))
        if a[0] != expected:
            wrong_codes.append(f"{' '.join(argv)} -> {a[0]} (want {expected})")
    # one fresh-process comparison guards against state carried inside a process
    for argv in (["dual", "random_frame.json", "--kind", "local"], ["check", "spanning_set.json"]):
        texts = []
        for _ in range(2):
            out = tmp / "proc.json"
            p = subprocess.run([sys.executable, "-m", "relayframe", *argv, "--json", str(out)],
                               cwd=FIXTURES, capture_output=True)
            texts.append((p.returncode, p.stdout, io.strip_timestamp(out.read_text())))
        if texts[0] != texts[1]:
            mismatched.append("subprocess " + " ".join(argv))
    ok = not mismatched and not wrong_codes
    return _report(12, "CLI determinism", ok,
                   f"{len(_GOLDEN)} golden runs + 2 fresh-process runs; mismatches {mismatched}, exit-code errors {wrong_codes}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("check", CRITERIA, ids=[f.__name__ for f in CRITERIA])
def test_criterion(check, capsys):
    with capsys.disabled():
        ok = check()
    assert ok


def test_criterion_12(tmp_path, capsys):
    with capsys.disabled():
        ok = criterion_12(tmp_path)
    assert ok


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        results = [f() for f in CRITERIA] + [criterion_12(d)]
    print(json.dumps({"passed": sum(results), "failed": len(results) - sum(results)}))
    sys.exit(0 if all(results) else 1)
