"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. The longer randomized criteria (BCH roundtrip, simulator
consistency) dominate the runtime.
"""

import itertools
import json
import math
import time
from collections import Counter
from fractions import Fraction

import numpy as np
from scipy.stats import kstest

from pufkit import analysis as an
from pufkit import bch, cli, fcs
from pufkit import pipeline as pl
from pufkit import rodata as ro
from pufkit import transforms as tf


def report(name: str, ok: bool, detail: str = ""):
    print(f"{'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_catalog_count(tmp_path):
    start = time.time()
    out = tmp_path / "catalog.json"
    assert cli.main(["search-transforms", "--out", str(out)]) == 0
    records = json.loads(out.read_text())
    elapsed = time.time() - start
    catalog = tf.load_catalog(out)
    mats = np.stack([m.entries for m in catalog.members])
    prods = np.einsum("nij,nkj->nik", mats, mats)
    all_orth = np.array_equal(
        prods, np.broadcast_to(16 * np.eye(16, dtype=np.int64), prods.shape)
    )
    unique = len({m.flat_key() for m in catalog.members})
    dwht_present = any(m == tf.sylvester_hadamard(16) for m in catalog.members)
    base_count = len(tf.enumerate_base_matrices())
    report(
        "catalog: 12288 unique orthogonal members incl. DWHT, 768 base matrices, <5 min",
        len(records) == 12288
        and unique == 12288
        and all_orth
        and dwht_present
        and base_count == 768
        and elapsed < 300,
        f"count={len(records)} bases={base_count} elapsed={elapsed:.1f}s",
    )


def test_code_analysis_reproduction():
    start = time.time()
    d = an.required_min_distance(255, 0.0149, 1e-9)
    k = an.gv_dimension(255, 41)
    elapsed = time.time() - start
    report(
        "code analysis: required d_min = 41, GV dimension = 98, <1 s",
        d == 41 and k == 98 and elapsed < 1.0,
        f"d={d} k={k} elapsed={elapsed:.3f}s",
    )


def test_bch_flagship():
    start = time.time()
    code = bch.build_code(8, 18)
    params_ok = (code.n, code.k) == (255, 131) and code.generator.bit_length() - 1 == 124

    # Exhaustive roundtrip for BCH(15,7) over all <=2-error patterns.
    small = bch.build_code(4, 2)
    rng = np.random.default_rng(1000)
    msg15 = rng.integers(0, 2, 7, dtype=np.uint8)
    cw15 = bch.encode(small, msg15)
    patterns = [()] + [(i,) for i in range(15)] + list(itertools.combinations(range(15), 2))
    exhaustive_ok = True
    for pat in patterns:
        recv = cw15.copy()
        for i in pat:
            recv[i] ^= 1
        out = bch.decode(small, recv)
        if not (out.ok and np.array_equal(out.message, msg15)):
            exhaustive_ok = False
            break

    # Randomized roundtrip, 1e5 trials with <=18 errors.
    trials = 100_000
    random_ok = True
    for i in range(trials):
        msg = rng.integers(0, 2, code.k, dtype=np.uint8)
        cw = bch.encode(code, msg)
        e = int(rng.integers(0, code.t + 1))
        recv = cw
        if e:
            recv = cw.copy()
            recv[rng.choice(code.n, e, replace=False)] ^= 1
        out = bch.decode(code, recv)
        if not (out.ok and out.errors_corrected == e and np.array_equal(out.message, msg)):
            random_ok = False
            break
    elapsed = time.time() - start
    report(
        "BCH flagship: (255,131), deg(g)=124, exhaustive (15,7) and 1e5 randomized roundtrips, <2 min",
        params_ok and exhaustive_ok and random_ok and elapsed < 120,
        f"elapsed={elapsed:.1f}s",
    )


def test_poisson_binomial_engine():
    rng = np.random.default_rng(1001)
    max_diff = 0.0
    for _ in range(100):
        p = rng.uniform(0, 0.5, 255)
        t = int(rng.integers(0, 256))
        diff = abs(
            an.block_error_probability_dftcf(p, t) - an.block_error_probability_dp(p, t)
        )
        max_diff = max(max_diff, diff)
    agreement_ok = max_diff <= 1e-13

    # Exact match to the binomial tail for constant p.
    const_ok = True
    for q, t in [(0.0149, 18), (0.1, 30), (0.45, 120)]:
        tail = sum(
            math.comb(255, j) * q**j * (1 - q) ** (255 - j) for j in range(t + 1, 256)
        )
        if abs(an.block_error_probability_dp(np.full(255, q), t) - tail) > 1e-12:
            const_ok = False
        if abs(an.block_error_probability_dftcf(np.full(255, q), t) - tail) > 1e-12:
            const_ok = False

    # Synthetic low-noise profile: DP tail at t=18 bounded by binomial at p_max.
    model = ro.SyntheticModel(noise_std=0.003)
    ds = ro.generate_synthetic(model, 80, 3, seed=2024)
    catalog_sample = tf.build_catalog()
    q1 = pl.quantizer_boundaries(1)
    member_id, prof = an.select_transform(
        catalog_sample, ds, q1, subset=list(range(0, 12288, 48))
    )
    assert prof.p_max <= 0.0149, "synthetic profile must satisfy the p_max premise"
    dp_tail = an.block_error_probability_dp(prof.p, 18)
    binom_bound = sum(
        math.comb(255, j) * prof.p_max**j * (1 - prof.p_max) ** (255 - j)
        for j in range(19, 256)
    )
    bound_ok = dp_tail <= binom_bound + 1e-18

    # Simulator consistency on an inflated profile (events observable).
    small = bch.build_code(4, 2)
    profile = ro.CoefficientErrorProfile(np.full(15, 0.05))
    rep = fcs.simulate(small, profile, trials=200_000, seed=2025)
    analytic = an.block_error_probability_dp(profile.p, small.t)
    lo, hi = rep["block_error_wilson"]
    sim_ok = lo <= analytic <= hi

    report(
        "Poisson-binomial engine: DFT-CF/DP <=1e-13, binomial <=1e-12, p_max bound, simulator Wilson-consistent",
        agreement_ok and const_ok and bound_ok and sim_ok,
        f"max_diff={max_diff:.2e} selected_p_max={prof.p_max:.4f} "
        f"sim_rate={rep['block_error_rate']:.5f} analytic={analytic:.5f}",
    )


def test_rate_regions():
    reg = an.fcs_region(0.0088)
    rs_max = max(q.secret_key_rate for q in reg.points)
    fl = an.finite_length_point(255, 0.0088, 1e-9)
    code = bch.build_code(8, 18)
    rs = Fraction(code.k, code.n)
    rl = Fraction(code.n - code.k, code.n)
    cs = an.cs_region_mgl(0.0088, 1024)
    hb = an.binary_entropy(0.0088)
    top = cs.points[-1]
    alpha0_ok = (
        abs(top.secret_key_rate - (1 - hb)) <= 1e-12
        and abs(top.privacy_leakage_rate - hb) <= 1e-12
    )
    dominate_ok = all(
        q.privacy_leakage_rate <= (1 - q.secret_key_rate) + 1e-12 for q in cs.points
    )
    report(
        "rate regions: max R_s 0.9268+-1e-3, finite-length 0.703+-5e-3, BCH point (131/255, 124/255), CS boundary",
        abs(rs_max - 0.9268) <= 1e-3
        and abs(fl.secret_key_rate - 0.703) <= 5e-3
        and rs == Fraction(131, 255)
        and rl == Fraction(124, 255)
        and alpha0_ok
        and dominate_ok,
        f"rs_max={rs_max:.4f} fl={fl.secret_key_rate:.4f}",
    )


def test_end_to_end_fcs(h16, q1):
    # 100 devices, zero noise: reconstruction must return the enrolled key
    # for every device.
    ds = ro.generate_synthetic(ro.SyntheticModel(noise_std=0.0), 100, 2, seed=31)
    eq = pl.fit_equalization(ds, h16)
    code = bch.build_code(8, 18)
    rng = np.random.default_rng(32)
    successes = 0
    for d in range(100):
        s = fcs.SecretKey(rng.integers(0, 2, code.k, dtype=np.uint8))
        x = pl.extract_bits(ds.arrays[d, 0], h16, eq, q1)
        helper = fcs.enroll(code, s, x)
        y = pl.extract_bits(ds.arrays[d, 1], h16, eq, q1)
        if fcs.reconstruct(code, y, helper) == s:
            successes += 1

    # Toy-scale perfect secrecy: exhaustive I(S;W) = 0 with Hamming(7,4).
    hamming = bch.build_code(3, 1)
    joint = Counter()
    for s_bits in itertools.product([0, 1], repeat=4):
        s = fcs.SecretKey(np.array(s_bits, dtype=np.uint8))
        for x_bits in itertools.product([0, 1], repeat=7):
            x = pl.BitSequence(np.array(x_bits, dtype=np.uint8))
            joint[(s_bits, fcs.enroll(hamming, s, x).w.tobytes())] += 1
    total = sum(joint.values())
    ps, pw = Counter(), Counter()
    for (sk, wk), c in joint.items():
        ps[sk] += c
        pw[wk] += c
    secrecy_ok = all(
        Fraction(c, total) == Fraction(ps[sk], total) * Fraction(pw[wk], total)
        for (sk, wk), c in joint.items()
    )
    report(
        "end-to-end FCS: 100/100 noiseless reconstructions, exhaustive I(S;W)=0 for Hamming(7,4)",
        successes == 100 and secrecy_ok,
        f"successes={successes}/100",
    )


def test_pipeline_statistics(large_dataset, h16, q1):
    eq = pl.fit_equalization(large_dataset, h16)
    coeffs = np.array(
        [
            tf.apply_2d(h16, large_dataset.arrays[d, 0]).ravel()
            for d in range(large_dataset.devices)
        ]
    )
    z = (coeffs - eq.mean) / eq.std
    ks_passed = sum(kstest(z[:, i], "norm").pvalue > 0.01 for i in range(1, 256))
    ks_ok = ks_passed >= 0.95 * 255

    bits = [
        pl.extract_bits(large_dataset.arrays[d, 0], h16, eq, q1)
        for d in range(large_dataset.devices)
    ]
    ones = np.concatenate([b.bits for b in bits]).mean()
    ones_ok = abs(ones - 0.5) <= 0.01
    mean_hd, _ = ro.uniqueness(bits)
    hd_ok = abs(mean_hd - 0.5) <= 0.01
    report(
        "pipeline statistics: KS >=95%, ones fraction 0.5+-0.01, uniqueness 0.5+-0.01",
        ks_ok and ones_ok and hd_ok,
        f"ks={ks_passed}/255 ones={ones:.4f} mean_hd={mean_hd:.4f}",
    )


def test_selection_sanity(catalog, q1, h16):
    start = time.time()
    ds = ro.generate_synthetic(ro.SyntheticModel(), 40, 3, seed=41)
    member_id, prof = an.select_transform(catalog, ds, q1)  # full catalog
    dwht_id = catalog.index_of(h16)
    dwht_prof = an.profile_for_member(catalog, dwht_id, ds, q1)
    elapsed = time.time() - start
    report(
        "selection: full-catalog min-max beats DWHT, <30 min",
        prof.p_max <= dwht_prof.p_max and elapsed < 1800,
        f"selected={member_id} p_max={prof.p_max:.4f} dwht={dwht_prof.p_max:.4f} elapsed={elapsed:.0f}s",
    )
