"""The seven primary acceptance criteria, each reporting a PASS/FAIL line."""
from __future__ import annotations

import itertools
import time

import numpy as np

from conftest import (
    EX3_PARTITION_1,
    EX3_PARTITION_2,
    bell_group,
    ex2_group,
    ex3_group,
    ex3_transformed_group,
    random_pauli,
    ref_matrix,
)
from stabtel.dense import projector, random_density_matrix, run_protocol
from stabtel.pauli import PauliOperator, commutation_exponent, in_G_prime, multiply
from stabtel.protocol import (
    CorrectionRule,
    conjugation_residuals,
    joint_measurement,
    sender_projector,
    synthesize_protocol,
    synthesize_receiver_unitary,
)
from stabtel.stabilizer import CanonicalPattern, search_decomposition


def test_1_bell_pair_teleportation(report):
    start = time.perf_counter()
    worst_dist = worst_prob = 0.0
    counts = set()
    for d in (2, 3, 5):
        spec = synthesize_protocol(bell_group(d), [[1], [2]])
        for seed in range(20):
            res = run_protocol(spec, [random_density_matrix(d, seed)], mode="enumerate")
            counts.add(res.covered == d * d)
            worst_dist = max(worst_dist, res.max_distance)
            worst_prob = max(worst_prob, max(abs(o.probability - 1 / d**2) for o in res.outcomes))
    elapsed = time.perf_counter() - start
    ok = counts == {True} and worst_dist < 1e-9 and worst_prob < 1e-9 and elapsed < 5
    report("1 Bell pair d=2,3,5", ok,
           f"max distance {worst_dist:.2e}, max |p - 1/d^2| {worst_prob:.2e}, {elapsed:.2f}s")
    assert ok


def test_2_example2_capacity_two(report):
    start = time.perf_counter()
    S = ex2_group()
    out = search_decomposition(S, [[1, 2], [3, 4, 5]])
    dec = out.decomposition
    assert dec is not None, out.message
    shape_ok = dec.capacities == (2,) and dec.pattern == CanonicalPattern(0, (1,)) and dec.pattern.u == 0
    spec = synthesize_protocol(S, [[1, 2], [3, 4, 5]], decomposition=dec)
    worst, covered = 0.0, set()
    for seed in range(5):
        res = run_protocol(spec, [random_density_matrix(9, 1000 + seed)], mode="enumerate")
        covered.add(res.covered)
        worst = max(worst, res.max_distance)
    elapsed = time.perf_counter() - start
    ok = shape_ok and covered == {81} and worst < 1e-8 and elapsed < 60
    report("2 Example 2", ok,
           f"t={dec.t}, tail s={dec.pattern.s} u={dec.pattern.u} a={list(dec.pattern.a)}, "
           f"81 outcomes x 5 inputs, max distance {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_3_example3_two_senders(report):
    start = time.perf_counter()
    S = ex3_group()
    rank_ok = S.projector_rank() == 2
    spec1 = synthesize_protocol(S, EX3_PARTITION_1)
    # partition 2: the generating set g1..g4, g1g2g3g4g5, g1g2g6, g1g2g7 certified
    # with P1 = <1,2>, P2 = <3,4>, P3 = <5,6,7>
    spec2 = synthesize_protocol(ex3_transformed_group(), EX3_PARTITION_2, decomposition=[[1, 2], [3, 4], [5, 6, 7]])
    searched = search_decomposition(S, EX3_PARTITION_2).decomposition
    results = []
    for spec, seeds in ((spec1, (31, 32)), (spec2, (41, 42))):
        dims = [2**a for a in spec.capacities]
        inputs = [random_density_matrix(k, s) for k, s in zip(dims, seeds)]
        results.append(run_protocol(spec, inputs, mode="enumerate"))
    elapsed = time.perf_counter() - start
    ok = (
        rank_ok
        and spec1.capacities == (1, 2)
        and spec2.capacities == (1, 1)
        and [r.covered for r in results] == [64, 16]
        and max(r.max_distance for r in results) < 1e-8
        and elapsed < 120
    )
    report("3 Example 3", ok,
           f"rank {S.projector_rank()}, partition 1 {spec1.capacities}, partition 2 {spec2.capacities} "
           f"(unconstrained search: {searched.capacities if searched else None}), outcomes "
           f"{[r.covered for r in results]}, max distance {max(r.max_distance for r in results):.2e}, "
           f"{elapsed:.2f}s")
    assert ok


def _random_witness(rng, d, q):
    # draw the whole symplectic map once, then apply it to each standard vector
    ops = []
    for _ in range(40):
        kind = int(rng.integers(4))
        k = int(rng.integers(q))
        l = (k + 1 + int(rng.integers(q - 1))) % q if q > 1 else k
        c = int(rng.integers(1, d))
        ops.append((kind, k, l, c))
    s = int(rng.integers(1, q + 1))
    u = int(rng.integers(0, s + 1))

    def image(x, z):
        x, z = list(x), list(z)
        for kind, k, l, c in ops:
            if kind == 0:
                x[k], z[k] = -z[k] % d, x[k]
            elif kind == 1:
                z[k] = (z[k] + c * x[k]) % d
            elif kind == 2 and l != k:
                x[l] = (x[l] + c * x[k]) % d
                z[k] = (z[k] - c * z[l]) % d
            elif kind == 3:
                x[k], z[k] = c * x[k] % d, pow(c, -1, d) * z[k] % d
        base = PauliOperator(d, 0, tuple(x), tuple(z))
        return next(base.with_phase(f) for f in range(2 * d) if in_G_prime(base.with_phase(f)))

    unit = lambda i: [int(i == j) for j in range(q)]
    zero = [0] * q
    zbar = [image(zero, unit(i)) for i in range(s)]
    xbar = [image(unit(j), zero) for j in range(u)]
    return zbar, xbar


def test_4_lemma1_unitaries(report, rng):
    worst_u = worst_c = 0.0
    for trial in range(50):
        d = int(rng.choice([2, 3]))
        q = int(rng.integers(1, 4))
        zbar, xbar = _random_witness(rng, d, q)
        # the construction preserves the required commutation exponents
        for i, z in enumerate(zbar):
            for j, x in enumerate(xbar):
                assert commutation_exponent(z, x) == (1 if i == j else 0)
        U = synthesize_receiver_unitary(zbar, xbar, d, q)
        worst_u = max(worst_u, float(np.abs(U @ U.conj().T - np.eye(d**q)).max()))
        worst_c = max(worst_c, max(conjugation_residuals(U, zbar, xbar)))
    ok = worst_u < 1e-10 and worst_c < 1e-10
    report("4 Lemma 1 unitaries", ok, f"50 witness sets, unitarity {worst_u:.2e}, conjugation {worst_c:.2e}")
    assert ok


def test_5_pauli_algebra_against_dense(report, rng):
    worst_mul = worst_comm = worst_proj = 0.0
    for _ in range(500):
        d = int(rng.integers(2, 5))
        n = int(rng.integers(1, 4))
        g = random_pauli(rng, d, n)
        h = random_pauli(rng, d, n)
        G, H = ref_matrix(g), ref_matrix(h)
        worst_mul = max(worst_mul, float(np.abs(ref_matrix(multiply(g, h)) - G @ H).max()))
        w = np.exp(2j * np.pi * commutation_exponent(g, h) / d)
        worst_comm = max(worst_comm, float(np.abs(G @ H - w * H @ G).max()))
        gp = next(g.with_phase(f) for f in range(2 * d) if in_G_prime(g.with_phase(f)))
        total = 0
        for x in range(d):
            P = projector([gp], [x])
            worst_proj = max(worst_proj, float(np.abs(P @ P - P).max()), float(np.abs(P - P.conj().T).max()))
            total = total + P
        worst_proj = max(worst_proj, float(np.abs(total - np.eye(d**n)).max()))
    ok = worst_mul < 1e-12 and worst_comm < 1e-12 and worst_proj < 1e-12
    report("5 Pauli algebra vs dense", ok,
           f"500 pairs, product {worst_mul:.2e}, commutator {worst_comm:.2e}, projectors {worst_proj:.2e}")
    assert ok


def test_6_joint_projector_factorizes(report):
    spec = synthesize_protocol(ex3_group(), EX3_PARTITION_1)
    assert spec.capacities == (1, 2)
    joint = list(joint_measurement(spec))
    # per-sender layout: [T1 (2), msg1 (1), T2 (3), msg2 (2)]; joint layout: [T1, T2, msg1, msg2]
    perm = [0, 1, 3, 4, 5, 2, 6, 7]
    worst = 0.0
    for x in itertools.product(range(2), repeat=6):
        P = projector(joint, list(x))
        per = np.kron(sender_projector(spec, 0, x[:2]), sender_projector(spec, 1, x[2:]))
        per = per.reshape([2] * 16).transpose(perm + [8 + p for p in perm]).reshape(256, 256)
        worst = max(worst, float(np.abs(P - per).max()))
    ok = worst < 1e-12
    report("6 joint projector factorization", ok, f"64 outcomes, max deviation {worst:.2e}")
    assert ok


def test_7_perturbed_corrections_are_imperfect(report):
    cases = [
        (synthesize_protocol(bell_group(3), [[1], [2]]), [random_density_matrix(3, 7)]),
        (synthesize_protocol(ex2_group(), [[1, 2], [3, 4, 5]]), [random_density_matrix(9, 7)]),
        (synthesize_protocol(ex3_group(), EX3_PARTITION_1), [random_density_matrix(2, 7), random_density_matrix(4, 8)]),
    ]
    failures, smallest, total = [], float("inf"), 0
    for spec, inputs in cases:
        assert run_protocol(spec, inputs).perfect
        d = spec.d
        for k, rule in enumerate(spec.corrections):
            for field in ("x_coeff", "z_coeff"):
                for delta in range(1, d):
                    new = dict(vars(rule))
                    new[field] = (new[field] + delta) % d
                    rules = list(spec.corrections)
                    rules[k] = CorrectionRule(**new)
                    res = run_protocol(spec.with_corrections(rules), inputs)
                    total += 1
                    smallest = min(smallest, res.max_distance)
                    if res.verdict != "IMPERFECT" or res.max_distance <= 0.01:
                        failures.append((spec.d, k, field, delta))
    ok = not failures
    report("7 perturbed corrections", ok,
           f"{total} single-exponent perturbations all IMPERFECT, smallest max distance {smallest:.3f}")
    assert ok, failures
