"""Acceptance suite: one test and one printed pass/fail line per criterion."""

import time

import numpy as np
import pytest

from carduality.car_space import e1, e2, is_generic_position, random_instance, random_mixed_instance
from carduality.cli import main
from carduality.fock_rep import (
    FockSpace,
    car_defects,
    enumerate_pairings,
    fock_state_defect,
    pairing_count,
    parity_blocks,
    product_on_vacuum,
    tensor_representation,
    vacuum_expansion,
)
from carduality.modular_lab import (
    check_conjugation_identity,
    check_particle_restrictions,
    general_duality_pipeline,
    real_subspace_compare,
    tomita_S,
)
from carduality.numlin import op_norm
from carduality.pair_geometry import analyze_pair, generic_position_by_norms, geometry_defects
from carduality.vn_alg import check_twisted_duality

from conftest import random_vector

MODULAR_SEEDS = [(4, s) for s in range(100)] + [(6, s) for s in range(10)]


@pytest.fixture(scope="module")
def modular_runs():
    """Brute-force modular data on the shared instance set, computed once."""
    start = time.perf_counter()
    runs = []
    for dim, seed in MODULAR_SEEDS:
        inst = random_instance(dim, seed)
        md = tomita_S(inst.q, inst.P)
        geo = analyze_pair(inst.P, inst.q)
        runs.append(
            {
                "label": f"dim {dim} seed {seed}",
                "ill": md.ill_conditioned,
                "restr": check_particle_restrictions(md, geo, inst.q),
                "geom": geometry_defects(geo),
                "conj": check_conjugation_identity(md, geo.V, inst.q),
            }
        )
    return runs, time.perf_counter() - start


def _worst(runs, group, keys):
    counted = [r for r in runs if not r["ill"]]
    return max(r[group][k] for r in counted for k in keys if k in r[group])


def test_criterion_01_car_axioms(criterion):
    start = time.perf_counter()
    worst = 0.0
    for dim in (2, 4, 6):
        inst = random_instance(dim, 100 + dim)
        F = FockSpace.over(inst.P)
        rng = np.random.default_rng(dim)
        for _ in range(50):
            f, h = random_vector(rng, dim), random_vector(rng, dim)
            worst = max(worst, car_defects(F, f, h)["{a(f), a(h)*} - <f,h>"])
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 5
    criterion(1, ok, f"CAR anticommutator residual {worst:.2e} <= 1e-10, {elapsed:.2f}s < 5s")
    assert ok


def test_criterion_02_pairing_expansion(criterion):
    start = time.perf_counter()
    worst = 0.0
    for d in range(1, 7):
        inst = random_instance(2 * d, 200 + d)
        F = FockSpace.over(inst.P)
        rng = np.random.default_rng(d)
        for n in range(7):
            fs = [random_vector(rng, 2 * d) for _ in range(n)]
            fs = [f / np.linalg.norm(f) for f in fs]
            worst = max(worst, op_norm(vacuum_expansion(fs, F) - product_on_vacuum(fs, F)))
    counts_ok = all(len(enumerate_pairings(n, p)) == pairing_count(n, p) for n in range(9) for p in range(n // 2 + 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and counts_ok and elapsed < 30
    criterion(2, ok, f"expansion vs operator products {worst:.2e} <= 1e-9 (n<=6, d<=6), counts exact {counts_ok}, {elapsed:.1f}s < 30s")
    assert ok


def test_criterion_03_kato_and_generic_position(criterion):
    worst = 0.0
    equivalence = True
    for seed in range(100):
        inst = random_instance(4, seed)
        pm, qm = inst.P.matrix, inst.q.projection()
        delta = op_norm(pm @ qm)
        worst = max(worst, abs(op_norm(pm - qm) - delta), abs(op_norm((np.eye(4) - qm) @ pm) - delta))
        equivalence &= is_generic_position(inst.P, inst.q) == (delta < 1 - 1e-9)
    # on pairs with nontrivial intersections only the symmetric form is an equivalence
    corrected = True
    naive_misses = 0
    for seed in range(20):
        inst = random_mixed_instance(seed, 2, [["contains"], ["avoids"], ["contains", "avoids"]][seed % 3])
        r = generic_position_by_norms(inst.P, inst.q)
        generic = is_generic_position(inst.P, inst.q)
        corrected &= generic == (max(r["||PQ||"], r["||PQ⊥||"]) < 1 - 1e-9)
        corrected &= r["p∩q = 0"] == (r["||PQ||"] < 1 - 1e-9)
        naive_misses += generic != (r["||PQ||"] < 1 - 1e-9)
    ok = worst <= 1e-9 and equivalence and corrected
    criterion(
        3,
        ok,
        f"norm identities {worst:.2e} <= 1e-9 on 100 generic pairs, generic <=> delta<1 holds there; "
        f"on 20 mixed pairs generic <=> max(||PQ||,||PQ⊥||)<1 holds, plain delta<1 misclassifies {naive_misses}",
    )
    assert ok


def test_criterion_04_modular_graph_formula(criterion, modular_runs):
    runs, elapsed = modular_runs
    worst = _worst(runs, "restr", ["Delta(PQp) = PQ⊥p"])
    ill = sum(r["ill"] for r in runs)
    ok = worst <= 1e-8 and elapsed < 180
    criterion(4, ok, f"||Delta(PQp_i) - PQ⊥p_i|| {worst:.2e} <= 1e-8 on 100 (dim 4) + 10 (dim 6), {ill} ill-conditioned, {elapsed:.1f}s < 180s")
    assert ok


def test_criterion_05_restrictions(criterion, modular_runs):
    runs, _ = modular_runs
    keys = [
        "S|p = beta",
        "S*|p = alpha",
        "J(Pq) = Delta_p^1/2 PΓq",
        "Delta|p = Delta_p",
        "S wedge reversal n=2",
        "J wedge reversal n=2",
        "Delta wedge n=2",
        "S wedge reversal n=3",
        "J wedge reversal n=3",
        "Delta wedge n=3",
    ]
    worst = _worst(runs, "restr", keys)
    n3 = sum("S wedge reversal n=3" in r["restr"] for r in runs)
    ok = worst <= 1e-8 and n3 == 10
    criterion(5, ok, f"S|p=beta, S*|p=alpha, wedge reversals n=2,3, J(Pq) formula: {worst:.2e} <= 1e-8 (n=3 on {n3} dim-6 instances)")
    assert ok


def test_criterion_06_polar_and_isometries(criterion, modular_runs):
    runs, _ = modular_runs
    worst = _worst(runs, "geom", ["(sgn phi)*(sgn phi) = Q", "W*W = Q", "W|phi| = Delta_p^1/2 W"])
    ok = worst <= 1e-8
    criterion(6, ok, f"(sgn phi)*(sgn phi)=Q, W*W=1, W|phi|=Delta_p^1/2 W: {worst:.2e} <= 1e-8")
    assert ok


def test_criterion_07_conjugation_identity(criterion, modular_runs):
    runs, _ = modular_runs
    worst = _worst(runs, "conj", ["jaz_defect"])
    ok = worst <= 1e-7
    criterion(7, ok, f"max ||J a(v) J - Z̃ a(Vv) Z̃*|| {worst:.2e} <= 1e-7")
    assert ok


def test_criterion_08_twisted_duality_generic(criterion):
    results = {}
    for dim, count in ((4, 10), (6, 10), (8, 3)):
        start = time.perf_counter()
        worst = 0.0
        dims_ok = True
        for seed in range(count):
            inst = e2() if (dim == 4 and seed == 0) else random_instance(dim, 300 + seed)
            rep = check_twisted_duality(inst.q, inst.q.perp(), FockSpace.over(inst.P))
            worst = max(worst, rep.equality_defect)
            dims_ok &= rep.dim_M_commutant == rep.dim_twisted and rep.verdict == "pass"
        results[2 ** (dim // 2)] = (worst, dims_ok, time.perf_counter() - start)
    ok = all(w <= 1e-7 and d for w, d, _ in results.values()) and results[8][2] + results[16][2] < 300
    detail = ", ".join(f"Fock dim {k}: distance {w:.2e}, {t:.2f}s" for k, (w, _, t) in results.items())
    criterion(8, ok, f"M(q)' = Z̃M(q⊥)Z̃* (10, 10, 3 instances): {detail}")
    assert ok


def test_criterion_09_twisted_duality_general(criterion):
    worst = 0.0
    nontrivial = 0
    verdicts = True
    patterns = [["contains", "avoids"], ["contains", "contains"], ["avoids", "avoids"], ["contains"], ["avoids"]]
    for seed in range(20):
        blocks = patterns[seed % len(patterns)]
        blocks = blocks + ["avoids"] * (2 - len(blocks))
        inst = random_mixed_instance(seed, 2, blocks)
        assert inst.dim == 6
        r = general_duality_pipeline(inst)
        nontrivial += (r["dims"]["h01"] + r["dims"]["h02"]) > 0
        worst = max(worst, max(r["defects"].values()))
        verdicts &= r["verdict"] == "pass"
    ok = worst <= 1e-7 and verdicts and nontrivial == 20
    criterion(9, ok, f"block forms and split/unsplit duality on 20 mixed instances (dim 6, Fock 8): {worst:.2e} <= 1e-7")
    assert ok


def test_criterion_10_tensor_representations(criterion):
    a, b = e1(), e1(1.1)
    fa, fb = FockSpace.over(a.P), FockSpace.over(b.P)
    pm = np.zeros((4, 4), dtype=complex)
    pm[:2, :2], pm[2:, 2:] = a.P.matrix, b.P.matrix
    rng = np.random.default_rng(10)
    car, vac, blocks = 0.0, 0.0, 0.0
    for variant in ("A", "B"):
        rep = tensor_representation(fa, fb, variant)
        for _ in range(20):
            f, h = random_vector(rng, 4), random_vector(rng, 4)
            car = max(car, *car_defects(rep, f, h).values())
            vac = max(vac, fock_state_defect(rep, pm, f))
            x, y, z = (rep.pi_a(random_vector(rng, 4)) for _ in range(3))
            for word in (x, x @ y, x @ y @ z, x @ y + z):
                blocks = max(blocks, *parity_blocks(word, rep.Z)[2].values())
    ok = max(car, vac, blocks) <= 1e-10
    criterion(10, ok, f"variants A and B on C²⊕C²: CAR {car:.2e}, vacuum {vac:.2e}, parity blocks {blocks:.2e} <= 1e-10")
    assert ok


def test_criterion_11_real_subspaces(criterion):
    worst = 0.0
    dims = True
    for seed in range(50):
        inst = random_instance(4, 400 + seed)
        r = real_subspace_compare(inst.q, inst.P)
        worst = max(worst, r["P(Re q⊥) = iM'"], r["iM' two routes"])
        dims &= r["dims add up"]
    ok = worst <= 1e-8 and dims
    criterion(11, ok, f"P(Re q⊥) = iM' on 50 generic instances (dim 4): distance {worst:.2e} <= 1e-8")
    assert ok


def test_criterion_12_determinism(criterion, tmp_path):
    ok = True
    for name in ("E1", "E2", "E3"):
        texts = []
        for run in range(2):
            out = tmp_path / f"{name}-{run}.json"
            ok &= main(["verify", "--instance", name, "--out", str(out)]) == 0
            texts.append(out.read_bytes())
        ok &= texts[0] == texts[1]
    criterion(12, ok, "verify on E1, E2, E3 exits 0 and reproduces byte-identical reports")
    assert ok
