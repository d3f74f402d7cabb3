"""Ordered verification suite run by the command-line front end.

Every check yields one record ``{name, anchor, defect, verdict}``. A check
that cannot apply to an instance is recorded as ``not_applicable``; none is
dropped. Defects are rounded to six significant digits so reports are
stable across runs.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import vn_alg
from .car_space import Instance, is_generic_position
from .errors import IllConditionedWarning, NotGeneric
from .fock_rep import FockSpace, car_defects, fock_state_defect, parity_blocks, parity_ops, product_on_vacuum, vacuum_expansion
from .modular_lab import (
    check_conjugation_identity,
    check_particle_restrictions,
    cyclic_separating,
    general_duality_pipeline,
    generic_core,
    modular_axioms,
    real_subspace_compare,
    tomita_S,
)
from .numlin import op_norm
from .pair_geometry import analyze_pair, geometry_defects, halmos, kato_identities

#: default tolerance per group of checks
DEFAULT_TOLERANCES = {
    "car": 1e-10,
    "formel": 1e-9,
    "halmos": 1e-9,
    "kato": 1e-9,
    "geometry": 1e-8,
    "modular": 1e-8,
    "conjugation": 1e-7,
    "real": 1e-8,
    "duality": 1e-7,
}

PASS, FAIL, NA = "pass", "fail", "not_applicable"


def round_sig(x: float, digits: int = 6) -> float:
    return float(f"{float(x):.{digits}g}")


class Recorder:
    def __init__(self, tolerances: dict[str, float]):
        self.tol = {**DEFAULT_TOLERANCES, **tolerances}
        self.records: list[dict] = []

    def add(self, name: str, group: str, anchor: str, defect: float | None):
        if defect is None:
            verdict, value = NA, None
        else:
            value = round_sig(defect)
            verdict = PASS if np.isfinite(defect) and defect <= self.tol[group] else FAIL
        self.records.append({"name": name, "anchor": anchor, "defect": value, "verdict": verdict, "tolerance": self.tol[group]})

    def add_bool(self, name: str, group: str, anchor: str, ok: bool | None):
        self.add(name, group, anchor, None if ok is None else (0.0 if ok else 1.0))

    def add_many(self, prefix: str, group: str, anchor: str, defects: dict, applicable: bool = True):
        for key, val in defects.items():
            if isinstance(val, bool):
                self.add_bool(f"{prefix}: {key}", group, anchor, val if applicable else None)
            elif isinstance(val, (float, np.floating)):
                self.add(f"{prefix}: {key}", group, anchor, float(val) if applicable else None)


def _random_vectors(rng: np.random.Generator, n: int, count: int) -> list[np.ndarray]:
    return [rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(count)]


def _car_section(rec: Recorder, inst: Instance, F: FockSpace, rng: np.random.Generator, pairs: int = 20):
    anchor = "CAR relations of the Fock representation"
    n = inst.dim
    worst: dict[str, float] = {}
    for _ in range(pairs):
        f, h = _random_vectors(rng, n, 2)
        for k, v in car_defects(F, f, h).items():
            worst[k] = max(worst.get(k, 0.0), v)
    rec.add_many("CAR", "car", anchor, worst)
    fs = _random_vectors(rng, n, pairs)
    rec.add("Fock vacuum: <Ω, a(f)*a(f)Ω> = ||(1-P)f||²", "car", "Fock state", max(fock_state_defect(F, inst.P.matrix, f) for f in fs))
    Z, _, _, zt = parity_ops(F)
    rec.add("twist: Z̃ a(f) Z̃* = iZ a(f)", "car", "twist operator", max(op_norm(zt @ F.pi_a(f) @ zt.conj().T - 1j * Z @ F.pi_a(f)) for f in fs))
    rec.add("parity: Z a(f) Z = -a(f)", "car", "parity grading", max(op_norm(Z @ F.pi_a(f) @ Z + F.pi_a(f)) for f in fs))
    a, b, c = (F.pi_a(f) for f in fs[:3])
    blocks = max(max(parity_blocks(x, Z)[2].values()) for x in (a, a @ b, a @ b @ c))
    rec.add("parity blocks of words", "car", "even/odd block vanishing", blocks)


def _formel_section(rec: Recorder, inst: Instance, F: FockSpace, rng: np.random.Generator, n_max: int):
    for n in range(n_max + 1):
        dev = formel_deviation(F, inst.dim, n, rng)
        rec.add(f"pairing expansion n={n}", "formel", "signed pairing expansion of a(f_n)...a(f_1)Ω", dev)


def formel_deviation(F: FockSpace, h_dim: int, n: int, rng: np.random.Generator, trials: int = 2) -> float:
    worst = 0.0
    for _ in range(trials):
        fs = _random_vectors(rng, h_dim, n)
        worst = max(worst, op_norm(vacuum_expansion(fs, F) - product_on_vacuum(fs, F)))
    return worst


def _geometry_section(rec: Recorder, core: Instance | None, label: str):
    anchor_k = f"opening identities{label}"
    anchor_g = f"graph operators of the pair{label}"
    if core is None:
        for name in ("Kato: norm identities", "Kato: six restriction maps bicontinuous", "graphs"):
            rec.add(name, "kato", anchor_k, None)
        return None
    k = kato_identities(core.P, core.q)
    rec.add("Kato: norm identities", "kato", anchor_k, k["max_deviation"])
    rec.add_bool("Kato: six restriction maps bicontinuous", "kato", anchor_k, k["bicontinuous"])
    rec.add_bool("Kato: delta < 1", "kato", anchor_k, k["delta"] < 1 - 1e-9)
    geo = analyze_pair(core.P, core.q)
    rec.add_many("graphs", "geometry", anchor_g, geometry_defects(geo))
    return geo


def _modular_section(rec: Recorder, core: Instance | None, geo, label: str) -> dict:
    info = {"ill_conditioned": False}
    anchor = f"Tomita-Takesaki data of the vacuum{label}"
    if core is None:
        for name in ("modular", "restrictions", "conjugation", "real subspaces"):
            rec.add(name, "modular", anchor, None)
        return info
    F = FockSpace.over(core.P)
    cs = cyclic_separating(core.q, core.P, F)
    rec.add_many("cyclic/separating", "modular", anchor, {k: bool(v) for k, v in cs.items()})
    md = tomita_S(core.q, core.P, F)
    info["ill_conditioned"] = md.ill_conditioned
    info["delta_min_eigenvalue"] = float(md.delta_spectrum[0])
    m = vn_alg.local_algebra(core.q, F)
    rec.add_many("modular", "modular", anchor, modular_axioms(md, m))
    rec.add_many("restrictions", "modular", f"particle-number restrictions{label}", check_particle_restrictions(md, geo, core.q))
    conj = check_conjugation_identity(md, geo.V, core.q, rec.tol["conjugation"])
    rec.add_many("conjugation", "conjugation", f"J a(q) J = Z̃ a(Vq) Z̃*{label}", conj)
    real = real_subspace_compare(core.q, core.P, rec.tol["real"])
    rec.add_many("real subspaces", "real", f"real-linear subspace duality{label}", real)
    return info


def _duality_section(rec: Recorder, inst: Instance, F: FockSpace):
    anchor = "twisted duality M(q)' = Z̃M(q⊥)Z̃*"
    q, qp = inst.q, inst.q.perp()
    ok, inc = vn_alg.check_twisted_causality(q, qp, F, rec.tol["duality"])
    rec.add("twisted causality inclusion", "duality", anchor, inc)
    rep = vn_alg.check_twisted_duality(q, qp, F, rec.tol["duality"], inst.name)
    rec.add("twisted duality span equality", "duality", anchor, rep.equality_defect)
    rec.add_bool("twisted duality dimension match", "duality", anchor, rep.dim_M_commutant == rep.dim_twisted)
    m = vn_alg.local_algebra(q, F)
    rec.add("bicommutant M'' = M", "duality", "finite-dimensional bicommutant", vn_alg.span_distance(vn_alg.double_commutant(m), m))
    rec.add("M(q) closure", "duality", "span closure", max(m.closure_defects().values()))
    Z, _, _, zt = parity_ops(F)
    rec.add(
        "twist by grading = twist by conjugation",
        "duality",
        "two generations of the twisted algebra",
        vn_alg.span_distance(vn_alg.twisted_algebra(m, zt), vn_alg.twisted_by_grading(m, Z)),
    )
    pipe = general_duality_pipeline(inst, rec.tol["duality"])
    rec.add_many("Halmos-split duality", "duality", "duality through the Halmos decomposition", pipe["defects"])
    return rep


def run_suite(inst: Instance, tolerances: dict | None = None, seed: int = 0, n_max: int = 4) -> dict:
    """Run every check on ``inst``.

    Checks that need generic position act on the generic part ``h1`` of a
    non-generic instance and are ``not_applicable`` if that part is zero.
    """
    rec = Recorder(tolerances or {})
    rng = np.random.default_rng(seed)
    F = FockSpace.over(inst.P)
    generic = is_generic_position(inst.P, inst.q)
    _car_section(rec, inst, F, rng)
    _formel_section(rec, inst, F, rng, n_max)
    hd = halmos(inst.P, inst.q)
    rec.add("Halmos: invariants", "halmos", "Halmos decomposition", max(hd.invariant_defects(inst.P, inst.q).values()))
    rec.add_bool("Halmos: generic iff h0 = 0", "halmos", "Halmos decomposition", generic == (hd.h0.dim == 0))
    if generic:
        core, label = inst, ""
    else:
        try:
            core, label = generic_core(inst), " (generic part h1)"
        except NotGeneric:
            core, label = None, " (no generic part)"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        geo = _geometry_section(rec, core, label)
        info = _modular_section(rec, core, geo, label)
    _duality_section(rec, inst, F)
    info["condition_number"] = round_sig(geo.condition_number) if geo is not None else None
    verdicts = [r["verdict"] for r in rec.records]
    summary = {v: verdicts.count(v) for v in (PASS, FAIL, NA)}
    return {
        "instance": {
            "name": inst.name,
            "dim_h": inst.dim,
            "dim_q": inst.q.dim,
            "fock_dim": F.dim,
            "generic": generic,
            "halmos_dims": {"h01": hd.h01.dim, "h02": hd.h02.dim, "h1": hd.h1.dim},
        },
        "checks": rec.records,
        "conditioning": {
            "ill_conditioned": info["ill_conditioned"],
            "delta_min_eigenvalue": round_sig(info["delta_min_eigenvalue"]) if "delta_min_eigenvalue" in info else None,
            "condition_number": info["condition_number"],
        },
        "summary": summary,
        "verdict": PASS if summary[FAIL] == 0 else FAIL,
    }
