"""Brute-force Tomita-Takesaki data of ``(M(q), Ω)`` and the identities it satisfies.

``S`` is solved from ``S(AΩ) = A*Ω`` over an HS basis of ``M(q)`` on the
whole Fock space. Everything stated about its particle-number blocks is
then checked against the closed formulas of :mod:`pair_geometry`.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from . import vn_alg
from .car_space import BasisProjection, Instance, InvariantSubspace, is_generic_position
from .errors import NotCyclicSeparating, NotGeneric
from .fock_rep import FockSpace, TensorRepresentation, parity_ops
from .numlin import (
    AntilinearMap,
    dagger,
    hermitian_function,
    image,
    numerical_rank,
    op_norm,
    orth,
    polar_antilinear,
    psd_power,
)
from .pair_geometry import PairGeometry, analyze_pair, halmos, restrict

ILL_CONDITIONED = 1e-12


def cyclic_separating(q: InvariantSubspace, P: BasisProjection, F: FockSpace | None = None) -> dict:
    """Cyclicity and separation of ``Ω`` by two routes.

    One-particle route: cyclic iff ``Pq = p`` and separating iff ``Pq⊥ = p``.
    Direct route: ``span{AΩ} = F`` and ``A -> AΩ`` injective on ``M(q)``.
    """
    F = FockSpace.over(P) if F is None else F
    d = P.subspace.dim
    geo_cyc = image(P.matrix, q.subspace).dim == d
    geo_sep = image(P.matrix, q.perp().subspace).dim == d
    m = vn_alg.local_algebra(q, F)
    x = np.column_stack([a @ F.vacuum for a in m.basis])
    s = np.linalg.svd(x, compute_uv=False)
    # basis elements have unit HS norm, so AΩ is of order one
    rank = numerical_rank(s, rtol=1e-9, scale=1.0)
    return {
        "cyclic": geo_cyc,
        "separating": geo_sep,
        "cyclic_direct": rank == F.dim,
        "separating_direct": rank == m.dim,
    }


@dataclass(frozen=True)
class ModularData:
    """``S = JΔ^{1/2}`` for ``(M(q), Ω)`` and ``T`` for ``(M(q⊥), Ω)``."""

    S: AntilinearMap
    Delta: np.ndarray
    J: AntilinearMap
    T: AntilinearMap
    fock: FockSpace
    solve_residual: float
    restricted: dict = field(repr=False)

    @property
    def delta_spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.Delta)

    @property
    def ill_conditioned(self) -> bool:
        return bool(self.delta_spectrum[0] < ILL_CONDITIONED)


def _solve_tomita(m: vn_alg.OperatorAlgebra, F: FockSpace) -> tuple[AntilinearMap, float]:
    om = F.vacuum
    x = np.column_stack([a @ om for a in m.basis])
    y = np.column_stack([dagger(a) @ om for a in m.basis])
    # K conj(X) = Y  <=>  conj(X)^T K^T = Y^T
    kt, *_ = np.linalg.lstsq(x.conj().T, y.T, rcond=None)
    k = kt.T
    return AntilinearMap(k), op_norm(k @ x.conj() - y)


def _particle_blocks(k: np.ndarray, F: FockSpace) -> dict[int, np.ndarray]:
    nums = F.particle_numbers()
    return {n: k[np.ix_(nums == n, nums == n)] for n in range(F.d + 1)}


def block_offdiagonal(k: np.ndarray, F: FockSpace) -> float:
    nums = F.particle_numbers()
    mask = nums[:, None] != nums[None, :]
    return op_norm(np.where(mask, k, 0))


def tomita_S(q: InvariantSubspace, P: BasisProjection, F: FockSpace | None = None) -> ModularData:
    F = FockSpace.over(P) if F is None else F
    cs = cyclic_separating(q, P, F)
    if not (cs["cyclic_direct"] and cs["separating_direct"]):
        raise NotCyclicSeparating(f"vacuum is not cyclic and separating: {cs}")
    s, res_s = _solve_tomita(vn_alg.local_algebra(q, F), F)
    t, res_t = _solve_tomita(vn_alg.local_algebra(q.perp(), F), F)
    j, delta = polar_antilinear(s)
    restricted = {
        n: {"S": bs, "Delta": bd, "J": bj}
        for (n, bs), bd, bj in zip(
            _particle_blocks(s.kernel, F).items(),
            _particle_blocks(delta, F).values(),
            _particle_blocks(j.kernel, F).values(),
        )
    }
    return ModularData(s, delta, j, t, F, max(res_s, res_t), restricted)


def modular_axioms(md: ModularData, m: vn_alg.OperatorAlgebra | None = None) -> dict[str, float]:
    """Structural identities of the modular objects."""
    kj, kd = md.J.kernel, md.Delta
    F = md.fock
    om = F.vacuum
    ident = np.eye(F.dim)
    half = psd_power(kd, 0.5)
    out = {
        "Tomita solve residual": md.solve_residual,
        "S = J Delta^1/2": op_norm(md.S.kernel - kj @ half.conj()),
        "J^2 = 1": op_norm(kj @ kj.conj() - ident),
        "J unitary": op_norm(dagger(kj) @ kj - ident),
        "J Delta J = Delta^-1": op_norm(md.J.conjugate_operator(kd) - np.linalg.inv(kd)),
        "S Omega = Omega": op_norm(md.S(om) - om),
        "J Omega = Omega": op_norm(md.J(om) - om),
        "Delta Omega = Omega": op_norm(kd @ om - om),
    }
    for t in (1.0, 0.5):
        u = hermitian_function(kd, lambda w, t=t: np.exp(1j * t * np.log(np.clip(w, 1e-300, None))))
        out[f"Delta^(i{t:g}) Omega = Omega"] = op_norm(u @ om - om)
    for name, k in (("S", md.S.kernel), ("Delta", kd), ("J", kj)):
        out[f"{name} block diagonal"] = block_offdiagonal(k, F)
    if m is not None:
        # J Δ^{1/2} A Ω = A* Ω restates the definition of S
        out["J Delta^1/2 A Omega = A* Omega"] = max(
            op_norm(md.J(half @ a @ om) - dagger(a) @ om) / max(1.0, op_norm(a)) for a in m.basis
        )
    return out


def _one_particle_kernel(k: np.ndarray, F: FockSpace) -> np.ndarray:
    idx = [1 << i for i in range(F.d)]
    return k[np.ix_(idx, idx)]


def _p_coords_antilinear(kernel: np.ndarray, F: FockSpace) -> np.ndarray:
    fp = F.frame
    return dagger(fp) @ kernel @ fp.conj()


def _wedge_checks(md: ModularData, geo: PairGeometry, q: InvariantSubspace, n: int) -> dict[str, float]:
    F = md.fock
    Pm, g = geo.frames.P, geo.frames.G
    out = {}
    # S(Pq_1 ∧ ... ∧ Pq_n) = PΓq_n ∧ ... ∧ PΓq_1
    cols = [q.frame[:, k] for k in range(q.dim)]
    worst = 0.0
    for combo in itertools.combinations(cols, n):
        lhs = md.S(F.wedge([Pm @ v for v in combo]))
        rhs = F.wedge([Pm @ g @ v.conj() for v in reversed(combo)])
        worst = max(worst, op_norm(lhs - rhs))
    out[f"S wedge reversal n={n}"] = worst
    # Δ(p_1 ∧ ... ∧ p_n) = Δ_p p_1 ∧ ... ∧ Δ_p p_n and J(p_1 ∧ ... ∧ p_n) = Jp_n ∧ ... ∧ Jp_1
    fp = F.frame
    j1 = _one_particle_kernel(md.J.kernel, F)
    jp = [fp @ j1[:, i] for i in range(F.d)]
    wd, wj = 0.0, 0.0
    for rows in itertools.combinations(range(F.d), n):
        e = F.wedge([fp[:, i] for i in rows])
        wd = max(wd, op_norm(md.Delta @ e - F.wedge([geo.delta_p @ fp[:, i] for i in rows])))
        wj = max(wj, op_norm(md.J(e) - F.wedge([jp[i] for i in reversed(rows)])))
    out[f"Delta wedge n={n}"] = wd
    out[f"J wedge reversal n={n}"] = wj
    return out


def check_particle_restrictions(md: ModularData, geo: PairGeometry, q: InvariantSubspace, wedge_orders=(2, 3)) -> dict[str, float]:
    """One- and many-particle restrictions of ``S``, ``S*``, ``Δ``, ``J``, ``T``."""
    F = md.fock
    fr = geo.frames
    Pm, g, fp = fr.P, fr.G, F.frame
    ks = md.S.kernel
    out = {
        "S Omega = Omega": op_norm(md.S(F.vacuum) - F.vacuum),
        "S|p = beta": op_norm(_one_particle_kernel(ks, F) - _p_coords_antilinear(geo.beta.matrix, F)),
        "S*|p = alpha": op_norm(_one_particle_kernel(ks.T, F) - _p_coords_antilinear(geo.alpha.matrix, F)),
        "Delta|p = Delta_p": op_norm(_one_particle_kernel(md.Delta, F) - dagger(fp) @ geo.delta_p @ fp),
    }
    # Δ on PQp_i against PQ⊥p_i, with Δ from the brute-force solve
    out["Delta(PQp) = PQ⊥p"] = max(
        (
            op_norm(md.Delta @ F.one_particle_vector(Pm @ fr.Q @ fr.p[:, i]) - F.one_particle_vector(Pm @ fr.Qperp @ fr.p[:, i]))
            for i in range(F.d)
        ),
        default=0.0,
    )
    half = geo.delta_p_power(0.5)
    s_pq, j_pq, t_pq = 0.0, 0.0, 0.0
    for k in range(q.dim):
        v = q.frame[:, k]
        pgv = Pm @ g @ v.conj()
        s_pq = max(s_pq, op_norm(md.S(F.one_particle_vector(Pm @ v)) - F.one_particle_vector(pgv)))
        j_pq = max(j_pq, op_norm(md.J(F.one_particle_vector(Pm @ v)) - F.one_particle_vector(half @ pgv)))
    qp = q.perp()
    for k in range(qp.dim):
        w = qp.frame[:, k]
        x = F.one_particle_vector(Pm @ w)
        target = F.one_particle_vector(Pm @ g @ w.conj())
        t_pq = max(t_pq, op_norm(md.T(x) - target), op_norm(md.S.adjoint()(x) + target))
    out["S(Pq) = PΓq"] = s_pq
    out["J(Pq) = Delta_p^1/2 PΓq"] = j_pq
    out["T(Pq⊥) = PΓq⊥ = -S*(Pq⊥)"] = t_pq
    # the one-particle modular operator four ways
    dp = geo.delta_p
    kb = geo.beta.matrix
    brute = fp @ _one_particle_kernel(md.Delta, F) @ dagger(fp)
    out["Delta|p = beta*beta"] = op_norm(brute - kb.T @ kb.conj())
    out["Delta|p = W|phi|^2W*"] = op_norm(brute - geo.W @ geo.abs_phi @ geo.abs_phi @ dagger(geo.W))
    out["Delta_p = beta*beta"] = op_norm(dp - kb.T @ kb.conj())
    for n in wedge_orders:
        if n <= F.d and n <= q.dim:
            out.update(_wedge_checks(md, geo, q, n))
    return out


def conjugated_local_algebra(md: ModularData, m: vn_alg.OperatorAlgebra) -> vn_alg.OperatorAlgebra:
    mats = [md.J.conjugate_operator(a) for a in m.basis]
    return vn_alg.algebra_span(mats, m.size)


def check_conjugation_identity(md: ModularData, V: AntilinearMap, q: InvariantSubspace, tol: float = 1e-7) -> dict:
    """``J a(v) J = Z̃ a(Vv) Z̃*`` over an ONB of ``q`` and its span consequences."""
    F = md.fock
    _, _, _, zt = parity_ops(F)
    ztd = dagger(zt)
    jaz = 0.0
    for k in range(q.dim):
        v = q.frame[:, k]
        lhs = md.J.conjugate_operator(F.pi_a(v))
        rhs = zt @ F.pi_a(V(v)) @ ztd
        jaz = max(jaz, op_norm(lhs - rhs))
    qp = q.perp()
    vv = np.column_stack([V(q.frame[:, k]) for k in range(q.dim)]) if q.dim else np.zeros((F.h_dim, 0))
    iso = op_norm(dagger(vv) @ vv - np.eye(q.dim)) if q.dim else 0.0
    in_qperp = op_norm(vv - qp.projection() @ vv)
    m = vn_alg.local_algebra(q, F)
    jmj = conjugated_local_algebra(md, m)
    tw = vn_alg.twisted_algebra(vn_alg.local_algebra(qp, F), zt)
    mc = vn_alg.commutant(m)
    d_tw = vn_alg.span_distance(jmj, tw)
    d_mc = vn_alg.span_distance(jmj, mc)
    return {
        "jaz_defect": jaz,
        "V isometry": iso,
        "V lands in q⊥": in_qperp,
        "JMJ = twisted M(q⊥)": d_tw,
        "JMJ = M(q)'": d_mc,
        "verdict": "pass" if max(jaz, iso, in_qperp, d_tw, d_mc) <= tol else "fail",
    }


def _realify(c: np.ndarray) -> np.ndarray:
    return np.vstack([c.real, c.imag])


def _real_orth(a: np.ndarray) -> np.ndarray:
    return np.real(orth(a.astype(complex), rtol=1e-9))


def _real_null(rows: np.ndarray, n: int) -> np.ndarray:
    if rows.shape[0] == 0:
        return np.eye(n)
    _, s, vh = np.linalg.svd(rows, full_matrices=True)
    r = numerical_rank(s, rtol=1e-9)
    return vh[r:].T


def _real_distance(a: np.ndarray, b: np.ndarray) -> float:
    return op_norm(a @ a.T - b @ b.T)


@dataclass(frozen=True)
class RealSubspace:
    """Real-linear subspace of ``p``.

    ``coords`` is a real-orthonormal frame in the realified coordinates
    ``(Re c, Im c)`` of the ONB ``basis`` of ``p``; ``frame`` gives the same
    vectors in ``h``.
    """

    coords: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def frame(self) -> np.ndarray:
        d = self.basis.shape[1]
        return self.basis @ (self.coords[:d] + 1j * self.coords[d:])

    def distance(self, other: "RealSubspace") -> float:
        if self.dim != other.dim:
            return 1.0
        return _real_distance(self.coords, other.coords)


def real_subspaces(q: InvariantSubspace, P: BasisProjection) -> dict[str, RealSubspace]:
    """``M = P(Re q)``, ``P(Re q⊥)`` and ``iM′`` computed two ways.

    ``iM′`` is the real orthogonal complement of ``M`` in ``p``
    (``Re⟨q + Γq, p⟩ = 0``) and, independently, ``i`` times the symplectic
    complement ``{x : Im⟨x, m⟩ = 0}``.
    """
    if not is_generic_position(P, q):
        raise NotGeneric("p and q are not in generic position")
    space = P.space
    fp = P.subspace.frame
    d = fp.shape[1]

    def re_part_image(frame: np.ndarray) -> np.ndarray:
        vecs = np.hstack([frame, 1j * frame])
        re = (vecs + space.G @ vecs.conj()) / 2
        return _real_orth(_realify(dagger(fp) @ P.matrix @ re))

    m = re_part_image(q.frame)
    lhs = re_part_image(q.perp().frame)
    # Re⟨a, b⟩ is the Euclidean product of the realified coordinates
    im_perp = _real_null(m.T, 2 * d)
    # Im⟨x, m⟩ = x_r·m_i - x_i·m_r
    m_prime = _real_null(np.vstack([m[d:], -m[:d]]).T, 2 * d)
    i_m_prime = _real_orth(np.vstack([-m_prime[d:], m_prime[:d]]))
    return {
        "M": RealSubspace(m, fp),
        "P(Re q⊥)": RealSubspace(lhs, fp),
        "iM'": RealSubspace(im_perp, fp),
        "iM' symplectic": RealSubspace(i_m_prime, fp),
    }


def real_subspace_compare(q: InvariantSubspace, P: BasisProjection, tol: float = 1e-8) -> dict:
    """Compare ``P(Re q⊥)`` with ``iM′`` for ``M = P(Re q)``."""
    subs = real_subspaces(q, P)
    m, lhs, imp = subs["M"], subs["P(Re q⊥)"], subs["iM'"]
    d = P.subspace.dim
    inclusion = op_norm(lhs.coords - imp.coords @ (imp.coords.T @ lhs.coords)) if lhs.dim else 0.0
    out = {
        "dim_R M": m.dim,
        "dim_R iM'": imp.dim,
        "dim_R P(Re q⊥)": lhs.dim,
        "P(Re q⊥) ⊆ iM'": inclusion,
        "P(Re q⊥) = iM'": lhs.distance(imp),
        "iM' two routes": imp.distance(subs["iM' symplectic"]),
        "dims add up": m.dim + imp.dim == 2 * d,
    }
    worst = max(out["P(Re q⊥) ⊆ iM'"], out["P(Re q⊥) = iM'"], out["iM' two routes"])
    out["verdict"] = "pass" if out["dims add up"] and worst <= tol else "fail"
    return out


def _block_rep(r):
    return FockSpace.over(r.P) if r.dim else FockSpace.trivial()


def _kron_span(*algebras) -> vn_alg.OperatorAlgebra:
    mats = [np.array([[1.0 + 0j]])]
    for alg in algebras:
        mats = [np.kron(a, b) for a in mats for b in alg.basis]
    n = mats[0].shape[0]
    vb = np.column_stack([m.reshape(-1) for m in mats]) / np.sqrt(n)
    return vn_alg.OperatorAlgebra(orth(vb, rtol=1e-9), tuple(mats), n)


def _scalars(n: int) -> vn_alg.OperatorAlgebra:
    return vn_alg.algebra_span([], n)


def _full(n: int) -> vn_alg.OperatorAlgebra:
    mats = []
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            mats.append(e)
    return vn_alg.OperatorAlgebra(np.eye(n * n, dtype=complex), tuple(mats), n)


def general_duality_pipeline(inst: Instance, tol: float = 1e-7) -> dict:
    """Twisted duality for any invariant ``q`` through the split ``h01 ⊕ h02 ⊕ h1``.

    The nested representation ``B(F01, A(F02, F1))`` acts as
    ``π01 ⊗ Z02 ⊗ Z1 + 1 ⊗ π02 ⊗ 1 + 1 ⊗ Z02 ⊗ π1``.
    """
    P, q = inst.P, inst.q
    hd = halmos(P, q)
    r01, r02, r1 = (restrict(P, q, piece) for piece in (hd.h01, hd.h02, hd.h1))
    f01, f02, f1 = (_block_rep(r) for r in (r01, r02, r1))
    rep = TensorRepresentation(f01, TensorRepresentation(f02, f1, "A"), "B")
    u = np.hstack([r01.frame, r02.frame, r1.frame])
    q_new = dagger(u) @ q.frame
    qp_new = dagger(u) @ q.perp().frame
    m = vn_alg.local_algebra(q_new, rep)
    mc = vn_alg.commutant(m)
    m1 = vn_alg.local_algebra(r1.q, f1) if r1.dim else _scalars(1)
    m1c = vn_alg.commutant(m1)
    block_m = _kron_span(_scalars(f01.dim), _full(f02.dim), m1)
    block_mc = _kron_span(_full(f01.dim), _scalars(f02.dim), m1c)
    split = vn_alg.check_twisted_duality(q_new, qp_new, rep, tol, inst.name + ":split")
    unsplit = vn_alg.check_twisted_duality(q, q.perp(), FockSpace.over(P), tol, inst.name)
    defects = {
        "Halmos invariants": max(hd.invariant_defects(P, q).values()),
        "Qh01 = 0": op_norm(q.projection() @ hd.h01.frame) if hd.h01.dim else 0.0,
        "Qh02 = h02": op_norm(q.projection() @ hd.h02.frame - hd.h02.frame) if hd.h02.dim else 0.0,
        "M(q) block form": vn_alg.span_distance(m, block_m),
        "M(q)' block form": vn_alg.span_distance(mc, block_mc),
        "split duality": split.equality_defect,
        "unsplit duality": unsplit.equality_defect,
    }
    ok = max(defects.values()) <= tol and split.verdict == unsplit.verdict == "pass"
    return {
        "instance_id": inst.name,
        "dims": {"h01": hd.h01.dim, "h02": hd.h02.dim, "h1": hd.h1.dim},
        "defects": defects,
        "split": split.to_dict(),
        "unsplit": unsplit.to_dict(),
        "verdict": "pass" if ok else "fail",
    }


def generic_core(inst: Instance) -> Instance:
    """The generic-position piece ``(h1, P1, q1)`` of an instance."""
    hd = halmos(inst.P, inst.q)
    r = restrict(inst.P, inst.q, hd.h1)
    if r.dim == 0:
        raise NotGeneric("the instance has no generic-position part")
    return Instance(r.space, r.P, r.q, inst.name + ":h1")


@dataclass(frozen=True)
class ModularReport:
    instance_id: str
    cyclic: bool
    separating: bool
    delta_spectrum: list
    restriction_defects: dict
    jaz_defect: float
    duality_verdict: str

    def to_dict(self) -> dict:
        return asdict(self)


def modular_report(inst: Instance, tol: float = 1e-7) -> tuple[ModularReport, dict]:
    """Run the modular suite on a generic instance; returns the report and all defects."""
    P, q = inst.P, inst.q
    F = FockSpace.over(P)
    cs = cyclic_separating(q, P, F)
    md = tomita_S(q, P, F)
    geo = analyze_pair(P, q)
    m = vn_alg.local_algebra(q, F)
    axioms = modular_axioms(md, m)
    restr = check_particle_restrictions(md, geo, q)
    conj = check_conjugation_identity(md, geo.V, q, tol)
    report = ModularReport(
        inst.name,
        bool(cs["cyclic"] and cs["cyclic_direct"]),
        bool(cs["separating"] and cs["separating_direct"]),
        [float(x) for x in md.delta_spectrum],
        restr,
        conj["jaz_defect"],
        conj["verdict"],
    )
    return report, {"axioms": axioms, "restrictions": restr, "conjugation": conj, "ill_conditioned": md.ill_conditioned}
