"""Geometry of a basis projection ``P`` and a Γ-invariant subspace ``q``.

In finite dimension every graph operator of the pair is bounded and
everywhere defined on its natural domain, so each one is materialised as
an ambient matrix (linear) or ambient kernel (antilinear) that vanishes
off its domain. Coordinates in the recorded orthonormal frames of
``p, p⊥, q, q⊥`` are available from :class:`PairFrames`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .car_space import BasisProjection, CarSpace, InvariantSubspace, is_generic_position
from .errors import IllConditionedWarning, NotGeneric
from .numlin import (
    TOL,
    AntilinearMap,
    Subspace,
    as_complex,
    dagger,
    op_norm,
    orthocomplement,
    psd_power,
    span_sum,
    subspace_equal,
    subspace_intersect,
)

CONDITION_WARN = 1e8


@dataclass(frozen=True)
class HalmosDecomposition:
    """``h = h0 ⊕ h1`` with ``h0`` the four intersections and ``h0 = h01 ⊕ h02``."""

    pq: Subspace
    pqperp: Subspace
    pperpq: Subspace
    pperpqperp: Subspace
    h0: Subspace
    h01: Subspace
    h02: Subspace
    h1: Subspace
    r0: np.ndarray

    def invariant_defects(self, P: BasisProjection, q: InvariantSubspace) -> dict[str, float]:
        space = P.space
        p, qm, g = P.matrix, q.projection(), space.G
        parts = [self.pq, self.pqperp, self.pperpq, self.pperpqperp]
        cross = max(
            (op_norm(dagger(a.frame) @ b.frame) for i, a in enumerate(parts) for b in parts[i + 1 :] if a.dim and b.dim),
            default=0.0,
        )
        return {
            "R0P-PR0": op_norm(self.r0 @ p - p @ self.r0),
            "R0Q-QR0": op_norm(self.r0 @ qm - qm @ self.r0),
            # R0 Γ x = Γ R0 x  <=>  R0 G = G conj(R0)
            "R0Gamma-GammaR0": op_norm(self.r0 @ g - g @ self.r0.conj()),
            "h0 pieces orthogonal": cross,
            "h0 = h01 + h02": op_norm(span_sum(self.h01, self.h02).projection() - self.r0) if self.h0.dim else 0.0,
            "Gamma(p∩q⊥) = p⊥∩q⊥": op_norm(space.gamma_image(self.pqperp).projection() - self.pperpqperp.projection()),
            "Gamma(p∩q) = p⊥∩q": op_norm(space.gamma_image(self.pq).projection() - self.pperpq.projection()),
        }


@dataclass(frozen=True)
class Restriction:
    """``(h_k, Γ_k), P_k, q_k`` written in an orthonormal frame of ``h_k``."""

    frame: np.ndarray
    space: CarSpace | None
    P: BasisProjection | None
    q: InvariantSubspace | None

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    def coords(self, f: np.ndarray) -> np.ndarray:
        return dagger(self.frame) @ f


def restrict(P: BasisProjection, q: InvariantSubspace, piece: Subspace) -> Restriction:
    """Restriction of ``P``, ``Q``, ``Γ`` to a reducing, Γ-invariant subspace."""
    f = piece.frame
    if piece.dim == 0:
        return Restriction(f, None, None, None)
    space = CarSpace(piece.dim, AntilinearMap(dagger(f) @ P.space.G @ f.conj()))
    pk = dagger(f) @ P.matrix @ f
    qk = dagger(f) @ q.projection() @ f
    qsub = Subspace.from_projection((qk + dagger(qk)) / 2)
    return Restriction(f, space, BasisProjection((pk + dagger(pk)) / 2, space), InvariantSubspace(qsub, space))


def halmos(P: BasisProjection, q: InvariantSubspace) -> HalmosDecomposition:
    p_sub, q_sub = P.subspace, q.subspace
    pperp, qperp = orthocomplement(p_sub), orthocomplement(q_sub)
    pq = subspace_intersect(p_sub, q_sub)
    pqp = subspace_intersect(p_sub, qperp)
    ppq = subspace_intersect(pperp, q_sub)
    ppqp = subspace_intersect(pperp, qperp)
    h0 = span_sum(pq, pqp, ppq, ppqp)
    space = P.space
    h01 = span_sum(pqp, space.gamma_image(pqp))
    h02 = span_sum(pq, space.gamma_image(pq))
    return HalmosDecomposition(pq, pqp, ppq, ppqp, h0, h01, h02, orthocomplement(h0), h0.projection())


def delta_norm(P: np.ndarray, Q: np.ndarray) -> float:
    """The opening ``δ = ||PQ||``."""
    return op_norm(as_complex(P) @ as_complex(Q))


@dataclass(frozen=True)
class PairFrames:
    """Recorded orthonormal frames of ``p, p⊥, q, q⊥`` and their projections."""

    P: np.ndarray
    Q: np.ndarray
    p: np.ndarray
    pperp: np.ndarray
    q: np.ndarray
    qperp: np.ndarray
    space: CarSpace

    @classmethod
    def of(cls, P: BasisProjection, q: InvariantSubspace) -> "PairFrames":
        p_sub = P.subspace
        qperp = orthocomplement(q.subspace)
        return cls(P.matrix, q.projection(), p_sub.frame, orthocomplement(p_sub).frame, q.frame, qperp.frame, P.space)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def Pperp(self) -> np.ndarray:
        return np.eye(self.n) - self.P

    @property
    def Qperp(self) -> np.ndarray:
        return np.eye(self.n) - self.Q

    @property
    def G(self) -> np.ndarray:
        return self.space.G

    def gamma_op(self, a: np.ndarray) -> np.ndarray:
        """``Γ A Γ`` for a linear ``A``."""
        return self.space.conj_op(a)


@dataclass(frozen=True)
class GraphOperator:
    """Operator given by its graph ``{(x_i, T x_i)}`` over a domain frame."""

    domain_frame: np.ndarray
    value_map: np.ndarray
    linearity_kind: str = "linear"

    def __post_init__(self):
        x = as_complex(self.domain_frame)
        s = np.linalg.svd(x, compute_uv=False)
        if s.size and s[-1] <= 1e-10 * s[0]:
            raise ValueError("domain frame does not have full column rank")
        if self.linearity_kind not in ("linear", "antilinear"):
            raise ValueError(f"unknown linearity kind {self.linearity_kind!r}")
        object.__setattr__(self, "domain_frame", x)
        object.__setattr__(self, "value_map", as_complex(self.value_map))

    @cached_property
    def matrix(self) -> np.ndarray:
        """Ambient matrix (linear) or ambient kernel (antilinear); zero off the domain."""
        pinv = np.linalg.pinv(self.domain_frame)
        if self.linearity_kind == "linear":
            return self.value_map @ pinv
        return self.value_map @ pinv.conj()

    def antilinear(self) -> AntilinearMap:
        if self.linearity_kind != "antilinear":
            raise TypeError("operator is linear")
        return AntilinearMap(self.matrix)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.linearity_kind == "linear":
            return self.matrix @ x
        return self.matrix @ np.conj(x)

    def coords(self, out_frame: np.ndarray, in_frame: np.ndarray) -> np.ndarray:
        if self.linearity_kind == "linear":
            return dagger(out_frame) @ self.matrix @ in_frame
        return dagger(out_frame) @ self.matrix @ in_frame.conj()


def _require_generic(P: BasisProjection, q: InvariantSubspace) -> None:
    if not is_generic_position(P, q):
        raise NotGeneric("p and q are not in generic position")


def _frames(P: BasisProjection, q: InvariantSubspace) -> PairFrames:
    _require_generic(P, q)
    return PairFrames.of(P, q)


def kato_identities(P: BasisProjection, q: InvariantSubspace) -> dict:
    """Norm identities of the pair and bicontinuity of the six restriction maps.

    The six maps are ``Q: p⊥→q``, ``Q⊥: p⊥→q⊥``, ``Q: p→q``, ``Q⊥: p→q⊥``,
    ``P: q⊥→p`` and ``P: q→p``. In finite dimension bicontinuity means the
    coordinate matrix is square with positive smallest singular value.
    """
    fr = _frames(P, q)
    Pm, Qm, Pp, Qp = fr.P, fr.Q, fr.Pperp, fr.Qperp
    norms = {
        "||PQ||": op_norm(Pm @ Qm),
        "||QP||": op_norm(Qm @ Pm),
        "||(1-P)Q||": op_norm(Pp @ Qm),
        "||Q(1-P)||": op_norm(Qm @ Pp),
        "||P-Q||": op_norm(Pm - Qm),
        "||(1-Q)P||": op_norm(Qp @ Pm),
        "||(1-Q)(1-P)||": op_norm(Qp @ Pp),
    }
    maps = {
        "Q: p⊥→q": (fr.q, fr.pperp),
        "Q⊥: p⊥→q⊥": (fr.qperp, fr.pperp),
        "Q: p→q": (fr.q, fr.p),
        "Q⊥: p→q⊥": (fr.qperp, fr.p),
        "P: q⊥→p": (fr.p, fr.qperp),
        "P: q→p": (fr.p, fr.q),
    }
    min_sv = {}
    for name, (out_f, in_f) in maps.items():
        m = dagger(out_f) @ in_f
        min_sv[name] = float(np.linalg.svd(m, compute_uv=False)[-1]) if m.shape[0] == m.shape[1] and m.size else 0.0
    delta = norms["||PQ||"]
    return {
        "delta": delta,
        "norms": norms,
        "max_deviation": max(abs(v - delta) for v in norms.values()),
        "min_singular_values": min_sv,
        "bicontinuous": all(v > 1e-10 for v in min_sv.values()),
    }


def build_phi(P: BasisProjection, q: InvariantSubspace) -> GraphOperator:
    """``φ: q → q⊥`` with graph ``{(Qp, Q⊥p) : p ∈ p}``."""
    fr = _frames(P, q)
    return GraphOperator(fr.Q @ fr.p, fr.Qperp @ fr.p)


def build_rho(P: BasisProjection, q: InvariantSubspace) -> GraphOperator:
    """``ρ: q → q⊥`` with graph ``{(Qp⊥, -Q⊥p⊥) : p⊥ ∈ p⊥}``."""
    fr = _frames(P, q)
    return GraphOperator(fr.Q @ fr.pperp, -fr.Qperp @ fr.pperp)


def build_lambda(P: BasisProjection, q: InvariantSubspace) -> GraphOperator:
    """``λ: p → p⊥`` with graph ``{(Pq, -P⊥q) : q ∈ q}``."""
    fr = _frames(P, q)
    return GraphOperator(fr.P @ fr.q, -fr.Pperp @ fr.q)


def build_alpha_beta(P: BasisProjection, q: InvariantSubspace) -> tuple[GraphOperator, GraphOperator]:
    """Antilinear ``α, β: p → p``.

    ``gra β = {(Pq, PΓq)}`` over ``q`` and ``gra α = {(Pq⊥, -PΓq⊥)}`` over ``q⊥``.
    """
    fr = _frames(P, q)
    g = fr.G
    beta = GraphOperator(fr.P @ fr.q, fr.P @ g @ fr.q.conj(), "antilinear")
    alpha = GraphOperator(fr.P @ fr.qperp, -fr.P @ g @ fr.qperp.conj(), "antilinear")
    return alpha, beta


def delta_p(P: BasisProjection, q: InvariantSubspace, warn: bool = True) -> np.ndarray:
    """One-particle modular operator from its graph ``{(PQp, PQ⊥p) : p ∈ p}``.

    Returned as an ambient matrix supported on ``p``.
    """
    fr = _frames(P, q)
    d = GraphOperator(fr.P @ fr.Q @ fr.p, fr.P @ fr.Qperp @ fr.p).matrix
    d = (d + dagger(d)) / 2
    if warn:
        cond = condition_number(d, fr.p)
        if cond > CONDITION_WARN:
            warnings.warn(f"Δ_p condition number {cond:.2e}; ||PQ|| is close to 1", IllConditionedWarning, stacklevel=2)
    return d


def condition_number(d: np.ndarray, p_frame: np.ndarray) -> float:
    w = np.linalg.eigvalsh(dagger(p_frame) @ d @ p_frame)
    if w.size == 0:
        return 1.0
    return float(w[-1] / w[0]) if w[0] > 0 else float("inf")


def _p_power(d: np.ndarray, fr: PairFrames, power: float) -> np.ndarray:
    """``Δ_p^power`` on ``p``, extended by zero on ``p⊥``."""
    dc = dagger(fr.p) @ d @ fr.p
    return fr.p @ psd_power(dc, power) @ dagger(fr.p)


def polar_phi(P: BasisProjection, q: InvariantSubspace) -> tuple[np.ndarray, np.ndarray]:
    """``|φ|`` and ``sgn φ`` from the closed forms in ``Δ_p^{±1/2}``.

    ``|φ|q = Δ_p^{1/2}Pq + ΓΔ_p^{-1/2}PΓq`` and
    ``sgn φ q = Δ_p^{1/2}Pq - ΓΔ_p^{1/2}PΓq``, both as ambient matrices
    restricted to ``q``.
    """
    fr = _frames(P, q)
    d = delta_p(P, q, warn=False)
    half, mhalf = _p_power(d, fr, 0.5), _p_power(d, fr, -0.5)
    abs_phi = (half @ fr.P + fr.gamma_op(mhalf @ fr.P)) @ fr.Q
    sgn_phi = (half @ fr.P - fr.gamma_op(half @ fr.P)) @ fr.Q
    return abs_phi, sgn_phi


def build_W(P: BasisProjection, q: InvariantSubspace) -> np.ndarray:
    """``Wq = (1 + Δ_p)^{1/2} Pq``, an isometry of ``q`` onto ``p``."""
    fr = _frames(P, q)
    d = delta_p(P, q, warn=False)
    return _p_power(fr.P + d, fr, 0.5) @ fr.P @ fr.Q


def build_V(P: BasisProjection, q: InvariantSubspace) -> AntilinearMap:
    """Antilinear isometry ``q → q⊥``: ``Vq = i(Δ_p^{1/2}PΓq - ΓΔ_p^{1/2}Pq)``."""
    fr = _frames(P, q)
    half = _p_power(delta_p(P, q, warn=False), fr, 0.5)
    g = fr.G
    # i Δ^{1/2} P Γ x has kernel i Δ^{1/2} P G; -i Γ Δ^{1/2} P x has kernel -i G conj(Δ^{1/2} P)
    k = 1j * half @ fr.P @ g - 1j * g @ np.conj(half @ fr.P)
    return AntilinearMap(k @ fr.Q.conj())


def build_V_from_sign(P: BasisProjection, q: InvariantSubspace) -> AntilinearMap:
    """The same map written as ``-iΓ sgn φ``."""
    _, sgn = polar_phi(P, q)
    return AntilinearMap(-1j * P.space.G @ sgn.conj())


@dataclass(frozen=True)
class PairGeometry:
    """All graph operators of a generic pair, computed once."""

    frames: PairFrames
    delta: float
    phi: GraphOperator
    rho: GraphOperator
    lam: GraphOperator
    alpha: GraphOperator
    beta: GraphOperator
    delta_p: np.ndarray
    abs_phi: np.ndarray
    sgn_phi: np.ndarray
    W: np.ndarray
    V: AntilinearMap

    def delta_p_power(self, power: float) -> np.ndarray:
        return _p_power(self.delta_p, self.frames, power)

    @property
    def delta_p_eigenvalues(self) -> np.ndarray:
        fr = self.frames
        return np.linalg.eigvalsh(dagger(fr.p) @ self.delta_p @ fr.p)

    @property
    def condition_number(self) -> float:
        return condition_number(self.delta_p, self.frames.p)

    def spectrum(self) -> dict:
        return {
            "delta": self.delta,
            "eigenvalues_of_delta_p": [float(x) for x in self.delta_p_eigenvalues],
            "condition_number": self.condition_number,
        }


def analyze_pair(P: BasisProjection, q: InvariantSubspace) -> PairGeometry:
    fr = _frames(P, q)
    alpha, beta = build_alpha_beta(P, q)
    abs_phi, sgn_phi = polar_phi(P, q)
    return PairGeometry(
        frames=fr,
        delta=delta_norm(fr.P, fr.Q),
        phi=build_phi(P, q),
        rho=build_rho(P, q),
        lam=build_lambda(P, q),
        alpha=alpha,
        beta=beta,
        delta_p=delta_p(P, q),
        abs_phi=abs_phi,
        sgn_phi=sgn_phi,
        W=build_W(P, q),
        V=build_V(P, q),
    )


def geometry_defects(geo: PairGeometry) -> dict[str, float]:
    """Residuals of every identity relating the graph operators of a generic pair."""
    fr = geo.frames
    Pm, Qm, Pp, Qp, g = fr.P, fr.Q, fr.Pperp, fr.Qperp, fr.G
    phi, rho = geo.phi.coords(fr.qperp, fr.q), geo.rho.coords(fr.qperp, fr.q)
    kb, ka = geo.beta.matrix, geo.alpha.matrix
    dp = geo.delta_p
    dp_inv = geo.delta_p_power(-1.0)
    half = geo.delta_p_power(0.5)
    phi_amb = geo.phi.matrix
    out = {}
    out["rho^-1 = phi*"] = op_norm(np.linalg.inv(rho) - dagger(phi))
    # φ*φ maps QPq to QP⊥q
    out["phi*phi graph"] = op_norm(dagger(phi_amb) @ phi_amb @ Qm @ Pm @ fr.q - Qm @ Pp @ fr.q)
    # λ maps Pq to -P⊥q
    out["lambda graph"] = op_norm(geo.lam.matrix @ Pm @ fr.q + Pp @ fr.q)
    out["beta^2 = 1 on p"] = op_norm(kb @ kb.conj() - Pm)
    out["alpha^2 = 1 on p"] = op_norm(ka @ ka.conj() - Pm)
    out["alpha = beta*"] = op_norm(ka - kb.T)
    out["Delta_p = beta*beta"] = op_norm(dp - kb.T @ kb.conj())
    out["Delta_p^-1 = beta beta*"] = op_norm(dp_inv - kb @ kb.conj().T)
    out["Delta_p^-1 = alpha*alpha"] = op_norm(dp_inv - ka.T @ ka.conj())
    out["Delta_p graph"] = op_norm(dp @ Pm @ Qm @ fr.p - Pm @ Qp @ fr.p)
    out["phi(Qp) = Delta_p PQp - P⊥Qp"] = op_norm(phi_amb @ Qm @ fr.p - (dp @ Pm @ Qm @ fr.p - Pp @ Qm @ fr.p))
    rhs = dp @ Pm @ Qm @ Pm @ fr.q + g @ np.conj(dp_inv @ Pm @ g @ np.conj(Qm @ Pm @ fr.q))
    out["phi*phi(QPq) formula"] = op_norm(dagger(phi_amb) @ phi_amb @ Qm @ Pm @ fr.q - rhs)
    # polar data against a direct factorisation of the φ matrix
    u, s, vh = np.linalg.svd(phi)
    abs_direct = dagger(vh) @ np.diag(s) @ vh
    sgn_direct = u @ vh
    out["|phi| formula = SVD"] = op_norm(dagger(fr.q) @ geo.abs_phi @ fr.q - abs_direct)
    out["sgn phi formula = SVD"] = op_norm(dagger(fr.qperp) @ geo.sgn_phi @ fr.q - sgn_direct)
    out["(sgn phi)*(sgn phi) = Q"] = op_norm(dagger(geo.sgn_phi) @ geo.sgn_phi - Qm)
    out["(sgn phi)(sgn phi)* = Q⊥"] = op_norm(geo.sgn_phi @ dagger(geo.sgn_phi) - Qp)
    out["W*W = Q"] = op_norm(dagger(geo.W) @ geo.W - Qm)
    out["WW* = P"] = op_norm(geo.W @ dagger(geo.W) - Pm)
    out["W|phi| = Delta_p^1/2 W"] = op_norm(geo.W @ geo.abs_phi - half @ geo.W)
    out["W|phi|^2W* = Delta_p"] = op_norm(geo.W @ geo.abs_phi @ geo.abs_phi @ dagger(geo.W) - dp)
    kv = geo.V.kernel
    out["V isometry q→q⊥"] = op_norm(kv.T @ kv.conj() - Qm)
    out["V onto q⊥"] = op_norm(kv @ kv.conj().T - Qp)
    out["V two forms agree"] = op_norm(kv - (-1j * g @ geo.sgn_phi.conj()))
    return out


def generic_position_by_norms(P: BasisProjection, q: InvariantSubspace, tol: float = TOL) -> dict:
    """Finite-dimensional restatement: ``p ∩ q = 0 ⟺ ||PQ|| < 1`` and likewise for ``q⊥``."""
    Qm = q.projection()
    return {
        "||PQ||": op_norm(P.matrix @ Qm),
        "||PQ⊥||": op_norm(P.matrix @ (np.eye(P.space.dim) - Qm)),
        "p∩q = 0": subspace_intersect(P.subspace, q.subspace).dim == 0,
        "p∩q⊥ = 0": subspace_intersect(P.subspace, orthocomplement(q.subspace)).dim == 0,
    }


def phi_min_singular_value(geo: PairGeometry) -> float:
    fr = geo.frames
    s = np.linalg.svd(geo.phi.coords(fr.qperp, fr.q), compute_uv=False)
    return float(s[-1])


def same_subspace(a: Subspace, b: Subspace, tol: float = TOL) -> bool:
    return subspace_equal(a, b, tol)
