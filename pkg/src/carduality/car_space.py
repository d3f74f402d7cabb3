"""Reference space (h, Γ), basis projections and Γ-invariant subspaces.

Also holds the seeded instance generators and the JSON instance format
``{dim, gamma_kernel, P, q_frame}`` with complex entries as ``[re, im]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, expm

from .errors import InvalidSpace, RankDeficient
from .numlin import (
    TOL,
    AntilinearMap,
    Subspace,
    as_complex,
    dagger,
    lowdin,
    op_norm,
    orthocomplement,
    subspace_intersect,
)


@dataclass(frozen=True)
class CarSpace:
    """Even-dimensional ``C^dim`` with an antiunitary involution ``Γ``."""

    dim: int
    gamma: AntilinearMap

    def __post_init__(self):
        g = self.gamma.kernel
        if g.shape != (self.dim, self.dim):
            raise InvalidSpace(f"gamma kernel has shape {g.shape}, expected {(self.dim, self.dim)}")
        if self.dim % 2:
            raise InvalidSpace("dimension must be even to admit a basis projection")
        if op_norm(dagger(g) @ g - np.eye(self.dim)) > TOL:
            raise InvalidSpace("gamma kernel is not unitary")
        if op_norm(g - g.T) > TOL:
            raise InvalidSpace("gamma kernel is not symmetric, so Γ² ≠ 1")

    @property
    def G(self) -> np.ndarray:
        return self.gamma.kernel

    def conj_op(self, a: np.ndarray) -> np.ndarray:
        """``Γ A Γ`` as a matrix."""
        return self.G @ np.conj(a) @ dagger(self.G)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.gamma(x)

    def gamma_image(self, s: Subspace) -> Subspace:
        return Subspace.span(self.G @ s.frame.conj())

    def real_form_basis(self) -> np.ndarray:
        """Orthonormal basis of ``{x : Γx = x}`` (a complex ONB of ``h``)."""
        n = self.dim
        # (e_k + Γe_k)/2 and (i e_k + Γ(i e_k))/2 span the real form over R
        eye = np.eye(n, dtype=complex)
        cand = np.hstack([(eye + self.G) / 2, (1j * eye - 1j * self.G) / 2])
        # real Gram matrix: pick columns greedily, then symmetric orthonormalisation
        chosen: list[int] = []
        for k in range(cand.shape[1]):
            trial = cand[:, chosen + [k]]
            if np.linalg.matrix_rank(trial, tol=1e-8) == len(chosen) + 1:
                chosen.append(k)
            if len(chosen) == n:
                break
        return lowdin(cand[:, chosen])


def standard_space(m: int) -> CarSpace:
    """``C^{2m}`` with ``Γ(x, y) = (conj y, conj x)``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    z = np.zeros((m, m))
    g = np.block([[z, np.eye(m)], [np.eye(m), z]])
    return CarSpace(2 * m, AntilinearMap(g))


def direct_sum_space(*spaces: CarSpace) -> CarSpace:
    return CarSpace(sum(s.dim for s in spaces), AntilinearMap(block_diag(*[s.G for s in spaces])))


@dataclass(frozen=True)
class BasisProjection:
    """Orthoprojection ``P`` with ``P + ΓPΓ = 1``."""

    matrix: np.ndarray
    space: CarSpace
    frame: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = as_complex(self.matrix)
        object.__setattr__(self, "matrix", p)
        if op_norm(p - dagger(p)) > TOL or op_norm(p @ p - p) > TOL:
            raise InvalidSpace("P is not an orthoprojection")
        if op_norm(p + self.space.conj_op(p) - np.eye(self.space.dim)) > TOL:
            raise InvalidSpace("P + ΓPΓ ≠ 1")
        object.__setattr__(self, "frame", Subspace.from_projection(p).frame)

    @property
    def subspace(self) -> Subspace:
        return Subspace(self.frame)

    @property
    def complement(self) -> np.ndarray:
        return np.eye(self.space.dim) - self.matrix


@dataclass(frozen=True)
class InvariantSubspace:
    """Subspace ``q`` with ``ΓQΓ = Q``."""

    subspace: Subspace
    space: CarSpace

    def __post_init__(self):
        q = self.subspace.projection()
        if op_norm(self.space.conj_op(q) - q) > TOL:
            raise InvalidSpace("subspace is not Γ-invariant")

    @property
    def frame(self) -> np.ndarray:
        return self.subspace.frame

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def projection(self) -> np.ndarray:
        return self.subspace.projection()

    def perp(self) -> "InvariantSubspace":
        return InvariantSubspace(orthocomplement(self.subspace), self.space)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def reference_projection(space: CarSpace) -> BasisProjection:
    """A basis projection built from the real form of ``space``.

    For the standard space this is ``diag(I, 0)``.
    """
    n = space.dim
    std = np.block([[np.zeros((n // 2, n // 2)), np.eye(n // 2)], [np.eye(n // 2), np.zeros((n // 2, n // 2))]])
    if op_norm(space.G - std) <= TOL:
        p0 = np.zeros((n, n), dtype=complex)
        p0[: n // 2, : n // 2] = np.eye(n // 2)
        return BasisProjection(p0, space)
    r = space.real_form_basis()
    f = (r[:, 0::2] + 1j * r[:, 1::2]) / np.sqrt(2)
    return BasisProjection(f @ dagger(f), space)


def gamma_commuting_unitary(space: CarSpace, seed, scale: float = 1.0) -> np.ndarray:
    """``exp(iH)`` with ``H = H*`` and ``ΓHΓ = -H``, so it commutes with ``Γ``."""
    rng = _rng(seed)
    n = space.dim
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (h - space.conj_op(h)) / 2
    h = (h + dagger(h)) / 2
    return expm(1j * scale * h)


def random_basis_projection(space: CarSpace, seed) -> BasisProjection:
    p0 = reference_projection(space).matrix
    u = gamma_commuting_unitary(space, seed)
    return BasisProjection(u @ p0 @ dagger(u), space)


def random_invariant_subspace(space: CarSpace, real_dim: int, seed, attempts: int = 16) -> InvariantSubspace:
    """Complex span of ``real_dim`` random vectors of the real form ``Fix(Γ)``."""
    if not 0 <= real_dim <= space.dim:
        raise ValueError(f"real_dim must lie in [0, {space.dim}]")
    rng = _rng(seed)
    r = space.real_form_basis()
    for _ in range(attempts):
        coeff = rng.normal(size=(space.dim, real_dim))
        x = r @ coeff
        gram_sv = np.linalg.svd(dagger(x) @ x, compute_uv=False) if real_dim else np.ones(1)
        if real_dim == 0 or gram_sv[-1] > 1e-8 * gram_sv[0]:
            return InvariantSubspace(Subspace(lowdin(x)), space)
    raise RankDeficient(f"could not draw {real_dim} independent real vectors")


def is_generic_position(p: BasisProjection, q: InvariantSubspace) -> bool:
    """Whether the four intersections of p, p⊥ with q, q⊥ vanish.

    Only ``p ∩ q`` and ``p ∩ q⊥`` are computed; Γ maps them onto the other two.
    """
    pq = subspace_intersect(p.subspace, q.subspace)
    pqp = subspace_intersect(p.subspace, orthocomplement(q.subspace))
    return pq.dim == 0 and pqp.dim == 0


@dataclass(frozen=True)
class Instance:
    """A triple ``(h, Γ), P, q`` with a label."""

    space: CarSpace
    P: BasisProjection
    q: InvariantSubspace
    name: str = "instance"

    @property
    def dim(self) -> int:
        return self.space.dim

    def to_dict(self) -> dict:
        return {
            "dim": self.space.dim,
            "gamma_kernel": encode_matrix(self.space.G),
            "P": encode_matrix(self.P.matrix),
            "q_frame": encode_matrix(self.q.frame),
        }

    @classmethod
    def from_dict(cls, data: dict, name: str = "instance") -> "Instance":
        dim = int(data["dim"])
        space = CarSpace(dim, AntilinearMap(decode_matrix(data["gamma_kernel"])))
        p = BasisProjection(decode_matrix(data["P"]), space)
        frame = decode_matrix(data["q_frame"]) if data["q_frame"] else np.zeros((dim, 0))
        q = InvariantSubspace(Subspace(frame.reshape(dim, -1)), space)
        return cls(space, p, q, data.get("name", name))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))

    def rotated(self, u: np.ndarray, name: str | None = None) -> "Instance":
        """Image under a unitary commuting with Γ."""
        p = BasisProjection(u @ self.P.matrix @ dagger(u), self.space)
        q = InvariantSubspace(Subspace(u @ self.q.frame), self.space)
        return Instance(self.space, p, q, name or self.name)


def encode_matrix(a: np.ndarray) -> list:
    a = as_complex(a)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 0), dtype=complex)
    return arr[..., 0] + 1j * arr[..., 1]


def random_instance(dim: int, seed, real_dim: int | None = None, name: str | None = None) -> Instance:
    """Seeded random basis projection and Γ-invariant subspace on ``C^dim``."""
    space = standard_space(dim // 2)
    ss = _seed_sequence(seed)
    s_p, s_q = ss.spawn(2)
    p = random_basis_projection(space, s_p)
    q = random_invariant_subspace(space, dim // 2 if real_dim is None else real_dim, s_q)
    return Instance(space, p, q, name or f"random-{dim}-{seed}")


def direct_sum(*instances: Instance, name: str = "direct-sum") -> Instance:
    space = direct_sum_space(*(i.space for i in instances))
    p = BasisProjection(block_diag(*[i.P.matrix for i in instances]), space)
    q = InvariantSubspace(Subspace(block_diag(*[i.q.frame for i in instances])), space)
    return Instance(space, p, q, name)


def e1(theta: float = np.pi / 3) -> Instance:
    """``C^2``, ``P = e1 e1*``, ``q = span{(1, e^{iθ})/√2}``."""
    space = standard_space(1)
    p = BasisProjection(np.diag([1.0, 0.0]), space)
    v = np.array([[1.0], [np.exp(1j * theta)]]) / np.sqrt(2)
    return Instance(space, p, InvariantSubspace(Subspace(v), space), "E1")


def e2(seed: int = 2) -> Instance:
    return random_instance(4, seed, name="E2")


def commuting_block(kind: str) -> Instance:
    """``C^2`` block with ``P = e1 e1*`` and ``q`` either all of it or zero.

    ``kind="contains"`` gives an ``h02``-type block, ``kind="avoids"`` an
    ``h01``-type block.
    """
    space = standard_space(1)
    p = BasisProjection(np.diag([1.0, 0.0]), space)
    q = Subspace.whole(2) if kind == "contains" else Subspace.zero(2)
    return Instance(space, p, InvariantSubspace(q, space), f"block-{kind}")


def e3() -> Instance:
    """E1 ⊕ (block with q ⊇ it) ⊕ (block with q ⊥ it), on ``C^6``."""
    return direct_sum(e1(), commuting_block("contains"), commuting_block("avoids"), name="E3")


def random_mixed_instance(seed, generic_dim: int, blocks: list[str], name: str | None = None) -> Instance:
    """Generic piece of size ``generic_dim`` plus commuting blocks, then hidden by a Γ-commuting unitary."""
    ss = _seed_sequence(seed)
    s_gen, s_rot = ss.spawn(2)
    parts = []
    if generic_dim:
        parts.append(random_instance(generic_dim, s_gen))
    parts.extend(commuting_block(k) for k in blocks)
    inst = direct_sum(*parts)
    u = gamma_commuting_unitary(inst.space, s_rot)
    return inst.rotated(u, name or f"mixed-{seed}")


BUILTIN = {"E1": e1, "E2": e2, "E3": e3}
