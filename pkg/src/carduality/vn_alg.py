"""Finite-dimensional *-algebras of Fock operators.

An algebra is stored as an orthonormal set of vectorised matrices
(row-major ``vec``), so that ``A_k = sqrt(N) * unvec(basis[:, k])`` are
orthonormal for the normalised Hilbert-Schmidt product ``Tr(A*B)/N``.
Spans are compared through their orthogonal projections.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .numlin import RANK_RTOL, as_complex, dagger, nullspace, op_norm, orth

MAX_ROUNDS = 64


@dataclass(frozen=True)
class OperatorAlgebra:
    """Unital *-algebra on ``C^N`` given by an HS-orthonormal basis."""

    vec_basis: np.ndarray
    generators: tuple
    size: int

    @property
    def dim(self) -> int:
        return self.vec_basis.shape[1]

    @property
    def basis(self) -> list[np.ndarray]:
        s = np.sqrt(self.size)
        return [s * self.vec_basis[:, k].reshape(self.size, self.size) for k in range(self.dim)]

    @property
    def contains_identity(self) -> bool:
        return self.contains(np.eye(self.size))

    def residual(self, x: np.ndarray, scale: float | None = None) -> float:
        """Distance of ``x`` from the span, relative to ``scale`` (default ``||x||_HS``)."""
        v = as_complex(x).reshape(-1)
        nv = np.linalg.norm(v) if scale is None else scale
        if nv == 0:
            return 0.0
        return float(np.linalg.norm(v - self.vec_basis @ (dagger(self.vec_basis) @ v)) / nv)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return self.residual(x) <= tol

    def closure_defects(self) -> dict[str, float]:
        """Adjoint, product and unit closure residuals of the span."""
        basis = self.basis
        adj = max((self.residual(dagger(b)) for b in basis), default=0.0)
        # products may vanish, so measure against the size of the factors
        prod = max(
            (self.residual(a @ b, np.linalg.norm(a) * op_norm(b)) for a in basis for b in basis),
            default=0.0,
        )
        return {"adjoint": adj, "product": prod, "identity": self.residual(np.eye(self.size))}

    def transformed(self, u: np.ndarray) -> "OperatorAlgebra":
        """``u A u*`` for a unitary ``u``."""
        ud = dagger(u)
        mats = [u @ b @ ud for b in self.basis]
        gens = tuple(u @ g @ ud for g in self.generators)
        return OperatorAlgebra(_vec_stack(mats, self.size), gens, self.size)


def _vec_stack(mats, n: int) -> np.ndarray:
    if not mats:
        return np.zeros((n * n, 0), dtype=complex)
    return np.column_stack([as_complex(m).reshape(-1) for m in mats]) / np.sqrt(n)


def _extend(basis: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Orthonormal directions of ``candidates`` outside the span of ``basis``."""
    if candidates.shape[1] == 0:
        return candidates
    scale = float(np.max(np.linalg.norm(candidates, axis=0)))
    if scale == 0:
        return candidates[:, :0]
    res = candidates - basis @ (dagger(basis) @ candidates)
    # second pass guards against loss of orthogonality
    res = res - basis @ (dagger(basis) @ res)
    return orth(res, rtol=1e-9, scale=scale)


def algebra_span(generators, size: int | None = None) -> OperatorAlgebra:
    """Smallest unital *-algebra containing ``generators``.

    Closure works by left multiplication with the generators and their
    adjoints until no new direction appears.
    """
    gens = [as_complex(g) for g in generators]
    if size is None:
        if not gens:
            raise ValueError("size is required when there are no generators")
        size = gens[0].shape[0]
    letters = gens + [dagger(g) for g in gens]
    basis = _vec_stack([np.eye(size)], size)
    frontier = basis
    for _ in range(MAX_ROUNDS):
        if frontier.shape[1] == 0 or not letters:
            return OperatorAlgebra(basis, tuple(gens), size)
        cands = [
            (g @ frontier[:, k].reshape(size, size)).reshape(-1) for g in letters for k in range(frontier.shape[1])
        ]
        frontier = _extend(basis, np.column_stack(cands))
        basis = np.hstack([basis, frontier])
    raise RuntimeError("span closure did not stabilise")


def _commutator_map(g: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> GX - XG`` on row-major ``vec X``."""
    n = g.shape[0]
    ident = np.eye(n)
    return np.kron(g, ident) - np.kron(ident, g.T)


def commutant_of(operators, size: int) -> OperatorAlgebra:
    """``{X : XG = GX}`` for all given ``G`` and their adjoints."""
    ops = [as_complex(g) for g in operators]
    ops = ops + [dagger(g) for g in ops]
    null = np.eye(size * size, dtype=complex)
    for g in ops:
        if null.shape[1] == 0:
            break
        c = _commutator_map(g) @ null
        scale = max(1.0, op_norm(g))
        null = null @ nullspace(c, rtol=RANK_RTOL, scale=scale)
        # re-orthonormalise to keep the accumulated frame clean
        null = orth(null)
    mats = [np.sqrt(size) * null[:, k].reshape(size, size) for k in range(null.shape[1])]
    return OperatorAlgebra(null, tuple(mats), size)


def commutant(a: OperatorAlgebra) -> OperatorAlgebra:
    ops = a.generators if a.generators else tuple(a.basis)
    return commutant_of(ops, a.size)


def double_commutant(a: OperatorAlgebra) -> OperatorAlgebra:
    return commutant(commutant(a))


def inclusion_defect(a: OperatorAlgebra, b: OperatorAlgebra) -> float:
    """``||(1 - Π_b) Π_a||``: zero iff ``span a ⊆ span b``."""
    if a.dim == 0:
        return 0.0
    res = a.vec_basis - b.vec_basis @ (dagger(b.vec_basis) @ a.vec_basis)
    return op_norm(res)


def span_distance(a: OperatorAlgebra, b: OperatorAlgebra) -> float:
    """Operator-norm distance of the HS projections onto the two spans."""
    return max(inclusion_defect(a, b), inclusion_defect(b, a))


def _frame_of(q) -> np.ndarray:
    return q.frame if hasattr(q, "frame") else as_complex(q)


def local_algebra(q, rep) -> OperatorAlgebra:
    """``M(q)`` generated by ``π(a(v))`` over an ONB ``v`` of ``q``."""
    frame = _frame_of(q)
    gens = [rep.pi_a(frame[:, k]) for k in range(frame.shape[1])]
    return algebra_span(gens, rep.dim)


def twisted_algebra(a: OperatorAlgebra, ztilde: np.ndarray) -> OperatorAlgebra:
    """``Z̃ A Z̃*``."""
    return a.transformed(ztilde)


def twisted_by_grading(a: OperatorAlgebra, Z: np.ndarray) -> OperatorAlgebra:
    """The twisted algebra generated by ``Y_even + iZ Y_odd`` for ``Y`` in ``A``."""
    mats = []
    for y in a.basis:
        zyz = Z @ y @ Z
        even, odd = (y + zyz) / 2, (y - zyz) / 2
        mats.append(even + 1j * Z @ odd)
    return algebra_span(mats, a.size)


@dataclass(frozen=True)
class DualityReport:
    instance_id: str
    fock_dim: int
    dim_M: int
    dim_M_commutant: int
    dim_twisted: int
    inclusion_defect: float
    equality_defect: float
    verdict: str

    def to_dict(self) -> dict:
        return asdict(self)


def twist_operator(rep) -> np.ndarray:
    Z = rep.Z
    return (np.eye(Z.shape[0]) + 1j * Z) / (1 + 1j)


def check_twisted_causality(q, qperp, rep, tol: float = 1e-7) -> tuple[bool, float]:
    """``Z̃ M(q⊥) Z̃* ⊆ M(q)′``; returns the verdict and the inclusion defect."""
    m = local_algebra(q, rep)
    tw = twisted_algebra(local_algebra(qperp, rep), twist_operator(rep))
    d = inclusion_defect(tw, commutant(m))
    return d <= tol, d


def check_twisted_duality(q, qperp, rep, tol: float = 1e-7, instance_id: str = "instance") -> DualityReport:
    """``M(q)′ = Z̃ M(q⊥) Z̃*`` as spans, in both directions and by dimension."""
    m = local_algebra(q, rep)
    mc = commutant(m)
    tw = twisted_algebra(local_algebra(qperp, rep), twist_operator(rep))
    inc = inclusion_defect(tw, mc)
    eq = max(inc, inclusion_defect(mc, tw))
    ok = eq <= tol and mc.dim == tw.dim
    return DualityReport(instance_id, rep.dim, m.dim, mc.dim, tw.dim, inc, eq, "pass" if ok else "fail")
