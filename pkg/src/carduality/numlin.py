"""Dense complex linear algebra used by every other module.

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
Antilinear operators are stored by a kernel matrix ``K`` acting as
``x -> K @ conj(x)`` in the standard basis, and subspaces by an
orthonormal column frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpace, NotHermitian, Singular

#: idempotence / self-adjointness checks
TOL = 1e-9
#: identities derived through several factorisations
DERIVED_TOL = 1e-7
#: relative singular value cutoff for rank decisions
RANK_RTOL = 1e-10


def as_complex(a) -> np.ndarray:
    return np.asarray(a, dtype=complex)


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def op_norm(a: np.ndarray) -> float:
    """Largest singular value (0 for empty matrices)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.ndim == 1:
        return float(np.linalg.norm(a))
    return float(np.linalg.norm(a, 2))


def numerical_rank(s: np.ndarray, rtol: float = RANK_RTOL, scale: float | None = None) -> int:
    if s.size == 0:
        return 0
    ref = s[0] if scale is None else scale
    if ref == 0:
        return 0
    return int(np.sum(s > rtol * ref))


def orth(a: np.ndarray, rtol: float = RANK_RTOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal frame for the column span of ``a``."""
    a = as_complex(a)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    return u[:, : numerical_rank(s, rtol, scale)]


def nullspace(a: np.ndarray, rtol: float = RANK_RTOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal frame for ``ker a``."""
    a = as_complex(a)
    m, n = a.shape
    if m == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    r = numerical_rank(s, rtol, scale)
    return dagger(vh[r:])


def check_hermitian(a: np.ndarray, tol: float = TOL) -> None:
    defect = op_norm(a - dagger(a))
    if defect > tol * max(1.0, op_norm(a)):
        raise NotHermitian(f"||A - A*|| = {defect:.3e} exceeds {tol:.1e}")


def eig_hermitian(a: np.ndarray, tol: float = TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvectors of a self-adjoint matrix.

    Raises
    ------
    NotHermitian
        If ``||A - A*||`` exceeds ``tol`` (relative to ``||A||`` when that is
        larger than one).
    """
    a = as_complex(a)
    check_hermitian(a, tol)
    w, v = np.linalg.eigh((a + dagger(a)) / 2)
    return w, v


def hermitian_function(a: np.ndarray, func, tol: float = TOL) -> np.ndarray:
    w, v = eig_hermitian(a, tol)
    return (v * func(w)) @ dagger(v)


def psd_power(a: np.ndarray, power: float, tol: float = TOL) -> np.ndarray:
    """``A**power`` for positive semidefinite ``A``; eigenvalues clamped at 0.

    Negative powers are taken on the support of ``A`` only (pseudo-inverse
    convention), so a positive operator living on a subspace keeps its
    support.
    """
    w, v = eig_hermitian(a, tol)
    w = np.clip(w, 0.0, None)
    if power < 0:
        cut = RANK_RTOL * (w.max() if w.size else 0.0)
        keep = w > cut
        f = np.zeros_like(w)
        f[keep] = w[keep] ** power
    else:
        f = w**power
    return (v * f) @ dagger(v)


def psd_sqrt(a: np.ndarray, tol: float = TOL) -> np.ndarray:
    return psd_power(a, 0.5, tol)


@dataclass(frozen=True)
class AntilinearMap:
    """Antilinear operator ``x -> kernel @ conj(x)``."""

    kernel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kernel", as_complex(self.kernel))

    @property
    def shape(self):
        return self.kernel.shape

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.kernel @ np.conj(x)

    def adjoint(self) -> "AntilinearMap":
        # <A* y, x> = conj(<y, A x>) forces kernel transpose
        return AntilinearMap(self.kernel.T)

    def compose(self, other):
        """``self ∘ other``; a matrix if ``other`` is antilinear, else antilinear."""
        if isinstance(other, AntilinearMap):
            return self.kernel @ other.kernel.conj()
        return AntilinearMap(self.kernel @ np.conj(as_complex(other)))

    def after(self, linear: np.ndarray) -> "AntilinearMap":
        """``linear ∘ self``."""
        return AntilinearMap(as_complex(linear) @ self.kernel)

    def conjugate_operator(self, a: np.ndarray) -> np.ndarray:
        """The linear operator ``self ∘ a ∘ self``."""
        return self.kernel @ np.conj(a) @ self.kernel.conj()

    def restrict(self, out_frame: np.ndarray, in_frame: np.ndarray) -> np.ndarray:
        """Coordinate kernel between two orthonormal frames."""
        return dagger(out_frame) @ self.kernel @ in_frame.conj()


def polar_antilinear(s: AntilinearMap, rtol: float = RANK_RTOL) -> tuple[AntilinearMap, np.ndarray]:
    """Polar decomposition ``S = J Δ^{1/2}`` of an invertible antilinear map.

    Returns
    -------
    J : AntilinearMap
        ``S ∘ Δ^{-1/2}``.
    Delta : ndarray
        The positive matrix ``S* ∘ S``.
    """
    k = s.kernel
    sv = np.linalg.svd(k, compute_uv=False)
    if k.shape[0] != k.shape[1] or sv[-1] <= rtol * sv[0]:
        raise Singular("antilinear map is not invertible")
    delta = s.adjoint().compose(s)
    delta = (delta + dagger(delta)) / 2
    j = s.compose(psd_power(delta, -0.5))
    return j, delta


@dataclass(frozen=True)
class Subspace:
    """Subspace of ``C^n`` given by an orthonormal column frame."""

    frame: np.ndarray

    def __post_init__(self):
        f = as_complex(self.frame)
        if f.ndim != 2:
            raise InvalidSpace("frame must be two-dimensional")
        defect = op_norm(dagger(f) @ f - np.eye(f.shape[1]))
        if defect > TOL:
            raise InvalidSpace(f"frame columns not orthonormal (defect {defect:.2e})")
        object.__setattr__(self, "frame", f)

    @classmethod
    def span(cls, vectors: np.ndarray, rtol: float = RANK_RTOL) -> "Subspace":
        vectors = as_complex(vectors)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        return cls(orth(vectors, rtol))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def whole(cls, n: int) -> "Subspace":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def from_projection(cls, p: np.ndarray) -> "Subspace":
        w, v = eig_hermitian(p)
        return cls(v[:, w > 0.5][:, ::-1])

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    def projection(self) -> np.ndarray:
        return self.frame @ dagger(self.frame)

    def contains(self, x: np.ndarray, tol: float = TOL) -> bool:
        x = as_complex(x)
        r = x - self.frame @ (dagger(self.frame) @ x)
        return op_norm(r) <= tol * max(1.0, op_norm(x))


def _check_same_ambient(a: Subspace, b: Subspace) -> None:
    if a.ambient_dim != b.ambient_dim:
        raise ValueError(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def subspace_intersect(a: Subspace, b: Subspace, rtol: float = RANK_RTOL) -> Subspace:
    """``a ∩ b`` from the nullspace of ``[frame_a | -frame_b]``."""
    _check_same_ambient(a, b)
    n = a.ambient_dim
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(n)
    null = nullspace(np.hstack([a.frame, -b.frame]), rtol)
    if null.shape[1] == 0:
        return Subspace.zero(n)
    return Subspace.span(a.frame @ null[: a.dim], rtol)


def span_sum(*spaces: Subspace) -> Subspace:
    n = spaces[0].ambient_dim
    for s in spaces:
        _check_same_ambient(spaces[0], s)
    return Subspace.span(np.hstack([s.frame for s in spaces]) if spaces else np.zeros((n, 0)))


def orthocomplement(a: Subspace) -> Subspace:
    n = a.ambient_dim
    if a.dim == 0:
        return Subspace.whole(n)
    u, _, _ = np.linalg.svd(a.frame, full_matrices=True)
    return Subspace(u[:, a.dim :])


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """``||P_a - P_b||``."""
    _check_same_ambient(a, b)
    return op_norm(a.projection() - b.projection())


def subspace_equal(a: Subspace, b: Subspace, tol: float = TOL) -> bool:
    return subspace_distance(a, b) <= tol


def image(linear: np.ndarray, a: Subspace) -> Subspace:
    return Subspace.span(as_complex(linear) @ a.frame)


def lowdin(vectors: np.ndarray) -> np.ndarray:
    """Symmetric orthonormalisation ``X (X* X)^{-1/2}``.

    If the Gram matrix of ``X`` is real, real combinations of the input
    columns come out, which keeps fixed points of a conjugation fixed.
    """
    gram = dagger(vectors) @ vectors
    return vectors @ psd_power(gram, -0.5)
