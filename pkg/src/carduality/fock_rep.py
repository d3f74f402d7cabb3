"""Antisymmetric Fock space over ``p = P h`` and the Fock representation.

Basis vectors ``e_S`` are indexed by bitmasks ``S`` in increasing integer
order; bit ``i`` stands for the ``i``-th column ``p_{i+1}`` of the
one-particle frame and ``e_S`` is the ascending wedge of its members.
Operators are dense ``2^d x 2^d`` complex matrices.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .car_space import BasisProjection
from .errors import FockDimensionError
from .numlin import TOL, Subspace, as_complex, dagger, op_norm

#: one-particle dimension cap, so the Fock dimension is at most 2**12
MAX_ONE_PARTICLE_DIM = 12


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class FockSpace:
    """Fock space over the span of an orthonormal frame of ``p``.

    Parameters
    ----------
    one_particle : Subspace
        ``p`` with its ordered ONB ``p_1..p_d`` (the frame columns).
    gamma : ndarray
        Kernel ``G`` of the conjugation on ``h`` (``Γx = G conj(x)``).
    """

    one_particle: Subspace
    gamma: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        d = self.one_particle.dim
        if d > MAX_ONE_PARTICLE_DIM:
            raise FockDimensionError(f"Fock dimension 2^{d} exceeds the cap 2^{MAX_ONE_PARTICLE_DIM}")
        object.__setattr__(self, "gamma", as_complex(self.gamma))

    @classmethod
    def over(cls, P: BasisProjection) -> "FockSpace":
        return cls(P.subspace, P.space.G)

    @classmethod
    def trivial(cls) -> "FockSpace":
        """Fock space ``C Ω`` over the zero space."""
        return cls(Subspace(np.zeros((0, 0), dtype=complex)), np.zeros((0, 0), dtype=complex))

    @property
    def d(self) -> int:
        return self.one_particle.dim

    @property
    def dim(self) -> int:
        return 1 << self.d

    @property
    def frame(self) -> np.ndarray:
        return self.one_particle.frame

    @property
    def h_dim(self) -> int:
        return self.one_particle.ambient_dim

    @property
    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def particle_numbers(self) -> np.ndarray:
        return np.array([_popcount(s) for s in range(self.dim)])

    def particle_projection(self, n: int) -> np.ndarray:
        return np.diag((self.particle_numbers() == n).astype(complex))

    def creators(self) -> np.ndarray:
        """Stack of ``c(p_i)*`` for the ONB, built once per space."""
        if "creators" not in self._cache:
            d, dim = self.d, self.dim
            out = np.zeros((d, dim, dim), dtype=complex)
            for i in range(d):
                bit, below = 1 << i, (1 << i) - 1
                for s in range(dim):
                    if not s & bit:
                        out[i, s | bit, s] = -1.0 if _popcount(s & below) % 2 else 1.0
            out.setflags(write=False)
            self._cache["creators"] = out
        return self._cache["creators"]

    def coordinates(self, p: np.ndarray, warn: bool = True) -> np.ndarray:
        """Coordinates of ``p`` in the ONB of ``p``; warns if ``p`` is not inside."""
        p = as_complex(p)
        c = dagger(self.frame) @ p
        if warn:
            off = op_norm(p - self.frame @ c)
            if off > TOL * max(1.0, op_norm(p)):
                warnings.warn(f"vector leaves the one-particle space by {off:.2e}; projected", RuntimeWarning, stacklevel=3)
        return c

    def creation(self, p: np.ndarray, warn: bool = True) -> np.ndarray:
        """``c(p)*``, linear in ``p``."""
        return np.tensordot(self.coordinates(p, warn), self.creators(), axes=1)

    def annihilation(self, p: np.ndarray, warn: bool = True) -> np.ndarray:
        """``c(p)``, antilinear in ``p``."""
        return dagger(self.creation(p, warn))

    def pi_a(self, f: np.ndarray) -> np.ndarray:
        """``π(a(f)) = c(PΓf)* + c(Pf)``."""
        f = as_complex(f)
        cre = self.creators()
        x = dagger(self.frame) @ (self.gamma @ f.conj())
        y = dagger(self.frame) @ f
        if self.d == 0:
            return np.zeros((1, 1), dtype=complex)
        m = np.tensordot(x, cre, axes=1)
        return m + dagger(np.tensordot(y, cre, axes=1))

    def pi_a_adjoint(self, f: np.ndarray) -> np.ndarray:
        return dagger(self.pi_a(f))

    @cached_property
    def Z(self) -> np.ndarray:
        return np.diag(np.where(self.particle_numbers() % 2, -1.0, 1.0).astype(complex))

    def one_particle_vector(self, p: np.ndarray, warn: bool = True) -> np.ndarray:
        """``p`` as a vector of the one-particle sector of the Fock space."""
        v = np.zeros(self.dim, dtype=complex)
        c = self.coordinates(p, warn)
        for i in range(self.d):
            v[1 << i] = c[i]
        return v

    def wedge(self, vectors) -> np.ndarray:
        """``v_1 ∧ ... ∧ v_k`` via minors of the coordinate matrix; ``Ω`` when empty."""
        vectors = list(vectors)
        if not vectors:
            return self.vacuum
        c = np.column_stack([self.coordinates(v) for v in vectors])
        k = c.shape[1]
        out = np.zeros(self.dim, dtype=complex)
        for rows in itertools.combinations(range(self.d), k):
            out[sum(1 << r for r in rows)] = np.linalg.det(c[list(rows), :])
        return out

    def restrict_to_particles(self, a: np.ndarray, n: int, m: int | None = None) -> np.ndarray:
        """Block of ``a`` from the ``n``-particle sector into the ``m``-particle sector."""
        m = n if m is None else m
        nums = self.particle_numbers()
        return a[np.ix_(nums == m, nums == n)]


def parity_ops(F) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``Z``, ``E+``, ``E-`` and the twist ``Z̃ = (1 + iZ)/(1 + i) = E+ - iE-``."""
    Z = F.Z
    n = Z.shape[0]
    e_plus = (np.eye(n) + Z) / 2
    e_minus = (np.eye(n) - Z) / 2
    zt = (np.eye(n) + 1j * Z) / (1 + 1j)
    return Z, e_plus, e_minus, zt


def parity_blocks(x: np.ndarray, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray, dict[str, float]]:
    """Even and odd parts of ``x`` and the four block vanishings of the grading."""
    zxz = Z @ x @ Z
    even, odd = (x + zxz) / 2, (x - zxz) / 2
    n = Z.shape[0]
    ep, em = (np.eye(n) + Z) / 2, (np.eye(n) - Z) / 2
    defects = {
        "E+ even E-": op_norm(ep @ even @ em),
        "E- even E+": op_norm(em @ even @ ep),
        "E+ odd E+": op_norm(ep @ odd @ ep),
        "E- odd E-": op_norm(em @ odd @ em),
    }
    return even, odd, defects


@dataclass(frozen=True)
class PairingTerm:
    """One element of the signed pairing set in a vacuum expansion.

    ``pairs`` are ``(α_l, β_l)`` with ``α_l > β_l`` and ``α`` decreasing;
    ``survivors`` are strictly decreasing; indices are 1-based.
    """

    pairs: tuple[tuple[int, int], ...]
    survivors: tuple[int, ...]
    sign: int

    @property
    def bottom_row(self) -> tuple[int, ...]:
        return tuple(i for pr in self.pairs for i in pr) + self.survivors


def pairing_count(n: int, p: int) -> int:
    return math.comb(n, n - 2 * p) * math.factorial(2 * p) // (math.factorial(p) * 2**p)


def _perfect_matchings(items: tuple[int, ...]):
    """Matchings of a decreasing tuple as pairs ``(α, β)`` with ``α`` decreasing."""
    if not items:
        yield ()
        return
    a, rest = items[0], items[1:]
    for k, b in enumerate(rest):
        for tail in _perfect_matchings(rest[:k] + rest[k + 1 :]):
            yield ((a, b),) + tail


def permutation_sign(top: tuple[int, ...], bottom: tuple[int, ...]) -> int:
    """Sign of the permutation sending ``top[t]`` to ``bottom[t]``."""
    sigma = dict(zip(top, bottom))
    seq = [sigma[i] for i in sorted(sigma)]
    inversions = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return -1 if inversions % 2 else 1


def enumerate_pairings(n: int, p: int) -> list[PairingTerm]:
    if p < 0 or 2 * p > n:
        raise ValueError(f"need 0 <= 2p <= n, got n={n}, p={p}")
    top = tuple(range(n, 0, -1))
    out = []
    for paired in itertools.combinations(top, 2 * p):
        survivors = tuple(i for i in top if i not in paired)
        # the largest remaining index is always α of the next pair, so α decreases
        for pairs in _perfect_matchings(paired):
            bottom = tuple(i for pr in pairs for i in pr) + survivors
            out.append(PairingTerm(pairs, survivors, permutation_sign(top, bottom)))
    return out


def vacuum_expansion(f_list, F: FockSpace) -> np.ndarray:
    """Signed pairing expansion of ``a(f_n)...a(f_1)Ω``."""
    f_list = [as_complex(f) for f in f_list]
    n = len(f_list)
    frame, g = F.frame, F.gamma
    proj = frame @ dagger(frame)
    pf = [proj @ f for f in f_list]
    pgf = [proj @ (g @ f.conj()) for f in f_list]
    out = np.zeros(F.dim, dtype=complex)
    for p in range(n // 2 + 1):
        for term in enumerate_pairings(n, p):
            coef = complex(term.sign)
            for a, b in term.pairs:
                coef *= np.vdot(pf[a - 1], pgf[b - 1])
            if coef == 0:
                continue
            out += coef * F.wedge([pgf[j - 1] for j in term.survivors])
    return out


def product_on_vacuum(f_list, rep) -> np.ndarray:
    """Operator-product oracle ``π(a(f_n))···π(a(f_1))Ω``."""
    v = rep.vacuum
    for f in f_list:
        v = rep.pi_a(f) @ v
    return v


@dataclass(frozen=True)
class TensorRepresentation:
    """Fock representation of ``h0 ⊕ h1`` on ``F0 ⊗ F1``.

    Variant ``"A"``: ``π0(a(f0)) ⊗ 1 + Z0 ⊗ π1(a(f1))``.
    Variant ``"B"``: ``π0(a(f0)) ⊗ Z1 + 1 ⊗ π1(a(f1))``.
    Factors are :class:`FockSpace` objects or nested tensor representations;
    ``f`` is split by its first ``h_dim`` coordinates.
    """

    first: object
    second: object
    variant: str = "A"

    def __post_init__(self):
        if self.variant not in ("A", "B"):
            raise ValueError(f"unknown variant {self.variant!r}")
        total = _one_particle_dim(self.first) + _one_particle_dim(self.second)
        if total > MAX_ONE_PARTICLE_DIM:
            raise FockDimensionError(f"Fock dimension 2^{total} exceeds the cap 2^{MAX_ONE_PARTICLE_DIM}")

    @property
    def h_dim(self) -> int:
        return self.first.h_dim + self.second.h_dim

    @property
    def dim(self) -> int:
        return self.first.dim * self.second.dim

    @property
    def vacuum(self) -> np.ndarray:
        return np.kron(self.first.vacuum, self.second.vacuum)

    @property
    def Z(self) -> np.ndarray:
        return np.kron(self.first.Z, self.second.Z)

    @property
    def gamma(self) -> np.ndarray:
        n0, n1 = self.first.h_dim, self.second.h_dim
        g = np.zeros((n0 + n1, n0 + n1), dtype=complex)
        g[:n0, :n0] = self.first.gamma
        g[n0:, n0:] = self.second.gamma
        return g

    def pi_a(self, f: np.ndarray) -> np.ndarray:
        f = as_complex(f)
        n0 = self.first.h_dim
        a0, a1 = self.first.pi_a(f[:n0]), self.second.pi_a(f[n0:])
        i0, i1 = np.eye(self.first.dim), np.eye(self.second.dim)
        if self.variant == "A":
            return np.kron(a0, i1) + np.kron(self.first.Z, a1)
        return np.kron(a0, self.second.Z) + np.kron(i0, a1)

    def pi_a_adjoint(self, f: np.ndarray) -> np.ndarray:
        return dagger(self.pi_a(f))


def _one_particle_dim(rep) -> int:
    if isinstance(rep, FockSpace):
        return rep.d
    return _one_particle_dim(rep.first) + _one_particle_dim(rep.second)


def tensor_representation(first, second, variant: str = "A") -> TensorRepresentation:
    return TensorRepresentation(first, second, variant)


def car_defects(rep, f: np.ndarray, h: np.ndarray) -> dict[str, float]:
    """Residuals of the CAR relations for one pair ``f, h``."""
    af, ah = rep.pi_a(f), rep.pi_a(h)
    ident = np.eye(rep.dim)
    g = rep.gamma
    return {
        "{a(f), a(h)*} - <f,h>": op_norm(af @ dagger(ah) + dagger(ah) @ af - np.vdot(f, h) * ident),
        "{a(f), a(h)}": op_norm(af @ ah + ah @ af - np.vdot(f, g @ np.conj(h)) * ident),
        "a(f)* = a(Γf)": op_norm(dagger(af) - rep.pi_a(g @ np.conj(f))),
    }


def fock_state_defect(rep, P: np.ndarray, f: np.ndarray) -> float:
    """``|<Ω, a(f)*a(f)Ω> - ||(1-P)f||^2|``."""
    af = rep.pi_a(f)
    om = rep.vacuum
    val = np.vdot(af @ om, af @ om).real
    target = np.linalg.norm(f - P @ f) ** 2
    return abs(val - target)
