"""Linear quadrature algebra over a set of bosonic modes.

Quadratures follow the shot-noise convention ``[x, p] = 2i``, so the vacuum
variance of every quadrature is 1.  Matrices over modes use the interleaved
ordering ``(x_1, p_1, ..., x_n, p_n)``.

A :class:`QuadratureExpression` is a real linear combination of mode
quadratures.  Commutators of two expressions are c-numbers; :func:`commutator`
returns the real ``c`` with ``[u, v] = 2ic``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

AXES = ("x", "p")

#: tolerance on S Omega S^T = Omega
SYMPLECTIC_TOL = 1e-12
#: tolerance on V + i Omega >= 0
HEISENBERG_TOL = 1e-9


class ModeRole(enum.Enum):
    INPUT = "input"
    AUXILIARY_VACUUM = "auxiliary-vacuum"
    AUXILIARY_ENTANGLED = "auxiliary-entangled"


@dataclass(frozen=True)
class Mode:
    name: str
    role: ModeRole = ModeRole.AUXILIARY_VACUUM

    def __str__(self) -> str:
        return self.name


ModeLike = Union[Mode, str]


def _name(mode: ModeLike) -> str:
    return mode.name if isinstance(mode, Mode) else str(mode)


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal ``J + J + ...`` with ``J = [[0, 1], [-1, 0]]``."""
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), J)


@dataclass(frozen=True)
class QuadratureExpression:
    """Real linear combination of quadratures, keyed by ``(mode, axis)``.

    Zero coefficients are dropped on construction so two expressions compare
    equal iff they have the same nonzero terms.
    """

    coefficients: Mapping[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (mode, axis), c in dict(self.coefficients).items():
            if axis not in AXES:
                raise ValueError(f"unknown axis {axis!r}")
            c = float(c)
            if not math.isfinite(c):
                raise ValueError("coefficients must be finite")
            if c != 0.0:
                clean[(_name(mode), axis)] = c
        object.__setattr__(self, "coefficients", MappingProxyType(clean))

    @classmethod
    def x(cls, mode: ModeLike) -> "QuadratureExpression":
        return cls({(_name(mode), "x"): 1.0})

    @classmethod
    def p(cls, mode: ModeLike) -> "QuadratureExpression":
        return cls({(_name(mode), "p"): 1.0})

    @classmethod
    def zero(cls) -> "QuadratureExpression":
        return cls({})

    def coeff(self, mode: ModeLike, axis: str) -> float:
        return self.coefficients.get((_name(mode), axis), 0.0)

    @property
    def modes(self) -> frozenset[str]:
        return frozenset(m for m, _ in self.coefficients)

    def vector(self, modes: Sequence[ModeLike]) -> np.ndarray:
        """Coefficient vector in the interleaved ordering of ``modes``.

        Raises ``ValueError`` if the expression has support outside ``modes``.
        """
        names = [_name(m) for m in modes]
        missing = self.modes - set(names)
        if missing:
            raise ValueError(f"modes {sorted(missing)} not in ordering")
        out = np.zeros(2 * len(names))
        for i, m in enumerate(names):
            out[2 * i] = self.coeff(m, "x")
            out[2 * i + 1] = self.coeff(m, "p")
        return out

    @classmethod
    def from_vector(cls, vec, modes: Sequence[ModeLike]) -> "QuadratureExpression":
        vec = np.asarray(vec, dtype=float)
        names = [_name(m) for m in modes]
        if vec.shape != (2 * len(names),):
            raise ValueError("vector length does not match modes")
        coeffs = {}
        for i, m in enumerate(names):
            coeffs[(m, "x")] = vec[2 * i]
            coeffs[(m, "p")] = vec[2 * i + 1]
        return cls(coeffs)

    def relabel(self, mapping: Mapping[str, str]) -> "QuadratureExpression":
        return QuadratureExpression(
            {(mapping.get(m, m), a): c for (m, a), c in self.coefficients.items()}
        )

    def __add__(self, other):
        if not isinstance(other, QuadratureExpression):
            return NotImplemented
        out = dict(self.coefficients)
        for k, c in other.coefficients.items():
            out[k] = out.get(k, 0.0) + c
        return QuadratureExpression(out)

    def __neg__(self):
        return QuadratureExpression({k: -c for k, c in self.coefficients.items()})

    def __sub__(self, other):
        if not isinstance(other, QuadratureExpression):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, QuadratureExpression):
            return NotImplemented
        s = float(scalar)
        return QuadratureExpression({k: s * c for k, c in self.coefficients.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __repr__(self) -> str:
        if not self.coefficients:
            return "0"
        terms = [f"{c:+.6g}*{a}_{m}" for (m, a), c in sorted(self.coefficients.items())]
        return " ".join(terms)


def x(mode: ModeLike) -> QuadratureExpression:
    return QuadratureExpression.x(mode)


def p(mode: ModeLike) -> QuadratureExpression:
    return QuadratureExpression.p(mode)


def commutator(u: QuadratureExpression, v: QuadratureExpression) -> float:
    """Return ``c`` such that ``[u, v] = 2ic``.

    Within a mode ``[x, p] = 2i``; quadratures of distinct modes commute.
    """
    c = 0.0
    for m in u.modes & v.modes:
        c += u.coeff(m, "x") * v.coeff(m, "p") - u.coeff(m, "p") * v.coeff(m, "x")
    return c


def _heisenberg_min_eig(matrix: np.ndarray) -> float:
    n = matrix.shape[0] // 2
    return float(np.linalg.eigvalsh(matrix + 1j * symplectic_form(n)).min())


@dataclass(frozen=True)
class CovarianceSpec:
    """Symmetrized second moments ``<{xi_i, xi_j}>`` over named modes.

    Modes not listed are treated as vacuum.  Construction rejects matrices
    that are not symmetric or violate ``V + i Omega >= 0``.
    """

    modes: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        modes = tuple(_name(m) for m in self.modes)
        if len(set(modes)) != len(modes):
            raise ValueError("duplicate mode labels")
        V = np.array(self.matrix, dtype=float)
        if V.shape != (2 * len(modes), 2 * len(modes)):
            raise ValueError("covariance shape does not match modes")
        if not np.allclose(V, V.T, atol=1e-12, rtol=0):
            raise ValueError("covariance matrix must be symmetric")
        V = (V + V.T) / 2
        if modes:
            scale = max(1.0, float(np.abs(V).max()))
            if _heisenberg_min_eig(V) < -HEISENBERG_TOL * scale:
                raise ValueError("covariance violates V + i*Omega >= 0")
        V.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "matrix", V)

    @classmethod
    def vacuum(cls, modes: Iterable[ModeLike]) -> "CovarianceSpec":
        modes = tuple(_name(m) for m in modes)
        return cls(modes, np.eye(2 * len(modes)))

    def extended(self, modes: Iterable[ModeLike]) -> "CovarianceSpec":
        """Covariance over ``self.modes`` plus any new ``modes`` as vacuum."""
        extra = [m for m in dict.fromkeys(_name(m) for m in modes) if m not in self.modes]
        if not extra:
            return self
        n = len(self.modes)
        V = np.eye(2 * (n + len(extra)))
        V[: 2 * n, : 2 * n] = self.matrix
        return CovarianceSpec(self.modes + tuple(extra), V)

    def direct_sum(self, other: "CovarianceSpec") -> "CovarianceSpec":
        if set(self.modes) & set(other.modes):
            raise ValueError("direct sum requires disjoint modes")
        n, m = len(self.modes), len(other.modes)
        V = np.zeros((2 * (n + m), 2 * (n + m)))
        V[: 2 * n, : 2 * n] = self.matrix
        V[2 * n :, 2 * n :] = other.matrix
        return CovarianceSpec(self.modes + other.modes, V)

    def reordered(self, modes: Sequence[ModeLike]) -> "CovarianceSpec":
        """Covariance restricted/reordered onto ``modes`` (vacuum for new ones)."""
        full = self.extended(modes)
        names = [_name(m) for m in modes]
        idx = []
        for m in names:
            k = full.modes.index(m)
            idx += [2 * k, 2 * k + 1]
        return CovarianceSpec(tuple(names), full.matrix[np.ix_(idx, idx)])

    def relabel(self, mapping: Mapping[str, str]) -> "CovarianceSpec":
        return CovarianceSpec(tuple(mapping.get(m, m) for m in self.modes), self.matrix)

    def heisenberg_min_eig(self) -> float:
        return _heisenberg_min_eig(self.matrix)

    def symplectic_eigenvalues(self) -> np.ndarray:
        n = len(self.modes)
        ev = np.linalg.eigvals(1j * symplectic_form(n) @ self.matrix)
        return np.sort(np.abs(ev))[::2]


def covariance(u: QuadratureExpression, v: QuadratureExpression, cov: CovarianceSpec) -> float:
    """Symmetrized second moment ``<{u, v}>`` (zero means assumed)."""
    full = cov.extended(sorted(u.modes | v.modes))
    return float(u.vector(full.modes) @ full.matrix @ v.vector(full.modes))


def variance(u: QuadratureExpression, cov: CovarianceSpec) -> float:
    """Variance of ``u`` in shot-noise units; unlisted modes are vacuum."""
    return covariance(u, u, cov)


def two_mode_squeezed_cov(r: float, modes: tuple[ModeLike, ModeLike] = ("A", "B")) -> CovarianceSpec:
    """Covariance of the two-mode squeezed vacuum with squeezing ``r``.

    Correlations ``<x_A x_B> = -sinh 2r`` and ``<p_A p_B> = +sinh 2r``.
    """
    r = float(r)
    if not math.isfinite(r) or r < 0:
        raise ValueError("squeezing r must be finite and >= 0")
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    V = np.array(
        [
            [c, 0, -s, 0],
            [0, c, 0, s],
            [-s, 0, c, 0],
            [0, s, 0, c],
        ]
    )
    return CovarianceSpec(tuple(_name(m) for m in modes), V)


@dataclass(frozen=True)
class SymplecticMap:
    """Linear canonical map ``xi_out = S xi_in`` on the listed modes."""

    modes: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        modes = tuple(_name(m) for m in self.modes)
        S = np.array(self.matrix, dtype=float)
        n = len(modes)
        if S.shape != (2 * n, 2 * n):
            raise ValueError("symplectic matrix shape does not match modes")
        Om = symplectic_form(n)
        if np.abs(S @ Om @ S.T - Om).max() > SYMPLECTIC_TOL * max(1.0, np.abs(S).max() ** 2):
            raise ValueError("matrix is not symplectic")
        S.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "matrix", S)

    def __matmul__(self, other: "SymplecticMap") -> "SymplecticMap":
        """``self @ other`` applies ``other`` first.

        Maps on different modes are embedded into the union (``self``'s
        modes first) before multiplying.
        """
        if self.modes != other.modes:
            modes = self.modes + tuple(m for m in other.modes if m not in self.modes)
            return self.embedded(modes) @ other.embedded(modes)
        return SymplecticMap(self.modes, self.matrix @ other.matrix)

    def inverse(self) -> "SymplecticMap":
        n = len(self.modes)
        Om = symplectic_form(n)
        return SymplecticMap(self.modes, -Om @ self.matrix.T @ Om)

    def embedded(self, modes: Sequence[ModeLike]) -> "SymplecticMap":
        """Same map acting on a larger ordered mode set (identity elsewhere)."""
        names = [_name(m) for m in modes]
        S = np.eye(2 * len(names))
        idx = []
        for m in self.modes:
            k = names.index(m)
            idx += [2 * k, 2 * k + 1]
        S[np.ix_(idx, idx)] = self.matrix
        return SymplecticMap(tuple(names), S)


def identity_map(modes: Sequence[ModeLike]) -> SymplecticMap:
    return SymplecticMap(tuple(modes), np.eye(2 * len(modes)))


def passive_mixer(B, modes: tuple[ModeLike, ModeLike]) -> SymplecticMap:
    """Two-mode passive element acting as the real orthogonal ``B`` on both axes."""
    B = np.asarray(B, dtype=float)
    if B.shape != (2, 2) or not np.allclose(B @ B.T, np.eye(2), atol=1e-12, rtol=0):
        raise ValueError("mixing matrix must be real orthogonal 2x2")
    return SymplecticMap(tuple(modes), np.kron(B, np.eye(2)))


def beam_splitter(T: float, modes: tuple[ModeLike, ModeLike]) -> SymplecticMap:
    """Beam splitter with intensity transmittance ``T``.

    ``x_1' = sqrt(T) x_1 + sqrt(R) x_2``, ``x_2' = -sqrt(R) x_1 + sqrt(T) x_2``
    and likewise for ``p``.  Equivalent to :func:`beam_splitter_angle` with
    ``theta = arccos(sqrt(T))``.
    """
    if not 0.0 <= T <= 1.0:
        raise ValueError("transmittance must lie in [0, 1]")
    return beam_splitter_angle(math.acos(math.sqrt(T)), modes)


def beam_splitter_angle(theta: float, modes: tuple[ModeLike, ModeLike]) -> SymplecticMap:
    c, s = math.cos(theta), math.sin(theta)
    return passive_mixer([[c, s], [-s, c]], modes)


def two_mode_squeezer(r: float, modes: tuple[ModeLike, ModeLike] = ("A", "B")) -> SymplecticMap:
    """Two-mode squeezer mapping vacua onto :func:`two_mode_squeezed_cov`.

    ``x_A = cosh r x_A0 - sinh r x_B0``, ``p_A = cosh r p_A0 + sinh r p_B0``
    and symmetrically for mode B.
    """
    c, s = math.cosh(r), math.sinh(r)
    S = np.array(
        [
            [c, 0, -s, 0],
            [0, c, 0, s],
            [-s, 0, c, 0],
            [0, s, 0, c],
        ]
    )
    return SymplecticMap(tuple(modes), S)


def single_mode_squeezer(r: float, mode: ModeLike) -> SymplecticMap:
    return SymplecticMap((mode,), np.diag([math.exp(-r), math.exp(r)]))


def phase_shifter(theta: float, mode: ModeLike) -> SymplecticMap:
    """Rotation ``x -> cos x + sin p``, ``p -> -sin x + cos p``.

    ``theta = pi/2`` gives ``x -> p``, ``p -> -x``.
    """
    c, s = math.cos(theta), math.sin(theta)
    return SymplecticMap((mode,), np.array([[c, s], [-s, c]]))


def _apply_expr(S: SymplecticMap, u: QuadratureExpression) -> QuadratureExpression:
    inside = QuadratureExpression(
        {k: c for k, c in u.coefficients.items() if k[0] in S.modes}
    )
    outside = u - inside
    v = S.matrix.T @ inside.vector(S.modes)
    return QuadratureExpression.from_vector(v, S.modes) + outside


def apply_symplectic(S: SymplecticMap, target):
    """Push expressions or a covariance through ``S``.

    Expressions written in output quadratures are rewritten in input
    quadratures (coefficients transform by ``S^T``).  A covariance of the
    input state maps to ``S V S^T``; modes of ``S`` missing from the
    covariance enter as vacuum.
    """
    if not isinstance(S, SymplecticMap):
        raise TypeError("S must be a SymplecticMap")
    if isinstance(target, QuadratureExpression):
        return _apply_expr(S, target)
    if isinstance(target, CovarianceSpec):
        full = target.extended(S.modes)
        big = S.embedded(full.modes).matrix
        return CovarianceSpec(full.modes, big @ full.matrix @ big.T)
    if isinstance(target, Mapping):
        return {k: _apply_expr(S, u) for k, u in target.items()}
    if isinstance(target, (list, tuple)):
        return type(target)(_apply_expr(S, u) for u in target)
    raise TypeError(f"cannot apply symplectic map to {type(target).__name__}")
