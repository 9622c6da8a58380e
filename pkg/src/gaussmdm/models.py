"""Analytic minimal-disturbance measurement channels.

Two realizations are provided: non-unity gain teleportation with a two-mode
squeezed resource, and the beam-splitter scheme with electronic feed-forward.
Channels carry their four noise operators as quadrature expressions together
with the covariance of the auxiliary modes they act on, so every variance and
commutator is computed from the operators themselves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional, Union

from .quadalg import (
    CovarianceSpec,
    Mode,
    ModeRole,
    QuadratureExpression,
    apply_symplectic,
    beam_splitter,
    commutator,
    passive_mixer,
    p,
    two_mode_squeezed_cov,
    two_mode_squeezer,
    variance,
    x,
)
from .tradeoff import UNBOUNDED, Unbounded, _check_gain, _check_nu_cl, uncertainty_bounds

NOISE_KEYS = ("n_out_x", "n_out_p", "n_cl_x", "n_cl_p")

IN = Mode("in", ModeRole.INPUT)
A0 = Mode("A0", ModeRole.AUXILIARY_VACUUM)
B0 = Mode("B0", ModeRole.AUXILIARY_VACUUM)
A = Mode("A", ModeRole.AUXILIARY_ENTANGLED)
B = Mode("B", ModeRole.AUXILIARY_ENTANGLED)

#: relative slack on the uncertainty bounds checked at construction
_BOUND_TOL = 1e-12


@dataclass(frozen=True)
class Provenance:
    kind: str  # teleportation | feedforward | symmetrized | custom
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))


def expected_commutators(g: float) -> dict[tuple[str, str], float]:
    """Commutator constants ``c`` (``[u, v] = 2ic``) every MDM must obey."""
    return {
        ("n_out_x", "n_out_p"): (1 - g * g) / (g * g),
        ("n_cl_x", "n_cl_p"): -1.0,
        ("n_out_p", "n_cl_x"): 1.0,
        ("n_cl_p", "n_out_x"): 1.0,
        ("n_cl_x", "n_out_x"): 0.0,
        ("n_cl_p", "n_out_p"): 0.0,
    }


@dataclass(frozen=True)
class MdmChannel:
    """Gaussian partial-measurement channel at gain ``g``.

    ``x_out = g (x_in + n_out_x)``, ``x_cl = x_in + n_cl_x`` and likewise for
    ``p``.  ``cov`` is the state of the auxiliary modes the noise operators
    are written in; modes it does not list are vacuum.
    """

    g: float
    noise_exprs: Mapping[str, QuadratureExpression]
    cov: CovarianceSpec
    provenance: Provenance = Provenance("custom")
    var_out_x: float = field(init=False)
    var_out_p: float = field(init=False)
    var_cl_x: float = field(init=False)
    var_cl_p: float = field(init=False)

    def __post_init__(self):
        g = _check_gain(self.g)
        exprs = dict(self.noise_exprs)
        if set(exprs) != set(NOISE_KEYS):
            raise ValueError(f"noise_exprs must have keys {NOISE_KEYS}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "noise_exprs", MappingProxyType(exprs))
        for key in NOISE_KEYS:
            object.__setattr__(self, "var" + key[1:], variance(exprs[key], self.cov))
        bounds = uncertainty_bounds(g)
        checks = (
            (self.nu_cl, bounds.nu_cl_min, "nu_cl >= 1"),
            (self.nu_out, bounds.nu_out_min, "nu_out >= |1-g^2|/g^2"),
            (self.nu_cl * self.nu_out, bounds.product_min, "nu_cl*nu_out >= 1"),
        )
        for value, lo, what in checks:
            if value < lo - _BOUND_TOL * max(1.0, abs(value)):
                raise ValueError(f"channel violates uncertainty bound {what}")

    @property
    def nu_out(self) -> float:
        return (self.var_out_x + self.var_out_p) / 2

    @property
    def nu_cl(self) -> float:
        return (self.var_cl_x + self.var_cl_p) / 2

    @property
    def modes(self) -> frozenset[str]:
        out = frozenset()
        for u in self.noise_exprs.values():
            out |= u.modes
        return out

    def commutators(self) -> dict[tuple[str, str], float]:
        n = self.noise_exprs
        return {(a, b): commutator(n[a], n[b]) for a, b in expected_commutators(self.g)}

    def commutator_residual(self) -> float:
        """Largest deviation from the required noise commutation rules."""
        want = expected_commutators(self.g)
        got = self.commutators()
        return max(abs(got[k] - want[k]) for k in want)

    def relabel(self, mapping: Mapping[str, str]) -> "MdmChannel":
        return MdmChannel(
            self.g,
            {k: u.relabel(mapping) for k, u in self.noise_exprs.items()},
            self.cov.relabel(mapping),
            self.provenance,
        )


def custom_channel(g: float, noise_exprs: Mapping[str, QuadratureExpression], cov: CovarianceSpec) -> MdmChannel:
    return MdmChannel(g, noise_exprs, cov, Provenance("custom"))


def teleportation_noise(g: float) -> dict[str, QuadratureExpression]:
    """Noise operators of gain-``g`` teleportation over the resource modes A, B."""
    return {
        "n_out_x": x(A) + x(B) / g,
        "n_out_p": -p(A) + p(B) / g,
        "n_cl_x": x(A),
        "n_cl_p": -p(A),
    }


def teleportation_mdm(r: float, g: float) -> MdmChannel:
    """Teleportation through a two-mode squeezed vacuum of squeezing ``r``."""
    g = _check_gain(g)
    cov = two_mode_squeezed_cov(r, (A.name, B.name))
    return MdmChannel(g, teleportation_noise(g), cov, Provenance("teleportation", {"r": float(r), "g": g}))


def _check_T(T: float) -> float:
    T = float(T)
    if not 0.0 < T < 1.0:
        raise ValueError(f"transmittance must lie in (0, 1), got {T}")
    return T


def feedforward_gain(T: float, G: float) -> float:
    """Optical gain ``sqrt(T) + G sqrt(1-T)`` of the feed-forward scheme."""
    T = _check_T(T)
    return math.sqrt(T) + float(G) * math.sqrt(1 - T)


def feedforward_noise(T: float, G: float) -> dict[str, QuadratureExpression]:
    """Noise operators of the feed-forward scheme over vacua A0, B0."""
    T = _check_T(T)
    sT, sR = math.sqrt(T), math.sqrt(1 - T)
    g = sT + G * sR
    if g <= 0:
        raise ValueError(f"feed-forward gain must be positive, got g={g} (T={T}, G={G})")
    return {
        "n_out_x": ((G * sT - sR) * x(A0) + G * x(B0)) / g,
        "n_out_p": ((G * sT - sR) * p(A0) - G * p(B0)) / g,
        "n_cl_x": (sT * x(A0) + x(B0)) / sR,
        "n_cl_p": (sT * p(A0) - p(B0)) / sR,
    }


def feedforward_mdm(T: float, G: float) -> MdmChannel:
    """Beam splitter of transmittance ``T`` plus feed-forward with electronic gain ``G``.

    Negative ``G`` is a pi-shifted feed-forward; the resulting optical gain
    must stay positive.
    """
    exprs = feedforward_noise(T, G)
    g = feedforward_gain(T, G)
    cov = CovarianceSpec.vacuum((A0.name, B0.name))
    return MdmChannel(g, exprs, cov, Provenance("feedforward", {"T": float(T), "G": float(G)}))


def teleportation_circuit(r: float, g: float) -> dict[str, QuadratureExpression]:
    """Output quadratures of the teleportation circuit over modes in, A0, B0.

    Built stage by stage (squeezer, balanced beam splitter, displacement)
    in the Heisenberg picture; the result is independent of the closed-form
    noise operators in :func:`teleportation_noise`.
    """
    g = _check_gain(g)
    tms = two_mode_squeezer(r, (A0.name, B0.name))
    bs = beam_splitter(0.5, (IN.name, A0.name))
    # x1 on the first port, p2 = (p_in - p_A)/sqrt2 on the second
    x1 = apply_symplectic(tms, apply_symplectic(bs, x(IN)))
    p2 = -apply_symplectic(tms, apply_symplectic(bs, p(A0)))
    xB = apply_symplectic(tms, x(B0))
    pB = apply_symplectic(tms, p(B0))
    s2 = math.sqrt(2)
    return {
        "x_out": xB + g * s2 * x1,
        "p_out": pB + g * s2 * p2,
        "x_cl": s2 * x1,
        "p_cl": s2 * p2,
    }


def feedforward_circuit(T: float, G: float) -> dict[str, QuadratureExpression]:
    """Output quadratures of the feed-forward circuit over modes in, A0, B0."""
    T = _check_T(T)
    sT, sR = math.sqrt(T), math.sqrt(1 - T)
    tap = passive_mixer([[sR, sT], [sT, -sR]], (IN.name, A0.name))
    bs = beam_splitter(0.5, (IN.name, B0.name))

    def through(u):
        return apply_symplectic(tap, apply_symplectic(bs, u))

    x1 = through(x(IN))
    p2 = -through(p(B0))
    xA = apply_symplectic(tap, x(A0))
    pA = apply_symplectic(tap, p(A0))
    s2 = math.sqrt(2)
    k = math.sqrt(2 / (1 - T))
    return {
        "x_out": xA + s2 * G * x1,
        "p_out": pA + s2 * G * p2,
        "x_cl": k * x1,
        "p_cl": k * p2,
    }


def noise_from_circuit(outputs: Mapping[str, QuadratureExpression], g: float) -> dict[str, QuadratureExpression]:
    """Strip the signal from circuit outputs to recover the noise operators."""
    return {
        "n_out_x": outputs["x_out"] / g - x(IN),
        "n_out_p": outputs["p_out"] / g - p(IN),
        "n_cl_x": outputs["x_cl"] - x(IN),
        "n_cl_p": outputs["p_cl"] - p(IN),
    }


def primed_copy(ch: MdmChannel, suffix: str = "'") -> MdmChannel:
    """Independent copy of ``ch`` acting on freshly labelled modes."""
    names = set(ch.modes) | set(ch.cov.modes)
    return ch.relabel({m: m + suffix for m in names})


def symmetrize(ch1: MdmChannel, ch2: MdmChannel) -> MdmChannel:
    """Combine two copies in a balanced Mach-Zehnder to isotropize the noise.

    ``ch2`` is the copy sandwiched between quarter-turn phase shifters, so its
    x and p noises swap roles.  The combined operators are

    ``n_out_x = (n_out_x + n_out_p')/sqrt2``, ``n_out_p = (n_out_p - n_out_x')/sqrt2``

    and the same for the classical noises.  Both copies must share ``g`` and
    act on disjoint modes (see :func:`primed_copy`).
    """
    if not math.isclose(ch1.g, ch2.g, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"symmetrize needs equal gains, got {ch1.g} and {ch2.g}")
    used1 = set(ch1.modes) | set(ch1.cov.modes)
    used2 = set(ch2.modes) | set(ch2.cov.modes)
    if used1 & used2:
        raise ValueError("the two copies must act on disjoint modes")
    a, b = ch1.noise_exprs, ch2.noise_exprs
    s = math.sqrt(2)
    exprs = {
        "n_out_x": (a["n_out_x"] + b["n_out_p"]) / s,
        "n_out_p": (a["n_out_p"] - b["n_out_x"]) / s,
        "n_cl_x": (a["n_cl_x"] + b["n_cl_p"]) / s,
        "n_cl_p": (a["n_cl_p"] - b["n_cl_x"]) / s,
    }
    return MdmChannel(ch1.g, exprs, ch1.cov.direct_sum(ch2.cov), Provenance("symmetrized"))


def optimal_gain(nu_cl: float) -> Union[float, Unbounded]:
    """Gain minimizing the output noise at fixed ``nu_cl``.

    Returns :data:`UNBOUNDED` for ``nu_cl == 1``, where the optimum is an
    unphysical infinite gain.
    """
    nu_cl = _check_nu_cl(nu_cl)
    if nu_cl == 1.0:
        return UNBOUNDED
    return nu_cl / math.sqrt(nu_cl * nu_cl - 1)


def optimal_electronic_gain(T: float) -> tuple[float, float]:
    """Electronic gain ``G`` and resulting optical gain for the gain-optimized scheme."""
    T = _check_T(T)
    G = math.sqrt(1 - T) / (2 * math.sqrt(T))
    g_opt = (1 + T) / (2 * math.sqrt(T))
    return G, g_opt


def electronic_gain_for(T: float, g: float) -> float:
    """Electronic gain that realizes optical gain ``g`` at transmittance ``T``."""
    T = _check_T(T)
    g = _check_gain(g)
    return (g - math.sqrt(T)) / math.sqrt(1 - T)


def squeezing_for_nucl(nu_cl: float) -> float:
    nu_cl = _check_nu_cl(nu_cl)
    return math.acosh(nu_cl) / 2


@dataclass(frozen=True)
class ExtremePoints:
    """End points of the fixed-gain curve and the squeezing that reaches them.

    ``point_b``/``r_b`` are ``None`` at unity gain, where the curve has no
    right end.
    """

    g: float
    point_a: tuple[float, float]
    point_b: Optional[tuple[float, float]]
    r_a: float
    r_b: Optional[float]


def extreme_points(g: float) -> ExtremePoints:
    g = _check_gain(g)
    g2 = g * g
    point_a = (1.0, (1 + g2) / g2)
    if g == 1.0:
        return ExtremePoints(g, point_a, None, 0.0, None)
    point_b = (abs(1 + g2) / abs(1 - g2), abs(1 - g2) / g2)
    # coth r = g for g > 1, tanh r = g for g < 1
    r_b = math.atanh(1 / g) if g > 1 else math.atanh(g)
    return ExtremePoints(g, point_a, point_b, 0.0, r_b)
