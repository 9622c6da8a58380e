"""Quadrature-level Monte Carlo of both MDM schemes and the SNR estimation pipeline.

Gaussian states have positive Wigner functions and every element of both
schemes is a linear canonical map, so sampling vacuum and coherent
quadratures as independent normal variables and pushing them through the
circuit reproduces every single-quadrature measurement statistic exactly.

Trials are generated in fixed-size blocks, each with its own counter-based
Philox stream keyed by ``(seed, block index)``; the result therefore does not
depend on how blocks are scheduled.  Per-block central moments are merged
pairwise in block order.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .models import electronic_gain_for, feedforward_gain, feedforward_mdm, optimal_electronic_gain, teleportation_mdm
from .tradeoff import PointClass, TradeoffPoint, classify_point

BLOCK_SIZE = 1 << 16
DEFAULT_ALPHA = 2 + 1j
MIN_TRIALS = 10_000

# rows of the per-block normal draw
_N_DRAWS = 14
(
    _X_IN, _P_IN,  # coherent input
    _XA0, _PA0, _XB0, _PB0,  # auxiliary vacua
    _OUT_LX, _OUT_LP,  # output homodyne loss
    _CL_LX, _CL_LP,  # classical-arm loss
    _CHAR_X, _CHAR_P,  # independent input characterization run
    _CHAR_LX, _CHAR_LP,  # loss on the characterization homodyne
) = range(_N_DRAWS)


@dataclass(frozen=True)
class Feedforward:
    T: float
    G: float

    def __post_init__(self):
        if not 0.0 < self.T < 1.0:
            raise ValueError(f"transmittance must lie in (0, 1), got {self.T}")

    @property
    def gain(self) -> float:
        return feedforward_gain(self.T, self.G)


@dataclass(frozen=True)
class Teleportation:
    r: float
    g: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError(f"squeezing must be >= 0, got {self.r}")
        if not (math.isfinite(self.g) and self.g > 0):
            raise ValueError(f"gain must be positive, got {self.g}")

    @property
    def gain(self) -> float:
        return self.g


Scheme = Union[Feedforward, Teleportation]


@dataclass(frozen=True)
class SimConfig:
    """One simulated run.

    ``eta`` is the homodyne efficiency at the output (and on the input
    characterization).  With ``eta_classical`` the classical-arm detectors
    share that efficiency; the feed-forward then acts on the lossy
    photocurrent with its electronic gain rescaled by ``1/sqrt(eta)``.
    """

    scheme: Scheme
    n_trials: int = 1_000_000
    seed: int = 0
    input_alpha: complex = DEFAULT_ALPHA
    eta: float = 1.0
    eta_classical: bool = False

    def __post_init__(self):
        if not isinstance(self.scheme, (Feedforward, Teleportation)):
            raise TypeError("scheme must be Feedforward or Teleportation")
        if int(self.n_trials) != self.n_trials or self.n_trials < MIN_TRIALS:
            raise ValueError(f"n_trials must be an integer >= {MIN_TRIALS}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"detector efficiency must lie in (0, 1], got {self.eta}")
        alpha = complex(self.input_alpha)
        if alpha.real == 0 or alpha.imag == 0:
            raise ValueError("input amplitude needs nonzero mean on both quadratures (SNR undefined)")
        object.__setattr__(self, "n_trials", int(self.n_trials))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "input_alpha", alpha)


class Moments:
    """Count, mean and central sums ``M2..M4`` with order-stable pairwise merging."""

    __slots__ = ("n", "mean", "M2", "M3", "M4")

    def __init__(self, n=0, mean=0.0, M2=0.0, M3=0.0, M4=0.0):
        self.n, self.mean, self.M2, self.M3, self.M4 = n, mean, M2, M3, M4

    @classmethod
    def of(cls, a: np.ndarray) -> "Moments":
        a = np.asarray(a, dtype=float)
        mu = float(a.mean())
        d = a - mu
        d2 = d * d
        return cls(a.size, mu, float(d2.sum()), float((d2 * d).sum()), float((d2 * d2).sum()))

    def merge(self, o: "Moments") -> "Moments":
        if self.n == 0:
            return Moments(o.n, o.mean, o.M2, o.M3, o.M4)
        if o.n == 0:
            return Moments(self.n, self.mean, self.M2, self.M3, self.M4)
        na, nb = self.n, o.n
        n = na + nb
        d = o.mean - self.mean
        dn = d / n
        mean = self.mean + dn * nb
        M2 = self.M2 + o.M2 + d * dn * na * nb
        M3 = (
            self.M3 + o.M3
            + d * dn * dn * na * nb * (na - nb)
            + 3 * dn * (na * o.M2 - nb * self.M2)
        )
        M4 = (
            self.M4 + o.M4
            + d * dn**3 * na * nb * (na * na - na * nb + nb * nb)
            + 6 * dn * dn * (na * na * o.M2 + nb * nb * self.M2)
            + 4 * dn * (na * o.M3 - nb * self.M3)
        )
        return Moments(n, mean, M2, M3, M4)

    @property
    def var(self) -> float:
        return self.M2 / (self.n - 1)

    def mean_var_cov(self) -> np.ndarray:
        """Asymptotic covariance of (sample mean, sample variance)."""
        n = self.n
        v, m3, m4 = self.M2 / n, self.M3 / n, self.M4 / n
        return np.array([[v / n, m3 / n], [m3 / n, (m4 - v * v) / n]])


@dataclass(frozen=True)
class Stat:
    """Corrected mean/variance of one detected quadrature with their covariance."""

    mean: float
    var: float
    cov: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def corrected(cls, m: Moments, eta: float) -> "Stat":
        # measured = sqrt(eta) ideal + sqrt(1-eta) vacuum
        J = np.diag([1 / math.sqrt(eta), 1 / eta])
        return cls(m.mean / math.sqrt(eta), (m.var - (1 - eta)) / eta, J @ m.mean_var_cov() @ J.T)

    @property
    def snr(self) -> float:
        return self.mean * self.mean / self.var


def estimate_added_noise_via_snr(in_means, in_vars, out_means, out_vars) -> tuple[float, float]:
    """Added noise ``SNR_in/SNR_out - 1`` per quadrature, with ``SNR = mean^2/var``.

    Each argument is an ``(x, p)`` pair.  Gain-independent: any overall
    output scaling cancels.
    """
    out = []
    for mi, vi, mo, vo in zip(in_means, in_vars, out_means, out_vars):
        if mi == 0 or mo == 0:
            raise ValueError("SNR undefined for zero mean")
        if vi <= 0 or vo <= 0:
            raise ValueError("variances must be positive")
        out.append((mi * mi / vi) / (mo * mo / vo) - 1)
    return out[0], out[1]


def _snr_noise(inp: Stat, out: Stat) -> tuple[float, float]:
    """SNR noise estimate and its delta-method standard error (independent samples)."""
    q = inp.snr / out.snr
    n = q - 1
    gi = np.array([2 * q / inp.mean, -q / inp.var])
    go = np.array([-2 * q / out.mean, q / out.var])
    var = gi @ inp.cov @ gi + go @ out.cov @ go
    return n, math.sqrt(var)


def _ratio(num: Stat, den: Stat) -> tuple[float, float]:
    r = num.mean / den.mean
    var = r * r * (num.cov[0, 0] / num.mean**2 + den.cov[0, 0] / den.mean**2)
    return r, math.sqrt(var)


@dataclass(frozen=True)
class SimResult:
    """Estimates from one run; every ``*_se`` is a standard error."""

    config: SimConfig
    g_hat_x: float
    g_hat_x_se: float
    g_hat_p: float
    g_hat_p_se: float
    var_out_x: float
    var_out_x_se: float
    var_out_p: float
    var_out_p_se: float
    var_cl_x: float
    var_cl_x_se: float
    var_cl_p: float
    var_cl_p_se: float
    nu_out_hat: float
    nu_out_se: float
    nu_cl_hat: float
    nu_cl_se: float
    snr_in_x: float
    snr_in_p: float
    snr_out_x: float
    snr_out_p: float
    snr_cl_x: float
    snr_cl_p: float
    direct_var_out_x: float
    direct_var_out_x_se: float
    direct_var_out_p: float
    direct_var_out_p_se: float
    direct_var_cl_x: float
    direct_var_cl_x_se: float
    direct_var_cl_p: float
    direct_var_cl_p_se: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("config")
        return d


def _blocks(n_trials: int) -> Iterator[tuple[int, int]]:
    for k, start in enumerate(range(0, n_trials, BLOCK_SIZE)):
        yield k, min(BLOCK_SIZE, n_trials - start)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def _propagate(cfg: SimConfig, z: np.ndarray) -> dict[str, np.ndarray]:
    """Push one block of normal draws through the configured circuit."""
    eta = cfg.eta
    le, lv = math.sqrt(eta), math.sqrt(1 - eta)
    a = cfg.input_alpha
    x_in = 2 * a.real + z[_X_IN]
    p_in = 2 * a.imag + z[_P_IN]
    s2 = math.sqrt(2)

    sc = cfg.scheme
    if isinstance(sc, Teleportation):
        c, s = math.cosh(sc.r), math.sinh(sc.r)
        xA = c * z[_XA0] - s * z[_XB0]
        pA = c * z[_PA0] + s * z[_PB0]
        xB = c * z[_XB0] - s * z[_XA0]
        pB = c * z[_PB0] + s * z[_PA0]
        x1 = (x_in + xA) / s2
        p2 = (p_in - pA) / s2
        kick, keep_x, keep_p, cl_scale = sc.g * s2, xB, pB, s2
    else:
        sT, sR = math.sqrt(sc.T), math.sqrt(1 - sc.T)
        x_tap = sR * x_in + sT * z[_XA0]
        p_tap = sR * p_in + sT * z[_PA0]
        keep_x = sT * x_in - sR * z[_XA0]
        keep_p = sT * p_in - sR * z[_PA0]
        x1 = (x_tap + z[_XB0]) / s2
        p2 = (p_tap - z[_PB0]) / s2
        kick, cl_scale = s2 * sc.G, math.sqrt(2 / (1 - sc.T))

    if cfg.eta_classical:
        x1_det = le * x1 + lv * z[_CL_LX]
        p2_det = le * p2 + lv * z[_CL_LP]
        x_out = keep_x + kick * x1_det / le
        p_out = keep_p + kick * p2_det / le
    else:
        x1_det, p2_det = x1, p2
        x_out = keep_x + kick * x1
        p_out = keep_p + kick * p2

    g = sc.gain
    return {
        "in_x": le * (2 * a.real + z[_CHAR_X]) + lv * z[_CHAR_LX],
        "in_p": le * (2 * a.imag + z[_CHAR_P]) + lv * z[_CHAR_LP],
        "out_x": le * x_out + lv * z[_OUT_LX],
        "out_p": le * p_out + lv * z[_OUT_LP],
        # classical photocurrents in unit-quadrature normalization
        "cl_x": x1_det,
        "cl_p": p2_det,
        "direct_out_x": x_out / g - x_in,
        "direct_out_p": p_out / g - p_in,
        "direct_cl_x": cl_scale * x1 - x_in,
        "direct_cl_p": cl_scale * p2 - p_in,
    }


def _simulate(cfg: SimConfig) -> SimResult:
    acc: dict[str, Moments] = {}
    for k, nb in _blocks(cfg.n_trials):
        z = _block_rng(cfg.seed, k).standard_normal((_N_DRAWS, nb))
        for key, arr in _propagate(cfg, z).items():
            acc[key] = acc.get(key, Moments()).merge(Moments.of(arr))

    eta = cfg.eta
    cl_eta = eta if cfg.eta_classical else 1.0
    inp = {q: Stat.corrected(acc[f"in_{q}"], eta) for q in "xp"}
    out = {q: Stat.corrected(acc[f"out_{q}"], eta) for q in "xp"}
    cl = {q: Stat.corrected(acc[f"cl_{q}"], cl_eta) for q in "xp"}

    res = {}
    for q in "xp":
        res[f"g_hat_{q}"], res[f"g_hat_{q}_se"] = _ratio(out[q], inp[q])
        res[f"var_out_{q}"], res[f"var_out_{q}_se"] = _snr_noise(inp[q], out[q])
        res[f"var_cl_{q}"], res[f"var_cl_{q}_se"] = _snr_noise(inp[q], cl[q])
        res[f"snr_in_{q}"] = inp[q].snr
        res[f"snr_out_{q}"] = out[q].snr
        res[f"snr_cl_{q}"] = cl[q].snr
        for kind in ("out", "cl"):
            m = acc[f"direct_{kind}_{q}"]
            res[f"direct_var_{kind}_{q}"] = m.var
            res[f"direct_var_{kind}_{q}_se"] = math.sqrt(m.mean_var_cov()[1, 1])
    res["nu_out_hat"] = (res["var_out_x"] + res["var_out_p"]) / 2
    res["nu_out_se"] = math.hypot(res["var_out_x_se"], res["var_out_p_se"]) / 2
    res["nu_cl_hat"] = (res["var_cl_x"] + res["var_cl_p"]) / 2
    res["nu_cl_se"] = math.hypot(res["var_cl_x_se"], res["var_cl_p_se"]) / 2
    return SimResult(config=cfg, **res)


def simulate_feedforward(cfg: SimConfig) -> SimResult:
    if not isinstance(cfg.scheme, Feedforward):
        raise ValueError("config scheme is not feed-forward")
    if cfg.scheme.gain <= 0:
        raise ValueError("feed-forward gain must be positive")
    return _simulate(cfg)


def simulate_teleportation(cfg: SimConfig) -> SimResult:
    if not isinstance(cfg.scheme, Teleportation):
        raise ValueError("config scheme is not teleportation")
    return _simulate(cfg)


def simulate(cfg: SimConfig) -> SimResult:
    if isinstance(cfg.scheme, Teleportation):
        return simulate_teleportation(cfg)
    return simulate_feedforward(cfg)


def nucl_from_transmittance(T: float) -> float:
    """Classical noise of the feed-forward scheme inferred from its transmittance."""
    T = float(T)
    if not 0.0 < T < 1.0:
        raise ValueError(f"transmittance must lie in (0, 1), got {T}")
    return (1 + T) / (1 - T)


def analytic_targets(scheme: Scheme) -> tuple[float, float]:
    """``(nu_cl, nu_out)`` of the configured operation from the closed-form models."""
    if isinstance(scheme, Teleportation):
        ch = teleportation_mdm(scheme.r, scheme.g)
    else:
        ch = feedforward_mdm(scheme.T, scheme.G)
    return ch.nu_cl, ch.nu_out


# -- experiment sweeps -------------------------------------------------------------

CSV_COLUMNS = (
    "scheme", "T", "G", "g", "eta", "n_trials", "seed",
    "nu_cl_hat", "nu_cl_se", "var_out_x", "var_out_x_se", "var_out_p", "var_out_p_se",
    "nu_out_hat", "nu_out_se", "classification", "r", "status",
)


@dataclass(frozen=True)
class ExperimentRow:
    T: float
    G: Optional[float]
    g: Optional[float]
    status: str  # ok | infeasible
    classification: Optional[PointClass] = None
    result: Optional[SimResult] = None
    reason: str = ""


def row_seed(seed: int, index: int) -> int:
    """Deterministic per-row seed derived from the sweep seed."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, dtype=np.uint64)[0])


def experiment_sweep(
    gain_mode: Union[str, float],
    T_list: Sequence[float],
    n_trials: int,
    seed: int,
    eta: float = 1.0,
    *,
    input_alpha: complex = DEFAULT_ALPHA,
    eta_classical: bool = False,
) -> list[ExperimentRow]:
    """Simulate the feed-forward device at each transmittance.

    ``gain_mode`` is ``"optimal"`` or a fixed optical gain ``g``.  Rows whose
    transmittance cannot be realized are returned with status
    ``"infeasible"``.  ``classification`` places the configured operation's
    analytic point relative to the optimality window.
    """
    rows = []
    for i, T in enumerate(T_list):
        T = float(T)
        try:
            if gain_mode == "optimal":
                G, g = optimal_electronic_gain(T)
            else:
                g = float(gain_mode)
                G = electronic_gain_for(T, g)
        except ValueError as exc:
            rows.append(ExperimentRow(T, None, None, "infeasible", reason=str(exc)))
            continue
        scheme = Feedforward(T, G)
        nu_cl, nu_out = analytic_targets(scheme)
        cls = classify_point(TradeoffPoint(nu_cl, nu_out, g))
        cfg = SimConfig(scheme, n_trials, row_seed(seed, i), input_alpha, eta, eta_classical)
        rows.append(ExperimentRow(T, G, g, "ok", cls, simulate_feedforward(cfg)))
    return rows


def result_row(res: SimResult, classification: Union[str, PointClass, None] = None) -> dict:
    """Flatten a result into the CSV dataset layout."""
    cfg = res.config
    sc = cfg.scheme
    if isinstance(classification, PointClass):
        classification = classification.value
    T = G = r = None
    if isinstance(sc, Feedforward):
        name, T, G = "feedforward", sc.T, sc.G
    else:
        name, r = "teleportation", sc.r
    return {
        "scheme": name,
        "T": T,
        "G": G,
        "g": sc.gain,
        "eta": cfg.eta,
        "n_trials": cfg.n_trials,
        "seed": cfg.seed,
        "nu_cl_hat": res.nu_cl_hat,
        "nu_cl_se": res.nu_cl_se,
        "var_out_x": res.var_out_x,
        "var_out_x_se": res.var_out_x_se,
        "var_out_p": res.var_out_p,
        "var_out_p_se": res.var_out_p_se,
        "nu_out_hat": res.nu_out_hat,
        "nu_out_se": res.nu_out_se,
        "classification": classification,
        "r": r,
        "status": "ok",
    }


def sweep_rows(rows: Sequence[ExperimentRow], *, n_trials: int, seed: int, eta: float) -> list[dict]:
    out = []
    for i, row in enumerate(rows):
        if row.result is None:
            blank = dict.fromkeys(CSV_COLUMNS)
            blank.update(
                scheme="feedforward", T=row.T, eta=eta, n_trials=n_trials,
                seed=row_seed(seed, i), classification="infeasible", status="infeasible",
            )
            out.append(blank)
        else:
            out.append(result_row(row.result, row.classification))
    return out
