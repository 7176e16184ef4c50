"""End-to-end KPI calculators: per-UE energy, latency and detection accuracy.

All functions are pure.  Inputs are SI: bytes, bits/s, seconds, watts, hertz.
GFLOP figures stay in units of 1e9 FLOP since only ratios of them are used.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .errors import MismatchedLengths

PROPAGATION_SPEED = 2e8  # m/s in fiber


@dataclass(frozen=True)
class HardwareProfile:
    name: str
    frequency: float  # Hz
    gflops: float  # sustained 1e9 FLOP/s
    kappa: float = 1.097e-27  # effective switched capacitance, (s/cycles)^3

    def __post_init__(self):
        if not (self.frequency > 0 and self.gflops > 0 and self.kappa > 0):
            raise ValueError(f"hardware {self.name!r}: frequency, gflops and kappa must be > 0")


@dataclass(frozen=True)
class DetectorProfile:
    """TPR and FPR as piecewise-linear functions of the decision threshold."""

    thresholds: tuple[float, ...]
    tpr: tuple[float, ...]
    fpr: tuple[float, ...]

    def __post_init__(self):
        th, tp, fp = (np.asarray(v, dtype=float) for v in (self.thresholds, self.tpr, self.fpr))
        if not (len(th) == len(tp) == len(fp) and len(th) >= 1):
            raise ValueError("detector tables must be non-empty and of equal length")
        if np.any(np.diff(th) <= 0) or th[0] < 0 or th[-1] > 1:
            raise ValueError("detector thresholds must be strictly increasing within [0, 1]")
        for name, arr in (("tpr", tp), ("fpr", fp)):
            if np.any(arr < 0) or np.any(arr > 1):
                raise ValueError(f"detector {name} must lie in [0, 1]")
            if np.any(np.diff(arr) > 0):
                raise ValueError(f"detector {name} must be non-increasing in the threshold")

    @classmethod
    def logistic(cls, pos_center: float, neg_center: float, scale: float, step: float = 0.05):
        """Synthetic profile: TPR(t) = sigmoid((pos_center - t)/scale), FPR likewise.

        Tabulated on a regular grid over [0, 1] with spacing ``step``.
        """
        if scale <= 0:
            raise ValueError("logistic scale must be > 0")
        n = int(round(1.0 / step))
        grid = np.round(np.linspace(0.0, 1.0, n + 1), 12)
        tpr = 1.0 / (1.0 + np.exp(-(pos_center - grid) / scale))
        fpr = 1.0 / (1.0 + np.exp(-(neg_center - grid) / scale))
        return cls(tuple(grid.tolist()), tuple(tpr.tolist()), tuple(fpr.tolist()))

    def rates(self, threshold: float) -> tuple[float, float]:
        """(TPR, FPR) at ``threshold``, linearly interpolated."""
        if not 0.0 <= threshold <= 1.0:
            raise ValueError(f"threshold {threshold} outside [0, 1]")
        tpr = float(np.interp(threshold, self.thresholds, self.tpr))
        fpr = float(np.interp(threshold, self.thresholds, self.fpr))
        return tpr, fpr


@dataclass(frozen=True)
class ModelConfig:
    name: str
    gflop: float  # 1e9 FLOP per inference
    payload_bytes: float  # bytes sent upstream when this model's input is transmitted
    detector: DetectorProfile
    resource_demand: float = 0.0

    def __post_init__(self):
        if self.gflop < 0 or self.payload_bytes < 0 or self.resource_demand < 0:
            raise ValueError(f"model {self.name!r}: negative size, cost or demand")

    @property
    def payload_bits(self) -> float:
        return self.payload_bytes * 8.0


@dataclass(frozen=True)
class RadioConfig:
    alpha: float  # slice rate, bits/s
    p_t: float  # UE transmit power, W
    p_ap_recv: float
    p_ap_proc: float
    p_pa: float
    eta: float
    ap_capacity: float  # bits/s

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("radio alpha must be > 0")
        if min(self.p_t, self.p_ap_recv, self.p_ap_proc, self.p_pa, self.eta) < 0:
            raise ValueError("radio powers and eta must be non-negative")
        if self.ap_capacity < self.alpha:
            raise ValueError("AP capacity must be at least the slice rate")


@dataclass(frozen=True)
class UpfConfig:
    l_upf: float = 0.0  # routing delay per UPF, s
    upf_rate: float = 1e12  # aggregate processed rate, bits/s
    power_slope: float = 10.625  # W per Gbps
    power_intercept: float = 8500.0  # W

    def __post_init__(self):
        if self.upf_rate <= 0:
            raise ValueError("UPF rate must be > 0")
        if min(self.l_upf, self.power_slope, self.power_intercept) < 0:
            raise ValueError("UPF parameters must be non-negative")

    @property
    def power(self) -> float:
        """Steady-state UPF power draw at ``upf_rate``, W."""
        return self.power_slope * self.upf_rate / 1e9 + self.power_intercept


@dataclass(frozen=True)
class EnergyLedger:
    """Per-component energy in joules."""

    ue_proc: float = 0.0
    ue_trans: float = 0.0
    ap_recv: float = 0.0
    ap_proc: float = 0.0
    tn: float = 0.0
    upf: float = 0.0
    cloud_proc: float = 0.0

    @property
    def total(self) -> float:
        return (
            self.ue_proc + self.ue_trans + self.ap_recv + self.ap_proc
            + self.tn + self.upf + self.cloud_proc
        )

    @property
    def network(self) -> float:
        """Everything except the two inference terms."""
        return self.ue_trans + self.ap_recv + self.ap_proc + self.tn + self.upf

    def scaled(self, factor: float) -> "EnergyLedger":
        return EnergyLedger(*(getattr(self, f.name) * factor for f in fields(self)))

    def __add__(self, other: "EnergyLedger") -> "EnergyLedger":
        return EnergyLedger(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def as_dict(self) -> dict[str, float]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["total"] = self.total
        return out


COMPONENTS = tuple(f.name for f in fields(EnergyLedger))


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def frames(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)


@dataclass(frozen=True)
class LatencyBreakdown:
    radio: float = 0.0
    transport: float = 0.0
    routing: float = 0.0
    processing: float = 0.0

    @property
    def total(self) -> float:
        return self.radio + self.transport + self.routing + self.processing


# -- energy -----------------------------------------------------------------

def inference_time(hw: HardwareProfile, m: ModelConfig) -> float:
    return m.gflop / hw.gflops


def energy_processing(hw: HardwareProfile, m: ModelConfig) -> float:
    """kappa * f^3 * tau with tau = model GFLOP / hardware GFLOPS."""
    return hw.kappa * hw.frequency ** 3 * inference_time(hw, m)


def energy_transmission(m: ModelConfig, r: RadioConfig) -> float:
    return m.payload_bits / r.alpha * r.p_t


def energy_ap(m: ModelConfig, r: RadioConfig) -> tuple[float, float]:
    """(reception, baseband processing) energy at the AP.

    The reception window is the UE transmission time, so the UE's share of
    AP volume times the window reduces to the UE bits over AP capacity.
    """
    t_r = m.payload_bits / r.alpha
    share = m.payload_bits / (r.ap_capacity * t_r) if t_r > 0 else 0.0
    overhead = 1.0 + r.eta
    recv = share * t_r * (r.p_ap_recv + r.p_pa) * overhead
    proc = share * t_r * r.p_ap_proc * overhead
    return recv, proc


def energy_transport(m: ModelConfig, links: Iterable) -> float:
    """Sum over used links of (bits / link rate) * 2 * (P_nic + P_tr).

    ``links`` holds objects with ``rate``, ``p_nic`` and ``p_tr`` attributes.
    """
    bits = m.payload_bits
    total = 0.0
    for link in links:
        total += bits / link.rate * 2.0 * (link.p_nic + link.p_tr)
    return total


def energy_upf(m: ModelConfig, u: UpfConfig, n_upf: int) -> float:
    return n_upf * (m.payload_bits / u.upf_rate) * u.power


def total_energy(**components: float) -> EnergyLedger:
    """Assemble a ledger; components not given contribute zero."""
    unknown = set(components) - set(COMPONENTS)
    if unknown:
        raise TypeError(f"unknown energy components: {sorted(unknown)}")
    return EnergyLedger(**components)


# -- latency ----------------------------------------------------------------

def latency_components(m: ModelConfig, hw: HardwareProfile, path=None,
                       radio: RadioConfig | None = None,
                       upf: UpfConfig | None = None) -> LatencyBreakdown:
    """Latency split for running ``m`` on ``hw``.

    With ``path=None`` the inference runs on the device and all network terms
    are zero.  Otherwise ``path`` is a topology ``Path``; its aggregate delay
    override, when set, replaces the distance/switch formula.
    """
    processing = inference_time(hw, m)
    if path is None:
        return LatencyBreakdown(processing=processing)
    if radio is None or upf is None:
        raise ValueError("radio and upf configs are required for a network path")
    return LatencyBreakdown(
        radio=m.payload_bits / radio.alpha,
        transport=path.transport_delay(),
        routing=path.n_upf * upf.l_upf,
        processing=processing,
    )


# -- accuracy ---------------------------------------------------------------

def confusion_to_metrics(c: ConfusionCounts) -> tuple[float, float, float, float]:
    """(precision, recall, F1, inaccuracy); zero denominators give 0."""
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = f1_score(precision, recall)
    return precision, recall, f1, 1.0 - f1


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def f1_from_counts(tp: float, fp: float, fn: float) -> float:
    """F1 = 2TP / (2TP + FP + FN); also valid for expected (fractional) counts."""
    denom = 2.0 * tp + fp + fn
    return 2.0 * tp / denom if denom > 0 and tp > 0 else 0.0


def cascade_confusion(stage_outcomes: Sequence[Sequence[bool]] | np.ndarray,
                      ground_truth: Sequence[bool] | np.ndarray) -> ConfusionCounts:
    """Confusion counts for a filtering cascade ordered device -> cloud.

    ``stage_outcomes[k][i]`` is True when stage ``k`` flags frame ``i``.  A frame
    reaches stage k only if every earlier stage flagged it.  Every stage can
    cause a false negative; TP and FP are decided by the last stage only.
    """
    outcomes = np.atleast_2d(np.asarray(stage_outcomes, dtype=bool))
    truth = np.asarray(ground_truth, dtype=bool)
    if outcomes.ndim != 2 or outcomes.shape[1] != truth.shape[0]:
        raise MismatchedLengths(
            f"stage outcomes {outcomes.shape} do not match {truth.shape[0]} ground-truth frames"
        )
    survives = np.logical_and.reduce(outcomes, axis=0) if outcomes.shape[0] else np.ones_like(truth)
    tp = int(np.count_nonzero(survives & truth))
    fp = int(np.count_nonzero(survives & ~truth))
    fn = int(np.count_nonzero(~survives & truth))
    tn = int(np.count_nonzero(~survives & ~truth))
    return ConfusionCounts(tp, fp, fn, tn)


def expected_confusion(n: float, q: float, stages: Sequence[tuple[float, float]]) -> tuple[float, float, float, float]:
    """Closed-form E[TP], E[FP], E[FN], E[TN] for independent stages.

    ``stages`` is a list of (TPR, FPR) pairs, device first.
    """
    tpr = float(np.prod([s[0] for s in stages])) if stages else 1.0
    fpr = float(np.prod([s[1] for s in stages])) if stages else 1.0
    tp = n * q * tpr
    fn = n * q * (1.0 - tpr)
    fp = n * (1.0 - q) * fpr
    tn = n * (1.0 - q) * (1.0 - fpr)
    return tp, fp, fn, tn


def analytic_f1(q: float, stages: Sequence[tuple[float, float]]) -> float:
    tp, fp, fn, _ = expected_confusion(1.0, q, stages)
    return f1_from_counts(tp, fp, fn)
