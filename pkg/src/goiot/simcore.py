"""Seeded Monte-Carlo engine for the three detection strategies.

A run walks ``frames`` camera frames.  Ground truth per frame is Bernoulli
with p = event frequency; each detection stage fires with its TPR/FPR at the
configured threshold.  Energy and latency per frame depend only on whether the
frame was forwarded upstream, so a run is summarised by its counts and the
ledger is rebuilt from per-frame costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels, kpi
from .errors import ConfigMismatch, EmptyInput, InvalidFrequency
from .topology import Path, profile_path

STRATEGIES = ("TIoT", "IIoT-D", "IIoT-C")


@dataclass(frozen=True)
class Stage:
    model: kpi.ModelConfig
    threshold: float = 0.5

    def rates(self) -> tuple[float, float]:
        return self.model.detector.rates(self.threshold)


@dataclass(frozen=True)
class SimulationPlan:
    strategy: str
    radio: kpi.RadioConfig
    upf: kpi.UpfConfig
    device_stage: Stage | None = None
    cloud_stage: Stage | None = None
    device_hw: kpi.HardwareProfile | None = None
    cloud_hw: kpi.HardwareProfile | None = None
    path: Path | None = None
    frames: int = 43200
    frame_interval: float = 60.0
    event_frequency: float = 0.1
    runs: int = 1000
    master_seed: int = 0
    label: str = ""

    def __post_init__(self):
        if self.frames <= 0 or self.runs <= 0:
            raise ConfigMismatch("frames and runs must be positive")
        if not 0.0 <= self.event_frequency <= 1.0:
            raise InvalidFrequency(f"event frequency {self.event_frequency} outside [0, 1]")
        needs_device = self.strategy in ("IIoT-D", "IIoT-C")
        needs_cloud = self.strategy in ("TIoT", "IIoT-C")
        if self.strategy not in STRATEGIES:
            raise ConfigMismatch(f"unknown strategy {self.strategy!r}")
        if needs_device != (self.device_stage is not None) or needs_device != (self.device_hw is not None):
            raise ConfigMismatch(f"{self.strategy} {'requires' if needs_device else 'forbids'} a device stage and hardware")
        if needs_cloud != (self.cloud_stage is not None) or needs_cloud != (self.cloud_hw is not None):
            raise ConfigMismatch(f"{self.strategy} {'requires' if needs_cloud else 'forbids'} a cloud stage and hardware")
        if needs_cloud and self.path is None:
            raise ConfigMismatch(f"{self.strategy} requires a network path")

    @property
    def stages(self) -> list[Stage]:
        return [s for s in (self.device_stage, self.cloud_stage) if s is not None]

    def with_frequency(self, q: float) -> "SimulationPlan":
        return replace(self, event_frequency=q)


@dataclass(frozen=True)
class StrategyCosts:
    """Per-frame costs: ``always`` is paid by every frame, ``forward`` by each forwarded frame."""

    always: kpi.EnergyLedger
    forward: kpi.EnergyLedger
    device_latency: float
    forward_latency: kpi.LatencyBreakdown  # radio/transport/routing + cloud processing
    payload_bytes: float

    def frame_ledger(self, forwarded: bool) -> kpi.EnergyLedger:
        return self.always + self.forward if forwarded else self.always

    def detection_latency(self, strategy: str) -> kpi.LatencyBreakdown:
        if strategy == "IIoT-D":
            return kpi.LatencyBreakdown(processing=self.device_latency)
        f = self.forward_latency
        return kpi.LatencyBreakdown(f.radio, f.transport, f.routing, f.processing + self.device_latency)


def strategy_costs(plan: SimulationPlan) -> StrategyCosts:
    always = kpi.EnergyLedger()
    device_latency = 0.0
    if plan.device_stage is not None:
        always = kpi.total_energy(ue_proc=kpi.energy_processing(plan.device_hw, plan.device_stage.model))
        device_latency = kpi.inference_time(plan.device_hw, plan.device_stage.model)
    forward = kpi.EnergyLedger()
    forward_latency = kpi.LatencyBreakdown()
    payload = 0.0
    if plan.cloud_stage is not None:
        model = plan.cloud_stage.model
        prof = profile_path(plan.path, model, plan.radio, plan.upf)
        forward = prof.energy + kpi.total_energy(cloud_proc=kpi.energy_processing(plan.cloud_hw, model))
        forward_latency = replace(prof.latency, processing=kpi.inference_time(plan.cloud_hw, model))
        payload = model.payload_bytes
    return StrategyCosts(always, forward, device_latency, forward_latency, payload)


@dataclass(frozen=True)
class RunResult:
    confusion: kpi.ConfusionCounts
    energy: kpi.EnergyLedger
    latency_mean: float  # s, averaged over all frames
    latency_detection: float  # s, device + network + cloud for a forwarded frame
    data_sent_bytes: float
    forwarded: int
    positives: int

    @property
    def f1(self) -> float:
        return kpi.confusion_to_metrics(self.confusion)[2]


def generate_events(seed: int, frames: int, event_frequency: float) -> np.ndarray:
    """Boolean ground truth per frame; same seed gives the same sequence."""
    if not 0.0 <= event_frequency <= 1.0 or math.isnan(event_frequency):
        raise InvalidFrequency(f"event frequency {event_frequency} outside [0, 1]")
    return _kernels.uniforms_np(seed, frames, _kernels.STREAM_TRUTH) < event_frequency


def run_seeds(plan: SimulationPlan) -> list[int]:
    return [_kernels.derive_seed(plan.master_seed, i) for i in range(plan.runs)]


def _result_from_counts(plan: SimulationPlan, costs: StrategyCosts, counts) -> RunResult:
    tp, fp, fn, tn, forwarded, positives = (int(v) for v in counts)
    energy = costs.always.scaled(plan.frames) + costs.forward.scaled(forwarded)
    fwd_latency = costs.forward_latency.total if plan.cloud_stage is not None else 0.0
    return RunResult(
        confusion=kpi.ConfusionCounts(tp, fp, fn, tn),
        energy=energy,
        latency_mean=costs.device_latency + forwarded / plan.frames * fwd_latency,
        latency_detection=costs.device_latency + fwd_latency,
        data_sent_bytes=forwarded * costs.payload_bytes,
        forwarded=forwarded,
        positives=positives,
    )


def simulate_run(plan: SimulationPlan, ground_truth: Sequence[bool], seed: int) -> RunResult:
    """One run over an explicit ground-truth sequence.

    Stage decisions are drawn from ``seed``'s device and cloud streams; with
    ``ground_truth = generate_events(seed, ...)`` this reproduces the batched
    kernel exactly.
    """
    truth = np.asarray(ground_truth, dtype=bool)
    if truth.shape != (plan.frames,):
        raise ConfigMismatch(f"ground truth has {truth.size} frames, plan expects {plan.frames}")
    costs = strategy_costs(plan)
    outcomes = []
    forwarded = 0
    if plan.device_stage is not None:
        tpr, fpr = plan.device_stage.rates()
        u = _kernels.uniforms_np(seed, plan.frames, _kernels.STREAM_DEVICE)
        outcomes.append(u < np.where(truth, tpr, fpr))
    if plan.cloud_stage is not None:
        forwarded = int(np.count_nonzero(outcomes[0])) if outcomes else plan.frames
        tpr, fpr = plan.cloud_stage.rates()
        u = _kernels.uniforms_np(seed, plan.frames, _kernels.STREAM_CLOUD)
        outcomes.append(u < np.where(truth, tpr, fpr))
    c = kpi.cascade_confusion(outcomes, truth)
    counts = (c.tp, c.fp, c.fn, c.tn, forwarded, int(np.count_nonzero(truth)))
    return _result_from_counts(plan, costs, counts)


def simulate_runs(plan: SimulationPlan, backend: str | None = None) -> list[RunResult]:
    """All ``plan.runs`` runs; run i uses seed derive_seed(master_seed, i)."""
    costs = strategy_costs(plan)
    tpr1 = fpr1 = tpr2 = fpr2 = 1.0
    if plan.device_stage is not None:
        tpr1, fpr1 = plan.device_stage.rates()
    if plan.cloud_stage is not None:
        tpr2, fpr2 = plan.cloud_stage.rates()
    counts = _kernels.simulate_counts(
        run_seeds(plan), plan.frames, plan.event_frequency, tpr1, fpr1, tpr2, fpr2,
        plan.device_stage is not None, plan.cloud_stage is not None, backend=backend,
    )
    return [_result_from_counts(plan, costs, row) for row in counts]


SUMMARY_FIELDS = (
    *kpi.COMPONENTS, "energy_total", "data_sent_bytes", "latency_mean",
    "latency_detection", "forwarded", "f1_run",
)


def _summary_row(r: RunResult) -> list[float]:
    e = r.energy
    return [*(getattr(e, c) for c in kpi.COMPONENTS), e.total, r.data_sent_bytes,
            r.latency_mean, r.latency_detection, float(r.forwarded), r.f1]


@dataclass(frozen=True)
class AggregateResult:
    runs: int
    mean: dict[str, float]
    std: dict[str, float]
    confusion: kpi.ConfusionCounts  # summed over runs
    f1: float
    inaccuracy: float
    extra: dict = field(default_factory=dict)

    @property
    def energy(self) -> kpi.EnergyLedger:
        return kpi.EnergyLedger(**{c: self.mean[c] for c in kpi.COMPONENTS})


def aggregate(results: Sequence[RunResult]) -> AggregateResult:
    """Field-wise mean and population std over runs, summed in run order."""
    if not results:
        raise EmptyInput("cannot aggregate zero runs")
    table = np.array([_summary_row(r) for r in results], dtype=np.float64)
    mean = table.mean(axis=0)
    # rounding can push the mean of identical values a ulp outside [min, max]
    mean = np.clip(mean, table.min(axis=0), table.max(axis=0))
    std = np.sqrt(np.mean((table - mean) ** 2, axis=0))
    confusion = kpi.ConfusionCounts()
    for r in results:
        confusion = confusion + r.confusion
    _, _, f1, inacc = kpi.confusion_to_metrics(confusion)
    return AggregateResult(
        runs=len(results),
        mean=dict(zip(SUMMARY_FIELDS, mean.tolist())),
        std=dict(zip(SUMMARY_FIELDS, std.tolist())),
        confusion=confusion,
        f1=f1,
        inaccuracy=inacc,
    )


def run_plan(plan: SimulationPlan, backend: str | None = None) -> AggregateResult:
    return aggregate(simulate_runs(plan, backend=backend))


def sweep_event_frequency(plan: SimulationPlan, frequencies: Sequence[float],
                          backend: str | None = None) -> list[tuple[float, AggregateResult]]:
    """One aggregate per frequency.  Run seeds are shared across frequencies."""
    out = []
    for q in frequencies:
        if not 0.0 <= q <= 1.0:
            raise InvalidFrequency(f"event frequency {q} outside [0, 1]")
        out.append((float(q), run_plan(plan.with_frequency(float(q)), backend=backend)))
    return out


def forwarding_fraction(plan: SimulationPlan) -> float:
    """Expected share of frames sent upstream: q*TPR + (1-q)*FPR of the device stage."""
    if plan.cloud_stage is None:
        return 0.0
    if plan.device_stage is None:
        return 1.0
    tpr, fpr = plan.device_stage.rates()
    q = plan.event_frequency
    return q * tpr + (1.0 - q) * fpr


def analytic_f1(plan: SimulationPlan) -> float:
    return kpi.analytic_f1(plan.event_frequency, [s.rates() for s in plan.stages])
