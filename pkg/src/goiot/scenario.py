"""Scenario files: JSON schema, unit normalisation and cross-reference checks."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path as FsPath
from typing import Any

import jsonschema

from . import kpi
from .errors import DanglingReference, InputError, ParseError, SchemaError
from .simcore import STRATEGIES, SimulationPlan, Stage
from .topology import NetworkGraph, build_graph, shortest_path
from .units import parse_quantity

SCHEMA_VERSION = 1
SCENARIO_DIR_ENV = "GOIOT_SCENARIO_DIR"
BUNDLED = {"paper-repro": "paper-repro.json"}

_quantity = {"type": ["number", "string"]}
_stage = {
    "type": "object",
    "required": ["model"],
    "properties": {"model": {"type": "string"}, "threshold": {"type": "number", "minimum": 0, "maximum": 1}},
    "additionalProperties": False,
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["schema_version", "topology", "hardware", "models", "radio", "upf", "strategies", "simulation"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "topology": {
            "type": "object",
            "required": ["nodes", "edges"],
            "properties": {
                "switch_time": _quantity,
                "nodes": {"type": "array", "minItems": 2, "items": {
                    "type": "object",
                    "required": ["id", "kind"],
                    "properties": {
                        "id": {"type": "string"},
                        "kind": {"enum": ["access-point", "switch", "upf", "cloud"]},
                        "t_sw": _quantity,
                        "hardware": {"type": "string"},
                        "capacity": {"type": "number", "minimum": 0},
                    },
                    "additionalProperties": False,
                }},
                "edges": {"type": "array", "minItems": 1, "items": {
                    "type": "object",
                    "required": ["a", "b", "rate"],
                    "properties": {
                        "a": {"type": "string"}, "b": {"type": "string"},
                        "length": _quantity, "rate": _quantity, "p_nic": _quantity, "p_tr": _quantity,
                    },
                    "additionalProperties": False,
                }},
                "path_overrides": {"type": "array", "items": {
                    "type": "object",
                    "required": ["ap", "cloud"],
                    "properties": {
                        "ap": {"type": "string"}, "cloud": {"type": "string"},
                        "transport_delay": _quantity, "n_upf": {"type": "integer", "minimum": 0},
                        "note": {"type": "string"},
                    },
                    "additionalProperties": False,
                }},
            },
            "additionalProperties": False,
        },
        "hardware": {"type": "array", "minItems": 1, "items": {
            "type": "object",
            "required": ["id", "frequency", "gflops"],
            "properties": {
                "id": {"type": "string"}, "frequency": _quantity,
                "gflops": {"type": "number", "exclusiveMinimum": 0},
                "kappa": {"type": "number", "exclusiveMinimum": 0},
                "note": {"type": "string"},
            },
            "additionalProperties": False,
        }},
        "models": {"type": "array", "minItems": 1, "items": {
            "type": "object",
            "required": ["id", "gflop", "payload", "detector"],
            "properties": {
                "id": {"type": "string"},
                "gflop": {"type": "number", "minimum": 0},
                "payload": _quantity,
                "resource_demand": {"type": "number", "minimum": 0},
                "detector": {"oneOf": [
                    {"type": "object", "required": ["thresholds", "tpr", "fpr"],
                     "properties": {"thresholds": {"type": "array", "items": {"type": "number"}},
                                    "tpr": {"type": "array", "items": {"type": "number"}},
                                    "fpr": {"type": "array", "items": {"type": "number"}}},
                     "additionalProperties": False},
                    {"type": "object", "required": ["logistic"],
                     "properties": {"logistic": {
                         "type": "object", "required": ["pos_center", "neg_center", "scale"],
                         "properties": {"pos_center": {"type": "number"}, "neg_center": {"type": "number"},
                                        "scale": {"type": "number", "exclusiveMinimum": 0},
                                        "step": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
                         "additionalProperties": False}},
                     "additionalProperties": False},
                ]},
            },
            "additionalProperties": False,
        }},
        "radio": {
            "type": "object",
            "required": ["alpha", "p_t", "p_ap_recv", "p_ap_proc", "p_pa", "eta", "ap_capacity"],
            "properties": {k: _quantity for k in ("alpha", "p_t", "p_ap_recv", "p_ap_proc", "p_pa", "ap_capacity")}
            | {"eta": {"type": "number", "minimum": 0}, "note": {"type": "string"}},
            "additionalProperties": False,
        },
        "upf": {
            "type": "object",
            "required": ["l_upf", "upf_rate"],
            "properties": {"l_upf": _quantity, "upf_rate": _quantity,
                           "power_slope": {"type": "number", "minimum": 0},
                           "power_intercept": {"type": "number", "minimum": 0},
                           "note": {"type": "string"}},
            "additionalProperties": False,
        },
        "strategies": {"type": "array", "minItems": 1, "items": {
            "type": "object",
            "required": ["id", "kind"],
            "properties": {
                "id": {"type": "string"},
                "kind": {"enum": list(STRATEGIES)},
                "device_hardware": {"type": "string"},
                "device_stage": _stage,
                "cloud_stage": _stage,
                "cloud": {"type": "string"},
                "ap": {"type": "string"},
            },
            "additionalProperties": False,
        }},
        "simulation": {
            "type": "object",
            "required": ["frames", "event_frequency", "runs", "master_seed"],
            "properties": {
                "frames": {"type": "integer", "minimum": 1},
                "frame_interval": _quantity,
                "event_frequency": {"type": "number", "minimum": 0, "maximum": 1},
                "runs": {"type": "integer", "minimum": 1},
                "master_seed": {"type": "integer", "minimum": 0},
                "sweep_frequencies": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
            },
            "additionalProperties": False,
        },
        "optimizer": {
            "type": "object",
            "properties": {
                "ap": {"type": "string"},
                "device_hardware": {"type": "string"},
                "device_models": {"type": "array", "items": {"type": "string"}},
                "device_thresholds": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
                "cloud_models": {"type": "array", "items": {"type": "string"}},
                "cloud_threshold": {"type": "number", "minimum": 0, "maximum": 1},
                "eps_latency": {"type": ["number", "string", "null"]},
                "accuracy_grid": {"type": "array", "items": {"type": "number"}},
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"format": {"enum": ["csv", "json"]}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


@dataclass(frozen=True)
class StrategyDef:
    id: str
    kind: str
    device_hardware: str | None
    device_stage: tuple[str, float] | None
    cloud_stage: tuple[str, float] | None
    cloud: str | None
    ap: str | None


@dataclass(frozen=True)
class SimulationSettings:
    frames: int
    frame_interval: float
    event_frequency: float
    runs: int
    master_seed: int
    sweep_frequencies: tuple[float, ...]


@dataclass(frozen=True)
class OptimizerSettings:
    ap: str
    device_hardware: str
    device_models: tuple[str, ...]
    device_thresholds: tuple[float, ...]
    cloud_models: tuple[str, ...]
    cloud_threshold: float
    eps_latency: float | None
    accuracy_grid: tuple[float, ...] | None


@dataclass
class Scenario:
    name: str
    graph: NetworkGraph
    hardware: dict[str, kpi.HardwareProfile]
    models: dict[str, kpi.ModelConfig]
    radio: kpi.RadioConfig
    upf: kpi.UpfConfig
    strategies: dict[str, StrategyDef]
    simulation: SimulationSettings
    optimizer: OptimizerSettings
    output_format: str = "csv"
    raw: dict = field(default_factory=dict, repr=False)

    def plan_for(self, strategy_id: str, runs: int | None = None, seed: int | None = None,
                 event_frequency: float | None = None) -> SimulationPlan:
        if strategy_id not in self.strategies:
            raise DanglingReference(strategy_id, "command line")
        s = self.strategies[strategy_id]
        sim = self.simulation
        path = cloud_hw = None
        if s.cloud is not None:
            path = shortest_path(self.graph, s.ap, s.cloud)
            cloud_hw = self.hardware[self.graph.nodes[s.cloud].hardware]
        return SimulationPlan(
            strategy=s.kind,
            radio=self.radio,
            upf=self.upf,
            device_stage=Stage(self.models[s.device_stage[0]], s.device_stage[1]) if s.device_stage else None,
            cloud_stage=Stage(self.models[s.cloud_stage[0]], s.cloud_stage[1]) if s.cloud_stage else None,
            device_hw=self.hardware[s.device_hardware] if s.device_hardware else None,
            cloud_hw=cloud_hw,
            path=path,
            frames=sim.frames,
            frame_interval=sim.frame_interval,
            event_frequency=sim.event_frequency if event_frequency is None else event_frequency,
            runs=sim.runs if runs is None else runs,
            master_seed=sim.master_seed if seed is None else seed,
            label=s.id,
        )


def resolve_scenario_path(name_or_path: str | os.PathLike) -> FsPath | resources.abc.Traversable:
    p = FsPath(name_or_path)
    if p.is_file():
        return p
    base = os.environ.get(SCENARIO_DIR_ENV)
    if base:
        for candidate in (FsPath(base) / str(name_or_path), FsPath(base) / f"{name_or_path}.json"):
            if candidate.is_file():
                return candidate
    if str(name_or_path) in BUNDLED:
        return resources.files("goiot") / "data" / BUNDLED[str(name_or_path)]
    raise ParseError(f"scenario {str(name_or_path)!r} not found")


def load_scenario(path: str | os.PathLike) -> Scenario:
    """Load a scenario from a path, a name in $GOIOT_SCENARIO_DIR, or a bundled name."""
    source = resolve_scenario_path(path)
    try:
        raw = json.loads(source.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read scenario {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"scenario {path} is not valid JSON: {exc}") from None
    return scenario_from_dict(raw)


def _q(value, dimension, where) -> float:
    try:
        out = parse_quantity(value, dimension)
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None
    if out < 0:
        raise SchemaError(where, "must be non-negative")
    return out


def _unique(items, where) -> dict[str, dict]:
    out = {}
    for item in items:
        if item["id"] in out:
            raise SchemaError(where, f"duplicate id {item['id']!r}")
        out[item["id"]] = item
    return out


def _ref(ref, table, where):
    if ref not in table:
        raise DanglingReference(ref, where)
    return ref


def _detector(raw) -> kpi.DetectorProfile:
    if "logistic" in raw:
        lg = raw["logistic"]
        return kpi.DetectorProfile.logistic(lg["pos_center"], lg["neg_center"], lg["scale"], lg.get("step", 0.05))
    return kpi.DetectorProfile(tuple(raw["thresholds"]), tuple(raw["tpr"]), tuple(raw["fpr"]))


def scenario_from_dict(raw: dict) -> Scenario:
    """Validate ``raw`` and build a Scenario (all units converted to SI)."""
    if not isinstance(raw, dict):
        raise SchemaError("<root>", "scenario must be a JSON object")
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(where, err.message)
    try:
        return _build(raw)
    except (SchemaError, DanglingReference):
        raise
    except InputError as exc:
        raise SchemaError("topology", str(exc)) from None
    except ValueError as exc:
        raise SchemaError("<value>", str(exc)) from None


def _build(raw: dict) -> Scenario:
    hw_raw = _unique(raw["hardware"], "hardware")
    hardware = {
        hid: kpi.HardwareProfile(hid, _q(h["frequency"], "frequency", f"hardware/{hid}/frequency"),
                                 float(h["gflops"]), float(h.get("kappa", 1.097e-27)))
        for hid, h in hw_raw.items()
    }
    models = {}
    for mid, m in _unique(raw["models"], "models").items():
        models[mid] = kpi.ModelConfig(
            name=mid,
            gflop=float(m["gflop"]),
            payload_bytes=_q(m["payload"], "size", f"models/{mid}/payload"),
            detector=_detector(m["detector"]),
            resource_demand=float(m.get("resource_demand", m["gflop"])),
        )
    r = raw["radio"]
    radio = kpi.RadioConfig(
        alpha=_q(r["alpha"], "rate", "radio/alpha"),
        p_t=_q(r["p_t"], "power", "radio/p_t"),
        p_ap_recv=_q(r["p_ap_recv"], "power", "radio/p_ap_recv"),
        p_ap_proc=_q(r["p_ap_proc"], "power", "radio/p_ap_proc"),
        p_pa=_q(r["p_pa"], "power", "radio/p_pa"),
        eta=float(r["eta"]),
        ap_capacity=_q(r["ap_capacity"], "rate", "radio/ap_capacity"),
    )
    u = raw["upf"]
    upf = kpi.UpfConfig(
        l_upf=_q(u["l_upf"], "time", "upf/l_upf"),
        upf_rate=_q(u["upf_rate"], "rate", "upf/upf_rate"),
        power_slope=float(u.get("power_slope", 10.625)),
        power_intercept=float(u.get("power_intercept", 8500.0)),
    )
    if upf.upf_rate <= 0:
        raise SchemaError("upf/upf_rate", "must be > 0")

    graph = build_graph(raw["topology"])
    clouds = graph.clouds
    aps = graph.access_points
    if not clouds or not aps:
        raise SchemaError("topology/nodes", "need at least one access point and one cloud")
    for c in clouds:
        hw = graph.nodes[c].hardware
        if hw is None:
            raise SchemaError(f"topology/nodes/{c}", "cloud nodes need a hardware id")
        _ref(hw, hardware, f"cloud node {c}")

    strategies = {}
    for sid, s in _unique(raw["strategies"], "strategies").items():
        kind = s["kind"]
        where = f"strategies/{sid}"
        need_dev = kind in ("IIoT-D", "IIoT-C")
        need_cloud = kind in ("TIoT", "IIoT-C")
        for key, needed in (("device_stage", need_dev), ("device_hardware", need_dev),
                            ("cloud_stage", need_cloud), ("cloud", need_cloud)):
            if needed and key not in s:
                raise SchemaError(f"{where}/{key}", f"required for {kind}")
            if not needed and key in s:
                raise SchemaError(f"{where}/{key}", f"not allowed for {kind}")
        dev = cloud_stage = None
        if need_dev:
            _ref(s["device_hardware"], hardware, where)
            dev = (_ref(s["device_stage"]["model"], models, where), float(s["device_stage"].get("threshold", 0.5)))
        ap = None
        if need_cloud:
            _ref(s["cloud"], {c: 1 for c in clouds}, where)
            cloud_stage = (_ref(s["cloud_stage"]["model"], models, where), float(s["cloud_stage"].get("threshold", 0.5)))
            ap = _ref(s.get("ap", aps[0]), {a: 1 for a in aps}, where)
        strategies[sid] = StrategyDef(sid, kind, s.get("device_hardware"), dev, cloud_stage, s.get("cloud"), ap)

    sim = raw["simulation"]
    simulation = SimulationSettings(
        frames=int(sim["frames"]),
        frame_interval=_q(sim.get("frame_interval", 60.0), "time", "simulation/frame_interval"),
        event_frequency=float(sim["event_frequency"]),
        runs=int(sim["runs"]),
        master_seed=int(sim["master_seed"]),
        sweep_frequencies=tuple(float(v) for v in sim.get("sweep_frequencies", [k / 10 for k in range(1, 11)])),
    )

    o = raw.get("optimizer", {})
    device_models = tuple(o.get("device_models", []))
    cloud_models = tuple(o.get("cloud_models", sorted(models)))
    for mid in device_models + cloud_models:
        _ref(mid, models, "optimizer")
    dev_hw = o.get("device_hardware", sorted(hardware)[0])
    _ref(dev_hw, hardware, "optimizer/device_hardware")
    eps_latency = o.get("eps_latency")
    optimizer = OptimizerSettings(
        ap=_ref(o.get("ap", aps[0]), {a: 1 for a in aps}, "optimizer/ap"),
        device_hardware=dev_hw,
        device_models=device_models,
        device_thresholds=tuple(float(t) for t in o.get("device_thresholds", [0.5])),
        cloud_models=cloud_models,
        cloud_threshold=float(o.get("cloud_threshold", 0.5)),
        eps_latency=None if eps_latency is None else _q(eps_latency, "time", "optimizer/eps_latency"),
        accuracy_grid=tuple(o["accuracy_grid"]) if "accuracy_grid" in o else None,
    )
    return Scenario(
        name=raw.get("name", "scenario"),
        graph=graph,
        hardware=hardware,
        models=models,
        radio=radio,
        upf=upf,
        strategies=strategies,
        simulation=simulation,
        optimizer=optimizer,
        output_format=raw.get("output", {}).get("format", "csv"),
        raw=raw,
    )
