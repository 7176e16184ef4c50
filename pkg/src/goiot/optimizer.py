"""Placement optimisation: choose (model, compute node, path) under energy,
latency and inaccuracy objectives with the epsilon-constraint method.

Exactly one x_{m,c} is set, and every path p with f_{p,c} = 1 is then forced
on for that model.  The feasible set therefore has |M|*|C| members and is
solved exactly by scoring all of them at once with numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels, kpi
from .errors import Infeasible, InputError, MissingPath
from .topology import all_shortest_paths, profile_path

OBJECTIVES = ("energy", "latency")
FAMILIES = ("TIoT", "IIoT-D", "IIoT-C")


@dataclass(frozen=True)
class PlacementInstance:
    models: tuple[str, ...]
    clouds: tuple[str, ...]
    paths: tuple[str, ...]
    e_mc: np.ndarray  # (M, C) J per inference
    l_mc: np.ndarray  # (M, C) s
    r_mc: np.ndarray  # (M, C) abstract resource units
    e_mp: np.ndarray  # (M, P) J per inference
    l_mp: np.ndarray  # (M, P) s
    f_pc: np.ndarray  # (P, C) 0/1 termination
    a: np.ndarray  # (M,) accuracy in [0, 1]
    R: np.ndarray  # (C,) capacity, may be inf
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        M, C, P = len(self.models), len(self.clouds), len(self.paths)
        if min(M, C, P) == 0:
            raise InputError("instance needs at least one model, cloud and path")
        shapes = {"e_mc": (M, C), "l_mc": (M, C), "r_mc": (M, C), "e_mp": (M, P),
                  "l_mp": (M, P), "f_pc": (P, C), "a": (M,), "R": (C,)}
        for name, shape in shapes.items():
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise InputError(f"{name} has shape {arr.shape}, expected {shape}")
            if np.any(np.isnan(arr)) or np.any(arr < 0):
                raise InputError(f"{name} must be non-negative")
            if name != "R" and not np.all(np.isfinite(arr)):
                raise InputError(f"{name} must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.a > 1):
            raise InputError("accuracies must lie in [0, 1]")
        if not np.all((self.f_pc == 0) | (self.f_pc == 1)):
            raise InputError("f_pc must be 0/1")
        if not np.all(self.f_pc.sum(axis=1) == 1):
            raise InputError("every path must terminate at exactly one compute node")
        for c, cloud in enumerate(self.clouds):
            if not self.f_pc[:, c].any():
                raise MissingPath(cloud)

    @property
    def shape(self) -> tuple[int, int, int]:
        return len(self.models), len(self.clouds), len(self.paths)

    def scaled_energy(self, factor: float) -> "PlacementInstance":
        return PlacementInstance(self.models, self.clouds, self.paths, self.e_mc * factor,
                                 self.l_mc, self.r_mc, self.e_mp * factor, self.l_mp,
                                 self.f_pc, self.a, self.R, dict(self.meta))


@dataclass(frozen=True)
class Solution:
    m: int
    c: int
    model: str
    cloud: str
    paths: tuple[str, ...]
    energy: float  # f1, J per inference
    latency: float  # f2, s
    inaccuracy: float  # 1 - a_m

    @property
    def objectives(self) -> tuple[float, float, float]:
        return self.energy, self.latency, self.inaccuracy

    def x(self, inst: PlacementInstance) -> np.ndarray:
        out = np.zeros((len(inst.models), len(inst.clouds)), dtype=int)
        out[self.m, self.c] = 1
        return out

    def y(self, inst: PlacementInstance) -> np.ndarray:
        out = np.zeros((len(inst.models), len(inst.paths)), dtype=int)
        for p in self.paths:
            out[self.m, inst.paths.index(p)] = 1
        return out


@dataclass(frozen=True)
class ParetoFront:
    points: tuple[Solution, ...]
    objective: str = "energy"
    infeasible: tuple[float, ...] = ()  # eps_A grid values with no feasible solution

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def _objective_matrices(inst: PlacementInstance) -> tuple[np.ndarray, np.ndarray]:
    """Total energy and latency for every (m, c) with its forced path set.

    Path terms are accumulated in path order and then added to the node term,
    matching the scalar loop in ``enumerate_oracle`` bit for bit.
    """
    M, C, P = inst.shape
    e_path = np.zeros((M, C))
    l_path = np.zeros((M, C))
    for p in range(P):
        c = int(np.argmax(inst.f_pc[p]))
        e_path[:, c] += inst.e_mp[:, p]
        l_path[:, c] += inst.l_mp[:, p]
    return e_path + inst.e_mc, l_path + inst.l_mc


def _solution(inst: PlacementInstance, m: int, c: int, energy: float, latency: float) -> Solution:
    paths = tuple(inst.paths[p] for p in range(len(inst.paths)) if inst.f_pc[p, c] == 1)
    return Solution(m, c, inst.models[m], inst.clouds[c], paths, float(energy), float(latency),
                    float(1.0 - inst.a[m]))


def _check_objective(objective: str):
    if objective not in OBJECTIVES:
        raise InputError(f"objective must be one of {OBJECTIVES}, got {objective!r}")


def solve_epsilon(inst: PlacementInstance, objective: str = "energy",
                  eps_L: float | None = None, eps_A: float | None = None) -> Solution:
    """Exact optimum of one objective subject to latency <= eps_L, a_m >= eps_A
    and r_{m,c} <= R_c.

    Ties: energy objective breaks by latency, then inaccuracy, then (m, c)
    index; latency objective by energy, then inaccuracy, then (m, c).
    """
    _check_objective(objective)
    energy, latency = _objective_matrices(inst)
    M, C, _ = inst.shape
    feasible = inst.r_mc <= inst.R[None, :]
    if eps_L is not None:
        feasible &= latency <= eps_L
    if eps_A is not None:
        feasible &= (inst.a >= eps_A)[:, None]
    mm, cc = np.nonzero(feasible)
    if mm.size == 0:
        raise Infeasible(f"no feasible placement for eps_L={eps_L}, eps_A={eps_A}")
    e, l = energy[mm, cc], latency[mm, cc]
    inacc = 1.0 - inst.a[mm]
    primary, secondary = (e, l) if objective == "energy" else (l, e)
    order = np.lexsort((cc, mm, inacc, secondary, primary))
    best = order[0]
    return _solution(inst, int(mm[best]), int(cc[best]), e[best], l[best])


def enumerate_oracle(inst: PlacementInstance, objective: str = "energy",
                     eps_L: float | None = None, eps_A: float | None = None) -> Solution:
    """Reference solver: plain loops over every (m, c), no numpy arithmetic."""
    _check_objective(objective)
    M, C, P = inst.shape
    best_key = None
    best = None
    for m in range(M):
        acc = float(inst.a[m])
        if eps_A is not None and not acc >= eps_A:
            continue
        for c in range(C):
            if not float(inst.r_mc[m, c]) <= float(inst.R[c]):
                continue
            e_path = 0.0
            l_path = 0.0
            for p in range(P):
                if inst.f_pc[p, c] == 1:
                    e_path += float(inst.e_mp[m, p])
                    l_path += float(inst.l_mp[m, p])
            energy = e_path + float(inst.e_mc[m, c])
            latency = l_path + float(inst.l_mc[m, c])
            if eps_L is not None and not latency <= eps_L:
                continue
            inacc = 1.0 - acc
            if objective == "energy":
                key = (energy, latency, inacc, m, c)
            else:
                key = (latency, energy, inacc, m, c)
            if best_key is None or key < best_key:
                best_key = key
                best = (m, c, energy, latency)
    if best is None:
        raise Infeasible(f"no feasible placement for eps_L={eps_L}, eps_A={eps_A}")
    return _solution(inst, *best)


def enumerate_all(inst: PlacementInstance, eps_L: float | None = None) -> list[Solution]:
    """Every resource- and latency-feasible placement (the scatter points of a front plot)."""
    energy, latency = _objective_matrices(inst)
    out = []
    for m in range(len(inst.models)):
        for c in range(len(inst.clouds)):
            if inst.r_mc[m, c] > inst.R[c]:
                continue
            if eps_L is not None and latency[m, c] > eps_L:
                continue
            out.append(_solution(inst, m, c, energy[m, c], latency[m, c]))
    return out


def pareto_filter(points: Sequence[Sequence[float]] | np.ndarray) -> list[int]:
    """Indices of points not dominated by any other (minimisation).

    Identical points do not dominate each other, so duplicates are all kept.
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.size == 0:
        return []
    if arr.ndim == 1:
        arr = arr[:, None]
    return np.flatnonzero(_kernels.pareto_mask(arr)).tolist()


def accuracy_grid(inst: PlacementInstance) -> list[float]:
    return sorted(set(float(v) for v in inst.a))


def epsilon_sweep(inst: PlacementInstance, grid: Sequence[float] | None = None,
                  eps_L: float | None = None, objective: str = "energy") -> ParetoFront:
    """Solve once per eps_A in ``grid`` (default: the achievable accuracies) and
    keep the non-dominated results in (objective, inaccuracy).

    Grid points without a feasible placement are recorded in ``infeasible``.
    """
    _check_objective(objective)
    grid = accuracy_grid(inst) if grid is None else sorted(float(g) for g in grid)
    if not grid:
        raise InputError("accuracy grid is empty")
    found: dict[tuple[int, int], Solution] = {}
    infeasible = []
    for eps_A in grid:
        try:
            sol = solve_epsilon(inst, objective, eps_L, eps_A)
        except Infeasible:
            infeasible.append(eps_A)
            continue
        found.setdefault((sol.m, sol.c), sol)
    sols = list(found.values())
    key = (lambda s: s.energy) if objective == "energy" else (lambda s: s.latency)
    keep = pareto_filter([(key(s), s.inaccuracy) for s in sols])
    front = sorted((sols[i] for i in keep), key=lambda s: (s.inaccuracy, key(s), s.m, s.c))
    return ParetoFront(tuple(front), objective, tuple(infeasible))


def random_instance(rng: np.random.Generator, n_models: int, n_clouds: int, n_paths: int,
                    tight: bool = True) -> PlacementInstance:
    """Random instance for property tests and benchmarks (n_paths >= n_clouds)."""
    if n_paths < n_clouds:
        raise InputError("need at least one path per cloud")
    owner = np.concatenate([np.arange(n_clouds), rng.integers(0, n_clouds, n_paths - n_clouds)])
    rng.shuffle(owner)
    f_pc = np.zeros((n_paths, n_clouds))
    f_pc[np.arange(n_paths), owner] = 1
    r_mc = rng.uniform(0, 10, (n_models, n_clouds))
    R = rng.uniform(3, 12, n_clouds) if tight else np.full(n_clouds, np.inf)
    return PlacementInstance(
        models=tuple(f"m{i}" for i in range(n_models)),
        clouds=tuple(f"c{i}" for i in range(n_clouds)),
        paths=tuple(f"p{i}" for i in range(n_paths)),
        e_mc=rng.uniform(0, 5, (n_models, n_clouds)),
        l_mc=rng.uniform(0, 1, (n_models, n_clouds)),
        r_mc=r_mc,
        e_mp=rng.uniform(0, 5, (n_models, n_paths)),
        l_mp=rng.uniform(0, 1, (n_models, n_paths)),
        f_pc=f_pc,
        a=rng.uniform(0, 1, n_models),
        R=R,
    )


# -- building an instance from a scenario ---------------------------------------

@dataclass(frozen=True)
class Candidate:
    """One entry of M: a cloud model, optionally preceded by a device filter."""

    label: str
    cloud_model: str | None
    cloud_threshold: float
    device_model: str | None = None
    device_threshold: float | None = None


def _candidates(family: str, settings) -> list[Candidate]:
    if family == "TIoT":
        return [Candidate(m, m, settings.cloud_threshold) for m in settings.cloud_models]
    if family == "IIoT-D":
        return [Candidate(m, None, settings.cloud_threshold, m, settings.cloud_threshold)
                for m in settings.device_models]
    if family == "IIoT-C":
        out = []
        for dm in settings.device_models:
            for th in settings.device_thresholds:
                for cm in settings.cloud_models:
                    out.append(Candidate(f"{dm}-{cm}[{th:g}]", cm, settings.cloud_threshold, dm, th))
        return out
    raise InputError(f"unknown strategy family {family!r}; expected one of {FAMILIES}")


def build_instance(scenario, family: str = "TIoT", event_frequency: float | None = None,
                   device_hardware: str | None = None) -> PlacementInstance:
    """Coefficient matrices for one strategy family of a loaded scenario.

    Energies are expected values per camera frame.  For IIoT-C the network and
    cloud terms are weighted by the device forwarding probability and a_m is
    the analytic cascade F1; latency is that of a forwarded (detection) frame.
    IIoT-D is a degenerate instance with one on-device node and a null path.
    """
    settings = scenario.optimizer
    q = scenario.simulation.event_frequency if event_frequency is None else event_frequency
    hw_dev = scenario.hardware[device_hardware or settings.device_hardware]
    cands = _candidates(family, settings)
    if not cands:
        raise InputError(f"no {family} candidates configured")
    models = scenario.models
    radio, upf = scenario.radio, scenario.upf

    if family == "IIoT-D":
        clouds, paths = ("device",), ("local",)
        profiles = {}
    else:
        graph = scenario.graph
        shortest = all_shortest_paths(graph, settings.ap)
        clouds = tuple(graph.clouds)
        paths = tuple(shortest[c].id for c in clouds)
        profiles = {c: shortest[c] for c in clouds}
    M, C, P = len(cands), len(clouds), len(paths)
    e_mc, l_mc, r_mc = np.zeros((M, C)), np.zeros((M, C)), np.zeros((M, C))
    e_mp, l_mp = np.zeros((M, P)), np.zeros((M, P))
    a = np.zeros(M)
    R = np.full(C, np.inf)
    f_pc = np.eye(P, C)

    for i, cand in enumerate(cands):
        stages = []
        dev_e = dev_t = 0.0
        forward = 1.0
        if cand.device_model is not None:
            dm = models[cand.device_model]
            dev_e = kpi.energy_processing(hw_dev, dm)
            dev_t = kpi.inference_time(hw_dev, dm)
            tpr, fpr = dm.detector.rates(cand.device_threshold)
            stages.append((tpr, fpr))
            forward = q * tpr + (1.0 - q) * fpr
        if cand.cloud_model is None:
            e_mc[i, 0], l_mc[i, 0] = dev_e, dev_t
            a[i] = kpi.analytic_f1(q, stages)
            continue
        cm = models[cand.cloud_model]
        stages.append(cm.detector.rates(cand.cloud_threshold))
        a[i] = kpi.analytic_f1(q, stages)
        for j, cloud in enumerate(clouds):
            node = scenario.graph.nodes[cloud]
            hw = scenario.hardware[node.hardware]
            e_mc[i, j] = dev_e + forward * kpi.energy_processing(hw, cm)
            l_mc[i, j] = dev_t + kpi.inference_time(hw, cm)
            r_mc[i, j] = cm.resource_demand
            R[j] = node.capacity
            prof = profile_path(profiles[cloud], cm, radio, upf)
            e_mp[i, j] = forward * prof.e
            l_mp[i, j] = prof.l
    return PlacementInstance(
        models=tuple(c.label for c in cands), clouds=clouds, paths=paths,
        e_mc=e_mc, l_mc=l_mc, r_mc=r_mc, e_mp=e_mp, l_mp=l_mp, f_pc=f_pc, a=a, R=R,
        meta={"family": family, "event_frequency": q, "frames": scenario.simulation.frames,
              "candidates": cands},
    )
