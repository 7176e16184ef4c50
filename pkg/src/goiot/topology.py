"""AP-transport-cloud graph, shortest paths and per-model path profiles."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Mapping

from . import kpi
from .errors import DanglingEdge, DuplicateNode, InputError, Unreachable
from .units import parse_quantity

NODE_KINDS = ("access-point", "switch", "upf", "cloud")


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    t_sw: float = 0.0  # switching time, only meaningful for switches
    hardware: str | None = None  # cloud nodes: compute hardware id
    capacity: float = float("inf")  # cloud nodes: available resources R_c


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    length: float  # m
    rate: float  # bits/s
    p_nic: float = 0.0  # W
    p_tr: float = 0.0  # W

    def other(self, node: str) -> str:
        return self.b if node == self.a else self.a


@dataclass(frozen=True)
class PathOverride:
    transport_delay: float | None = None  # aggregate L_transport, s
    n_upf: int | None = None


@dataclass
class NetworkGraph:
    nodes: dict[str, Node]
    links: list[Link]
    overrides: dict[tuple[str, str], PathOverride] = field(default_factory=dict)
    _adj: dict[str, list[Link]] = field(init=False, repr=False)

    def __post_init__(self):
        self._adj = {n: [] for n in self.nodes}
        for link in self.links:
            self._adj[link.a].append(link)
            self._adj[link.b].append(link)

    def neighbours(self, node: str) -> list[Link]:
        return self._adj[node]

    def of_kind(self, kind: str) -> list[str]:
        return sorted(n for n, v in self.nodes.items() if v.kind == kind)

    @property
    def access_points(self) -> list[str]:
        return self.of_kind("access-point")

    @property
    def clouds(self) -> list[str]:
        return self.of_kind("cloud")

    @property
    def hop_metric(self) -> bool:
        """True when every link length is zero, so paths are ranked by hop count."""
        return all(link.length == 0 for link in self.links)


@dataclass(frozen=True)
class Path:
    nodes: tuple[str, ...]
    links: tuple[Link, ...]
    kinds: tuple[str, ...]
    t_sw: tuple[float, ...]
    override: PathOverride = PathOverride()

    @property
    def id(self) -> str:
        return f"{self.ap}->{self.cloud}"

    @property
    def ap(self) -> str:
        return self.nodes[0]

    @property
    def cloud(self) -> str:
        return self.nodes[-1]

    @property
    def distance(self) -> float:
        return sum(link.length for link in self.links)

    @property
    def n_sw(self) -> int:
        return sum(1 for k in self.kinds[1:-1] if k == "switch")

    @property
    def n_upf(self) -> int:
        if self.override.n_upf is not None:
            return self.override.n_upf
        return sum(1 for k in self.kinds[1:-1] if k == "upf")

    def transport_delay(self) -> float:
        if self.override.transport_delay is not None:
            return self.override.transport_delay
        switching = sum(t for k, t in zip(self.kinds[1:-1], self.t_sw[1:-1]) if k == "switch")
        return self.distance / kpi.PROPAGATION_SPEED + switching

    def f(self, cloud: str) -> int:
        """Termination indicator f_{p,c}."""
        return int(cloud == self.cloud)


@dataclass(frozen=True)
class PathProfile:
    path: Path
    model: str
    latency: kpi.LatencyBreakdown  # processing term is zero here
    energy: kpi.EnergyLedger  # network terms only

    @property
    def path_id(self) -> str:
        return self.path.id

    @property
    def cloud(self) -> str:
        return self.path.cloud

    @property
    def l(self) -> float:
        return self.latency.total

    @property
    def e(self) -> float:
        return self.energy.total

    def f(self, cloud: str) -> int:
        return self.path.f(cloud)


def _num(value, dimension, where, default=None):
    if value is None:
        if default is None:
            raise InputError(f"{where}: missing value")
        return default
    try:
        out = parse_quantity(value, dimension)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None
    if out < 0:
        raise InputError(f"{where}: must be non-negative")
    return out


def build_graph(layout: Mapping) -> NetworkGraph:
    """Build and validate a graph from a topology mapping.

    ``layout`` has ``nodes`` ({id, kind, [t_sw], [hardware], [capacity]}),
    ``edges`` ({a, b, length, rate, [p_nic], [p_tr]}) and optionally
    ``path_overrides`` ({ap, cloud, [transport_delay], [n_upf]}).  Quantities
    may carry units.  Every access point must reach every cloud.
    """
    default_t_sw = _num(layout.get("switch_time", 0.0), "time", "switch_time")
    nodes: dict[str, Node] = {}
    for raw in layout.get("nodes", []):
        nid = raw["id"]
        if nid in nodes:
            raise DuplicateNode(f"duplicate node id {nid!r}")
        kind = raw["kind"]
        if kind not in NODE_KINDS:
            raise InputError(f"node {nid!r}: unknown kind {kind!r}")
        capacity = raw.get("capacity")
        nodes[nid] = Node(
            id=nid,
            kind=kind,
            t_sw=_num(raw.get("t_sw"), "time", f"node {nid}.t_sw", default_t_sw),
            hardware=raw.get("hardware"),
            capacity=float("inf") if capacity is None else _num(capacity, None, f"node {nid}.capacity"),
        )
    links = []
    for raw in layout.get("edges", []):
        a, b = raw["a"], raw["b"]
        for end in (a, b):
            if end not in nodes:
                raise DanglingEdge(f"edge {a}-{b} references unknown node {end!r}")
        where = f"edge {a}-{b}"
        rate = _num(raw.get("rate"), "rate", f"{where}.rate")
        if rate <= 0:
            raise InputError(f"{where}: link rate must be > 0")
        links.append(Link(
            a=a, b=b,
            length=_num(raw.get("length"), "length", f"{where}.length", 0.0),
            rate=rate,
            p_nic=_num(raw.get("p_nic"), "power", f"{where}.p_nic", 0.0),
            p_tr=_num(raw.get("p_tr"), "power", f"{where}.p_tr", 0.0),
        ))
    overrides = {}
    for raw in layout.get("path_overrides", []):
        key = (raw["ap"], raw["cloud"])
        for end in key:
            if end not in nodes:
                raise DanglingEdge(f"path override references unknown node {end!r}")
        delay = raw.get("transport_delay")
        n_upf = raw.get("n_upf")
        overrides[key] = PathOverride(
            transport_delay=None if delay is None else _num(delay, "time", f"override {key}"),
            n_upf=None if n_upf is None else int(n_upf),
        )
    graph = NetworkGraph(nodes, links, overrides)
    for ap in graph.access_points:
        reached = _reachable(graph, ap)
        for cloud in graph.clouds:
            if cloud not in reached:
                raise Unreachable(ap, cloud)
    return graph


def _reachable(g: NetworkGraph, start: str) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        if u != start and g.nodes[u].kind in ("access-point", "cloud"):
            continue
        for link in g.neighbours(u):
            v = link.other(u)
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def shortest_path(g: NetworkGraph, ap: str, cloud: str) -> Path:
    """Minimum fiber-distance path; ties go to the lexicographically smallest node sequence.

    Dijkstra over (distance, node sequence) labels.  Lexicographic order is
    preserved under extension for simple paths, so the first settled label of
    each node is its optimum.
    """
    if ap not in g.nodes or g.nodes[ap].kind != "access-point":
        raise InputError(f"{ap!r} is not an access point")
    if cloud not in g.nodes or g.nodes[cloud].kind != "cloud":
        raise InputError(f"{cloud!r} is not a cloud node")
    hops = g.hop_metric
    heap: list[tuple[float, tuple[str, ...], tuple[Link, ...]]] = [(0.0, (ap,), ())]
    settled: set[str] = set()
    while heap:
        dist, seq, used = heapq.heappop(heap)
        u = seq[-1]
        if u in settled:
            continue
        settled.add(u)
        if u == cloud:
            return _make_path(g, seq, used)
        # transit only through network elements, never through another AP or cloud
        if u != ap and g.nodes[u].kind in ("access-point", "cloud"):
            continue
        for link in g.neighbours(u):
            v = link.other(u)
            if v in settled:
                continue
            w = 1.0 if hops else link.length
            heapq.heappush(heap, (dist + w, seq + (v,), used + (link,)))
    raise Unreachable(ap, cloud)


def _make_path(g: NetworkGraph, seq: tuple[str, ...], used: tuple[Link, ...]) -> Path:
    return Path(
        nodes=seq,
        links=used,
        kinds=tuple(g.nodes[n].kind for n in seq),
        t_sw=tuple(g.nodes[n].t_sw for n in seq),
        override=g.overrides.get((seq[0], seq[-1]), PathOverride()),
    )


def all_shortest_paths(g: NetworkGraph, ap: str) -> dict[str, Path]:
    """Pre-computed shortest path from ``ap`` to every cloud, keyed by cloud id."""
    return {c: shortest_path(g, ap, c) for c in g.clouds}


def profile_path(p: Path, m: kpi.ModelConfig, radio: kpi.RadioConfig, upf: kpi.UpfConfig) -> PathProfile:
    """Latency l_{m,p} and per-inference network energy e_{m,p} of sending m's input along p."""
    recv, proc = kpi.energy_ap(m, radio)
    energy = kpi.total_energy(
        ue_trans=kpi.energy_transmission(m, radio),
        ap_recv=recv,
        ap_proc=proc,
        tn=kpi.energy_transport(m, p.links),
        upf=kpi.energy_upf(m, upf, p.n_upf),
    )
    latency = kpi.LatencyBreakdown(
        radio=m.payload_bits / radio.alpha,
        transport=p.transport_delay(),
        routing=p.n_upf * upf.l_upf,
    )
    return PathProfile(path=p, model=m.name, latency=latency, energy=energy)
