"""Quiver structure: finite cores with finitely many infinite rays.

A spec models a finite quiver (no rays) or a finitely-presented infinite
one: each ray is a half-infinite simple path attached to a core vertex,
with arrow orientations given by a finite prefix word over {out, in} plus
a constant tail. Ray vertices are named ``<rayid>#<depth>`` (depth >= 1)
and materialized on demand, so every operation manipulates finite data.
Components whose multiplicity flag is "omega" stand for countably many
copies of the same component; they are never materialized more than once.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

from .errors import DomainError, InputError

OUT = "o"
IN = "i"


@dataclass(frozen=True)
class Arrow:
    id: str
    src: str
    tgt: str


@dataclass(frozen=True)
class RaySpec:
    """Half-infinite path at ``attach``; ``prefix``/``tail`` orient its arrows.

    'o' points away from the attach vertex, 'i' toward it. The arrow at
    depth d (joining depth d-1 to depth d) takes its orientation from
    prefix[d-1] when present and from tail otherwise.
    """

    id: str
    attach: str
    prefix: str = ""
    tail: str = OUT

    def normalized(self) -> "RaySpec":
        prefix = self.prefix.rstrip(self.tail)
        if prefix == self.prefix:
            return self
        return RaySpec(self.id, self.attach, prefix, self.tail)

    def arrow_char(self, depth: int) -> str:
        if depth < 1:
            raise InputError(f"ray arrow depth must be >= 1, got {depth}")
        return self.prefix[depth - 1] if depth <= len(self.prefix) else self.tail


def ray_vertex_name(ray_id: str, depth: int) -> str:
    return f"{ray_id}#{depth}"


def ray_arrow_name(ray_id: str, depth: int) -> str:
    return f"{ray_id}#a{depth}"


@dataclass(frozen=True)
class QuiverSpec:
    name: str
    vertices: tuple
    arrows: tuple
    rays: tuple
    omega: frozenset = frozenset()  # component representatives flagged countably-infinite

    @cached_property
    def arrows_by_id(self) -> dict:
        return {a.id: a for a in self.arrows}

    @cached_property
    def rays_by_id(self) -> dict:
        return {r.id: r for r in self.rays}

    @cached_property
    def rays_at(self) -> dict:
        out: dict = {v: [] for v in self.vertices}
        for r in self.rays:
            out[r.attach].append(r)
        return out

    @cached_property
    def core_adjacency(self) -> dict:
        """vertex -> sorted list of (arrow id, other endpoint), self-loops once."""
        adj: dict = {v: [] for v in self.vertices}
        for a in self.arrows:
            adj[a.src].append((a.id, a.tgt))
            if a.tgt != a.src:
                adj[a.tgt].append((a.id, a.src))
        for v in adj:
            adj[v].sort()
        return adj

    @cached_property
    def components(self) -> tuple:
        """Core vertex sets of the connected components, sorted by representative."""
        seen: set = set()
        comps = []
        for v in self.vertices:
            if v in seen:
                continue
            stack, comp = [v], set()
            while stack:
                u = stack.pop()
                if u in comp:
                    continue
                comp.add(u)
                for _, w in self.core_adjacency[u]:
                    if w not in comp:
                        stack.append(w)
            seen |= comp
            comps.append(frozenset(comp))
        comps.sort(key=lambda c: min(c))
        return tuple(comps)

    @cached_property
    def component_index(self) -> dict:
        out = {}
        for i, comp in enumerate(self.components):
            for v in comp:
                out[v] = i
        return out

    def component_rep(self, idx: int) -> str:
        return min(self.components[idx])

    def component_of(self, vertex: str) -> int:
        """Component index of a core or materialized ray vertex."""
        ray = split_ray_vertex(self, vertex)
        if ray is not None:
            return self.component_index[ray[0].attach]
        if vertex not in self.component_index:
            raise InputError(f"unknown vertex {vertex!r}")
        return self.component_index[vertex]

    def is_finite(self) -> bool:
        return not self.rays and not self.omega


def split_ray_vertex(spec: QuiverSpec, vertex: str):
    """(RaySpec, depth) when ``vertex`` names a ray vertex, else None."""
    if "#" not in vertex:
        return None
    ray_id, _, depth = vertex.rpartition("#")
    if ray_id not in spec.rays_by_id or not depth.isdigit() or int(depth) < 1:
        return None
    return spec.rays_by_id[ray_id], int(depth)


def split_ray_arrow(spec: QuiverSpec, arrow_id: str):
    if "#a" not in arrow_id:
        return None
    ray_id, _, depth = arrow_id.rpartition("#a")
    if ray_id not in spec.rays_by_id or not depth.isdigit() or int(depth) < 1:
        return None
    return spec.rays_by_id[ray_id], int(depth)


def vertex_exists(spec: QuiverSpec, vertex: str) -> bool:
    return vertex in spec.component_index or split_ray_vertex(spec, vertex) is not None


def arrow_endpoints(spec: QuiverSpec, arrow_id: str) -> tuple:
    """(source, target) of a core or materialized ray arrow."""
    if arrow_id in spec.arrows_by_id:
        a = spec.arrows_by_id[arrow_id]
        return a.src, a.tgt
    parsed = split_ray_arrow(spec, arrow_id)
    if parsed is None:
        raise InputError(f"unknown arrow {arrow_id!r}")
    ray, depth = parsed
    inner = ray.attach if depth == 1 else ray_vertex_name(ray.id, depth - 1)
    outer = ray_vertex_name(ray.id, depth)
    return (inner, outer) if ray.arrow_char(depth) == OUT else (outer, inner)


def neighbors(spec: QuiverSpec, vertex: str) -> list:
    """Sorted (arrow id, other endpoint) pairs in the full, possibly
    infinite quiver; ray vertices are resolved arithmetically."""
    parsed = split_ray_vertex(spec, vertex)
    if parsed is not None:
        ray, depth = parsed
        inner = ray.attach if depth == 1 else ray_vertex_name(ray.id, depth - 1)
        return sorted(
            [
                (ray_arrow_name(ray.id, depth), inner),
                (ray_arrow_name(ray.id, depth + 1), ray_vertex_name(ray.id, depth + 1)),
            ]
        )
    if vertex not in spec.component_index:
        raise InputError(f"unknown vertex {vertex!r}")
    out = list(spec.core_adjacency[vertex])
    for ray in spec.rays_at[vertex]:
        out.append((ray_arrow_name(ray.id, 1), ray_vertex_name(ray.id, 1)))
    return sorted(out)


def incident_arrows(spec: QuiverSpec, vertex: str) -> list:
    return [aid for aid, _ in neighbors(spec, vertex)]


def vertex_depth(spec: QuiverSpec, vertex: str) -> int:
    """Ray depth of a vertex; core vertices have depth 0."""
    parsed = split_ray_vertex(spec, vertex)
    return parsed[1] if parsed is not None else 0


# -- validation ----------------------------------------------------------


def quiver(name, vertices, arrows, rays=(), multiplicity=None) -> QuiverSpec:
    """Build and validate a spec from plain data.

    ``arrows`` entries are (id, src, tgt) or Arrow; ``rays`` entries are
    (id, attach, prefix, tail) or RaySpec; ``multiplicity`` maps a vertex
    of a component to "one" or "omega".
    """
    arrow_objs = tuple(a if isinstance(a, Arrow) else Arrow(*a) for a in arrows)
    ray_objs = tuple(r if isinstance(r, RaySpec) else RaySpec(*r) for r in rays)
    omega = frozenset(v for v, m in (multiplicity or {}).items() if m == "omega")
    for v, m in (multiplicity or {}).items():
        if m not in ("one", "omega"):
            raise InputError(f"bad multiplicity {m!r} for {v!r}")
    return validate(QuiverSpec(name, tuple(vertices), arrow_objs, ray_objs, omega))


def validate(spec: QuiverSpec) -> QuiverSpec:
    """Normalize a spec (sorted ids, trimmed prefixes, multiplicity keyed by
    component representative) or raise InputError with a diagnostic code."""
    if getattr(spec, "_valid", False):
        return spec

    for kind, ids in (
        ("vertex", [v for v in spec.vertices]),
        ("arrow", [a.id for a in spec.arrows]),
        ("ray", [r.id for r in spec.rays]),
    ):
        per_kind: set = set()
        for i in ids:
            if not isinstance(i, str) or not i or "#" in i:
                raise InputError(
                    f"bad {kind} id {i!r} (ids are nonempty, '#'-free strings)", code="bad-id"
                )
            if i in per_kind:
                raise InputError(f"duplicate {kind} id {i!r}", code="duplicate-id")
            per_kind.add(i)

    vertex_set = set(spec.vertices)
    for a in spec.arrows:
        if a.src not in vertex_set or a.tgt not in vertex_set:
            raise InputError(
                f"arrow {a.id!r} has undeclared endpoint ({a.src!r} -> {a.tgt!r})",
                code="dangling-endpoint",
            )
    for r in spec.rays:
        if r.attach not in vertex_set:
            raise InputError(
                f"ray {r.id!r} attached to unknown vertex {r.attach!r}", code="ray-attach-unknown"
            )
        if r.tail not in (OUT, IN) or any(c not in (OUT, IN) for c in r.prefix):
            raise InputError(
                f"ray {r.id!r} orientation must use {OUT!r}/{IN!r}", code="bad-orientation"
            )

    normalized = QuiverSpec(
        spec.name,
        tuple(sorted(spec.vertices)),
        tuple(sorted(spec.arrows, key=lambda a: a.id)),
        tuple(sorted((r.normalized() for r in spec.rays), key=lambda r: r.id)),
        spec.omega,
    )

    # Multiplicity keys may be any member vertex; normalize to the least one.
    reps = set()
    for v in spec.omega:
        if v not in vertex_set:
            raise InputError(f"multiplicity flag on unknown vertex {v!r}", code="unknown-vertex")
        reps.add(normalized.component_rep(normalized.component_index[v]))
    normalized = QuiverSpec(
        normalized.name, normalized.vertices, normalized.arrows, normalized.rays, frozenset(reps)
    )
    object.__setattr__(normalized, "_valid", True)
    return normalized


# -- shape classification -------------------------------------------------


@dataclass(frozen=True)
class ShapeClass:
    kind: str  # A | D | E | AInfinity | AInfinityInfinity | DInfinity | NotDynkin
    n: int | None = None
    reason: str | None = None

    def is_generalized_ade(self) -> bool:
        return self.kind != "NotDynkin"

    def __str__(self):
        if self.kind in ("A", "D", "E"):
            return f"{self.kind}({self.n})"
        if self.kind == "NotDynkin":
            return f"NotDynkin({self.reason})"
        return self.kind


def _component_arrows(spec: QuiverSpec, comp: frozenset) -> list:
    return [a for a in spec.arrows if a.src in comp]


def _component_rays(spec: QuiverSpec, comp: frozenset) -> list:
    return [r for r in spec.rays if r.attach in comp]


def cycle_vertices(spec: QuiverSpec, comp_index: int) -> list | None:
    """Vertices of some cycle in the component's core, or None if acyclic."""
    spec = validate(spec)
    comp = spec.components[comp_index]
    arrows = _component_arrows(spec, comp)
    for a in arrows:
        if a.src == a.tgt:
            return [a.src]
    pair_seen: dict = {}
    for a in arrows:
        key = (min(a.src, a.tgt), max(a.src, a.tgt))
        if key in pair_seen:
            return sorted(key)
        pair_seen[key] = a.id
    # Simple graph: DFS back edge.
    parent: dict = {}
    start = min(comp)
    stack = [(start, None)]
    visited: set = set()
    while stack:
        v, via = stack.pop()
        if v in visited:
            continue
        visited.add(v)
        parent[v] = via
        for aid, w in spec.core_adjacency[v]:
            if aid == via:
                continue
            if w in visited:
                # Found cycle: walk both vertices up to their common ancestor.
                path_v = [v]
                x = v
                while parent[x] is not None:
                    aid2 = parent[x]
                    a2 = spec.arrows_by_id[aid2]
                    x = a2.src if a2.tgt == x else a2.tgt
                    path_v.append(x)
                chain = []
                x = w
                while x not in path_v:
                    chain.append(x)
                    aid2 = parent[x]
                    a2 = spec.arrows_by_id[aid2]
                    x = a2.src if a2.tgt == x else a2.tgt
                cycle = path_v[: path_v.index(x) + 1] + list(reversed(chain))
                return cycle
            stack.append((w, aid))
    return None


def branch_arms(spec: QuiverSpec, vertex: str, max_len: int) -> list:
    """Arms leaving ``vertex``: (vertices walking outward, extends) pairs,
    truncated to max_len vertices; ``extends`` marks arms that continue
    past the truncation point. Sorted for determinism."""
    spec = validate(spec)
    arms = []
    for aid, first in neighbors(spec, vertex):
        verts = []
        prev, cur = vertex, first
        extends = False
        while True:
            verts.append(cur)
            nxt = [w for _, w in neighbors(spec, cur) if w != prev]
            if not nxt or len(nxt) > 1:
                break
            if len(verts) >= max_len:
                extends = True
                break
            prev, cur = cur, nxt[0]
        arms.append((tuple(verts), extends))
    return sorted(arms)


def _arm_length(spec: QuiverSpec, start: str, first: str):
    """Edge count of the arm entered via ``first`` from ``start``; inf for rays."""
    prev, cur, length = start, first, 1
    while True:
        if split_ray_vertex(spec, cur) is not None:
            return math.inf
        if spec.rays_at[cur]:
            return math.inf
        nxt = [w for _, w in spec.core_adjacency[cur] if w != prev]
        if not nxt:
            return length
        prev, cur = cur, nxt[0]
        length += 1


def _classify_component(spec: QuiverSpec, comp: frozenset) -> ShapeClass:
    arrows = _component_arrows(spec, comp)
    rays = _component_rays(spec, comp)

    has_loop = any(a.src == a.tgt for a in arrows)
    pairs = [tuple(sorted((a.src, a.tgt))) for a in arrows if a.src != a.tgt]
    has_parallel = len(pairs) != len(set(pairs))
    if has_loop or has_parallel or len(arrows) > len(comp) - 1:
        return ShapeClass("NotDynkin", reason="cycle")

    deg = {v: 0 for v in comp}
    for a in arrows:
        deg[a.src] += 1
        deg[a.tgt] += 1
    for r in rays:
        deg[r.attach] += 1
    if any(d > 3 for d in deg.values()):
        return ShapeClass("NotDynkin", reason="vertex-degree>3")

    branch = sorted(v for v, d in deg.items() if d == 3)
    if len(branch) >= 2:
        return ShapeClass("NotDynkin", reason="two-branch-vertices")

    if not branch:
        if not rays:
            return ShapeClass("A", n=len(comp))
        if len(rays) == 1:
            return ShapeClass("AInfinity")
        return ShapeClass("AInfinityInfinity")

    b = branch[0]
    lengths = sorted(
        [_arm_length(spec, b, w) for _, w in spec.core_adjacency[b]]
        + [math.inf] * len(spec.rays_at[b])
    )
    a1, a2, a3 = lengths
    if (a1, a2) == (1, 1):
        if a3 is math.inf:
            return ShapeClass("DInfinity")
        return ShapeClass("D", n=int(a3) + 3)
    if (a1, a2) == (1, 2) and a3 in (2, 3, 4):
        return ShapeClass("E", n=int(a3) + 4)
    return ShapeClass("NotDynkin", reason="branch-arms-too-long")


def classify_shape(spec: QuiverSpec) -> list:
    """One ShapeClass per component, in component-representative order.

    Depends only on the underlying undirected graph: obstructions are
    reported deterministically (cycle, then degree, then branch arms)."""
    spec = validate(spec)
    return [_classify_component(spec, comp) for comp in spec.components]


# -- eventual outwardness --------------------------------------------------


@dataclass(frozen=True)
class OutwardReport:
    eventually_outward: bool
    inward_ray: str | None = None

    def __bool__(self):
        return self.eventually_outward


def is_eventually_outward(spec: QuiverSpec) -> OutwardReport:
    """False iff some ray's tail points toward its attach vertex, i.e. some
    journey sees infinitely many arrows pointing back at its source."""
    spec = validate(spec)
    for r in spec.rays:
        if r.tail == IN:
            return OutwardReport(False, r.id)
    return OutwardReport(True, None)


# -- subquivers ------------------------------------------------------------


@dataclass(frozen=True)
class Subquiver:
    host: QuiverSpec
    vertices: frozenset
    arrows: frozenset
    full: bool = True

    @cached_property
    def max_ray_depth(self) -> int:
        return max((vertex_depth(self.host, v) for v in self.vertices), default=0)

    def sorted_vertices(self) -> list:
        return sorted(self.vertices)

    def sorted_arrows(self) -> list:
        return sorted(self.arrows)


def check_subquiver(sub: Subquiver) -> Subquiver:
    spec = sub.host
    for v in sub.vertices:
        if v not in spec.component_index and split_ray_vertex(spec, v) is None:
            raise InputError(f"subquiver lists unknown vertex {v!r}")
    for aid in sub.arrows:
        src, tgt = arrow_endpoints(spec, aid)
        if src not in sub.vertices or tgt not in sub.vertices:
            raise InputError(f"subquiver arrow {aid!r} has an unlisted endpoint")
    if sub.full:
        for v in sub.vertices:
            for aid, w in neighbors(spec, v):
                if w in sub.vertices and aid not in sub.arrows:
                    raise InputError(f"subquiver flagged full but misses arrow {aid!r}")
    return sub


def full_subquiver(spec: QuiverSpec, vertices) -> Subquiver:
    """The full subquiver induced on ``vertices``."""
    spec = validate(spec)
    vset = frozenset(vertices)
    arrows = set()
    for v in vset:
        for aid, w in neighbors(spec, v):
            if w in vset:
                arrows.add(aid)
    return Subquiver(spec, vset, frozenset(arrows), full=True)


def subquiver_components(sub: Subquiver) -> list:
    """Connected vertex sets of the subquiver, sorted by representative."""
    adj: dict = {v: set() for v in sub.vertices}
    for aid in sub.arrows:
        src, tgt = arrow_endpoints(sub.host, aid)
        adj[src].add(tgt)
        adj[tgt].add(src)
    seen: set = set()
    comps = []
    for v in sorted(sub.vertices):
        if v in seen:
            continue
        stack, comp = [v], set()
        while stack:
            u = stack.pop()
            if u in comp:
                continue
            comp.add(u)
            stack.extend(adj[u] - comp)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def is_ic(sub: Subquiver) -> bool:
    """Injective on components: no host component holds two subquiver pieces."""
    counts: dict = {}
    for comp in subquiver_components(sub):
        host_idx = sub.host.component_of(min(comp))
        counts[host_idx] = counts.get(host_idx, 0) + 1
        if counts[host_idx] > 1:
            return False
    return True


def is_bc(sub: Subquiver) -> bool:
    """Bijective on components: exactly one piece in every host component."""
    counts: dict = {}
    for comp in subquiver_components(sub):
        host_idx = sub.host.component_of(min(comp))
        counts[host_idx] = counts.get(host_idx, 0) + 1
    return all(counts.get(i, 0) == 1 for i in range(len(sub.host.components)))


def cycle_arrow_ids(spec: QuiverSpec) -> frozenset:
    """Ids of core arrows lying on some cycle (the non-bridge arrows)."""
    spec = validate(spec)
    cyclic = set()
    arrows = list(spec.arrows)
    for a in arrows:
        if a.src == a.tgt:
            cyclic.add(a.id)
            continue
        # a is on a cycle iff its endpoints stay connected without it.
        target = a.tgt
        stack = [a.src]
        seen = {a.src}
        found = False
        while stack:
            v = stack.pop()
            if v == target:
                found = True
                break
            for aid, w in spec.core_adjacency[v]:
                if aid != a.id and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if found:
            cyclic.add(a.id)
    return frozenset(cyclic)


def is_retraction(spec: QuiverSpec, sub: Subquiver) -> bool:
    """Full, one component per host component, and containing every cycle."""
    spec = validate(spec)
    if sub.host != spec:
        return False
    try:
        check_subquiver(sub)
    except InputError:
        return False
    if not sub.full or not is_bc(sub):
        return False
    return cycle_arrow_ids(spec) <= sub.arrows


def _bfs_path(spec: QuiverSpec, start: str, goals: frozenset, max_depth: int):
    """Shortest path (vertices, arrows) from start to any goal vertex, searching
    the quiver materialized to ray depth ``max_depth``."""
    frontier = [start]
    parent: dict = {start: None}
    while frontier:
        nxt = []
        for v in frontier:
            if v in goals:
                verts, arrs = [v], []
                while parent[verts[-1]] is not None:
                    pv, pa = parent[verts[-1]]
                    arrs.append(pa)
                    verts.append(pv)
                return list(reversed(verts)), list(reversed(arrs))
            for aid, w in neighbors(spec, v):
                if vertex_depth(spec, w) > max_depth or w in parent:
                    continue
                parent[w] = (v, aid)
                nxt.append(w)
        frontier = nxt
    return None


def finite_retraction(spec: QuiverSpec, atleast: Subquiver | None = None) -> Subquiver:
    """A minimal finite retraction containing ``atleast``.

    Contains all cycles and, per component, either the requested vertices
    (connected up by shortest paths) or the lowest-id vertex.
    """
    spec = validate(spec)
    if spec.omega:
        raise DomainError(
            "no finite retraction: component(s) flagged countably-infinite "
            f"({sorted(spec.omega)})",
            code="no-finite-retraction",
        )
    required: set = set()
    cyclic = cycle_arrow_ids(spec)
    for aid in cyclic:
        src, tgt = arrow_endpoints(spec, aid)
        required |= {src, tgt}
    if atleast is not None:
        check_subquiver(atleast)
        required |= set(atleast.vertices)
    chosen: set = set()
    max_depth = max((vertex_depth(spec, v) for v in required), default=0)
    for idx, comp in enumerate(spec.components):
        comp_required = sorted(v for v in required if spec.component_of(v) == idx)
        if not comp_required:
            chosen.add(min(comp))
            continue
        connected = {comp_required[0]}
        for v in comp_required[1:]:
            if v in connected:
                continue
            path = _bfs_path(spec, v, frozenset(connected), max_depth)
            if path is None:
                raise InputError(f"cannot connect {v!r} inside its component")
            connected |= set(path[0])
        chosen |= connected
    return full_subquiver(spec, chosen)


@dataclass(frozen=True)
class RetractionPath:
    vertices: tuple  # from the start vertex to the closest retraction vertex
    arrows: tuple

    def __len__(self):
        return len(self.arrows)


def closest_retraction_path(spec: QuiverSpec, retraction: Subquiver, vertex: str) -> RetractionPath:
    """The unique arrow path from ``vertex`` to its closest retraction vertex
    using no retraction arrows; empty when the vertex is already inside."""
    spec = validate(spec)
    if not is_retraction(spec, retraction):
        raise InputError("subquiver is not a retraction of the host")
    if vertex in retraction.vertices:
        return RetractionPath((vertex,), ())
    max_depth = max(vertex_depth(spec, vertex), retraction.max_ray_depth) + 1
    path = _bfs_path(spec, vertex, retraction.vertices, max_depth)
    if path is None:
        raise InputError(f"vertex {vertex!r} not connected to the retraction")
    verts, arrs = path
    return RetractionPath(tuple(verts), tuple(arrs))


def enumerate_ic_subquivers(spec: QuiverSpec, max_vertices: int):
    """All finite full IC subquivers with at most ``max_vertices`` vertices
    (rays materialized to that depth), in lexicographic vertex-set order."""
    spec = validate(spec)
    pool = sorted(spec.vertices) + sorted(
        ray_vertex_name(r.id, d) for r in spec.rays for d in range(1, max_vertices + 1)
    )
    pool = sorted(pool)
    for size in range(0, max_vertices + 1):
        for combo in itertools.combinations(pool, size):
            sub = full_subquiver(spec, combo)
            if is_ic(sub):
                yield sub
