"""Multigraphs with rotation systems: face tracing, planarity, vertex sums.

Graphs may have loops and parallel arcs.  An arc has two *ends* (a loop's
two ends sit at the same node); rotation systems are cyclic orders of the
arc-ends at each node.  Tracing the faces of a rotation system gives the
oriented surface it describes; the rotation is planar when every component
traces a sphere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

# An arc-end is (arc_id, 0 | 1); end i of arc a sits at endpoints(a)[i].
# A dart (directed arc) is also (arc_id, s): it departs from end s and
# arrives at end 1 - s.


def skey(x):
    """Deterministic sort key for heterogeneous identifiers."""
    if isinstance(x, tuple):
        return (1, tuple(skey(y) for y in x))
    if isinstance(x, bool):
        return (2, str(x))
    if isinstance(x, int):
        return (3, x)
    return (4, str(x))


class Graph:
    """Undirected multigraph; loops and parallel arcs allowed."""

    def __init__(self, nodes=(), arcs=None):
        self.nodes = set(nodes)
        self.arcs = {}  # arc id -> (u, v); order of the pair fixes ends 0/1
        if arcs:
            for a, (u, v) in arcs.items():
                self.add_arc(a, u, v)

    def add_node(self, n):
        self.nodes.add(n)

    def add_arc(self, a, u, v):
        if a in self.arcs:
            raise ValueError(f"duplicate arc id {a!r}")
        self.nodes.add(u)
        self.nodes.add(v)
        self.arcs[a] = (u, v)

    def endpoints(self, a):
        return self.arcs[a]

    def is_loop(self, a):
        u, v = self.arcs[a]
        return u == v

    def arc_ends_at(self, n):
        """Arc-ends incident with n, sorted; a loop contributes both ends."""
        out = []
        for a, (u, v) in self.arcs.items():
            if u == n:
                out.append((a, 0))
            if v == n:
                out.append((a, 1))
        out.sort(key=skey)
        return out

    def degree(self, n):
        return len(self.arc_ends_at(n))

    def end_node(self, end):
        a, i = end
        return self.arcs[a][i]

    def neighbours(self, n):
        out = set()
        for a, (u, v) in self.arcs.items():
            if u == n:
                out.add(v)
            if v == n:
                out.add(u)
        return out

    def copy(self):
        return Graph(self.nodes, dict(self.arcs))

    def without_arc(self, a):
        g = self.copy()
        del g.arcs[a]
        return g

    def components(self):
        """Connected components as sorted node lists, sorted by least node."""
        seen = set()
        comps = []
        adj = {n: set() for n in self.nodes}
        for u, v in self.arcs.values():
            adj[u].add(v)
            adj[v].add(u)
        for n in sorted(self.nodes, key=skey):
            if n in seen:
                continue
            comp = []
            stack = [n]
            seen.add(n)
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            comps.append(sorted(comp, key=skey))
        return comps

    def is_connected(self):
        return len(self.components()) <= 1

    def __repr__(self):
        return f"Graph({len(self.nodes)} nodes, {len(self.arcs)} arcs)"


# ---------------------------------------------------------------------------
# Rotation systems and face tracing
# ---------------------------------------------------------------------------

def check_rotation(g: Graph, rot) -> None:
    """Raise if rot is not a valid rotation system of g."""
    if set(rot) != set(g.nodes):
        raise ValueError("rotation system must cover exactly the nodes")
    for n, cyc in rot.items():
        if sorted(cyc, key=skey) != g.arc_ends_at(n):
            raise ValueError(f"rotator at {n!r} does not list its arc-ends")


@dataclass
class TracedSurface:
    """Face walks traced from a rotation system, with per-component genus."""

    walks: list            # list of dart tuples
    components: list       # list of sorted node lists
    chi: list              # Euler characteristic per component
    genus: list            # genus per component

    def is_spherical(self):
        return all(c == 2 for c in self.chi)


def trace_faces(g: Graph, rot) -> TracedSurface:
    """Trace the boundary walks induced by a rotation system.

    The dart following (a, s) leaves via the arc-end just after (a, 1-s)
    in the rotator at the arrival node.
    """
    check_rotation(g, rot)
    succ_in_rot = {}
    for n, cyc in rot.items():
        for i, end in enumerate(cyc):
            succ_in_rot[end] = cyc[(i + 1) % len(cyc)]

    darts = []
    for a in sorted(g.arcs, key=skey):
        darts.append((a, 0))
        darts.append((a, 1))
    unused = set(darts)
    walks = []
    for d in darts:
        if d not in unused:
            continue
        walk = []
        cur = d
        while cur in unused:
            unused.remove(cur)
            walk.append(cur)
            a, s = cur
            arrive_end = (a, 1 - s)
            cur = succ_in_rot[arrive_end]
        walks.append(tuple(walk))

    comps = g.components()
    comp_of = {}
    for ci, comp in enumerate(comps):
        for n in comp:
            comp_of[n] = ci
    nfaces = [0] * len(comps)
    for walk in walks:
        a, s = walk[0]
        nfaces[comp_of[g.arcs[a][s]]] += 1
    chi = []
    for ci, comp in enumerate(comps):
        nv = len(comp)
        ne = sum(1 for (u, v) in g.arcs.values() if comp_of[u] == ci)
        nf = nfaces[ci] if ne else 1  # isolated node counts as a sphere
        chi.append(nv - ne + nf)
    genus = [(2 - c) // 2 for c in chi]
    return TracedSurface(walks, comps, chi, genus)


def is_planar_rotation(g: Graph, rot) -> bool:
    """True iff every traced component is a 2-sphere."""
    return trace_faces(g, rot).is_spherical()


def normalize_rotation(rot):
    """Rotate each cycle to start at its least arc-end; returns a new dict."""
    out = {}
    for n, cyc in rot.items():
        cyc = tuple(cyc)
        if cyc:
            i = min(range(len(cyc)), key=lambda k: skey(cyc[k]))
            cyc = cyc[i:] + cyc[:i]
        out[n] = cyc
    return out


def reverse_rotation(rot):
    return normalize_rotation({n: tuple(reversed(cyc)) for n, cyc in rot.items()})


def rotations_equal(r1, r2):
    return normalize_rotation(r1) == normalize_rotation(r2)


def cyclic_eq(a, b):
    """Equality of cyclic sequences (up to rotation, not reflection)."""
    a, b = tuple(a), tuple(b)
    if len(a) != len(b):
        return False
    if not a:
        return True
    return any(b[i:] + b[:i] == a for i in range(len(b)))


# ---------------------------------------------------------------------------
# Planarity of multigraphs
# ---------------------------------------------------------------------------

def _simple_projection(g: Graph):
    """Simple graph on g's nodes plus arc classes keyed by node pair."""
    classes = {}
    for a in sorted(g.arcs, key=skey):
        u, v = g.arcs[a]
        if u == v:
            continue
        key = tuple(sorted((u, v), key=skey))
        classes.setdefault(key, []).append(a)
    sg = nx.Graph()
    sg.add_nodes_from(g.nodes)
    sg.add_edges_from(classes)
    return sg, classes


def planar_embedding(g: Graph):
    """A rotation system tracing spheres, or None iff g is nonplanar.

    Loops and parallel arcs are reinserted locally after embedding the
    simple underlying graph.
    """
    sg, classes = _simple_projection(g)
    ok, emb = nx.check_planarity(sg)
    if not ok:
        return None
    order = emb.get_data()  # node -> neighbours in clockwise order
    rot = {}
    for n in sorted(g.nodes, key=skey):
        cyc = []
        for w in order.get(n, []):
            key = tuple(sorted((n, w), key=skey))
            arcs = classes[key]
            # parallel arcs form a bundle of 2-gons: ascending ids at the
            # lesser endpoint, descending at the greater one
            if n == key[0]:
                block = arcs
            else:
                block = list(reversed(arcs))
            for a in block:
                u, v = g.arcs[a]
                cyc.append((a, 0) if u == n else (a, 1))
        for a in sorted(g.arcs, key=skey):
            u, v = g.arcs[a]
            if u == v == n:
                cyc.extend([(a, 0), (a, 1)])  # loop ends adjacent: planar
        rot[n] = tuple(cyc)
    assert is_planar_rotation(g, rot)
    return rot


def is_planar_graph(g: Graph) -> bool:
    sg, _ = _simple_projection(g)
    return nx.check_planarity(sg)[0]


@dataclass
class KuratowskiWitness:
    """A subdivision of K5 or K33 embedded in the host graph."""

    kind: str              # "K5" or "K33"
    branch_nodes: list
    paths: list            # arc-id lists, one per subdivision path

    def arcs(self):
        return [a for p in self.paths for a in p]


def kuratowski_witness(g: Graph):
    """A K5/K33 subdivision in g, or None iff g is planar.

    Found by deletion-and-retest on the simple underlying graph.
    """
    sg, classes = _simple_projection(g)
    if nx.check_planarity(sg)[0]:
        return None
    core = sg.copy()
    for u, v in sorted(sg.edges(), key=lambda e: skey(tuple(sorted(e, key=skey)))):
        core.remove_edge(u, v)
        if nx.check_planarity(core)[0]:
            core.add_edge(u, v)
    core.remove_nodes_from([n for n in list(core) if core.degree(n) == 0])

    branch = sorted((n for n in core if core.degree(n) >= 3), key=skey)
    degs = sorted(core.degree(n) for n in branch)
    if degs == [4, 4, 4, 4, 4]:
        kind = "K5"
    elif degs == [3, 3, 3, 3, 3, 3]:
        kind = "K33"
    else:  # pragma: no cover - deletion-minimal nonplanar graphs are Kuratowski
        raise AssertionError(f"unexpected branch degrees {degs}")

    paths = []
    used = set()
    for b in branch:
        for w in sorted(core[b], key=skey):
            if (b, w) in used:
                continue
            path_nodes = [b, w]
            used.add((b, w))
            used.add((w, b))
            while path_nodes[-1] not in branch:
                x = path_nodes[-1]
                nxts = [y for y in core[x] if (x, y) not in used]
                (y,) = nxts
                used.add((x, y))
                used.add((y, x))
                path_nodes.append(y)
            arcs = []
            for u, v in zip(path_nodes, path_nodes[1:]):
                key = tuple(sorted((u, v), key=skey))
                arcs.append(classes[key][0])
            paths.append(arcs)
    return KuratowskiWitness(kind, branch, paths)


# ---------------------------------------------------------------------------
# Connectivity
# ---------------------------------------------------------------------------

def connectivity_defect(g: Graph, k: int):
    """None if g is k-connected, else a short reason string.

    Follows the convention for k >= 2: at least k+1 nodes, no loops,
    no parallel arcs when k > 2, and no separating node set of size < k.
    """
    if len(g.nodes) < k + 1:
        return f"only {len(g.nodes)} nodes"
    if any(g.is_loop(a) for a in g.arcs):
        return "has a loop"
    if k > 2:
        pairs = set()
        for a, (u, v) in g.arcs.items():
            key = tuple(sorted((u, v), key=skey))
            if key in pairs:
                return f"parallel arcs between {key[0]!r} and {key[1]!r}"
            pairs.add(key)
    nodes = sorted(g.nodes, key=skey)
    for size in range(k):
        for cut in itertools.combinations(nodes, size):
            rest = [n for n in nodes if n not in cut]
            adj = {n: set() for n in rest}
            for u, v in g.arcs.values():
                if u in adj and v in adj:
                    adj[u].add(v)
                    adj[v].add(u)
            seen = {rest[0]}
            stack = [rest[0]]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if len(seen) != len(rest):
                return f"separator {list(cut)!r}"
    return None


def is_k_connected(g: Graph, k: int) -> bool:
    return connectivity_defect(g, k) is None


# ---------------------------------------------------------------------------
# Vertex sums
# ---------------------------------------------------------------------------

@dataclass
class VertexSumMap:
    """Renaming data of a vertex sum: old ids to ids in the summed graph."""

    node_map: dict         # (side, old node) -> new node, sides 1 and 2
    arc_map: dict          # (side, old arc) -> new arc for retained arcs
    join_map: dict         # old H1 arc at v -> new joining arc


def vertex_sum(h1: Graph, h2: Graph, v, iota) -> tuple[Graph, VertexSumMap]:
    """Glue h1 and h2 at v: delete v, join the iota-matched arc stubs.

    iota maps the arcs of h1 at v bijectively onto the arcs of h2 at v;
    loops at v are not supported.  The joining arc for pair (a1, a2) runs
    from a1's other endpoint (end 0) to a2's other endpoint (end 1).
    """
    for h in (h1, h2):
        if v not in h.nodes:
            raise ValueError(f"{v!r} not a node of both graphs")
        for a, (x, y) in h.arcs.items():
            if x == v and y == v:
                raise ValueError("bad bijection: loop at the sum vertex")
    at1 = sorted((a for a, (x, y) in h1.arcs.items() if v in (x, y)), key=skey)
    at2 = sorted((a for a, (x, y) in h2.arcs.items() if v in (x, y)), key=skey)
    if sorted(iota, key=skey) != at1 or sorted(iota.values(), key=skey) != at2:
        raise ValueError("bad bijection between the arcs at the sum vertex")

    g = Graph()
    node_map, arc_map, join_map = {}, {}, {}
    for side, h in ((1, h1), (2, h2)):
        for n in h.nodes:
            if n != v:
                node_map[(side, n)] = (side, n)
                g.add_node((side, n))
        for a, (x, y) in h.arcs.items():
            if v not in (x, y):
                arc_map[(side, a)] = (side, a)
                g.add_arc((side, a), (side, x), (side, y))
    for a1 in at1:
        a2 = iota[a1]
        x1, y1 = h1.arcs[a1]
        n1 = y1 if x1 == v else x1
        x2, y2 = h2.arcs[a2]
        n2 = y2 if x2 == v else x2
        join_map[a1] = ("j", a1)
        g.add_arc(("j", a1), (1, n1), (2, n2))
    return g, VertexSumMap(node_map, arc_map, join_map)


def transfer_rotation_to_sum(h1, h2, v, iota, rot1, rot2, summap):
    """Combined rotation of the vertex sum from rotations of the parts."""
    g_rot = {}
    for side, h, rot in ((1, h1, rot1), (2, h2, rot2)):
        for n, cyc in rot.items():
            if n == v:
                continue
            new_cyc = []
            for (a, i) in cyc:
                if v in h.arcs[a]:
                    if side == 1:
                        new_cyc.append((summap.join_map[a], 0))
                    else:
                        a1 = next(b for b, b2 in iota.items() if b2 == a)
                        new_cyc.append((summap.join_map[a1], 1))
                else:
                    new_cyc.append(((side, a), i))
            g_rot[(side, n)] = tuple(new_cyc)
    return g_rot


# ---------------------------------------------------------------------------
# Rotation-system minors
# ---------------------------------------------------------------------------

def rotation_delete_arc(g: Graph, rot, a):
    """Delete arc a, inducing the rotation on the smaller graph."""
    if a not in g.arcs:
        raise ValueError(f"unknown arc {a!r}")
    h = g.without_arc(a)
    new_rot = {n: tuple(e for e in cyc if e[0] != a) for n, cyc in rot.items()}
    return h, new_rot


def rotation_contract_arc(g: Graph, rot, a):
    """Contract non-loop arc a; the merged node keeps end-0's name.

    The rotator splices so the predecessor of a at one endpoint is
    followed by a's successor at the other endpoint; arcs parallel to a
    become loops at the merged node.
    """
    if g.is_loop(a):
        raise ValueError("cannot contract a loop")
    u, v = g.arcs[a]
    keep, gone = u, v

    h = Graph(n for n in g.nodes if n != gone)
    for b, (x, y) in g.arcs.items():
        if b == a:
            continue
        x2 = keep if x == gone else x
        y2 = keep if y == gone else y
        h.add_arc(b, x2, y2)

    cu = list(rot[u])
    cv = list(rot[v])
    iu = cu.index((a, 0)) if (a, 0) in cu else cu.index((a, 1))
    iv = cv.index((a, 1)) if (a, 1) in cv else cv.index((a, 0))
    merged = tuple(cu[iu + 1:] + cu[:iu]) + tuple(cv[iv + 1:] + cv[:iv])
    new_rot = {n: cyc for n, cyc in rot.items() if n not in (u, v)}
    new_rot[keep] = merged
    return h, new_rot


# ---------------------------------------------------------------------------
# Canonical embeddings of 3-connected planar graphs
# ---------------------------------------------------------------------------

def canonical_rotation(g: Graph):
    """The unique embedding pair of a 3-connected planar graph.

    Returns (canonical, reverse) picking the lexicographically least of the
    two mirror rotations, or None if g is nonplanar.
    """
    defect = connectivity_defect(g, 3)
    if defect is not None:
        raise ValueError(f"graph is not 3-connected: {defect}")
    rot = planar_embedding(g)
    if rot is None:
        return None
    fwd = normalize_rotation(rot)
    bwd = reverse_rotation(rot)

    def sig(r):
        return tuple((skey(n), tuple(map(skey, r[n]))) for n in sorted(r, key=skey))

    return (fwd, bwd) if sig(fwd) <= sig(bwd) else (bwd, fwd)


def all_rotation_systems(g: Graph):
    """Iterate every rotation system of g (first arc-end of each rotator fixed)."""
    nodes = sorted(g.nodes, key=skey)
    ends = [g.arc_ends_at(n) for n in nodes]
    pools = []
    for e in ends:
        if len(e) <= 1:
            pools.append([tuple(e)])
        else:
            pools.append([(e[0],) + p for p in itertools.permutations(e[1:])])
    for combo in itertools.product(*pools):
        yield dict(zip(nodes, combo))


def count_rotation_systems(g: Graph) -> int:
    import math

    c = 1
    for n in g.nodes:
        d = g.degree(n)
        c *= math.factorial(d - 1) if d > 1 else 1
    return c


# ---------------------------------------------------------------------------
# Isomorphism and canonical forms
# ---------------------------------------------------------------------------

def _refine(colours, adj):
    while True:
        sig = {}
        for n, c in colours.items():
            nb = sorted((colours[m], mult) for m, mult in adj[n].items())
            sig[n] = (c, tuple(nb))
        ranks = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {n: ranks[sig[n]] for n in colours}
        if new == colours:
            return colours
        colours = new


def canonical_form(g: Graph, colours=None) -> str:
    """Canonical string of a node-coloured multigraph.

    Equal strings characterise isomorphism respecting the colouring.
    Designed for the small graphs handled here (refinement plus
    backtracking over the remaining symmetric cells).
    """
    nodes = sorted(g.nodes, key=skey)
    adj = {n: {} for n in nodes}
    loops = {n: 0 for n in nodes}
    for u, v in g.arcs.values():
        if u == v:
            loops[u] += 1
        else:
            adj[u][v] = adj[u].get(v, 0) + 1
            adj[v][u] = adj[v].get(u, 0) + 1
    base = {n: (colours.get(n, 0) if colours else 0, loops[n]) for n in nodes}
    ranks = {s: i for i, s in enumerate(sorted(set(base.values())))}
    col = _refine({n: ranks[base[n]] for n in nodes}, adj)

    best = [None]

    def leaf_sig(order):
        pos = {n: i for i, n in enumerate(order)}
        rows = sorted(
            (pos[u], pos[v], m) if pos[u] <= pos[v] else (pos[v], pos[u], m)
            for u, nbrs in adj.items()
            for v, m in nbrs.items()
            if pos[u] <= pos[v]
        )
        cols = tuple(col[n] for n in order)
        lps = tuple(loops[n] for n in order)
        return (cols, lps, tuple(rows))

    def backtrack(order, remaining, cur_col):
        if not remaining:
            s = leaf_sig(order)
            if best[0] is None or s < best[0]:
                best[0] = s
            return
        cells = {}
        for n in remaining:
            cells.setdefault(cur_col[n], []).append(n)
        cell = cells[min(cells)]
        if len(cell) == 1:
            n = cell[0]
            backtrack(order + [n], [m for m in remaining if m != n], cur_col)
            return
        for n in sorted(cell, key=skey):
            nxt = dict(cur_col)
            nxt[n] = -len(order) - 1  # individualise, keeping it least
            nxt = _refine(nxt, adj)
            backtrack(order + [n], [m for m in remaining if m != n], nxt)

    backtrack([], nodes, col)
    return repr(best[0])


def are_isomorphic(g1: Graph, g2: Graph, colours1=None, colours2=None) -> bool:
    if len(g1.nodes) != len(g2.nodes) or len(g1.arcs) != len(g2.arcs):
        return False
    return canonical_form(g1, colours1) == canonical_form(g2, colours2)


def complete_graph(n: int) -> Graph:
    g = Graph(range(1, n + 1))
    for i, j in itertools.combinations(range(1, n + 1), 2):
        g.add_arc(f"e{i}{j}", i, j)
    return g


def complete_bipartite(m: int, n: int) -> Graph:
    g = Graph([f"a{i}" for i in range(m)] + [f"b{j}" for j in range(n)])
    for i in range(m):
        for j in range(n):
            g.add_arc(f"e{i}{j}", f"a{i}", f"b{j}")
    return g
