"""Directed 2-complexes and their primitive structural operations.

A complex is a multigraph together with faces, each face a closed walk of
signed edge traversals ((edge, +1) walks tail to head).  Faces may repeat
edges unless strict-trail validation is requested.  Every vertex and edge
must lie on some face.

Face passages are first class: the k-th traversal of edge e by face f is
the passage (f, k), and rotation systems of complexes cyclically order the
passages at each edge.  The link graph at a vertex has one node per
edge-end there and one arc per face corner.
"""

from __future__ import annotations

from dataclasses import dataclass

from embed3.graphs import Graph, skey

FORWARD = 1
BACKWARD = -1


class Complex2:
    """Vertices, directed edges, and faces given as closed walks."""

    def __init__(self, vertices=(), edges=None, faces=None):
        self.vertices = set(vertices)
        self.edges = dict(edges or {})    # edge id -> (tail, head)
        self.faces = {f: tuple(w) for f, w in (faces or {}).items()}

    def copy(self):
        return Complex2(self.vertices, self.edges, self.faces)

    def tail(self, e):
        return self.edges[e][0]

    def head(self, e):
        return self.edges[e][1]

    def is_loop(self, e):
        t, h = self.edges[e]
        return t == h

    def edges_at(self, v):
        return sorted(
            (e for e, (t, h) in self.edges.items() if v in (t, h)), key=skey
        )

    def traversal_source(self, trav):
        e, d = trav
        return self.edges[e][0] if d == FORWARD else self.edges[e][1]

    def traversal_target(self, trav):
        e, d = trav
        return self.edges[e][1] if d == FORWARD else self.edges[e][0]

    def walk_with_occurrences(self, f):
        """Face walk annotated with per-edge occurrence counters."""
        seen = {}
        out = []
        for e, d in self.faces[f]:
            k = seen.get(e, 0)
            seen[e] = k + 1
            out.append((e, d, k))
        return out

    def face_size(self, f):
        return len(self.faces[f])

    def passages(self, e):
        """All passages (face, occurrence) through edge e, sorted."""
        out = []
        for f in sorted(self.faces, key=skey):
            k = 0
            for e2, _ in self.faces[f]:
                if e2 == e:
                    out.append((f, k))
                    k += 1
        return out

    def passage_count(self, e):
        return sum(1 for f in self.faces for e2, _ in self.faces[f] if e2 == e)

    def faces_at_edge(self, e):
        return sorted({f for f in self.faces for e2, _ in self.faces[f] if e2 == e},
                      key=skey)

    def faces_at_vertex(self, v):
        out = set()
        for f, walk in self.faces.items():
            for e, _ in walk:
                if v in self.edges[e]:
                    out.add(f)
                    break
        return sorted(out, key=skey)

    def loops_at(self, v):
        return [e for e in self.edges_at(v) if self.is_loop(e)]

    def skeleton(self) -> Graph:
        g = Graph(self.vertices)
        for e, (t, h) in self.edges.items():
            g.add_arc(e, t, h)
        return g

    def __repr__(self):
        return (f"Complex2({len(self.vertices)} vertices, "
                f"{len(self.edges)} edges, {len(self.faces)} faces)")


def complexes_equal(c1: Complex2, c2: Complex2) -> bool:
    """Equality with face walks compared up to cyclic rotation."""
    if c1.vertices != c2.vertices or c1.edges != c2.edges:
        return False
    if set(c1.faces) != set(c2.faces):
        return False
    for f in c1.faces:
        w1, w2 = c1.faces[f], c2.faces[f]
        if len(w1) != len(w2):
            return False
        if not any(w2[i:] + w2[:i] == w1 for i in range(max(1, len(w2)))):
            return False
    return True


def validate(c: Complex2, strict_trails: bool = False):
    """All invariant violations of c, as strings; empty means valid."""
    out = []
    for e, (t, h) in c.edges.items():
        for x in (t, h):
            if x not in c.vertices:
                out.append(f"edge {e} references unknown vertex {x}")
    for f, walk in c.faces.items():
        if not walk:
            out.append(f"face {f} is empty")
            continue
        bad = False
        for e, d in walk:
            if e not in c.edges:
                out.append(f"face {f} references unknown edge {e}")
                bad = True
            if d not in (FORWARD, BACKWARD):
                out.append(f"face {f} has invalid direction {d}")
                bad = True
        if bad:
            continue
        n = len(walk)
        for i in range(n):
            if c.traversal_target(walk[i]) != c.traversal_source(walk[(i + 1) % n]):
                out.append(f"face {f} is not a closed walk at position {i}")
        if strict_trails:
            edges_used = [e for e, _ in walk]
            for e in sorted(set(edges_used), key=skey):
                if edges_used.count(e) > 1:
                    out.append(f"face {f} repeats edge {e}")
    edges_on_faces = {e for walk in c.faces.values() for e, _ in walk}
    for e in sorted(c.edges, key=skey):
        if e not in edges_on_faces:
            out.append(f"edge {e} lies on no face")
    covered = set()
    for t, h in c.edges.values():
        covered.add(t)
        covered.add(h)
    for v in sorted(c.vertices, key=skey):
        if v not in covered:
            out.append(f"vertex {v} is isolated")
    return out


def is_simplicial(c: Complex2) -> bool:
    """Faces are triangles on three distinct vertices, graph is simple,
    and no two faces span the same vertex set."""
    pairs = set()
    for e, (t, h) in c.edges.items():
        if t == h:
            return False
        key = tuple(sorted((t, h), key=skey))
        if key in pairs:
            return False
        pairs.add(key)
    triples = set()
    for f, walk in c.faces.items():
        if len(walk) != 3:
            return False
        vs = frozenset(c.traversal_source(t) for t in walk)
        if len(vs) != 3 or vs in triples:
            return False
        triples.add(vs)
    return True


def is_3_bounded(c: Complex2) -> bool:
    return all(len(w) <= 3 for w in c.faces.values())


# ---------------------------------------------------------------------------
# Link graphs
# ---------------------------------------------------------------------------

@dataclass
class LinkGraph:
    """Incidence structure at a vertex.

    Nodes are edge-ends (edge, 0|1) whose endpoint is the vertex; arcs are
    face corners (face, walk position).  passage_end[node][(face, occ)] is
    the arc-end at node belonging to that passage; loop_pairing[loop] maps
    each arc-end at the loop's tail node to its partner at the head node.
    """

    vertex: object
    graph: Graph
    passage_end: dict
    end_passage: dict
    loop_pairing: dict

    def nodes(self):
        return sorted(self.graph.nodes, key=skey)


def link_graph(c: Complex2, v) -> LinkGraph:
    if v not in c.vertices:
        raise ValueError(f"unknown vertex {v!r}")
    g = Graph()
    for e, (t, h) in sorted(c.edges.items(), key=lambda kv: skey(kv[0])):
        if t == v:
            g.add_node((e, 0))
        if h == v:
            g.add_node((e, 1))

    passage_end = {n: {} for n in g.nodes}
    for f in sorted(c.faces, key=skey):
        walk = c.walk_with_occurrences(f)
        n = len(walk)
        for i in range(n):
            e_i, d_i, _ = walk[i]
            if c.traversal_target((e_i, d_i)) != v:
                continue
            e_j, d_j, _ = walk[(i + 1) % n]
            arrive = (e_i, 1 if d_i == FORWARD else 0)
            depart = (e_j, 0 if d_j == FORWARD else 1)
            g.add_arc((f, i), arrive, depart)
        for i in range(n):
            e_i, d_i, k_i = walk[i]
            if c.traversal_target((e_i, d_i)) == v:
                arrive = (e_i, 1 if d_i == FORWARD else 0)
                passage_end[arrive][(f, k_i)] = ((f, i), 0)
            if c.traversal_source((e_i, d_i)) == v:
                depart = (e_i, 0 if d_i == FORWARD else 1)
                passage_end[depart][(f, k_i)] = ((f, (i - 1) % n), 1)

    loop_pairing = {}
    for e in c.loops_at(v):
        pairing = {}
        for f in sorted(c.faces, key=skey):
            walk = c.walk_with_occurrences(f)
            n = len(walk)
            for i in range(n):
                e_i, d_i, _ = walk[i]
                if e_i != e:
                    continue
                start_end = ((f, (i - 1) % n), 1)
                finish_end = ((f, i), 0)
                if d_i == FORWARD:
                    pairing[start_end] = finish_end   # tail side -> head side
                else:
                    pairing[finish_end] = start_end
        loop_pairing[e] = pairing

    end_passage = {
        n: {end: p for p, end in m.items()} for n, m in passage_end.items()
    }
    return LinkGraph(v, g, passage_end, end_passage, loop_pairing)


def is_locally_k_connected(c: Complex2, k: int):
    """(ok, witness): every link connected and k-connected (k in {2, 3})."""
    from embed3.graphs import connectivity_defect

    for v in sorted(c.vertices, key=skey):
        lg = link_graph(c, v)
        if not lg.graph.is_connected():
            return False, (v, "link disconnected")
        defect = connectivity_defect(lg.graph, k)
        if defect is not None:
            return False, (v, defect)
    return True, None


# ---------------------------------------------------------------------------
# Space-minor operations
# ---------------------------------------------------------------------------

def _prune(c: Complex2) -> Complex2:
    """Drop empty faces, then face-free edges, then isolated vertices."""
    faces = {f: w for f, w in c.faces.items() if w}
    used_edges = {e for w in faces.values() for e, _ in w}
    edges = {e: ends for e, ends in c.edges.items() if e in used_edges}
    used_vertices = {x for ends in edges.values() for x in ends}
    vertices = {v for v in c.vertices if v in used_vertices}
    return Complex2(vertices, edges, faces)


def _fresh(name, taken):
    while name in taken:
        name = f"{name}_"
    return name


def contract_edge(c: Complex2, e) -> Complex2:
    """Identify the endpoints of a non-loop edge and drop its traversals.

    The merged vertex keeps the lesser endpoint id.  Faces reduced to
    nothing are deleted.
    """
    if e not in c.edges:
        raise ValueError(f"unknown edge {e!r}")
    if c.is_loop(e):
        raise ValueError(f"cannot contract loop {e!r}")
    t, h = c.edges[e]
    keep, gone = (t, h) if skey(t) <= skey(h) else (h, t)

    vertices = {v for v in c.vertices if v != gone}
    edges = {}
    for e2, (t2, h2) in c.edges.items():
        if e2 == e:
            continue
        edges[e2] = (keep if t2 == gone else t2, keep if h2 == gone else h2)
    faces = {}
    for f, walk in c.faces.items():
        faces[f] = tuple(tr for tr in walk if tr[0] != e)
    return _prune(Complex2(vertices, edges, faces))


def merged_vertex_after_contraction(c: Complex2, e):
    t, h = c.edges[e]
    return t if skey(t) <= skey(h) else h


def delete_face(c: Complex2, f) -> Complex2:
    """Remove f together with any items left face-free."""
    if f not in c.faces:
        raise ValueError(f"unknown face {f!r}")
    faces = {f2: w for f2, w in c.faces.items() if f2 != f}
    return _prune(Complex2(c.vertices, c.edges, faces))


@dataclass
class ContractFaceInfo:
    """Provenance of a face contraction, for carrying rotation systems."""

    merged_edge: object            # new edge id (size-two case), else None
    dir_map: dict                  # (old edge, dir) -> (merged edge, dir)
    walk_maps: dict                # face -> list of old positions kept, in order
    removed_loop: object           # the loop (size-one case), else None


def contract_face_with_info(c: Complex2, f):
    if f not in c.faces:
        raise ValueError(f"unknown face {f!r}")
    walk = c.faces[f]
    if len(walk) == 1:
        return _contract_size_one(c, f)
    if len(walk) == 2:
        return _contract_size_two(c, f)
    raise ValueError(f"face {f!r} has size {len(walk)}, need 1 or 2")


def contract_face(c: Complex2, f) -> Complex2:
    return contract_face_with_info(c, f)[0]


def _contract_size_one(c, f):
    (ell, _), = c.faces[f]
    if not c.is_loop(ell):  # closed size-one walks are loops; guard anyway
        raise ValueError(f"size-one face {f!r} does not lie on a loop")
    faces = {}
    walk_maps = {}
    for f2, walk in c.faces.items():
        if f2 == f:
            continue
        kept = [i for i, (e, _) in enumerate(walk) if e != ell]
        faces[f2] = tuple(walk[i] for i in kept)
        walk_maps[f2] = kept
    edges = {e: ends for e, ends in c.edges.items() if e != ell}
    out = _prune(Complex2(c.vertices, edges, faces))
    return out, ContractFaceInfo(None, {}, walk_maps, ell)


def _contract_size_two(c, f):
    (e1, d1), (e2, d2) = c.faces[f]
    if e1 == e2:
        raise ValueError(f"face {f!r} traverses a single edge twice")
    if c.is_loop(e1) or c.is_loop(e2):
        raise ValueError(f"face {f!r} has a loop edge")
    g = _fresh(f, set(c.edges) - {e1, e2})
    tail = c.traversal_source((e1, d1))
    head = c.traversal_target((e1, d1))
    # the merged edge is parallel to f's first traversal; f's second runs back
    dir_map = {
        (e1, d1): (g, FORWARD), (e1, -d1): (g, BACKWARD),
        (e2, d2): (g, BACKWARD), (e2, -d2): (g, FORWARD),
    }
    edges = {e: ends for e, ends in c.edges.items() if e not in (e1, e2)}
    edges[g] = (tail, head)

    faces = {}
    walk_maps = {}
    for f2, walk in c.faces.items():
        if f2 == f:
            continue
        subst = []
        for i, (e, d) in enumerate(walk):
            if e in (e1, e2):
                subst.append((dir_map[(e, d)], i))
            else:
                subst.append(((e, d), i))
        # cancel adjacent opposite traversals of the merged edge, repeatedly
        changed = True
        while changed and subst:
            changed = False
            n = len(subst)
            for i in range(n):
                (ea, da), _ = subst[i]
                (eb, db), _ = subst[(i + 1) % n]
                if ea == g and eb == g and da == -db and n >= 2:
                    if i + 1 < n:
                        del subst[i + 1]
                        del subst[i]
                    else:
                        del subst[i]
                        del subst[0]
                    changed = True
                    break
        faces[f2] = tuple(tr for tr, _ in subst)
        walk_maps[f2] = [i for _, i in subst]
    out = _prune(Complex2(c.vertices, edges, faces))
    return out, ContractFaceInfo(g, dir_map, walk_maps, None)


@dataclass
class DeleteEdgeInfo:
    copies: dict  # passage (face, occ) -> fresh edge id


def delete_edge_with_info(c: Complex2, e):
    """Forget e's incidences: one parallel copy per passage."""
    if e not in c.edges:
        raise ValueError(f"unknown edge {e!r}")
    passages = c.passages(e)
    taken = set(c.edges) - {e}
    copies = {}
    for i, p in enumerate(passages):
        name = _fresh(f"{e}_{i}", taken)
        taken.add(name)
        copies[p] = name
    edges = {e2: ends for e2, ends in c.edges.items() if e2 != e}
    for name in copies.values():
        edges[name] = c.edges[e]
    faces = {}
    for f, walk in c.faces.items():
        occ = 0
        new_walk = []
        for e2, d in walk:
            if e2 == e:
                new_walk.append((copies[(f, occ)], d))
                occ += 1
            else:
                new_walk.append((e2, d))
        faces[f] = tuple(new_walk)
    return Complex2(c.vertices, edges, faces), DeleteEdgeInfo(copies)


def delete_edge(c: Complex2, e) -> Complex2:
    return delete_edge_with_info(c, e)[0]


def split_vertex(c: Complex2, v) -> Complex2:
    """Replace v by one vertex per component of its link graph."""
    lg = link_graph(c, v)
    comps = lg.graph.components()
    if len(comps) <= 1:
        return c
    taken = set(c.vertices) - {v}
    names = []
    for i in range(len(comps)):
        name = _fresh(f"{v}_{i}", taken)
        taken.add(name)
        names.append(name)
    where = {}
    for ci, comp in enumerate(comps):
        for node in comp:
            where[node] = names[ci]
    vertices = (c.vertices - {v}) | set(names)
    edges = {}
    for e, (t, h) in c.edges.items():
        t2 = where[(e, 0)] if t == v else t
        h2 = where[(e, 1)] if h == v else h
        edges[e] = (t2, h2)
    return Complex2(vertices, edges, c.faces)


@dataclass(frozen=True)
class SpaceMinorOp:
    """One of the five reduction operations, by kind and target id."""

    kind: str   # contract-edge | delete-face | contract-face | split-vertex | delete-edge
    arg: object

    KINDS = ("contract-edge", "delete-face", "contract-face",
             "split-vertex", "delete-edge")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown operation kind {self.kind!r}")


def apply_op(c: Complex2, op: SpaceMinorOp) -> Complex2:
    if op.kind == "contract-edge":
        return contract_edge(c, op.arg)
    if op.kind == "delete-face":
        return delete_face(c, op.arg)
    if op.kind == "contract-face":
        return contract_face(c, op.arg)
    if op.kind == "split-vertex":
        return split_vertex(c, op.arg)
    return delete_edge(c, op.arg)


# ---------------------------------------------------------------------------
# Cycles, homology, measure
# ---------------------------------------------------------------------------

def chordless_cycles(c: Complex2):
    """Chordless loop-free cycles of the 1-skeleton, as edge-id tuples.

    A chord joins two distinct cycle vertices without being parallel to a
    cycle edge; two parallel edges form a (chordless) cycle of length two.
    """
    adj = {}
    for e, (t, h) in c.edges.items():
        if t == h:
            continue
        adj.setdefault(t, {}).setdefault(h, []).append(e)
        adj.setdefault(h, {}).setdefault(t, []).append(e)
    for u in sorted(adj, key=skey):
        for w in sorted(adj[u], key=skey):
            if skey(w) <= skey(u):
                continue
            parallel = sorted(adj[u][w], key=skey)
            for i in range(len(parallel)):
                for j in range(i + 1, len(parallel)):
                    yield (parallel[i], parallel[j])

    vertices = sorted(adj, key=skey)
    for start in vertices:
        stack = [(start, [start])]
        while stack:
            cur, path = stack.pop()
            for nxt in sorted(adj[cur], key=skey):
                if nxt == start and len(path) >= 3:
                    if skey(path[1]) > skey(path[-1]):
                        continue  # reflection duplicate
                    cyc = path
                    pairs = {
                        frozenset((cyc[i], cyc[(i + 1) % len(cyc)]))
                        for i in range(len(cyc))
                    }
                    chorded = False
                    for a in range(len(cyc)):
                        for b in range(a + 1, len(cyc)):
                            pa, pb = cyc[a], cyc[b]
                            if frozenset((pa, pb)) in pairs:
                                continue
                            if pb in adj.get(pa, {}):
                                chorded = True
                                break
                        if chorded:
                            break
                    if chorded:
                        continue
                    import itertools as _it

                    choices = [
                        sorted(adj[cyc[i]][cyc[(i + 1) % len(cyc)]], key=skey)
                        for i in range(len(cyc))
                    ]
                    for combo in _it.product(*choices):
                        yield tuple(combo)
                elif nxt not in path and skey(nxt) > skey(start):
                    stack.append((nxt, path + [nxt]))


def _rank_mod_p(rows, p):
    rows = [[x % p for x in row] for row in rows if any(x % p for x in row)]
    rank = 0
    col = 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] % p), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [(a - factor * b) % p for a, b in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


def boundary_matrices(c: Complex2):
    """Integer boundary maps (d1: edges to vertices, d2: faces to edges)."""
    vs = sorted(c.vertices, key=skey)
    es = sorted(c.edges, key=skey)
    fs = sorted(c.faces, key=skey)
    vi = {v: i for i, v in enumerate(vs)}
    ei = {e: i for i, e in enumerate(es)}
    d1 = [[0] * len(es) for _ in vs]
    for e, (t, h) in c.edges.items():
        d1[vi[h]][ei[e]] += 1
        d1[vi[t]][ei[e]] -= 1
    d2 = [[0] * len(fs) for _ in es]
    for j, f in enumerate(fs):
        for e, d in c.faces[f]:
            d2[ei[e]][j] += 1 if d == FORWARD else -1
    return d1, d2


def homology_h1_dim(c: Complex2, p: int) -> int:
    """dim over F_p of ker d1 / im d2."""
    if p < 2 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
        raise ValueError(f"{p} is not prime")
    d1, d2 = boundary_matrices(c)
    ne = len(c.edges)
    rank1 = _rank_mod_p(d1, p) if ne else 0
    rank2 = _rank_mod_p(d2, p) if c.faces else 0
    return (ne - rank1) - rank2


def measure(c: Complex2):
    """(total passage count, vertex and edge count): the well-founded measure."""
    s = sum(len(w) for w in c.faces.values())
    return s, len(c.vertices) + len(c.edges)
