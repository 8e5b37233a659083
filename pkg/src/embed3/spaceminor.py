"""Space-minor traces, generalised cones, and obstruction extraction.

A trace is a replayable list of the five reduction operations.  The
obstruction pipeline reduces a failed complex to a generalised cone over
K5 or K33 (kind zcal1) or to a looped generalised cone whose top link
carries a strict catalogue member (kind zcal2); every produced trace
replays cleanly and the end complex is recognised structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from embed3.complexes import (
    BACKWARD,
    FORWARD,
    Complex2,
    SpaceMinorOp,
    apply_op,
    complexes_equal,
    contract_edge,
    is_3_bounded,
    link_graph,
    measure,
    merged_vertex_after_contraction,
    split_vertex,
    validate,
)
from embed3.graphs import Graph, are_isomorphic, complete_bipartite, complete_graph, skey
from embed3.marked import (
    StrictCatalog,
    _strict_minor_by_embedding,
    associated_strict_marked_graphs,
    is_planar_marked,
    strict_catalog,
)


@dataclass
class SpaceMinorTrace:
    """Replayable reduction: ops applied in order to start yield end."""

    start: Complex2
    ops: tuple
    end: Complex2

    def __post_init__(self):
        self.ops = tuple(self.ops)


def replay(trace: SpaceMinorTrace) -> Complex2:
    """Apply the ops in order, checking each precondition."""
    cur = trace.start
    for i, op in enumerate(trace.ops):
        try:
            cur = apply_op(cur, op)
        except ValueError as exc:
            raise ValueError(f"step {i} ({op.kind} {op.arg!r}): {exc}") from exc
    return cur


def verify_trace(trace: SpaceMinorTrace) -> bool:
    """Replay and compare against the stored end complex."""
    try:
        end = replay(trace)
    except ValueError:
        return False
    return complexes_equal(end, trace.end)


def extend(trace: SpaceMinorTrace, ops_and_end) -> SpaceMinorTrace:
    ops, end = ops_and_end
    return SpaceMinorTrace(trace.start, trace.ops + tuple(ops), end)


# ---------------------------------------------------------------------------
# Generalised cones
# ---------------------------------------------------------------------------

@dataclass
class GeneralisedCone:
    """A recognised or constructed cone: all faces meet the top vertex."""

    complex: Complex2
    top: object
    base: Graph          # the link graph at the top
    classes: dict        # non-top vertex -> sorted list of its top edges
    loop: object = None  # the top loop of a looped cone, if any


def build_generalised_cone(g: Graph, partition, loop_decoration=None) -> GeneralisedCone:
    """Cone over a loopless graph with respect to a partition into
    connected classes; optional loop decoration (singleton-face count and
    the intra-class arcs whose faces pick up the loop)."""
    if any(g.is_loop(a) for a in g.arcs):
        raise ValueError("base graph must be loopless")
    nodes = sorted(g.nodes, key=skey)
    classes = [sorted(cl, key=skey) for cl in partition]
    flat = [n for cl in classes for n in cl]
    if sorted(flat, key=skey) != nodes:
        raise ValueError("invalid partition")
    class_of = {}
    for i, cl in enumerate(classes):
        for n in cl:
            class_of[n] = f"c{i}"
    for i, cl in enumerate(classes):
        # each class must induce a connected subgraph
        if len(cl) > 1:
            adj = {n: set() for n in cl}
            for a, (u, v) in g.arcs.items():
                if u in adj and v in adj and u != v:
                    adj[u].add(v)
                    adj[v].add(u)
            seen = {cl[0]}
            stack = [cl[0]]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if len(seen) != len(cl):
                raise ValueError(f"partition class {i} is not connected")

    edges = {}
    for n in nodes:
        edges[f"t_{n}"] = ("top", class_of[n])
    for a in sorted(g.arcs, key=skey):
        u, v = g.arcs[a]
        if class_of[u] != class_of[v]:
            edges[f"b_{a}"] = (class_of[u], class_of[v])

    extend_arcs = set()
    n_singletons = 0
    if loop_decoration is not None:
        n_singletons, extend_with = loop_decoration
        extend_arcs = set(extend_with)
        edges["lam"] = ("top", "top")

    faces = {}
    for a in sorted(g.arcs, key=skey):
        u, v = g.arcs[a]
        if class_of[u] == class_of[v]:
            walk = [(f"t_{u}", BACKWARD)]
            if a in extend_arcs:
                walk.append(("lam", FORWARD))
            walk.append((f"t_{v}", FORWARD))
            faces[f"f_{a}"] = tuple(walk)
        else:
            if a in extend_arcs:
                raise ValueError("only intra-class faces can take the loop")
            faces[f"f_{a}"] = (
                (f"t_{u}", BACKWARD), (f"t_{v}", FORWARD), (f"b_{a}", BACKWARD)
            )
    for i in range(n_singletons):
        faces[f"lf{i}"] = (("lam", FORWARD),)

    vertices = {"top"} | {class_of[n] for n in nodes}
    c = Complex2(vertices, edges, faces)
    bad = validate(c)
    if bad:
        raise ValueError(f"cone construction invalid: {bad[0]}")
    lg = link_graph(c, "top")
    byc = {}
    for n in nodes:
        byc.setdefault(class_of[n], []).append(f"t_{n}")
    return GeneralisedCone(c, "top", lg.graph, byc,
                           "lam" if loop_decoration is not None else None)


def _face_shape(c: Complex2, f, top):
    """Classify a face of a cone candidate; None when it does not fit.

    Shapes: ("intra", tu, tv), ("inter", tu, tv, base),
    ("classloop", tu, loop, tv), ("toploop0", lam),
    ("extended", tu, lam, tv).
    """
    walk = c.faces[f]
    n = len(walk)
    if n == 1:
        (e, _), = walk
        if c.edges[e] == (top, top):
            return ("toploop0", e)
        return None
    starts = [i for i in range(n)
              if c.traversal_source(walk[i]) == top
              and c.edges[walk[i][0]] != (top, top)]
    if len(starts) != 1:
        return None
    i = starts[0]
    walk = walk[i:] + walk[:i]
    ids = [e for e, _ in walk]
    at_top = [e for e in ids if top in c.edges[e]]
    if n == 2:
        if len(at_top) == 2 and ids[0] != ids[1]:
            return ("intra", ids[0], ids[1])
        return None
    if n != 3:
        return None
    e0, e1, e2 = ids
    if top in c.edges[e0] and top in c.edges[e1] and top not in c.edges[e2]:
        # top, top, base
        return ("inter", e0, e1, e2)
    if top in c.edges[e0] and c.edges[e1][0] == c.edges[e1][1] and top in c.edges[e2]:
        mid = c.edges[e1][0]
        if mid == top:
            return ("extended", e0, e1, e2)
        return ("classloop", e0, e1, e2)
    return None


def recognise_cone(c: Complex2, looped=None):
    """Recognise c as a (looped) generalised cone, or return None.

    looped: None accepts either kind; True/False demands one.
    """
    for top in sorted(c.vertices, key=skey):
        out = _recognise_with_top(c, top, looped)
        if out is not None:
            return out
    return None


def _recognise_with_top(c, top, looped):
    loops_at_top = [e for e in c.edges_at(top) if c.is_loop(e)]
    if len(loops_at_top) > 1:
        return None
    lam = loops_at_top[0] if loops_at_top else None
    if looped is True and lam is None:
        return None
    if looped is False and lam is not None:
        return None
    top_edges = [e for e in c.edges_at(top) if not c.is_loop(e)]
    shapes = {}
    for f in sorted(c.faces, key=skey):
        shape = _face_shape(c, f, top)
        if shape is None:
            return None
        if shape[0] in ("toploop0", "extended") and lam is None:
            return None
        shapes[f] = shape
    # every non-top edge belongs to exactly one face
    for e in sorted(c.edges, key=skey):
        if top in c.edges[e]:
            continue
        if c.passage_count(e) != 1:
            return None
    # class loops sit at the class vertex of their flanking top edges
    for f, sh in shapes.items():
        if sh[0] == "classloop":
            tu, l, tv = sh[1:]
            cls = c.edges[tu][1] if c.edges[tu][0] == top else c.edges[tu][0]
            if c.edges[l] != (cls, cls):
                return None
    # classes are connected through intra-class faces
    by_class = {}
    for e in top_edges:
        t, h = c.edges[e]
        w = h if t == top else t
        by_class.setdefault(w, []).append(e)
    for w, members in by_class.items():
        adj = {e: set() for e in members}
        for f, sh in shapes.items():
            if sh[0] == "intra" or sh[0] == "classloop":
                a, b = (sh[1], sh[2]) if sh[0] == "intra" else (sh[1], sh[3])
                if a in adj and b in adj:
                    adj[a].add(b)
                    adj[b].add(a)
        seen = {members[0]}
        stack = [members[0]]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != len(members):
            return None
    lg = link_graph(c, top)
    return GeneralisedCone(c, top, lg.graph,
                           {w: sorted(m, key=skey) for w, m in by_class.items()},
                           lam)


# ---------------------------------------------------------------------------
# Reduction to a cone
# ---------------------------------------------------------------------------

def _split_ops(cur, skip):
    """Split every vertex (except skip) with a disconnected link."""
    ops = []
    for w in sorted(cur.vertices, key=skey):
        if w == skip:
            continue
        lg = link_graph(cur, w)
        if not lg.graph.is_connected():
            op = SpaceMinorOp("split-vertex", w)
            cur = apply_op(cur, op)
            ops.append(op)
    return ops, cur


def reduce_to_cone(c: Complex2, v) -> tuple[SpaceMinorTrace, GeneralisedCone]:
    """Delete everything away from v and split the other vertices; the
    result is a (looped) generalised cone whose top link is L(v)."""
    if not is_3_bounded(c):
        raise ValueError("complex is not 3-bounded")
    if len(c.loops_at(v)) > 1:
        raise ValueError("more than one loop at the chosen vertex")
    ops = []
    cur = c
    for f in sorted(c.faces, key=skey):
        if not any(v in cur.edges[e] for e, _ in cur.faces.get(f, ())):
            if f in cur.faces:
                op = SpaceMinorOp("delete-face", f)
                cur = apply_op(cur, op)
                ops.append(op)
    for e in sorted(cur.edges, key=skey):
        if v in cur.edges[e]:
            continue
        if cur.passage_count(e) >= 2:
            op = SpaceMinorOp("delete-edge", e)
            cur = apply_op(cur, op)
            ops.append(op)
    more, cur = _split_ops(cur, v)
    ops.extend(more)
    cone = recognise_cone(cur)
    assert cone is not None and cone.top == v, "reduction did not yield a cone"
    return SpaceMinorTrace(c, ops, cur), cone


# ---------------------------------------------------------------------------
# Subdivision reduction of a plain cone
# ---------------------------------------------------------------------------

def _suppress_top_node(cur, top, node_edge):
    """Merge away a degree-two top edge, per the two-or-three face cases."""
    ops = []
    faces = cur.faces_at_edge(node_edge)
    assert len(faces) == 2
    # prefer a size-two face; otherwise shrink the first via its base edge
    if len(cur.faces[faces[0]]) == 2:
        f_a = faces[0]
    elif len(cur.faces[faces[1]]) == 2:
        f_a = faces[1]
    else:
        f_a = faces[0]
        base = next(e for e, _ in cur.faces[f_a] if top not in cur.edges[e])
        assert not cur.is_loop(base)
        op = SpaceMinorOp("contract-edge", base)
        cur = apply_op(cur, op)
        ops.append(op)
    op = SpaceMinorOp("contract-face", f_a)
    cur = apply_op(cur, op)
    ops.append(op)
    return ops, cur


def cone_subdivision_reduce(cone: GeneralisedCone, keep_faces) -> tuple[SpaceMinorTrace, GeneralisedCone]:
    """Delete the faces outside keep_faces and suppress the degree-two top
    nodes; the end is a generalised cone over the suppressed subgraph."""
    cur = cone.complex
    top = cone.top
    ops = []
    for f in sorted(cur.faces, key=skey):
        if f in keep_faces:
            continue
        op = SpaceMinorOp("delete-face", f)
        cur = apply_op(cur, op)
        ops.append(op)
        more, cur = _split_ops(cur, top)
        ops.extend(more)
    while True:
        lg = link_graph(cur, top)
        node = next((n for n in lg.nodes() if lg.graph.degree(n) == 2), None)
        if node is None:
            break
        more, cur = _suppress_top_node(cur, top, node[0])
        ops.extend(more)
    out = recognise_cone(cur, looped=False)
    assert out is not None
    return SpaceMinorTrace(cone.complex, ops, cur), out


# ---------------------------------------------------------------------------
# Strict reduction of a looped cone
# ---------------------------------------------------------------------------

def looped_cone_strict_reduce(cone: GeneralisedCone, chain) -> tuple[SpaceMinorTrace, GeneralisedCone]:
    """Replay a strict-minor chain (deletions then suppressions) on the
    looped cone; arcs of the top link are face corners, so arc deletions
    are face deletions and suppressions follow the size-two-or-three face
    analysis."""
    cur = cone.complex
    top = cone.top
    ops = []
    deletions = [op for op in chain if op[0] in ("delete", "delete-pair")]
    suppressions = [op for op in chain if op[0] == "suppress"]
    leftovers = [op for op in chain
                 if op[0] not in ("delete", "delete-pair", "suppress", "swap")]
    if leftovers:
        raise ValueError(f"unsupported chain op {leftovers[0]!r}")

    for op in deletions:
        arc = op[1]
        face = arc[0]
        if op[0] == "delete-pair" and op[2][0] != face:
            raise ValueError("paired deletion spans two faces")
        sop = SpaceMinorOp("delete-face", face)
        cur = apply_op(cur, sop)
        ops.append(sop)
        more, cur = _split_ops(cur, top)
        ops.extend(more)

    node_of = {}
    for sup in suppressions:
        node_of[sup[1]] = sup[1][0]  # link node (edge, end) -> edge id
    for sup in suppressions:
        edge = node_of[sup[1]]
        faces = cur.faces_at_edge(edge)
        assert len(faces) == 2, "suppression target is not degree two"
        sized = sorted(faces, key=lambda f: (len(cur.faces[f]), skey(f)))
        f_a = sized[0]
        if len(cur.faces[f_a]) == 3:
            base = next(e for e, _ in cur.faces[f_a]
                        if top not in cur.edges[e])
            assert not cur.is_loop(base)
            sop = SpaceMinorOp("contract-edge", base)
            cur = apply_op(cur, sop)
            ops.append(sop)
        sop = SpaceMinorOp("contract-face", f_a)
        cur = apply_op(cur, sop)
        ops.append(sop)

    out = recognise_cone(cur, looped=True)
    assert out is not None
    return SpaceMinorTrace(cone.complex, ops, cur), out


# ---------------------------------------------------------------------------
# Membership in the obstruction list
# ---------------------------------------------------------------------------

@dataclass
class ZMembership:
    kind: str            # "zcal1" | "zcal2"
    top: object
    base_name: str = None      # K5 or K33 for zcal1
    catalog_index: int = None  # matched base-member index for zcal2


def is_in_Zcal(c: Complex2, catalog: StrictCatalog = None):
    """Recognise a member of the obstruction list, or return None."""
    cone = recognise_cone(c, looped=False)
    if cone is not None:
        if are_isomorphic(cone.base, complete_graph(5)):
            return ZMembership("zcal1", cone.top, base_name="K5")
        if are_isomorphic(cone.base, complete_bipartite(3, 3)):
            return ZMembership("zcal1", cone.top, base_name="K33")
        return None
    cone = recognise_cone(c, looped=True)
    if cone is None:
        return None
    if catalog is None:
        catalog = strict_catalog()
    try:
        assoc = associated_strict_marked_graphs(c, cone.top, cone.loop)
    except ValueError:
        return None
    for s in assoc:
        idx = catalog.match_index(s)
        if idx is not None:
            return ZMembership("zcal2", cone.top, catalog_index=idx)
    return None


# ---------------------------------------------------------------------------
# Obstruction extraction
# ---------------------------------------------------------------------------

def _case1_trace(c, ops_so_far, cur, v, catalog):
    """Reduce to a cone at a vertex with a nonplanar link, then cut the
    link down to its Kuratowski subdivision."""
    from embed3.graphs import kuratowski_witness

    trace1, cone = reduce_to_cone(cur, v)
    kw = kuratowski_witness(cone.base)
    assert kw is not None
    keep = {arc[0] for arc in kw.arcs()}
    trace2, out = cone_subdivision_reduce(cone, keep)
    all_ops = tuple(ops_so_far) + trace1.ops + trace2.ops
    trace = SpaceMinorTrace(c, all_ops, trace2.end)
    z = is_in_Zcal(trace.end, catalog)
    assert z is not None and z.kind == "zcal1"
    assert verify_trace(trace)
    return trace, z


def _case2_trace(c, ops_so_far, cur, v, loop, catalog):
    """Reduce to a looped cone and replay a strict chain into the
    catalogue."""
    trace1, cone = reduce_to_cone(cur, v)
    assoc = list(associated_strict_marked_graphs(cone.complex, v, loop))
    bad = [s for s in assoc if not is_planar_marked(s.marked_part())]
    assert bad, "loop-planarity failed but all associated graphs planar"
    chain = None
    for s in bad:
        chain = _strict_minor_by_embedding(s, catalog)
        if chain is not None:
            break
    assert chain is not None, "no strict catalogue minor found"
    trace2, out = looped_cone_strict_reduce(cone, chain)
    all_ops = tuple(ops_so_far) + trace1.ops + trace2.ops
    trace = SpaceMinorTrace(c, all_ops, trace2.end)
    z = is_in_Zcal(trace.end, catalog)
    assert z is not None and z.kind == "zcal2"
    assert verify_trace(trace)
    return trace, z


def _triangle_point_scan(c, catalog):
    """Contract a small face to a point looking for a nonplanar link; the
    escape hatch for non-simplicial inputs outside the theorems."""
    from embed3.graphs import planar_embedding

    for f in sorted(c.faces, key=skey):
        if len(c.faces[f]) != 3:
            continue
        edges = [e for e, _ in c.faces[f]]
        if len(set(edges)) != 3 or any(c.is_loop(e) for e in edges):
            continue
        ops = [SpaceMinorOp("contract-edge", edges[0])]
        cur = apply_op(c, ops[0])
        if len(cur.faces.get(f, ())) != 2:
            continue
        (e1, _), (e2, _) = cur.faces[f]
        if e1 == e2 or cur.is_loop(e1) or cur.is_loop(e2):
            continue
        op = SpaceMinorOp("contract-face", f)
        cur = apply_op(cur, op)
        ops.append(op)
        if f not in cur.edges or cur.is_loop(f):
            continue
        merged = merged_vertex_after_contraction(cur, f)
        op = SpaceMinorOp("contract-edge", f)
        cur = apply_op(cur, op)
        ops.append(op)
        if not is_3_bounded(cur) or cur.loops_at(merged):
            continue
        if planar_embedding(link_graph(cur, merged).graph) is None:
            return ops, cur, merged
    return None


def extract_obstruction(c: Complex2, failure, catalog: StrictCatalog = None):
    """Turn a solver failure into a trace ending in the obstruction list.

    Returns (trace, membership) or None when the hypotheses genuinely do
    not support extraction (the caller then reports the bare witness).
    """
    from embed3.graphs import planar_embedding

    if catalog is None:
        catalog = strict_catalog()

    if failure.status == "nonplanar_link":
        if not is_3_bounded(c) or c.loops_at(failure.vertex):
            return None
        return _case1_trace(c, (), c, failure.vertex, catalog)

    if failure.status == "incompatible_edge":
        e = failure.edge
        merged = merged_vertex_after_contraction(c, e)
        op = SpaceMinorOp("contract-edge", e)
        cur = apply_op(c, op)
        if not is_3_bounded(cur) or cur.loops_at(merged):
            return None
        return _case1_trace(c, (op,), cur, merged, catalog)

    if failure.status == "odd_cycle":
        o, e = failure.cycle, failure.cycle_edge
        ops = []
        cur = c
        merged = None
        for x in o:
            if x == e:
                continue
            merged = merged_vertex_after_contraction(cur, x)
            op = SpaceMinorOp("contract-edge", x)
            cur = apply_op(cur, op)
            ops.append(op)
        if is_3_bounded(cur) and cur.loops_at(merged) == [e]:
            if planar_embedding(link_graph(cur, merged).graph) is not None:
                return _case2_trace(c, ops, cur, merged, e, catalog)
            # the merged link is nonplanar: some single contraction
            # already has a nonplanar link; fall through to find it
            for x in o:
                if x == e:
                    continue
                m1 = merged_vertex_after_contraction(c, x)
                c1 = contract_edge(c, x)
                if planar_embedding(link_graph(c1, m1).graph) is None:
                    op = SpaceMinorOp("contract-edge", x)
                    if not is_3_bounded(c1) or c1.loops_at(m1):
                        return None
                    return _case1_trace(c, (op,), c1, m1, catalog)
        found = _triangle_point_scan(c, catalog)
        if found is not None:
            ops, cur, merged = found
            return _case1_trace(c, tuple(ops), cur, merged, catalog)
        return None

    return None
