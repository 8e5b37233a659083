"""Rotation systems of complexes and the spanning-tree solver.

A rotation system assigns each edge a cyclic order of the face passages
through it; it is planar when every induced link rotation traces spheres.
The solver picks the canonical embedding of each (3-connected, planar)
link, propagates orientation choices along a spanning tree so tree edges
compare as reverse ("green"), and then checks the remaining edges, the
chordless-cycle parities and the loops; each failure mode yields a
concrete witness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from embed3.complexes import (
    BACKWARD,
    FORWARD,
    Complex2,
    SpaceMinorOp,
    apply_op,
    contract_edge,
    contract_face_with_info,
    delete_edge_with_info,
    is_locally_k_connected,
    link_graph,
    merged_vertex_after_contraction,
    split_vertex,
)
from embed3.graphs import (
    all_rotation_systems,
    canonical_rotation,
    connectivity_defect,
    count_rotation_systems,
    cyclic_eq,
    is_planar_rotation,
    kuratowski_witness,
    planar_embedding,
    skey,
)

DEFAULT_BUDGET = 10**6


class BudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# Complex rotation systems
# ---------------------------------------------------------------------------

def check_rotation_system(c: Complex2, sigma) -> None:
    if set(sigma) != set(c.edges):
        raise ValueError("rotation system must cover exactly the edges")
    for e in c.edges:
        if sorted(sigma[e], key=skey) != c.passages(e):
            raise ValueError(f"cycle at edge {e!r} does not list its passages")


def rotation_count(c: Complex2) -> int:
    n = 1
    for e in c.edges:
        k = c.passage_count(e)
        n *= math.factorial(k - 1) if k > 1 else 1
    return n


def all_complex_rotation_systems(c: Complex2):
    edges = sorted(c.edges, key=skey)
    pools = []
    for e in edges:
        ps = c.passages(e)
        if len(ps) <= 1:
            pools.append([tuple(ps)])
        else:
            pools.append([(ps[0],) + rest
                          for rest in itertools.permutations(ps[1:])])
    for combo in itertools.product(*pools):
        yield dict(zip(edges, combo))


def induce_link_rotation(c: Complex2, sigma, v, lg=None):
    """Rotation of the link graph at v induced by a rotation system.

    The rotator at node (e, end) reads sigma[e] towards v (reversed at the
    tail end), transcribed from passages to the corner arc-ends.
    """
    if lg is None:
        lg = link_graph(c, v)
    rot = {}
    for node in lg.nodes():
        e, end = node
        cyc = sigma[e] if end == 1 else tuple(reversed(sigma[e]))
        rot[node] = tuple(lg.passage_end[node][p] for p in cyc)
    return rot


def is_planar_rotation_system(c: Complex2, sigma, links=None):
    """(ok, witness vertex): every induced link rotation traces spheres."""
    check_rotation_system(c, sigma)
    for v in sorted(c.vertices, key=skey):
        lg = links[v] if links else link_graph(c, v)
        if not is_planar_rotation(lg.graph, induce_link_rotation(c, sigma, v, lg)):
            return False, v
    return True, None


def brute_force_rotation_search(c: Complex2, budget: int = DEFAULT_BUDGET):
    """Exhaustive oracle: (planar system or None, candidates examined)."""
    n = rotation_count(c)
    if n > budget:
        raise BudgetExceeded(f"{n} rotation systems exceed budget {budget}")
    links = {v: link_graph(c, v) for v in c.vertices}
    tried = 0
    for sigma in all_complex_rotation_systems(c):
        tried += 1
        if is_planar_rotation_system(c, sigma, links)[0]:
            return sigma, tried
    return None, tried


# ---------------------------------------------------------------------------
# Link rotations: passages, loops, colours
# ---------------------------------------------------------------------------

def _passage_seq(lg, node, rotator):
    return tuple(lg.end_passage[node][end] for end in rotator)


def loop_condition_holds(lg, rot, loop) -> bool:
    """Rotators at the loop's two nodes are reverse under the loop pairing."""
    pairing = lg.loop_pairing[loop]
    mapped = tuple(pairing[end] for end in rot[(loop, 0)])
    return cyclic_eq(mapped, tuple(reversed(rot[(loop, 1)])))


def _planar_link_rotations(lg, budget):
    """Candidate planar rotations: the canonical pair when 3-connected,
    otherwise every planar rotation system (within budget)."""
    if connectivity_defect(lg.graph, 3) is None:
        pair = canonical_rotation(lg.graph)
        return list(pair) if pair else []
    if count_rotation_systems(lg.graph) > budget:
        raise BudgetExceeded("too many link rotations to enumerate")
    return [r for r in all_rotation_systems(lg.graph)
            if is_planar_rotation(lg.graph, r)]


def is_loop_planar(c: Complex2, v, budget: int = DEFAULT_BUDGET):
    """(ok, witness rotation): some planar link rotation is reverse at
    every loop's node pair under the loop pairing."""
    lg = link_graph(c, v)
    if planar_embedding(lg.graph) is None:
        return False, None
    loops = sorted(lg.loop_pairing, key=skey)
    for rot in _planar_link_rotations(lg, budget):
        if all(loop_condition_holds(lg, rot, l) for l in loops):
            return True, rot
    return False, None


@dataclass
class LinkAssignment:
    """A chosen planar rotation of every link graph."""

    complex: Complex2
    links: dict
    rotations: dict

    def passage_cycle(self, e, end):
        v = self.complex.edges[e][end]
        lg = self.links[v]
        return _passage_seq(lg, (e, end), self.rotations[v][(e, end)])


def colour_edge(c: Complex2, assignment: LinkAssignment, e) -> str:
    """green if the two rotators at e are reverse in passage space, red if
    they agree, else incompatible (the link of C/e is then nonplanar)."""
    if c.is_loop(e):
        raise ValueError("loops are not coloured")
    p_tail = assignment.passage_cycle(e, 0)
    p_head = assignment.passage_cycle(e, 1)
    if cyclic_eq(p_head, tuple(reversed(p_tail))):
        return "green"
    if cyclic_eq(p_head, p_tail):
        return "red"
    return "incompatible"


def sigma_from_assignment(assignment: LinkAssignment):
    """Collate an all-green assignment into a complex rotation system."""
    c = assignment.complex
    return {e: assignment.passage_cycle(e, 1) for e in c.edges}


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

@dataclass
class SolverResult:
    """Outcome of find_planar_rotation_system.

    status: found | nonplanar_link | incompatible_edge | odd_cycle |
            loop_failure | exhausted | hypothesis_failure
    """

    status: str
    rotation: dict | None = None
    vertex: object = None
    kuratowski: object = None
    edge: object = None
    cycle: tuple | None = None
    cycle_edge: object = None
    assignment: LinkAssignment | None = None
    tried: int | None = None
    detail: object = None

    @property
    def found(self):
        return self.status == "found"

    def certifies_absence(self):
        return self.status in (
            "nonplanar_link", "incompatible_edge", "odd_cycle",
            "loop_failure", "exhausted",
        )


def _bfs_forest(c: Complex2):
    """Per component: (root, parent edges) using sorted ids."""
    adj = {v: [] for v in c.vertices}
    for e in sorted(c.edges, key=skey):
        t, h = c.edges[e]
        if t != h:
            adj[t].append((h, e))
            adj[h].append((t, e))
    seen = set()
    forest = []
    for root in sorted(c.vertices, key=skey):
        if root in seen:
            continue
        seen.add(root)
        parent = {}
        order = [root]
        queue = [root]
        while queue:
            u = queue.pop(0)
            for w, e in sorted(adj[u], key=lambda p: skey(p[1])):
                if w not in seen:
                    seen.add(w)
                    parent[w] = (u, e)
                    order.append(w)
                    queue.append(w)
        forest.append((root, order, parent))
    return forest


def _fundamental_cycle(c, parent, e):
    t, h = c.edges[e]
    anc_t, anc_h = [t], [h]
    x = t
    while x in parent:
        x = parent[x][0]
        anc_t.append(x)
    x = h
    while x in parent:
        x = parent[x][0]
        anc_h.append(x)
    common = next(x for x in anc_t if x in set(anc_h))
    verts, edges = [], []
    x = t
    while x != common:
        verts.append(x)
        edges.append(parent[x][1])
        x = parent[x][0]
    verts.append(common)
    up_h, up_e = [], []
    x = h
    while x != common:
        up_h.append(x)
        up_e.append(parent[x][1])
        x = parent[x][0]
    verts.extend(reversed(up_h))
    edges.extend(reversed(up_e))
    edges.append(e)
    return verts, edges  # verts[i] -- edges[i] -- verts[i+1], closing with e


def _find_chord(c, verts):
    vset = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    cyc_pairs = {frozenset((verts[i], verts[(i + 1) % n])) for i in range(n)}
    for g in sorted(c.edges, key=skey):
        t, h = c.edges[g]
        if t == h or t not in vset or h not in vset:
            continue
        if frozenset((t, h)) in cyc_pairs:
            continue  # parallel to a cycle edge, not a chord
        return g
    return None


def _shortcut_to_odd_chordless(c, verts, edges, colour_of):
    """Split along chords, keeping the odd-red side, until chordless."""
    while True:
        g = _find_chord(c, verts)
        if g is None:
            return verts, edges
        t, h = c.edges[g]
        i, j = verts.index(t), verts.index(h)
        if i > j:
            i, j = j, i
        v1 = verts[i:j + 1]
        e1 = edges[i:j] + [g]
        v2 = verts[j:] + verts[:i + 1]
        e2 = edges[j:] + edges[:i] + [g]
        reds1 = sum(1 for x in e1 if colour_of[x] == "red")
        verts, edges = (v1, e1) if reds1 % 2 == 1 else (v2, e2)


def find_planar_rotation_system(c: Complex2, budget: int = DEFAULT_BUDGET) -> SolverResult:
    """Find a planar rotation system or a structured witness of absence.

    Requires planar 3-connected links (locally 3-connected input); other
    inputs fall back to the exhaustive oracle within budget.
    """
    if not c.vertices:
        return SolverResult("found", rotation={})
    links = {v: link_graph(c, v) for v in sorted(c.vertices, key=skey)}
    for v in sorted(c.vertices, key=skey):
        if planar_embedding(links[v].graph) is None:
            return SolverResult(
                "nonplanar_link", vertex=v,
                kuratowski=kuratowski_witness(links[v].graph),
            )

    ok3, defect = is_locally_k_connected(c, 3)
    if not ok3:
        try:
            sigma, tried = brute_force_rotation_search(c, budget)
        except BudgetExceeded:
            return SolverResult("hypothesis_failure", detail=defect)
        if sigma is not None:
            return SolverResult("found", rotation=sigma, tried=tried)
        return SolverResult("exhausted", tried=tried, detail=defect)

    pairs = {v: canonical_rotation(links[v].graph) for v in links}
    forest = _bfs_forest(c)
    rotations = {}
    for root, order, parent in forest:
        rotations[root] = pairs[root][0]
        for w in order[1:]:
            u, e = parent[w]
            rotations[w] = pairs[w][0]
            assignment = LinkAssignment(c, links, rotations)
            col = colour_edge(c, assignment, e)
            if col == "red":
                rotations[w] = pairs[w][1]
                col = colour_edge(c, LinkAssignment(c, links, rotations), e)
            if col == "incompatible":
                cc = contract_edge(c, e)
                merged = merged_vertex_after_contraction(c, e)
                kw = kuratowski_witness(link_graph(cc, merged).graph)
                return SolverResult("incompatible_edge", edge=e, kuratowski=kw)

    assignment = LinkAssignment(c, links, rotations)
    colour_of = {}
    for e in sorted(c.edges, key=skey):
        if c.is_loop(e):
            continue
        colour_of[e] = colour_edge(c, assignment, e)
        if colour_of[e] == "incompatible":
            cc = contract_edge(c, e)
            merged = merged_vertex_after_contraction(c, e)
            kw = kuratowski_witness(link_graph(cc, merged).graph)
            return SolverResult("incompatible_edge", edge=e,
                                kuratowski=kw, assignment=assignment)

    parent_of = {}
    forest_edges = set()
    for root, order, parent in forest:
        forest_edges.update(e for _, e in parent.values())
        for v in order:
            parent_of[v] = parent
    for e in sorted(colour_of, key=skey):
        if colour_of[e] == "red":
            assert e not in forest_edges
            verts, edges = _fundamental_cycle(c, parent_of[c.edges[e][0]], e)
            verts, edges = _shortcut_to_odd_chordless(c, verts, edges, colour_of)
            reds = sum(1 for x in edges if colour_of[x] == "red")
            assert reds % 2 == 1
            cyc_e = min(edges, key=skey)
            return SolverResult("odd_cycle", cycle=tuple(edges),
                                cycle_edge=cyc_e, assignment=assignment)

    for v in sorted(c.vertices, key=skey):
        lg = links[v]
        bad = [l for l in sorted(lg.loop_pairing, key=skey)
               if not loop_condition_holds(lg, rotations[v], l)]
        if bad:
            ok, _ = is_loop_planar(c, v, budget)
            assert not ok, "3-connected loop-planar link rejected"
            return SolverResult("loop_failure", vertex=v, edge=bad[0],
                                assignment=assignment)

    sigma = sigma_from_assignment(assignment)
    ok, wit = is_planar_rotation_system(c, sigma, links)
    assert ok, f"constructed rotation system not planar at {wit!r}"
    return SolverResult("found", rotation=sigma, assignment=assignment)


# ---------------------------------------------------------------------------
# Carrying a rotation system through the reduction operations
# ---------------------------------------------------------------------------

def carry_rotation(c: Complex2, sigma, op: SpaceMinorOp):
    """Apply op and induce the rotation system on the result.

    Mirrors how each operation acts on passages; planarity is preserved
    (checked by the callers' verification, not assumed here).
    """
    kind, arg = op.kind, op.arg
    if kind == "contract-edge":
        out = contract_edge(c, arg)
        new_sigma = {
            e: tuple(p for p in sigma[e] if p[0] in out.faces)
            for e in out.edges
        }
        return out, new_sigma
    if kind == "delete-face":
        out = apply_op(c, op)
        new_sigma = {
            e: tuple(p for p in sigma[e] if p[0] != arg) for e in out.edges
        }
        return out, new_sigma
    if kind == "split-vertex":
        return split_vertex(c, arg), dict(sigma)
    if kind == "delete-edge":
        out, info = delete_edge_with_info(c, arg)
        new_sigma = {e: sigma[e] for e in c.edges if e != arg}
        for p, name in info.copies.items():
            new_sigma[name] = ((p[0], 0),)
        return out, new_sigma
    # contract-face
    walk = c.faces[arg]
    out, info = contract_face_with_info(c, arg)
    if info.removed_loop is not None:
        new_sigma = {e: tuple(p for p in sigma[e] if p[0] in out.faces)
                     for e in out.edges}
        return out, new_sigma
    (e1, d1), (e2, d2) = walk
    g = info.merged_edge
    # remap passages of e1/e2 to the merged edge's new occurrence numbers
    remap = {}
    for f2 in out.faces:
        old_walk = c.walk_with_occurrences(f2)
        g_occ = 0
        for pos in info.walk_maps[f2]:
            e, d, k = old_walk[pos]
            if e in (e1, e2):
                remap[(e, (f2, k))] = (f2, g_occ)
                g_occ += 1
    tau1 = sigma[e1] if d1 == FORWARD else tuple(reversed(sigma[e1]))
    tau2 = tuple(reversed(sigma[e2])) if d2 == FORWARD else sigma[e2]
    i1 = tau1.index((arg, 0))
    i2 = tau2.index((arg, 0))
    spliced = (tau1[i1 + 1:] + tau1[:i1], tau2[i2 + 1:] + tau2[:i2])
    merged_cycle = []
    for part, e in zip(spliced, (e1, e2)):
        for p in part:
            q = remap.get((e, p))
            if q is not None:
                merged_cycle.append(q)
    new_sigma = {e: tuple(p for p in sigma[e] if p[0] in out.faces)
                 for e in out.edges if e != g}
    if g in out.edges:  # cancellation may have pruned the merged edge
        new_sigma[g] = tuple(merged_cycle)
    return out, new_sigma
