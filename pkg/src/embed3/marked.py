"""Marked graphs, strict marked graphs, and the obstruction catalogues.

A marked graph is a graph with two root nodes v, w and three indexed arc
pairs (a_i, b_i), the a_i at v and the b_i at w; it is planar when some
planar rotation makes the restricted rotators at v and w inverse under
b_i -> a_i.  A strict marked graph adds a full bijection iota between the
arcs at v and at w extending a_i -> b_i.

The catalogues: four root unlabelled marked graphs (CLI name `xcal`), the
twelve non-planar marked graphs over them (`ycal`), and the strict
catalogue (`ycal-prime`) produced by the five-stage closure (subdividing
the vw arc, arc additions at the roots, splitting the doubly-marked arc,
coadding, and subdividing root-incident arcs) with the non-realisable
bijections carried through every stage.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from embed3.graphs import (
    Graph,
    all_rotation_systems,
    canonical_form,
    canonical_rotation,
    connectivity_defect,
    count_rotation_systems,
    cyclic_eq,
    is_planar_rotation,
    planar_embedding,
    skey,
)

MARKED_BUDGET = 10**5


class MarkedGraph:
    def __init__(self, graph: Graph, v, w, pairs):
        pairs = tuple((a, b) for a, b in pairs)
        if len(pairs) != 3 or len(set(pairs)) != 3:
            raise ValueError("need three distinct pairs")
        avs = [a for a, _ in pairs]
        bws = [b for _, b in pairs]
        if len(set(avs)) != 3 or len(set(bws)) != 3:
            raise ValueError("marked arcs must be distinct on each side")
        for a in avs:
            if v not in graph.arcs[a]:
                raise ValueError(f"arc {a!r} not incident with v")
        for b in bws:
            if w not in graph.arcs[b]:
                raise ValueError(f"arc {b!r} not incident with w")
        self.graph = graph
        self.v = v
        self.w = w
        self.pairs = pairs
        self._key = None

    @property
    def A(self):
        return frozenset(a for a, _ in self.pairs)

    @property
    def B(self):
        return frozenset(b for _, b in self.pairs)

    def swap(self):
        return MarkedGraph(self.graph, self.w, self.v,
                           tuple((b, a) for a, b in self.pairs))

    def key(self):
        if self._key is None:
            self._key = _marked_key(self.graph, self.v, self.w,
                                    self.pairs, None)
        return self._key

    def __repr__(self):
        return (f"MarkedGraph({len(self.graph.nodes)} nodes, "
                f"{len(self.graph.arcs)} arcs)")


class StrictMarkedGraph(MarkedGraph):
    def __init__(self, graph, v, w, pairs, iota):
        super().__init__(graph, v, w, pairs)
        at_v = sorted((a for a, ends in graph.arcs.items() if v in ends), key=skey)
        at_w = sorted((a for a, ends in graph.arcs.items() if w in ends), key=skey)
        if sorted(iota, key=skey) != at_v or sorted(iota.values(), key=skey) != at_w:
            raise ValueError("iota must biject the arcs at v onto the arcs at w")
        for a, b in self.pairs:
            if iota[a] != b:
                raise ValueError("iota must extend the marked pairs")
        self.iota = dict(iota)
        self._skey = None

    def marked_part(self):
        return MarkedGraph(self.graph, self.v, self.w, self.pairs)

    def swap(self):
        inv = {b: a for a, b in self.iota.items()}
        return StrictMarkedGraph(self.graph, self.w, self.v,
                                 tuple((b, a) for a, b in self.pairs), inv)

    def key(self):
        if self._skey is None:
            self._skey = _marked_key(self.graph, self.v, self.w,
                                     self.pairs, self.iota)
        return self._skey


@dataclass
class UnlabelledMarkedGraph:
    graph: Graph
    v: object
    w: object
    A: frozenset
    B: frozenset

    def key(self):
        return _unlabelled_key(self.graph, self.v, self.w, self.A, self.B)

    def marked(self, bijection):
        """Marked graph for a bijection given as a tuple of (a, b) pairs."""
        return MarkedGraph(self.graph, self.v, self.w, bijection)

    def bijections(self):
        a_sorted = sorted(self.A, key=skey)
        for perm in itertools.permutations(sorted(self.B, key=skey)):
            yield tuple(zip(a_sorted, perm))


# ---------------------------------------------------------------------------
# Sameness keys via an auxiliary coloured graph
# ---------------------------------------------------------------------------

def _aux_base(graph, v, w):
    aux = Graph()
    colours = {}
    for n in graph.nodes:
        aux.add_node(("n", n))
        colours[("n", n)] = 3 if (n == v and v == w) else 1 if n == v \
            else 2 if n == w else 0
    for a, (x, y) in graph.arcs.items():
        aux.add_node(("a", a))
        colours[("a", a)] = 4
        aux.add_arc(("i", a, 0), ("n", x), ("a", a))
        aux.add_arc(("i", a, 1), ("n", y), ("a", a))
    return aux, colours


def _marked_key(graph, v, w, pairs, iota):
    aux, colours = _aux_base(graph, v, w)
    for k, (a, b) in enumerate(sorted(pairs, key=skey)):
        node = ("p", k)
        aux.add_node(node)
        colours[node] = 5
        aux.add_arc(("pa", k), node, ("a", a))
        aux.add_arc(("pb", k), node, ("a", b))
        colours[("a", a)] = max(colours[("a", a)], 0)
    # distinguish the A side from the B side of each pair
    for a, b in pairs:
        colours[("a", a)] = colours[("a", a)] | 8
        colours[("a", b)] = colours[("a", b)] | 16
    if iota is not None:
        for j, (a, b) in enumerate(sorted(iota.items(), key=lambda kv: skey(kv[0]))):
            node = ("t", j)
            aux.add_node(node)
            colours[node] = 6
            aux.add_arc(("ta", j), node, ("a", a))
            aux.add_arc(("tb", j), node, ("a", b))
    return canonical_form(aux, colours)


def _unlabelled_key(graph, v, w, A, B):
    aux, colours = _aux_base(graph, v, w)
    for a in A:
        colours[("a", a)] |= 8
    for b in B:
        colours[("a", b)] |= 16
    return canonical_form(aux, colours)


def same_marked(m1: MarkedGraph, m2: MarkedGraph) -> bool:
    return m1.key() == m2.key()


# ---------------------------------------------------------------------------
# Marked planarity
# ---------------------------------------------------------------------------

def _restricted_order(rot, node, arcs):
    order = []
    for arc, _ in rot[node]:
        if arc in arcs and arc not in order:
            order.append(arc)
    return tuple(order)


def _marked_condition(m: MarkedGraph, rot) -> bool:
    index_a = {a: i for i, (a, _) in enumerate(m.pairs)}
    index_b = {b: i for i, (_, b) in enumerate(m.pairs)}
    order_a = tuple(index_a[x] for x in _restricted_order(rot, m.v, m.A))
    order_b = tuple(index_b[x] for x in _restricted_order(rot, m.w, m.B))
    return cyclic_eq(order_a, tuple(reversed(order_b)))


def is_planar_marked(m: MarkedGraph, budget: int = MARKED_BUDGET) -> bool:
    """Some planar rotation of the graph meets the restricted-inverse
    condition; exhaustive over embeddings unless the graph is 3-connected."""
    if any(m.graph.is_loop(a) for a in list(m.A | m.B)):
        raise ValueError("marked arcs must not be loops")
    if planar_embedding(m.graph) is None:
        return False
    if connectivity_defect(m.graph, 3) is None:
        candidates = canonical_rotation(m.graph)
    else:
        if count_rotation_systems(m.graph) > budget:
            raise ValueError("budget exceeded enumerating embeddings")
        candidates = (r for r in all_rotation_systems(m.graph)
                      if is_planar_rotation(m.graph, r))
    return any(_marked_condition(m, rot) for rot in candidates)


# ---------------------------------------------------------------------------
# Marked minors
# ---------------------------------------------------------------------------

def _without_isolated(graph: Graph, keep=()) -> Graph:
    used = set(keep)
    for x, y in graph.arcs.values():
        used.add(x)
        used.add(y)
    if used >= graph.nodes:
        return graph
    h = Graph(n for n in graph.nodes if n in used)
    for a, ends in graph.arcs.items():
        h.add_arc(a, *ends)
    return h


def _graph_contract(graph: Graph, arc, prefer, force_gone=None):
    u, v = graph.arcs[arc]
    if u == v:
        raise ValueError("cannot contract a loop")
    if force_gone is not None:
        if force_gone not in (u, v):
            raise ValueError("force_gone must be an endpoint")
        keep = v if force_gone == u else u
    else:
        keep = u if u in prefer and (v not in prefer or prefer.index(u) <= prefer.index(v)) \
            else v if v in prefer else min((u, v), key=skey)
    gone = v if keep == u else u
    h = Graph(n for n in graph.nodes if n != gone)
    for b, (x, y) in graph.arcs.items():
        if b == arc:
            continue
        h.add_arc(b, keep if x == gone else x, keep if y == gone else y)
    return h, keep, gone


def marked_minor_steps(m: MarkedGraph):
    """All single marked-minor moves: (description, result)."""
    out = []
    marked_arcs = m.A | m.B
    for x in sorted(m.graph.arcs, key=skey):
        if x in marked_arcs:
            continue
        out.append((("delete", x),
                    MarkedGraph(_without_isolated(m.graph.without_arc(x),
                                                  (m.v, m.w)),
                                m.v, m.w, m.pairs)))
        if not m.graph.is_loop(x):
            h, keep, gone = _graph_contract(m.graph, x, (m.v, m.w))
            v2 = keep if m.v == gone else m.v
            w2 = keep if m.w == gone else m.w
            out.append((("contract", x), MarkedGraph(h, v2, w2, m.pairs)))
    # parallel or serial replacement of an A\B arc with a B\A arc
    for i, (a_i, _) in enumerate(m.pairs):
        if a_i in m.B:
            continue
        for j, (_, b_j) in enumerate(m.pairs):
            if b_j in m.A or b_j == a_i:
                continue
            ea, eb = m.graph.arcs[a_i], m.graph.arcs[b_j]
            if set(ea) == set(eb) and not m.graph.is_loop(a_i):
                h = m.graph.without_arc(b_j)
                pairs = list(m.pairs)
                pairs[j] = (pairs[j][0], a_i)
                out.append((("parallel", a_i, b_j),
                            MarkedGraph(h, m.v, m.w, pairs)))
            shared = set(ea) & set(eb)
            if len(shared) == 1:
                (x,) = shared
                if x not in (m.v, m.w) and m.graph.degree(x) == 2:
                    other_a = ea[0] if ea[1] == x else ea[1]
                    other_b = eb[0] if eb[1] == x else eb[1]
                    h = Graph(n for n in m.graph.nodes if n != x)
                    for c, ends in m.graph.arcs.items():
                        if c == b_j:
                            continue
                        if c == a_i:
                            h.add_arc(c, other_a, other_b)
                        else:
                            h.add_arc(c, *ends)
                    pairs = list(m.pairs)
                    pairs[j] = (pairs[j][0], a_i)
                    out.append((("serial", a_i, b_j),
                                MarkedGraph(h, m.v, m.w, pairs)))
    return out


def _catalog_keys(catalog):
    keys = {}
    for i, member in enumerate(catalog):
        keys.setdefault(member.key(), i)
        keys.setdefault(member.swap().key(), i)
    return keys


def has_marked_minor(m: MarkedGraph, catalog, memo=None, min_arcs=None):
    """A chain of minor moves reaching a catalogue member, or None.

    Exhaustive search with canonical-form memoisation; the swap move is
    absorbed into membership testing.
    """
    keys = catalog if isinstance(catalog, dict) else _catalog_keys(catalog)
    if memo is None:
        memo = {}
    if min_arcs is None:
        min_arcs = 6

    def search(g: MarkedGraph):
        k = g.key()
        if k in memo:
            return memo[k]
        if k in keys:
            memo[k] = []
            return []
        if len(g.graph.arcs) < min_arcs:
            memo[k] = None
            return None
        memo[k] = None  # cycle guard; sizes strictly decrease anyway
        for desc, child in marked_minor_steps(g):
            sub = search(child)
            if sub is not None:
                memo[k] = [desc] + sub
                return memo[k]
        return memo[k]

    m = MarkedGraph(_without_isolated(m.graph, (m.v, m.w)), m.v, m.w, m.pairs)
    return search(m)


# ---------------------------------------------------------------------------
# Strict marked minors
# ---------------------------------------------------------------------------

def strict_minor_steps(s: StrictMarkedGraph):
    """All single strict moves: free deletion, paired deletion at the
    roots, and suppression of degree-two nodes away from the roots."""
    out = []
    marked_arcs = s.A | s.B
    g = s.graph
    for x in sorted(g.arcs, key=skey):
        ends = set(g.arcs[x])
        if s.v not in ends and s.w not in ends:
            out.append((("delete", x),
                        StrictMarkedGraph(_without_isolated(g.without_arc(x),
                                                            (s.v, s.w)),
                                          s.v, s.w, s.pairs, s.iota)))
    for x in sorted(s.iota, key=skey):
        if x in marked_arcs:
            continue
        y = s.iota[x]
        if y in marked_arcs:
            continue
        if x == y:
            h = g.without_arc(x)
        else:
            # both arcs must sit only at their own root
            if s.w in g.arcs[x] or s.v in g.arcs[y]:
                continue
            h = g.without_arc(x).without_arc(y)
        iota = {a: b for a, b in s.iota.items() if a != x}
        out.append((("delete-pair", x, y),
                    StrictMarkedGraph(_without_isolated(h, (s.v, s.w)),
                                      s.v, s.w, s.pairs, iota)))
    for x in sorted(g.nodes, key=skey):
        if x in (s.v, s.w) or g.degree(x) != 2:
            continue
        if s.v in g.neighbours(x) or s.w in g.neighbours(x):
            continue
        (arc1, _), (arc2, _) = g.arc_ends_at(x)
        if arc1 == arc2:
            continue  # a loop at x
        h, keep, gone = _graph_contract(g, arc1, (s.v, s.w), force_gone=x)
        out.append((("suppress", x, arc1),
                    StrictMarkedGraph(h, s.v, s.w, s.pairs, s.iota)))
    return out


STRICT_SEARCH_ARC_LIMIT = 16


def has_strict_marked_minor(s: StrictMarkedGraph, catalog, memo=None,
                            min_arcs=None):
    """A chain of strict moves reaching a catalogue member, or None.

    catalog: a list of strict marked graphs, or a StrictCatalog whose
    membership predicate is used directly.  Large hosts are handled by a
    goal-directed embedding search instead of state enumeration.
    """
    if isinstance(catalog, StrictCatalog):
        if len(s.graph.arcs) > STRICT_SEARCH_ARC_LIMIT:
            return _strict_minor_by_embedding(s, catalog)
        contains = catalog.contains
    else:
        keys = catalog if isinstance(catalog, dict) else _catalog_keys(catalog)
        contains = lambda g: g.key() in keys  # noqa: E731
    if memo is None:
        memo = {}
    if min_arcs is None:
        min_arcs = 6

    def search(g: StrictMarkedGraph):
        k = g.key()
        if k in memo:
            return memo[k]
        if contains(g):
            memo[k] = []
            return []
        if len(g.graph.arcs) < min_arcs:
            memo[k] = None
            return None
        memo[k] = None
        for desc, child in strict_minor_steps(g):
            sub = search(child)
            if sub is not None:
                memo[k] = [desc] + sub
                return memo[k]
        return memo[k]

    s = StrictMarkedGraph(_without_isolated(s.graph, (s.v, s.w)),
                          s.v, s.w, s.pairs, s.iota)
    return search(s)


# ---------------------------------------------------------------------------
# Goal-directed strict-minor search for large hosts
# ---------------------------------------------------------------------------

def apply_strict_chain(s: StrictMarkedGraph, chain) -> StrictMarkedGraph:
    """Replay a chain of strict moves (as produced by the searches)."""
    cur = s
    for op in chain:
        if op[0] == "swap":
            cur = cur.swap()
            continue
        steps = dict((d, child) for d, child in strict_minor_steps(cur))
        key = op if op in steps else None
        if key is None and op[0] == "suppress":
            key = next((d for d in steps if d[:2] == op[:2]), None)
        if key is None:
            raise ValueError(f"illegal strict move {op!r}")
        cur = steps[key]
    return cur


def _paths_from(g: Graph, a, goal, targets, banned_nodes, banned_arcs, max_len):
    """Simple paths from a, sorted short first.

    goal is a fixed endpoint, or None to stop at any vertex in targets;
    yields (arc list, endpoint).
    """
    out = []

    def walk(cur, arcs, nodes):
        if len(arcs) >= max_len:
            return
        for end in sorted(g.arc_ends_at(cur), key=skey):
            arc = end[0]
            if arc in banned_arcs or arc in arcs or g.is_loop(arc):
                continue
            nxt = g.end_node((arc, 1 - end[1]))
            if goal is not None:
                if nxt == goal:
                    out.append((arcs + [arc], nxt))
                    continue
            elif nxt in targets and nxt not in nodes and nxt != a:
                out.append((arcs + [arc], nxt))
            if nxt in banned_nodes or nxt in nodes or nxt == a or nxt == goal:
                continue
            walk(nxt, arcs + [arc], nodes | {nxt})

    walk(a, [], set())
    out.sort(key=lambda pe: (len(pe[0]), skey(tuple(pe[0]))))
    return out


class _EmbedBudget(Exception):
    pass


def _embed_strict_chain(s: StrictMarkedGraph, H: Graph, hv, hw, hpairs,
                        max_len=8, budget=300000):
    """Op chain realising (H, hpairs) as a strict minor of s, or None.

    Searches for arc-disjoint, internally disjoint host paths realising
    the target arcs, placing branch images lazily as path endpoints.
    Paths keep their first vertex next to a root (the implicit
    subdivision stage of the catalogue); deletions at the roots must be
    matched by the pairing, and the marked pairs must line up.  Raises
    _EmbedBudget when the step budget runs out.
    """
    S = s.graph
    sv, sw = s.v, s.w
    hdv, hdw = H.degree(hv), H.degree(hw)
    dv, dw = S.degree(sv), S.degree(sw)
    if hdv > dv or hdw > dw or (dv - hdv) != (dw - hdw):
        return None
    if len(H.arcs) > len(S.arcs) or len(H.nodes) > len(S.nodes):
        return None
    s_pairs = set(s.pairs)
    marked_s = s.A | s.B
    h_marked_v = {a for a, _ in hpairs}
    h_marked_w = {b for _, b in hpairs}

    # process target arcs so each new arc touches a placed node
    arcs_order = []
    placed_nodes = {hv, hw}
    remaining = set(H.arcs)
    while remaining:
        nxt = next(
            (a for a in sorted(remaining, key=skey)
             if H.arcs[a][0] in placed_nodes or H.arcs[a][1] in placed_nodes),
            None)
        if nxt is None:
            return None  # disconnected target; not produced by generation
        arcs_order.append(nxt)
        remaining.discard(nxt)
        placed_nodes.update(H.arcs[nxt])

    beta = {hv: sv, hw: sw}
    taken = {sv, sw}
    used_arcs = set()
    used_internal = set()
    paths = {}
    first_at = {}
    steps = [0]

    def root_first(h_arc, root):
        p, fa, q, fb = first_at[h_arc]
        if p == root:
            return fa
        if q == root:
            return fb
        return None

    def pair_check():
        used_spairs = []
        for (ha, hb) in hpairs:
            if ha not in first_at or hb not in first_at:
                continue
            va = root_first(ha, sv)
            vb = root_first(hb, sw)
            if va is None or vb is None:
                return False
            if (va, vb) not in s_pairs or (va, vb) in used_spairs:
                return False
            used_spairs.append((va, vb))
        return True

    def finish():
        deleted_v = [a for a in S.arcs
                     if sv in S.arcs[a] and a not in used_arcs]
        deleted_w = [a for a in S.arcs
                     if sw in S.arcs[a] and a not in used_arcs]
        if any(a in marked_s for a in deleted_v + deleted_w):
            return False
        if {s.iota[a] for a in deleted_v} != set(deleted_w):
            return False
        for a in deleted_v:
            if sw in S.arcs[a] and s.iota[a] != a:
                return False
        return True

    def try_arc(idx):
        steps[0] += 1
        if steps[0] > budget:
            raise _EmbedBudget
        if idx == len(arcs_order):
            return finish()
        h_arc = arcs_order[idx]
        hx, hy = H.arcs[h_arc]
        if hx not in beta:
            hx, hy = hy, hx
        p = beta[hx]
        goal = beta.get(hy)
        both_roots = goal is not None and {p, goal} == {sv, sw}
        cap = 2 if both_roots else max_len
        banned = (taken | used_internal) - {p} - ({goal} if goal else set())
        if goal is None:
            targets = {n for n in S.nodes
                       if n not in taken and n not in used_internal
                       and S.degree(n) >= H.degree(hy)}
        else:
            targets = None
        for path, endpoint in _paths_from(S, p, goal, targets, banned,
                                          used_arcs, cap):
            ok = True
            for root, fa in ((p, path[0]), (endpoint, path[-1])):
                if root == sv and (fa in s.A) != (h_arc in h_marked_v):
                    ok = False
                elif root == sw and (fa in s.B) != (h_arc in h_marked_w):
                    ok = False
            if not ok:
                continue
            internals = []
            cur = p
            for arc in path:
                x, y = S.arcs[arc]
                cur = y if x == cur else x
                if cur != endpoint:
                    internals.append(cur)
            first_at[h_arc] = (p, path[0], endpoint, path[-1])
            if not pair_check():
                del first_at[h_arc]
                continue
            new_branch = goal is None
            if new_branch:
                beta[hy] = endpoint
                taken.add(endpoint)
            used_arcs.update(path)
            used_internal.update(internals)
            paths[h_arc] = (p, endpoint, tuple(path), tuple(internals))
            if try_arc(idx + 1):
                return True
            used_arcs.difference_update(path)
            used_internal.difference_update(internals)
            del paths[h_arc]
            del first_at[h_arc]
            if new_branch:
                del beta[hy]
                taken.discard(endpoint)
        return False

    if not try_arc(0):
        return None
    chain = []
    for a in sorted(S.arcs, key=skey):
        if a in used_arcs:
            continue
        if sv in S.arcs[a]:
            chain.append(("delete-pair", a, s.iota[a]))
        elif sw in S.arcs[a]:
            pass  # removed together with its iota partner
        else:
            chain.append(("delete", a))
    for h_arc in sorted(paths, key=skey):
        p, q, arcs, internals = paths[h_arc]
        keep = set()
        if p in (sv, sw) and internals:
            keep.add(internals[0])
        if q in (sv, sw) and internals:
            keep.add(internals[-1])
        for z in internals:
            if z not in keep:
                chain.append(("suppress", z, None))
    return chain


def _strict_minor_by_embedding(s: StrictMarkedGraph, catalog: StrictCatalog):
    """Find a catalogue member embedded in a large host.

    Tries every degree-feasible base member with each of its bad
    bijections, shallow path caps first.
    """
    for max_len in (2, 4, 8):
        for swapped, cand in ((False, s), (True, s.swap())):
            dv = cand.graph.degree(cand.v)
            dw = cand.graph.degree(cand.w)
            for member in catalog.base:
                if member.graph.degree(member.v) > dv:
                    continue
                if member.graph.degree(member.w) > dw:
                    continue
                if (dv - member.graph.degree(member.v)
                        != dw - member.graph.degree(member.w)):
                    continue
                for bij in sorted(member.badset, key=skey):
                    try:
                        chain = _embed_strict_chain(
                            cand, member.graph, member.v, member.w,
                            tuple(sorted(bij, key=skey)), max_len=max_len)
                    except _EmbedBudget:
                        continue
                    if chain is not None:
                        full = ([("swap",)] if swapped else []) + chain
                        end = apply_strict_chain(s, full)
                        assert catalog.contains(end), "embedding replay mismatch"
                        return full
    return None


# ---------------------------------------------------------------------------
# Catalogue generation
# ---------------------------------------------------------------------------

def _root_members():
    """The four root unlabelled marked graphs, reconstructed from the
    minimality case analysis (K4; wheel with a rim root; the split-centre
    wheel; K5 minus an edge)."""
    k4 = Graph()
    for x, y in itertools.combinations(("v", "w", "x", "y"), 2):
        k4.add_arc(f"{x}{y}", x, y)
    m1 = UnlabelledMarkedGraph(
        k4, "v", "w",
        frozenset({"vw", "vx", "vy"}), frozenset({"vw", "wx", "wy"}))

    wheel = Graph()
    rim = ["v", "r2", "r3", "r4"]
    for i in range(4):
        wheel.add_arc(f"rim{i}", rim[i], rim[(i + 1) % 4])
        wheel.add_arc(f"sp_{rim[i]}", "w", rim[i])
    m2 = UnlabelledMarkedGraph(
        wheel, "v", "w",
        frozenset({"rim0", "rim3", "sp_v"}),
        frozenset({"sp_r2", "sp_r3", "sp_r4"}))

    split = Graph()
    for i in range(4):
        split.add_arc(f"rim{i}", f"r{i + 1}", f"r{(i + 1) % 4 + 1}")
    split.add_arc("vw", "v", "w")
    for t in ("r2", "r3", "r4"):
        split.add_arc(f"v{t}", "v", t)
    for t in ("r1", "r2", "r4"):
        split.add_arc(f"w{t}", "w", t)
    m3 = UnlabelledMarkedGraph(
        split, "v", "w",
        frozenset({"vr2", "vr3", "vr4"}), frozenset({"wr1", "wr2", "wr4"}))

    k5m = Graph()
    nodes = ("v", "w", "x", "u1", "u2")
    for p, q in itertools.combinations(nodes, 2):
        if {p, q} != {"u1", "u2"}:
            k5m.add_arc(f"{p}{q}", p, q)
    m4 = UnlabelledMarkedGraph(
        k5m, "v", "w",
        frozenset({"vw", "vx", "vu1"}), frozenset({"wx", "vw", "wu2"}))

    return [m1, m2, m3, m4]


def generate_root_catalog():
    """The four root unlabelled marked graphs (CLI: xcal)."""
    return _root_members()


def generate_nonplanar_catalog():
    """The twelve marked graphs over the roots that are not planar as
    marked graphs (CLI: ycal)."""
    out = []
    for member in _root_members():
        bad = [b for b in member.bijections()
               if not is_planar_marked(member.marked(b))]
        assert len(bad) == 3, "each root admits exactly three bad bijections"
        out.extend(member.marked(b) for b in bad)
    return out


@dataclass
class _GenMember:
    """Catalogue member under construction: graph, roots, marks, and the
    non-realisable bijections carried from its root."""

    graph: Graph
    v: object
    w: object
    A: frozenset
    B: frozenset
    badset: frozenset   # frozenset of bijections, each a frozenset of pairs
    _key: str = None

    def key(self):
        if self._key is not None:
            return self._key
        aux, colours = _aux_base(self.graph, self.v, self.w)
        for a in self.A:
            colours[("a", a)] |= 8
        for b in self.B:
            colours[("a", b)] |= 16
        for k, bij in enumerate(sorted(self.badset, key=skey)):
            bnode = ("bij", k)
            aux.add_node(bnode)
            colours[bnode] = 7
            for i, (a, b) in enumerate(sorted(bij, key=skey)):
                pnode = ("bp", k, i)
                aux.add_node(pnode)
                colours[pnode] = 9
                aux.add_arc(("bl", k, i), bnode, pnode)
                aux.add_arc(("bla", k, i), pnode, ("a", a))
                aux.add_arc(("blb", k, i), pnode, ("a", b))
        self._key = canonical_form(aux, colours)
        return self._key


def _fresh_arc(name, graph):
    while name in graph.arcs:
        name += "_"
    return name


def _fresh_node(name, graph):
    while name in graph.nodes:
        name += "_"
    return name


def _subdivide(member: _GenMember, arc) -> _GenMember:
    """Subdivide a root-incident arc; ids keep the A side at v and the B
    side at w so the marks stay put."""
    g = member.graph
    x, y = g.arcs[arc]
    v, w = member.v, member.w
    z = _fresh_node(f"sub_{arc}", g)
    h = Graph(g.nodes | {z})
    in_a, in_b = arc in member.A, arc in member.B
    if in_b and not in_a:
        keep_end = w
    else:
        keep_end = v if v in (x, y) else x
    other = y if x == keep_end else x
    fresh = _fresh_arc(f"{arc}__s", g)
    for c, ends in g.arcs.items():
        if c != arc:
            h.add_arc(c, *ends)
    h.add_arc(arc, keep_end, z)
    h.add_arc(fresh, z, other)
    A, B = member.A, member.B
    badset = member.badset
    if in_a and in_b:
        B = (B - {arc}) | {fresh}
        badset = frozenset(
            frozenset((a, fresh if b == arc else b) for a, b in bij)
            for bij in badset)
    return _GenMember(h, v, w, A, B, badset)


def _add_arc(member: _GenMember, at, target) -> _GenMember:
    g = member.graph
    h = g.copy()
    if target == "NEW":
        target = _fresh_node("ext", h)
        h.add_node(target)
    name = _fresh_arc(f"add_{at}", h)
    h.add_arc(name, at, target)
    return _GenMember(h, member.v, member.w, member.A, member.B, member.badset)


def _add_two_arcs(member: _GenMember, tv, tw, shared_new):
    g = member.graph.copy()
    if shared_new:
        z = _fresh_node("ext", g)
        g.add_node(z)
        tv = tw = z
    else:
        if tv == "NEW":
            tv = _fresh_node("extv", g)
            g.add_node(tv)
        if tw == "NEW":
            tw = _fresh_node("extw", g)
            g.add_node(tw)
    g.add_arc(_fresh_arc("addv", g), member.v, tv)
    g.add_arc(_fresh_arc("addw", g), member.w, tw)
    return _GenMember(g, member.v, member.w, member.A, member.B, member.badset)


def _split_doubly_marked(member: _GenMember, arc, serial):
    g = member.graph
    x, y = g.arcs[arc]
    pa = _fresh_arc(f"{arc}__pa", g)
    pb = _fresh_arc(f"{arc}__pb", g)
    h = Graph(g.nodes)
    for c, ends in g.arcs.items():
        if c != arc:
            h.add_arc(c, *ends)
    if serial:
        z = _fresh_node(f"mid_{arc}", g)
        h.add_node(z)
        h.add_arc(pa, member.v, z)
        h.add_arc(pb, z, member.w)
    else:
        h.add_arc(pa, x, y)
        h.add_arc(pb, x, y)
    A = (member.A - {arc}) | {pa}
    B = (member.B - {arc}) | {pb}
    badset = frozenset(
        frozenset((pa if a == arc else a, pb if b == arc else b)
                  for a, b in bij)
        for bij in member.badset)
    return _GenMember(h, member.v, member.w, A, B, badset)


def _coadds(member: _GenMember):
    out = []
    g = member.graph
    for z in sorted(g.nodes, key=skey):
        if z in (member.v, member.w):
            continue
        ends = g.arc_ends_at(z)
        if len(ends) < 4 or any(g.is_loop(a) for a, _ in ends):
            continue
        first = ends[0]
        rest = ends[1:]
        for r in range(1, len(rest)):
            for side2 in itertools.combinations(rest, r):
                side2 = list(side2)
                if len(side2) < 2 or len(ends) - len(side2) < 2:
                    continue
                h = Graph(g.nodes)
                z2 = _fresh_node(f"co_{z}", g)
                h.add_node(z2)
                moved = set(side2)
                for c, (p, q) in g.arcs.items():
                    p2, q2 = p, q
                    if p == z and (c, 0) in moved:
                        p2 = z2
                    if q == z and (c, 1) in moved:
                        q2 = z2
                    h.add_arc(c, p2, q2)
                h.add_arc(_fresh_arc(f"coe_{z}", h), z, z2)
                out.append(_GenMember(h, member.v, member.w,
                                      member.A, member.B, member.badset))
    return out


def _root_gen_members():
    out = []
    for root in _root_members():
        bad = []
        for bij in root.bijections():
            if not is_planar_marked(root.marked(bij)):
                bad.append(frozenset(bij))
        out.append(_GenMember(root.graph, root.v, root.w, root.A, root.B,
                              frozenset(bad)))
    return out


def _dedup(members):
    seen = {}
    for m in members:
        seen.setdefault(m.key(), m)
    return [seen[k] for k in sorted(seen)]


def generate_stage1():
    """Roots plus the two vw-subdivided members."""
    base = _root_gen_members()
    extra = []
    for m in base:
        for arc, ends in sorted(m.graph.arcs.items(), key=lambda kv: skey(kv[0])):
            if set(ends) == {m.v, m.w} and not (arc in m.A and arc in m.B):
                extra.append(_subdivide(m, arc))
    return _dedup(base + extra)


def _stage2(stage1):
    out = list(stage1)
    for m in stage1:
        free_v = [a for a, ends in m.graph.arcs.items()
                  if m.v in ends and a not in m.A and a not in m.B]
        free_w = [a for a, ends in m.graph.arcs.items()
                  if m.w in ends and a not in m.A and a not in m.B]
        if not free_v and not free_w:
            continue
        if not free_v or not free_w:
            at = m.v if not free_v else m.w
            targets = sorted(m.graph.nodes - {at}, key=skey) + ["NEW"]
            out.extend(_add_arc(m, at, t) for t in targets)
            continue
        tv_opts = sorted(m.graph.nodes - {m.v}, key=skey) + ["NEW"]
        tw_opts = sorted(m.graph.nodes - {m.w}, key=skey) + ["NEW"]
        for tv in tv_opts:
            for tw in tw_opts:
                out.append(_add_two_arcs(m, tv, tw, shared_new=False))
        out.append(_add_two_arcs(m, None, None, shared_new=True))
    return _dedup(out)


def _stage3(stage2):
    out = list(stage2)
    for m in stage2:
        both = sorted(m.A & m.B, key=skey)
        for arc in both:
            out.append(_split_doubly_marked(m, arc, serial=False))
            out.append(_split_doubly_marked(m, arc, serial=True))
    return _dedup(out)


def _stage4(stage3):
    done = {m.key(): m for m in stage3}
    frontier = list(stage3)
    while frontier:
        new = []
        for m in frontier:
            for child in _coadds(m):
                k = child.key()
                if k not in done:
                    done[k] = child
                    new.append(child)
        frontier = new
    return [done[k] for k in sorted(done)]


def _balanced(members):
    return [m for m in members
            if m.graph.degree(m.v) == m.graph.degree(m.w)]


def _stage5(stage4):
    """Subdivide each root-incident arc at most once, all subsets; only
    degree-balanced members can underlie strict marked graphs."""
    out = {}
    for m in _balanced(stage4):
        incident = sorted(
            (a for a, ends in m.graph.arcs.items()
             if m.v in ends or m.w in ends), key=skey)
        for r in range(len(incident) + 1):
            for subset in itertools.combinations(incident, r):
                cur = m
                for arc in subset:
                    cur = _subdivide(cur, arc)
                out.setdefault(cur.key(), cur)
    return [out[k] for k in sorted(out)]


class StrictCatalog:
    """The strict catalogue (CLI: ycal-prime).

    Base members are the degree-balanced stage-four graphs with their
    carried bad bijections; the final subdivision stage (each root-incident
    arc split at most once) is matched implicitly by the membership test,
    which suppresses subsets of degree-two root-adjacent nodes and looks
    the result up by marked sameness.  Every accepted graph has the base
    member as a marked minor, so acceptance implies a marked minor in the
    non-planar catalogue.
    """

    def __init__(self, base_members):
        self.base = base_members
        self.marked_keys = {}
        idx = 0
        for m in base_members:
            for bij in sorted(m.badset, key=skey):
                pairs = tuple(sorted(bij, key=skey))
                mm = MarkedGraph(m.graph, m.v, m.w, pairs)
                self.marked_keys.setdefault(mm.key(), idx)
                self.marked_keys.setdefault(mm.swap().key(), idx)
                idx += 1
        self._count = idx

    def __len__(self):
        return self._count

    def match_index(self, s: MarkedGraph):
        """Index of the matched base entry, or None."""
        for t in _suppression_normalisations(s):
            k = _marked_key(t.graph, t.v, t.w, t.pairs, None)
            if k in self.marked_keys:
                return self.marked_keys[k]
        return None

    def contains(self, s: StrictMarkedGraph) -> bool:
        """True iff s is one of the catalogue's strict marked graphs."""
        return self.match_index(s) is not None


def _suppress_node(m: MarkedGraph, z):
    """Suppress a degree-two node, keeping marked-arc identities."""
    g = m.graph
    (a1, _), (a2, _) = g.arc_ends_at(z)
    if a1 == a2:
        return None
    marked_arcs = m.A | m.B
    # keep the marked arc's id when one flank is marked
    keep, drop = (a1, a2) if a1 in marked_arcs or skey(a1) <= skey(a2) else (a2, a1)
    if drop in marked_arcs:
        if keep in marked_arcs:
            return None  # both flanks marked; not a subdivision point
        keep, drop = drop, keep
    end_keep = g.arcs[keep][0] if g.arcs[keep][1] == z else g.arcs[keep][1]
    end_drop = g.arcs[drop][0] if g.arcs[drop][1] == z else g.arcs[drop][1]
    if end_keep == z or end_drop == z:
        return None
    h = Graph(n for n in g.nodes if n != z)
    for c, ends in g.arcs.items():
        if c == drop:
            continue
        if c == keep:
            h.add_arc(c, end_keep, end_drop)
        else:
            h.add_arc(c, *ends)
    return MarkedGraph(h, m.v, m.w, m.pairs)


def _suppression_normalisations(s: MarkedGraph):
    """s with every subset of its degree-two root-adjacent nodes
    suppressed (the inverse of the final subdivision stage)."""
    seen = {}
    frontier = [MarkedGraph(s.graph, s.v, s.w, s.pairs)]
    seen[frontier[0].key()] = frontier[0]
    while frontier:
        m = frontier.pop()
        g = m.graph
        for z in sorted(g.nodes, key=skey):
            if z in (m.v, m.w) or g.degree(z) != 2:
                continue
            if m.v not in g.neighbours(z) and m.w not in g.neighbours(z):
                continue
            t = _suppress_node(m, z)
            if t is None:
                continue
            k = t.key()
            if k not in seen:
                seen[k] = t
                frontier.append(t)
    return [seen[k] for k in sorted(seen)]


def generate_strict_catalog(progress=None) -> StrictCatalog:
    """Build the strict catalogue; deterministic across runs."""
    stage1 = generate_stage1()
    stage2 = _stage2(stage1)
    stage3 = _stage3(stage2)
    stage4 = _stage4(stage3)
    base = _balanced(stage4)
    if progress:
        progress(f"stages: {len(stage1)}/{len(stage2)}/{len(stage3)}"
                 f"/{len(stage4)}; balanced base: {len(base)}")
    return StrictCatalog(base)


_CATALOG_CACHE_TAG = "embed3-strict-catalog-v2"
_strict_catalog_singleton = None


def strict_catalog(progress=None) -> StrictCatalog:
    """Process-wide strict catalogue, with an on-disk cache.

    Generation is deterministic, so the cache only saves time; delete the
    cache file (or set EMBED3_NO_CATALOG_CACHE) to force regeneration.
    """
    global _strict_catalog_singleton
    if _strict_catalog_singleton is not None:
        return _strict_catalog_singleton
    import os
    import pickle
    import tempfile

    path = os.path.join(tempfile.gettempdir(), f"{_CATALOG_CACHE_TAG}.pickle")
    if not os.environ.get("EMBED3_NO_CATALOG_CACHE"):
        try:
            with open(path, "rb") as fh:
                _strict_catalog_singleton = pickle.load(fh)
            return _strict_catalog_singleton
        except (OSError, pickle.PickleError, EOFError):
            pass
    cat = generate_strict_catalog(progress=progress)
    _strict_catalog_singleton = cat
    if not os.environ.get("EMBED3_NO_CATALOG_CACHE"):
        try:
            with open(path + ".tmp", "wb") as fh:
                pickle.dump(cat, fh)
            os.replace(path + ".tmp", path)
        except OSError:
            pass
    return cat


# ---------------------------------------------------------------------------
# Associated strict marked graphs
# ---------------------------------------------------------------------------

def associated_strict_marked_graphs(c, x, loop):
    """One strict marked graph per 3-subset of the faces traversing the
    loop exactly once; roots are the loop's link nodes and iota is the
    loop pairing read at arc level."""
    from embed3.complexes import link_graph

    lg = link_graph(c, x)
    if loop not in lg.loop_pairing:
        raise ValueError(f"{loop!r} is not a loop at {x!r}")
    pairing = lg.loop_pairing[loop]
    v, w = (loop, 0), (loop, 1)
    iota = {}
    for end_t, end_h in pairing.items():
        if end_t[0] in iota:
            raise ValueError("a face traverses the loop more than once "
                             "through one flank; arc-level pairing undefined")
        iota[end_t[0]] = end_h[0]

    flanks = {}
    for f in sorted(c.faces, key=skey):
        walk = c.walk_with_occurrences(f)
        n = len(walk)
        hits = [i for i, (e, _, _) in enumerate(walk) if e == loop]
        if len(hits) != 1:
            continue
        (i,) = hits
        _, d, _ = walk[i]
        start_arc = (f, (i - 1) % n)
        finish_arc = (f, i)
        if d > 0:
            flanks[f] = (start_arc, finish_arc)   # (at v, at w)
        else:
            flanks[f] = (finish_arc, start_arc)
    names = sorted(flanks, key=skey)
    for triple in itertools.combinations(names, 3):
        pairs = tuple(flanks[f] for f in triple)
        yield StrictMarkedGraph(lg.graph, v, w, pairs, iota)
