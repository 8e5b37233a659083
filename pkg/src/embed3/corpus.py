"""Built-in example complexes.

Names: tetra, cone (over K5, K33 or a given graph), octa0/octa1/octa3,
crosscap(q), bowtie_loop, and sc_case2, a simplicial locally 3-connected
complex built as the 2-skeleton of a twisted sphere-bundle triangulation;
its failure mode is an odd chordless cycle rather than a nonplanar link.
"""

from __future__ import annotations

import itertools

from embed3.complexes import BACKWARD, FORWARD, Complex2
from embed3.graphs import Graph, complete_bipartite, complete_graph, skey


def _walk_from_vertex_cycle(edges: dict, cycle):
    """Edge walk through the given vertex cycle; edge ids looked up by pair."""
    by_pair = {}
    for e, (t, h) in edges.items():
        by_pair.setdefault(frozenset((t, h)), []).append(e)
    walk = []
    n = len(cycle)
    for i in range(n):
        u, v = cycle[i], cycle[(i + 1) % n]
        cands = by_pair[frozenset((u, v))]
        if len(cands) != 1:
            raise ValueError(f"ambiguous edge between {u!r} and {v!r}")
        e = cands[0]
        walk.append((e, FORWARD if edges[e][0] == u else BACKWARD))
    return tuple(walk)


def _simplicial_from_triangles(vertices, triangles) -> Complex2:
    vertices = sorted(set(vertices), key=skey)
    triangles = list(triangles)
    edges = {}
    for tri in triangles:
        for u, v in itertools.combinations(sorted(tri, key=skey), 2):
            edges.setdefault(f"E_{u}_{v}", (u, v))
    faces = {}
    for tri in sorted(triangles, key=lambda t: skey(tuple(sorted(t, key=skey)))):
        a, b, c = sorted(tri, key=skey)
        faces[f"F_{a}_{b}_{c}"] = _walk_from_vertex_cycle(edges, [a, b, c])
    return Complex2(vertices, edges, faces)


def tetrahedron() -> Complex2:
    vs = ["1", "2", "3", "4"]
    return _simplicial_from_triangles(vs, itertools.combinations(vs, 3))


def cone_over(g: Graph, apex="apex") -> Complex2:
    """One triangle per arc of g over a new apex; g must be loopless."""
    edges = {}
    for a, (u, v) in g.arcs.items():
        if u == v:
            raise ValueError("cone base must be loopless")
        edges[str(a)] = (str(u), str(v))
    for n in g.nodes:
        edges[f"sp_{n}"] = (apex, str(n))
    faces = {}
    for a, (u, v) in sorted(g.arcs.items(), key=lambda kv: skey(kv[0])):
        faces[f"f_{a}"] = (
            (f"sp_{u}", FORWARD), (str(a), FORWARD), (f"sp_{v}", BACKWARD)
        )
    vertices = {str(n) for n in g.nodes} | {apex}
    return Complex2(vertices, edges, faces)


_OPPOSITE = {"1": "6", "2": "5", "3": "4", "6": "1", "5": "2", "4": "3"}
_SQUARES = [("1", "2", "6", "5"), ("1", "3", "6", "4"), ("2", "3", "5", "4")]


def octahedron_plus_squares(n_squares: int) -> Complex2:
    """Octahedron boundary plus 0 to 3 of its three equatorial 4-faces."""
    if not 0 <= n_squares <= 3:
        raise ValueError("n_squares must be 0..3")
    vs = [str(i) for i in range(1, 7)]
    edges = {}
    for u, v in itertools.combinations(vs, 2):
        if _OPPOSITE[u] != v:
            edges[f"E_{u}_{v}"] = (u, v)
    triangles = [
        t for t in itertools.combinations(vs, 3)
        if all(_OPPOSITE[a] != b for a, b in itertools.combinations(t, 2))
    ]
    faces = {}
    for tri in triangles:
        a, b, c = tri
        faces[f"F_{a}_{b}_{c}"] = _walk_from_vertex_cycle(edges, list(tri))
    for i in range(n_squares):
        faces[f"SQ{i}"] = _walk_from_vertex_cycle(edges, list(_SQUARES[i]))
    return Complex2(vs, edges, faces)


def crosscap(q: int) -> Complex2:
    """One vertex, one loop, one face running around the loop q times."""
    if q < 1:
        raise ValueError("q must be positive")
    return Complex2(
        {"v"}, {"l": ("v", "v")}, {"f": tuple(("l", FORWARD) for _ in range(q))}
    )


def bowtie_loop() -> Complex2:
    """Two parallel edges plus a loop; two faces traverse the loop in
    opposite senses."""
    edges = {"x": ("u", "v"), "y": ("u", "v"), "l": ("v", "v")}
    faces = {
        "fl": (("l", FORWARD),),
        "fxy": (("x", FORWARD), ("y", BACKWARD)),
        "fR": (("x", FORWARD), ("l", FORWARD), ("y", BACKWARD)),
        "fL": (("x", FORWARD), ("l", BACKWARD), ("y", BACKWARD)),
    }
    return Complex2({"u", "v"}, edges, faces)


# ---------------------------------------------------------------------------
# sc_case2: twisted sphere-bundle skeleton
# ---------------------------------------------------------------------------

def _prism_tets(bottom, top):
    """Staircase tetrahedra of a prism; bottom ordered, top the matched images."""
    (a0, b0, c0), (a1, b1, c1) = bottom, top
    return [(a0, b0, c0, c1), (a0, b0, b1, c1), (a0, a1, b1, c1)]


def twisted_sphere_bundle_skeleton(layers: int = 3) -> Complex2:
    """2-skeleton of a sphere bundle with one orientation-reversing gluing.

    Stacks `layers` copies of the tetrahedral sphere and triangulates each
    band of prisms; the last band returns to layer zero through a
    transposition of two sphere vertices (a reflection).  All links are
    sphere triangulations, so the result is simplicial and locally
    3-connected, but the layer direction reverses orientation.
    """
    if layers < 3:
        raise ValueError("need at least 3 layers to stay simplicial")
    base = ["1", "2", "3", "4"]
    alpha = {"1": "2", "2": "1", "3": "3", "4": "4"}
    sphere_faces = list(itertools.combinations(base, 3))

    def at(q, i):
        return f"{q}L{i}"

    tets = []
    for i in range(layers):
        j = (i + 1) % layers
        twist = alpha if j == 0 else {q: q for q in base}
        for tri in sphere_faces:
            a, b, c = tri
            bottom = (at(a, i), at(b, i), at(c, i))
            top = (at(twist[a], j), at(twist[b], j), at(twist[c], j))
            tets.extend(_prism_tets(bottom, top))

    triangles = sorted(
        {tuple(sorted(t, key=skey)) for tet in tets
         for t in itertools.combinations(tet, 3)}
    )
    vertices = [at(q, i) for q in base for i in range(layers)]
    return _simplicial_from_triangles(vertices, triangles)


# ---------------------------------------------------------------------------
# dispatcher
# ---------------------------------------------------------------------------

def corpus(name: str, params=None) -> Complex2:
    """Builtin complex by name; params per name (see CLI help)."""
    name = name.lower()
    if name == "tetra":
        return tetrahedron()
    if name == "cone":
        base = (params or "K5").upper() if isinstance(params, str) else params
        if base == "K5":
            return cone_over(complete_graph(5))
        if base == "K33":
            return cone_over(complete_bipartite(3, 3))
        if isinstance(params, Graph):
            return cone_over(params)
        raise ValueError(f"unknown cone base {params!r}")
    if name in ("octa0", "octa1", "octa3"):
        return octahedron_plus_squares(int(name[-1]))
    if name == "crosscap":
        return crosscap(int(params if params is not None else 2))
    if name == "bowtie_loop":
        return bowtie_loop()
    if name == "sc_case2":
        return twisted_sphere_bundle_skeleton()
    raise ValueError(f"unknown corpus name {name!r}")


CORPUS_NAMES = [
    "tetra", "cone", "octa0", "octa1", "octa3",
    "crosscap", "bowtie_loop", "sc_case2",
]
