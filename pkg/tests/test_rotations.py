import pytest

from embed3.complexes import (
    BACKWARD,
    FORWARD,
    Complex2,
    SpaceMinorOp,
    contract_edge,
    contract_face,
    is_locally_k_connected,
    link_graph,
    merged_vertex_after_contraction,
    validate,
)
from embed3.corpus import (
    bowtie_loop,
    cone_over,
    corpus,
    crosscap,
    octahedron_plus_squares,
    tetrahedron,
    twisted_sphere_bundle_skeleton,
)
from embed3.graphs import complete_graph, is_planar_rotation, planar_embedding
from embed3.rotations import (
    BudgetExceeded,
    LinkAssignment,
    all_complex_rotation_systems,
    brute_force_rotation_search,
    carry_rotation,
    colour_edge,
    find_planar_rotation_system,
    induce_link_rotation,
    is_loop_planar,
    is_planar_rotation_system,
    rotation_count,
    sigma_from_assignment,
)


def unique_sigma(c):
    (sigma,) = list(all_complex_rotation_systems(c))
    return sigma


def looped_pillow():
    # two parallel edges, a loop at v, a size-one face on the loop
    edges = {"x": ("u", "v"), "y": ("u", "v"), "l": ("v", "v")}
    faces = {
        "fl": (("l", FORWARD),),
        "fR": (("x", FORWARD), ("l", FORWARD), ("y", BACKWARD)),
        "fxy": (("x", FORWARD), ("y", BACKWARD)),
    }
    return Complex2({"u", "v"}, edges, faces)


# ---------------------------------------------------------------------------
# counts and enumeration
# ---------------------------------------------------------------------------

def test_rotation_counts():
    assert rotation_count(tetrahedron()) == 1
    assert rotation_count(bowtie_loop()) == 8
    assert rotation_count(octahedron_plus_squares(3)) == 4096
    assert rotation_count(octahedron_plus_squares(1)) == 16


def test_enumeration_matches_count():
    for c in [tetrahedron(), bowtie_loop(), octahedron_plus_squares(1)]:
        assert len(list(all_complex_rotation_systems(c))) == rotation_count(c)


# ---------------------------------------------------------------------------
# induced link rotations and planarity
# ---------------------------------------------------------------------------

def test_tetra_unique_sigma_planar():
    c = tetrahedron()
    sigma = unique_sigma(c)
    for v in sorted(c.vertices):
        lg = link_graph(c, v)
        rot = induce_link_rotation(c, sigma, v, lg)
        assert is_planar_rotation(lg.graph, rot)
    assert is_planar_rotation_system(c, sigma)[0]


def test_crosscap2_unique_sigma_planar():
    c = crosscap(2)
    sigma = unique_sigma(c)
    ok, _ = is_planar_rotation_system(c, sigma)
    assert ok


def test_bowtie_all_eight_fail():
    c = bowtie_loop()
    sigmas = list(all_complex_rotation_systems(c))
    assert len(sigmas) == 8
    for sigma in sigmas:
        for v in ("u", "v"):
            induce_link_rotation(c, sigma, v)  # validity only
        assert not is_planar_rotation_system(c, sigma)[0]


def test_brute_force_bowtie_exhausts():
    sigma, tried = brute_force_rotation_search(bowtie_loop())
    assert sigma is None
    assert tried == 8


def test_brute_force_octa3_exhausts():
    sigma, tried = brute_force_rotation_search(octahedron_plus_squares(3))
    assert sigma is None
    assert tried == 4096


def test_brute_force_octa1_finds():
    c = octahedron_plus_squares(1)
    sigma, _ = brute_force_rotation_search(c)
    assert sigma is not None
    assert is_planar_rotation_system(c, sigma)[0]


def test_brute_force_budget():
    with pytest.raises(BudgetExceeded):
        brute_force_rotation_search(octahedron_plus_squares(3), budget=100)


# ---------------------------------------------------------------------------
# loop planarity
# ---------------------------------------------------------------------------

def test_loop_planar_vacuous_without_loops():
    ok, rot = is_loop_planar(tetrahedron(), "1")
    assert ok and rot is not None


def test_loop_planar_crosscap2():
    ok, _ = is_loop_planar(crosscap(2), "v")
    assert ok


def test_loop_planar_false_on_bowtie_vertex():
    # the loop's two rotators can never be reverse under the pairing here
    ok, _ = is_loop_planar(bowtie_loop(), "v")
    assert not ok


def test_loop_planar_true_on_pillow():
    ok, _ = is_loop_planar(looped_pillow(), "v")
    assert ok


# ---------------------------------------------------------------------------
# colours
# ---------------------------------------------------------------------------

def assignment_from_sigma(c, sigma):
    links = {v: link_graph(c, v) for v in c.vertices}
    rots = {v: induce_link_rotation(c, sigma, v, links[v]) for v in c.vertices}
    return LinkAssignment(c, links, rots)


def test_colour_green_from_common_sigma():
    c = tetrahedron()
    asg = assignment_from_sigma(c, unique_sigma(c))
    for e in sorted(c.edges):
        assert colour_edge(c, asg, e) == "green"


def test_colour_flip_law():
    c = octahedron_plus_squares(3)
    res = find_planar_rotation_system(c)
    asg = res.assignment
    before = {e: colour_edge(c, asg, e) for e in sorted(c.edges)}
    v = "1"
    flipped = dict(asg.rotations)
    flipped[v] = {n: tuple(reversed(cyc)) for n, cyc in asg.rotations[v].items()}
    asg2 = LinkAssignment(c, asg.links, flipped)
    for e in sorted(c.edges):
        after = colour_edge(c, asg2, e)
        if v in c.edges[e]:
            assert {before[e], after} == {"green", "red"}
        else:
            assert after == before[e]


def test_colour_incompatible_when_sum_nonplanar():
    # contract an edge and the shrunken face: the merged edge's contraction
    # has a K33 link, so every pair of planar link rotations is incompatible
    c = octahedron_plus_squares(3)
    c2 = contract_edge(c, "E_1_2")
    c3 = contract_face(c2, "F_1_2_3")
    g = "F_1_2_3"
    assert g in c3.edges
    t, h = c3.edges[g]
    lt, lh = link_graph(c3, t), link_graph(c3, h)
    assert planar_embedding(link_graph(contract_edge(c3, g),
                                       merged_vertex_after_contraction(c3, g)).graph) is None
    from embed3.graphs import all_rotation_systems

    links = {t: lt, h: lh}
    rots_t = [r for r in all_rotation_systems(lt.graph)
              if is_planar_rotation(lt.graph, r)]
    rots_h = [r for r in all_rotation_systems(lh.graph)
              if is_planar_rotation(lh.graph, r)]
    assert rots_t and rots_h
    seen = set()
    for rt in rots_t:
        for rh in rots_h:
            asg = LinkAssignment(c3, links, {t: rt, h: rh})
            seen.add(colour_edge(c3, asg, g))
    assert seen == {"incompatible"}


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def test_solver_octa1_found():
    res = find_planar_rotation_system(octahedron_plus_squares(1))
    assert res.found
    ok, _ = is_planar_rotation_system(octahedron_plus_squares(1), res.rotation)
    assert ok


def test_solver_octa3_odd_cycle():
    c = octahedron_plus_squares(3)
    res = find_planar_rotation_system(c)
    assert res.status == "odd_cycle"
    o = res.cycle
    # cycle edges form a closed chordless cycle and the contraction of all
    # but one of them has a non-loop-planar link at the merged vertex
    e = res.cycle_edge
    cc = c
    merged = None
    for x in o:
        if x == e:
            continue
        merged = merged_vertex_after_contraction(cc, x)
        cc = contract_edge(cc, x)
    assert cc.is_loop(e)
    ok, _ = is_loop_planar(cc, merged)
    assert not ok


def test_solver_cone_k5_nonplanar_link():
    res = find_planar_rotation_system(corpus("cone", "K5"))
    assert res.status == "nonplanar_link"
    assert res.vertex == "apex"
    assert res.kuratowski.kind == "K5"


def test_solver_bowtie_falls_back_to_oracle():
    res = find_planar_rotation_system(bowtie_loop())
    assert res.status == "exhausted"
    assert res.tried == 8


def test_solver_tetra_found_by_fallback():
    res = find_planar_rotation_system(tetrahedron())
    assert res.found


def test_solver_budget_hypothesis_failure():
    # not locally 3-connected and too big to enumerate
    res = find_planar_rotation_system(bowtie_loop(), budget=2)
    assert res.status == "hypothesis_failure"


def test_solver_sc_case2_odd_cycle():
    c = twisted_sphere_bundle_skeleton()
    res = find_planar_rotation_system(c)
    assert res.status == "odd_cycle"
    e = res.cycle_edge
    cc = c
    merged = None
    for x in res.cycle:
        if x == e:
            continue
        merged = merged_vertex_after_contraction(cc, x)
        cc = contract_edge(cc, x)
    assert cc.is_loop(e)
    ok3, _ = is_locally_k_connected(cc, 3)
    ok, _ = is_loop_planar(cc, merged)
    assert not ok
    # planar but not loop-planar: the genuinely global failure mode
    assert planar_embedding(link_graph(cc, merged).graph) is not None


def test_solver_agrees_with_oracle_on_corpus():
    for name, params in [
        ("tetra", None), ("octa0", None), ("octa1", None), ("octa3", None),
        ("bowtie_loop", None), ("crosscap", 2), ("crosscap", 3),
    ]:
        c = corpus(name, params)
        res = find_planar_rotation_system(c)
        sigma, _ = brute_force_rotation_search(c)
        assert res.found == (sigma is not None), name
        if res.found:
            assert is_planar_rotation_system(c, res.rotation)[0]


# ---------------------------------------------------------------------------
# carrying rotations through reductions
# ---------------------------------------------------------------------------

def planar_sigma(c):
    sigma, _ = brute_force_rotation_search(c)
    assert sigma is not None
    return sigma


def applicable_ops(c):
    ops = []
    for e in sorted(c.edges):
        if not c.is_loop(e):
            ops.append(SpaceMinorOp("contract-edge", e))
        ops.append(SpaceMinorOp("delete-edge", e))
    for f in sorted(c.faces):
        ops.append(SpaceMinorOp("delete-face", f))
        walk = c.faces[f]
        if len(walk) == 1:
            ops.append(SpaceMinorOp("contract-face", f))
        elif len(walk) == 2:
            (e1, _), (e2, _) = walk
            if e1 != e2 and not c.is_loop(e1) and not c.is_loop(e2):
                ops.append(SpaceMinorOp("contract-face", f))
    for v in sorted(c.vertices):
        ops.append(SpaceMinorOp("split-vertex", v))
    return ops


def shared_square():
    edges = {"p": ("u", "v"), "q": ("v", "w"), "r1": ("w", "u"), "r2": ("w", "u")}
    faces = {
        "f1": (("p", FORWARD), ("q", FORWARD), ("r1", FORWARD)),
        "fs": (("r1", FORWARD), ("r2", BACKWARD)),
        "f2": (("p", FORWARD), ("q", FORWARD), ("r2", FORWARD)),
    }
    return Complex2({"u", "v", "w"}, edges, faces)


def test_preservation_under_all_ops():
    import embed3.rotations as R

    cases = [
        tetrahedron(), octahedron_plus_squares(1), crosscap(2),
        looped_pillow(), shared_square(),
    ]
    for c in cases:
        sigma = planar_sigma(c)
        for op in applicable_ops(c):
            out, sigma2 = carry_rotation(c, sigma, op)
            assert validate(out) == [], op
            ok, wit = R.is_planar_rotation_system(out, sigma2)
            assert ok, (op, wit)
