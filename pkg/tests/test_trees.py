import pytest

from tangleforge import (ConnectivitySystem, RankFunction, build_maximal_tree,
                         conforms_with_tree, displayed_by_edge,
                         displayed_by_flower_vertex, enumerate_tangles,
                         extend_tree, flower_to_tree, grow_terminal_bag,
                         laminarity_check, retarget_terminal_bag,
                         split_terminal_bag, verify_flower,
                         verify_partial_kS_tree)
from tangleforge.bitset import elements_of
from tangleforge.closure import Separation, build_default_S, full_closure
from tangleforge.errors import NotAFlowerVertex, PreconditionFailed
from tangleforge.oracle import oracle_certify_tree
from tangleforge.trees import (PiTree, displayed_tree_class_ids, flower_at,
                               single_bag_tree)

from conftest import Ctx, lab


def face_tree(ctx):
    """Two-bag tree on the R_8 face separation."""
    return PiTree(4, {0: lab(1, 2, 3, 4), 1: lab(5, 6, 7, 8)}, {}, [(0, 1)])


def phi_r8_tree(ctx):
    f = verify_flower(ctx.sys, ctx.tangle,
                      [lab(1, 2), lab(3, 4), lab(5, 6), lab(7, 8)])
    return flower_to_tree(ctx.sys, ctx.tangle, f)


class TestDisplayed:
    def test_two_bag_edge(self, ctx_r8p1):
        t = face_tree(ctx_r8p1)
        sep = displayed_by_edge(ctx_r8p1.sys, t, (0, 1))
        assert sep == Separation.make(ctx_r8p1.sys, lab(1, 2, 3, 4), 4)

    def test_star_flower_vertex_displays_unions(self, ctx_r8p1):
        t = phi_r8_tree(ctx_r8p1)
        shown = displayed_by_flower_vertex(ctx_r8p1.sys, ctx_r8p1.tangle, t, 0)
        sides = {s.side for s in shown}
        assert lab(1, 2, 3, 4) in sides          # consecutive union
        assert lab(1, 2, 5, 6) in sides          # anemone cross union
        assert Separation.make(ctx_r8p1.sys, lab(1, 2), 4).side in sides

    def test_bag_vertex_is_not_a_flower_vertex(self, ctx_r8p1):
        t = phi_r8_tree(ctx_r8p1)
        with pytest.raises(NotAFlowerVertex):
            flower_at(ctx_r8p1.sys, ctx_r8p1.tangle, t, 1)

    def test_path_of_bags_prefix_unions(self, ctx_u56):
        sys = ctx_u56.sys
        t = PiTree(2, {0: sys.mask([0]), 1: sys.mask([1]),
                       2: sys.mask([2, 3, 4, 5])}, {}, [(0, 1), (1, 2)])
        assert displayed_by_edge(sys, t, (0, 1)).side == sys.mask([0])
        assert displayed_by_edge(sys, t, (1, 2)).side == sys.mask([0, 1])


class TestFlowerToTree:
    def test_one_petal(self, ctx_r8p1):
        f = verify_flower(ctx_r8p1.sys, ctx_r8p1.tangle, [ctx_r8p1.sys.full])
        t = flower_to_tree(ctx_r8p1.sys, ctx_r8p1.tangle, f)
        assert len(t.vertices()) == 1 and not t.edges()

    def test_two_petals(self, ctx_r8p1):
        f = verify_flower(ctx_r8p1.sys, ctx_r8p1.tangle,
                          [lab(1, 2, 3, 4), lab(5, 6, 7, 8)])
        t = flower_to_tree(ctx_r8p1.sys, ctx_r8p1.tangle, f)
        assert len(t.edges()) == 1 and not t.labels

    def test_anemone_star(self, ctx_r8p1):
        t = phi_r8_tree(ctx_r8p1)
        assert t.labels == {0: "A"}
        assert len(t.edges()) == 4
        assert 0 not in t.cyclic

    def test_daisy_star_has_cyclic_order(self, ctx_c6):
        f = verify_flower(ctx_c6.sys, ctx_c6.tangle, [1 << i for i in range(6)])
        t = flower_to_tree(ctx_c6.sys, ctx_c6.tangle, f)
        assert t.labels == {0: "D"}
        assert t.cyclic[0] == (1, 2, 3, 4, 5, 6)


class TestVerify:
    def test_sequential_bag_edge_fails_p1(self, ctx_r8p1):
        # ({1,2}, rest) is a strong k-separation but not a (k,S)-separation,
        # and the edge joins two bag vertices
        sys = ctx_r8p1.sys
        t = PiTree(4, {0: lab(1, 2), 1: sys.full ^ lab(1, 2)}, {}, [(0, 1)])
        verdict = verify_partial_kS_tree(sys, ctx_r8p1.tangle, ctx_r8p1.S, t)
        assert not verdict.passed["P1"]

    def test_phi_r8_tree_fails_p5(self, ctx_r8p1):
        verdict = verify_partial_kS_tree(ctx_r8p1.sys, ctx_r8p1.tangle,
                                         ctx_r8p1.S, phi_r8_tree(ctx_r8p1))
        assert verdict.passed["P1"] and verdict.passed["P3"]
        assert not verdict.passed["P5"]
        witnesses = [w for a, w in verdict.failures if a == "P5"]
        assert witnesses and witnesses[0].side == lab(1, 3, 5, 7)

    def test_face_tree_passes_all_but_p5(self, ctx_r8p1):
        verdict = verify_partial_kS_tree(ctx_r8p1.sys, ctx_r8p1.tangle,
                                         ctx_r8p1.S, face_tree(ctx_r8p1))
        assert verdict.passed["P1"]
        assert not verdict.passed["P5"]

    def test_weak_label_checked(self, ctx_c6):
        # mislabelling the daisy as A must fail (P3)
        sys, tangle, S = ctx_c6.sys, ctx_c6.tangle, ctx_c6.S
        bags = {i + 1: 1 << i for i in range(6)}
        t = PiTree(2, bags, {0: "A"}, [(0, i + 1) for i in range(6)])
        verdict = verify_partial_kS_tree(sys, tangle, S, t)
        assert not verdict.passed["P3"]


class TestConformsWithTree:
    def test_displayed_conforms(self, ctx_r8p1):
        t = face_tree(ctx_r8p1)
        sep = Separation.make(ctx_r8p1.sys, lab(1, 2, 3, 4), 4)
        assert conforms_with_tree(ctx_r8p1.sys, ctx_r8p1.tangle, ctx_r8p1.S, sep, t)

    def test_side_in_bag_conforms(self, ctx_r8p1):
        t = face_tree(ctx_r8p1)
        sep = Separation.make(ctx_r8p1.sys, lab(1, 2, 5, 6), 4)
        # {1,2,5,6} is no union of the two bags, but crossing reps exist?
        # No: its class is a singleton; it conforms iff a side fits a bag.
        assert not conforms_with_tree(ctx_r8p1.sys, ctx_r8p1.tangle,
                                      ctx_r8p1.S, sep, t)

    def test_r8_diagonal_never_conforms(self, ctx_r8p1):
        sep = Separation.make(ctx_r8p1.sys, lab(1, 3, 5, 7), 4)
        for t in (face_tree(ctx_r8p1), phi_r8_tree(ctx_r8p1)):
            assert not conforms_with_tree(ctx_r8p1.sys, ctx_r8p1.tangle,
                                          ctx_r8p1.S, sep, t)

    def test_side_tucked_in_bag_conforms(self, ctx_barbell):
        sys, tangle, S = ctx_barbell.sys, ctx_barbell.tangle, ctx_barbell.S
        t = PiTree(2, {0: sys.mask([0, 1]), 1: sys.mask([2, 3, 4, 5, 6])},
                   {}, [(0, 1)])
        tucked = Separation.make(sys, sys.mask([2]), 2)  # {a3} inside bag 1
        assert conforms_with_tree(sys, tangle, S, tucked, t)


class TestSurgery:
    def barbell_two_bag(self, ctx):
        sys = ctx.sys
        return PiTree(2, {0: sys.mask([0, 1]), 1: sys.mask([2, 3, 4, 5, 6])},
                      {}, [(0, 1)])

    def test_grow(self, ctx_barbell):
        sys, t, S = ctx_barbell.sys, ctx_barbell.tangle, ctx_barbell.S
        tree = self.barbell_two_bag(ctx_barbell)
        grown = grow_terminal_bag(sys, t, S, tree, 0, sys.mask([3, 4, 5, 6]))
        assert grown.bags[0] == sys.mask([0, 1, 3, 4, 5, 6])
        assert grown.bags[1] == sys.mask([2])
        assert verify_partial_kS_tree(sys, t, S, grown).ok
        assert (displayed_tree_class_ids(sys, t, S, grown)
                == displayed_tree_class_ids(sys, t, S, tree))

    def test_grow_reaches_full_closure(self, ctx_barbell):
        sys, t, S = ctx_barbell.sys, ctx_barbell.tangle, ctx_barbell.S
        from tangleforge.closure import full_closure_sequence
        tree = self.barbell_two_bag(ctx_barbell)
        b = tree.bags[0]
        _, steps = full_closure_sequence(sys, t, b)
        for y in steps:
            tree = grow_terminal_bag(sys, t, S, tree, 0, y)
        assert tree.bags[0] == full_closure(sys, t, b)

    def test_grow_rejects_empty_or_strong(self, ctx_barbell):
        sys, t, S = ctx_barbell.sys, ctx_barbell.tangle, ctx_barbell.S
        tree = self.barbell_two_bag(ctx_barbell)
        with pytest.raises(PreconditionFailed):
            grow_terminal_bag(sys, t, S, tree, 0, 0)
        with pytest.raises(PreconditionFailed):
            grow_terminal_bag(sys, t, S, tree, 0, sys.mask([2]))  # strong

    def test_grow_rejects_non_separating_result(self, ctx_barbell):
        sys, t, S = ctx_barbell.sys, ctx_barbell.tangle, ctx_barbell.S
        tree = self.barbell_two_bag(ctx_barbell)
        with pytest.raises(PreconditionFailed):
            grow_terminal_bag(sys, t, S, tree, 0, sys.mask([3]))  # lam = 3

    def test_split(self, ctx_barbell):
        sys, t, S = ctx_barbell.sys, ctx_barbell.tangle, ctx_barbell.S
        sysm = sys.mask
        tree = PiTree(2, {0: sysm([0, 1, 3, 4, 5, 6]), 1: sysm([2])}, {}, [(0, 1)])
        split = split_terminal_bag(sys, t, S, tree, 0, sysm([3, 4, 5, 6]))
        assert split.bags[0] == sysm([3, 4, 5, 6])
        assert split.bags[2] == sysm([0, 1])
        assert split.is_leaf(2)
        assert verify_partial_kS_tree(sys, t, S, split).ok
        assert (displayed_tree_class_ids(sys, t, S, split)
                == displayed_tree_class_ids(sys, t, S, tree))

    def test_split_rejects_whole_bag(self, ctx_barbell):
        sys, t, S = ctx_barbell.sys, ctx_barbell.tangle, ctx_barbell.S
        tree = self.barbell_two_bag(ctx_barbell)
        with pytest.raises(PreconditionFailed):
            split_terminal_bag(sys, t, S, tree, 0, tree.bags[0])  # strong

    def test_retarget_identity(self, ctx_barbell):
        sys, t, S = ctx_barbell.sys, ctx_barbell.tangle, ctx_barbell.S
        tree = self.barbell_two_bag(ctx_barbell)
        out, holder = retarget_terminal_bag(sys, t, S, tree, 0, tree.bags[0])
        assert out.bags[holder] == tree.bags[0]
        assert (displayed_tree_class_ids(sys, t, S, out)
                == displayed_tree_class_ids(sys, t, S, tree))

    def test_retarget_across_closure(self, ctx_barbell):
        sys, t, S = ctx_barbell.sys, ctx_barbell.tangle, ctx_barbell.S
        sysm = sys.mask
        tree = self.barbell_two_bag(ctx_barbell)
        target = sysm([0, 1, 3, 4, 5, 6])  # same closure as {a1,a2}
        out, holder = retarget_terminal_bag(sys, t, S, tree, 0, target)
        assert out.bags[holder] == target
        assert verify_partial_kS_tree(sys, t, S, out).ok
        assert (displayed_tree_class_ids(sys, t, S, out)
                == displayed_tree_class_ids(sys, t, S, tree))

    def test_retarget_rejects_different_closure(self, ctx_barbell):
        sys, t, S = ctx_barbell.sys, ctx_barbell.tangle, ctx_barbell.S
        tree = self.barbell_two_bag(ctx_barbell)
        with pytest.raises(PreconditionFailed):
            retarget_terminal_bag(sys, t, S, tree, 0, sys.mask([0, 2]))

    def test_pc4_grow_and_retarget(self, ctx_pc4):
        sys, t, S = ctx_pc4.sys, ctx_pc4.tangle, ctx_pc4.S
        tree = PiTree(2, {0: sys.mask([0]), 1: sys.mask([1, 2, 3, 4])},
                      {}, [(0, 1)])
        grown = grow_terminal_bag(sys, t, S, tree, 0, sys.mask([4]))
        assert grown.bags[0] == sys.mask([0, 4])
        assert (displayed_tree_class_ids(sys, t, S, grown)
                == displayed_tree_class_ids(sys, t, S, tree))
        out, holder = retarget_terminal_bag(sys, t, S, tree, 0, sys.mask([0, 4]))
        assert out.bags[holder] == sys.mask([0, 4])


class TestLaminarity:
    def test_built_trees_laminar(self, ctx_barbell, ctx_pc4):
        for ctx in (ctx_barbell, ctx_pc4):
            t = build_maximal_tree(ctx.sys, ctx.tangle, ctx.S)
            assert laminarity_check(ctx.sys, t)

    def test_single_edge_tree(self, ctx_r8p1):
        assert laminarity_check(ctx_r8p1.sys, face_tree(ctx_r8p1))

    def test_crossing_pair_on_non_tree_input(self, u24):
        broken = PiTree(2, {0: u24.mask([0, 1]), 1: u24.mask([2, 3]),
                            2: u24.mask([0, 2]), 3: u24.mask([1, 3])},
                        {}, [(0, 1), (2, 3)])
        # the two "edges" display {0,1} vs {0,2}: all four intersections hit
        assert not laminarity_check(u24, broken)


class TestExtendAndBuild:
    def test_extend_from_trivial_tree(self, ctx_u26):
        sys, tangle, S = ctx_u26.sys, ctx_u26.tangle, ctx_u26.S
        t0 = single_bag_tree(sys, 2)
        t1 = extend_tree(sys, tangle, S, t0)
        assert t1 is not None
        assert len(displayed_tree_class_ids(sys, tangle, S, t1)) >= 1

    def test_extend_on_maximal_returns_done(self, ctx_u26):
        sys, tangle, S = ctx_u26.sys, ctx_u26.tangle, ctx_u26.S
        t = build_maximal_tree(sys, tangle, S)
        assert extend_tree(sys, tangle, S, t) is None

    def test_extend_rejects_non_robust(self, ctx_r8p1):
        with pytest.raises(PreconditionFailed):
            extend_tree(ctx_r8p1.sys, ctx_r8p1.tangle, ctx_r8p1.S,
                        face_tree(ctx_r8p1))

    def test_extend_strictly_increases_classes(self, ctx_c6, ctx_barbell):
        for ctx in (ctx_c6, ctx_barbell):
            sys, tangle, S = ctx.sys, ctx.tangle, ctx.S
            t = single_bag_tree(sys, tangle.k)
            count = 0
            while True:
                nxt = extend_tree(sys, tangle, S, t)
                if nxt is None:
                    break
                assert (len(displayed_tree_class_ids(sys, tangle, S, nxt))
                        > len(displayed_tree_class_ids(sys, tangle, S, t)))
                t = nxt
                count += 1
                assert count < 64
            assert (displayed_tree_class_ids(sys, tangle, S, t)
                    == frozenset(range(len(S.classes()))))

    def test_zero_separation_instance_gives_single_bag(self, u49):
        tangle = [t for t in enumerate_tangles(u49, 3)][0]
        S = build_default_S(u49, tangle)
        assert S.separations() == []
        t = build_maximal_tree(u49, tangle, S)
        assert len(t.vertices()) == 1
        assert t.bags[0] == u49.full

    def test_one_class_instance_gives_two_bags(self):
        sys = ConnectivitySystem.matroid(RankFunction.uniform(1, 2))
        tangle = enumerate_tangles(sys, 2)[0]
        S = build_default_S(sys, tangle)
        assert len(S.classes()) == 1
        t = build_maximal_tree(sys, tangle, S)
        assert len(t.vertices()) == 2 and len(t.edges()) == 1

    @pytest.mark.parametrize("fixture", ["ctx_u26", "ctx_u56", "ctx_c6",
                                         "ctx_pc4", "ctx_barbell"])
    def test_build_displays_every_class(self, fixture, request):
        ctx = request.getfixturevalue(fixture)
        sys, tangle, S = ctx.sys, ctx.tangle, ctx.S
        t = build_maximal_tree(sys, tangle, S)
        verdict = verify_partial_kS_tree(sys, tangle, S, t)
        assert verdict.ok, verdict.failures
        assert (displayed_tree_class_ids(sys, tangle, S, t)
                == frozenset(range(len(S.classes()))))
        ok, problems = oracle_certify_tree(sys, tangle, S, t)
        assert ok, problems

    def test_c6_tree_has_daisy_vertex(self, ctx_c6):
        t = build_maximal_tree(ctx_c6.sys, ctx_c6.tangle, ctx_c6.S)
        assert "D" in t.labels.values()

    def test_u56_tree_has_anemone_vertex(self, ctx_u56):
        t = build_maximal_tree(ctx_u56.sys, ctx_u56.tangle, ctx_u56.S)
        assert "A" in t.labels.values()


CHAIN_EDGES = [(1, 2), (2, 3), (1, 3), (3, 4), (4, 5), (5, 6), (4, 6),
               (6, 7), (7, 8), (8, 9), (7, 9)]


@pytest.fixture(scope="module")
def chain_ctx():
    from tangleforge.tangles import Tangle
    sys = ConnectivitySystem.graph(CHAIN_EDGES, verify=False)
    mid = Tangle(sys, 2, [0, sys.mask([0, 1, 2]), sys.mask([0, 1, 2, 3]),
                          sys.mask([8, 9, 10]), sys.mask([7, 8, 9, 10])])
    return Ctx(sys, mid)


class TestTriangleChain:
    """Three triangles joined by two bridges: the middle tangle has weak
    tails on both sides, so classes have up to four representatives and the
    tree combines path bags with a flower vertex."""

    def test_middle_tangle_verifies_and_is_robust(self, chain_ctx):
        from tangleforge import is_robust, verify_tangle
        assert verify_tangle(chain_ctx.sys, chain_ctx.tangle) == []
        assert is_robust(chain_ctx.tangle)

    def test_classes_absorb_both_tails(self, chain_ctx):
        got = [[elements_of(s.side) for s in cls] for cls in chain_ctx.S.classes()]
        assert got == [
            [[0, 1, 2, 3, 4], [0, 1, 2, 3, 5, 6, 7, 8, 9, 10]],
            [[0, 1, 2, 3, 4, 5], [0, 1, 2, 3, 6],
             [0, 1, 2, 3, 4, 5, 7, 8, 9, 10], [0, 1, 2, 3, 6, 7, 8, 9, 10]],
            [[0, 1, 2, 3, 4, 6], [0, 1, 2, 3, 4, 6, 7, 8, 9, 10]],
        ]

    def test_build_and_verify(self, chain_ctx):
        sys, tangle, S = chain_ctx.sys, chain_ctx.tangle, chain_ctx.S
        t = build_maximal_tree(sys, tangle, S)
        verdict = verify_partial_kS_tree(sys, tangle, S, t)
        assert verdict.ok, verdict.failures
        assert (displayed_tree_class_ids(sys, tangle, S, t)
                == frozenset(range(len(S.classes()))))
        assert laminarity_check(sys, t)


class TestJsonRoundTrip:
    def test_tree_roundtrip(self, ctx_c6):
        from tangleforge.jsonio import tree_from_json, tree_to_json
        t = build_maximal_tree(ctx_c6.sys, ctx_c6.tangle, ctx_c6.S)
        back = tree_from_json(ctx_c6.sys, tree_to_json(ctx_c6.sys, t))
        assert back.bags == t.bags
        assert back.labels == t.labels
        assert back.edges() == t.edges()
        assert back.cyclic == t.cyclic
