import random

import pytest

from tsn.core import (
    Demand,
    InfeasibleInstanceError,
    InputError,
    effective_times,
    frame,
    is_feasible,
    make_instance,
)
from tsn.exact import brute_force
from tsn.hardness import example1_instance
from tsn.variants import (
    lift_chain,
    lift_solution,
    node_edge_to_node,
    node_to_edge,
    normalize,
    normalize_with_instances,
    to_simple,
)

from helpers import rand_instance


def image_opt(instance):
    return brute_force(instance, cap=len(instance.edges))


class TestNodeEdgeToNode:
    def test_direct_construction(self):
        inst = make_instance(
            directed=False, variant="node_and_edge", num_times=2,
            vertices=["u", "v"], edges=[("u", "v", 3, (2,))], demands=[],
            node_activity={"u": (1, 2), "v": (1, 2)},
        )
        image, rmap = node_edge_to_node(inst)
        assert image.variant == "node"
        assert len(image.vertices) == len(inst.vertices) + len(inst.edges)
        assert len(image.edges) == 2 * len(inst.edges)
        (x,) = rmap.added_vertices
        assert image.node_activity[x] == frozenset({2})
        heavy, zero = rmap.image_edges_of(0)
        assert image.edges[heavy].w == 3 and image.edges[zero].w == 0

    def test_counts_on_random_instances(self):
        rng = random.Random(2)
        for _ in range(20):
            inst = rand_instance(rng, variant="node_and_edge")
            image, _ = node_edge_to_node(inst)
            assert len(image.vertices) == len(inst.vertices) + len(inst.edges)
            assert len(image.edges) == 2 * len(inst.edges)

    def test_effective_times_preserved_through_split(self):
        rng = random.Random(8)
        for _ in range(20):
            inst = rand_instance(rng, variant="node_and_edge")
            image, rmap = node_edge_to_node(inst)
            for i in range(len(inst.edges)):
                heavy, zero = rmap.image_edges_of(i)
                assert effective_times(inst, i) == (
                    effective_times(image, heavy) & effective_times(image, zero)
                )

    def test_optimum_preserved(self):
        rng = random.Random(3)
        done = 0
        while done < 60:
            inst = rand_instance(rng, variant="node_and_edge", max_edges=6)
            image, rmap = node_edge_to_node(inst)
            try:
                orig_opt = brute_force(inst)
            except InfeasibleInstanceError:
                with pytest.raises(InfeasibleInstanceError):
                    image_opt(image)
                continue
            img_sol = image_opt(image)
            assert img_sol.cost == orig_opt.cost
            lifted = lift_solution(rmap, img_sol, inst)
            assert is_feasible(inst, lifted)
            assert lifted.cost == orig_opt.cost
            done += 1

    def test_wrong_variant_rejected(self):
        with pytest.raises(InputError):
            node_edge_to_node(rand_instance(random.Random(0), variant="edge"))


class TestNodeToEdge:
    def test_intersection(self):
        inst = make_instance(
            directed=False, variant="node", num_times=3,
            vertices=["u", "v"], edges=[("u", "v", 1)], demands=[],
            node_activity={"u": (1, 2), "v": (2, 3)},
        )
        image, _ = node_to_edge(inst)
        assert image.variant == "edge"
        assert image.edges[0].times == frozenset({2})

    def test_empty_intersection_drops_edge(self):
        inst = make_instance(
            directed=False, variant="node", num_times=2,
            vertices=["u", "v"], edges=[("u", "v", 1)], demands=[],
            node_activity={"u": (1,), "v": (2,)},
        )
        image, rmap = node_to_edge(inst)
        assert len(image.edges) == 0
        assert rmap.dropped_edges == (0,)

    def test_frames_coincide_with_original(self):
        rng = random.Random(13)
        for _ in range(25):
            inst = rand_instance(rng, variant="node")
            image, rmap = node_to_edge(inst)
            back = {imgs[0]: o for o, imgs in rmap.forward_edge_map}
            for t in range(1, inst.num_times + 1):
                image_ids = {back[i] for i in frame(image, t).edge_ids}
                assert image_ids == set(frame(inst, t).edge_ids)

    def test_optimum_preserved(self):
        rng = random.Random(5)
        done = 0
        while done < 60:
            inst = rand_instance(rng, variant="node", max_edges=6)
            image, rmap = node_to_edge(inst)
            try:
                orig_opt = brute_force(inst)
            except InfeasibleInstanceError:
                with pytest.raises(InfeasibleInstanceError):
                    image_opt(image)
                continue
            img_sol = image_opt(image)
            assert img_sol.cost == orig_opt.cost
            lifted = lift_solution(rmap, img_sol, inst)
            assert is_feasible(inst, lifted)
            assert lifted.cost == orig_opt.cost
            done += 1


class TestToSimple:
    def test_single_demand_shape(self):
        inst = make_instance(
            directed=True, variant="node", num_times=1,
            vertices=["s", "d"], edges=[("s", "d", 2)], demands=[("s", "d", 1)],
            node_activity={"s": (1,), "d": (1,)},
        )
        image, rmap = to_simple(inst)
        assert image.demands == (Demand("a", "b", 1),)
        assert image.num_times == 1
        # zero-weight wrapper path a -> x1 -> s and d -> y1 -> b
        zero_edges = [(image.edges[i].u, image.edges[i].v) for i in rmap.aux_edges]
        assert ("a", "x1") in zero_edges and ("x1", "s") in zero_edges
        assert ("d", "y1") in zero_edges and ("y1", "b") in zero_edges

    def test_time_horizon_is_demand_count(self):
        rng = random.Random(7)
        for _ in range(20):
            inst = rand_instance(rng, directed=True, variant="node", max_times=3)
            image, _ = to_simple(inst)
            assert image.num_times == max(1, len(inst.demands))
            ts = sorted(d.t for d in image.demands)
            assert ts == list(range(1, len(inst.demands) + 1))

    def test_vertex_and_edge_counts(self):
        rng = random.Random(19)
        for _ in range(20):
            inst = rand_instance(rng, directed=True, variant="node")
            image, _ = to_simple(inst)
            k = len(inst.demands)
            assert len(image.vertices) == len(inst.vertices) + 2 * k + 2
            plain = sum(1 for d in inst.demands if d.a != d.b)
            selfloops = k - plain
            assert len(image.edges) == len(inst.edges) + 4 * plain + 3 * selfloops

    def test_optimum_preserved(self):
        rng = random.Random(29)
        done = 0
        while done < 60:
            inst = rand_instance(rng, directed=True, variant="node", max_edges=6)
            image, rmap = to_simple(inst)
            try:
                orig_opt = brute_force(inst)
            except InfeasibleInstanceError:
                with pytest.raises(InfeasibleInstanceError):
                    image_opt(image)
                continue
            img_sol = image_opt(image)
            assert img_sol.cost == orig_opt.cost
            lifted = lift_solution(rmap, img_sol, inst)
            assert is_feasible(inst, lifted)
            assert lifted.cost == orig_opt.cost
            done += 1

    def test_undirected_rejected(self):
        inst = rand_instance(random.Random(1), directed=False, variant="node")
        with pytest.raises(InputError):
            to_simple(inst)


class TestLift:
    def test_zero_demand_lift_is_empty(self):
        inst = make_instance(
            directed=True, variant="node", num_times=1,
            vertices=["s", "d"], edges=[("s", "d", 2)], demands=[],
            node_activity={"s": (1,), "d": (1,)},
        )
        image, rmap = to_simple(inst)
        lifted = lift_solution(rmap, image_opt(image), inst)
        assert lifted.edges == () and lifted.cost == 0

    def test_example1_sized_node_and_edge_round_trip(self):
        inst, _ = example1_instance()
        act = {v: frozenset(range(1, inst.num_times + 1)) for v in inst.vertices}
        ne = make_instance(
            directed=True, variant="node_and_edge", num_times=inst.num_times,
            vertices=inst.vertices,
            edges=[(e.u, e.v, e.w, tuple(e.times)) for e in inst.edges],
            demands=[(d.a, d.b, d.t) for d in inst.demands],
            node_activity=act,
        )
        image, rmap = node_edge_to_node(ne)
        img_sol = image_opt(image)
        lifted = lift_solution(rmap, img_sol, ne)
        assert lifted.cost == img_sol.cost == 1
        assert is_feasible(ne, lifted)


class TestReductionMapInvariants:
    @pytest.mark.parametrize("builder,variant", [
        (node_edge_to_node, "node_and_edge"),
        (node_to_edge, "node"),
        (to_simple, "node"),
    ])
    def test_every_image_edge_owned_once_or_auxiliary(self, builder, variant):
        rng = random.Random(71)
        for _ in range(20):
            directed = True if builder is to_simple else None
            inst = rand_instance(rng, directed=directed, variant=variant)
            image, rmap = builder(inst)
            owners = {}
            for o, imgs in rmap.forward_edge_map:
                for i in imgs:
                    assert i not in owners, "image edge owned twice"
                    owners[i] = o
            for i in range(len(image.edges)):
                if i in owners:
                    continue
                assert i in set(rmap.aux_edges), f"orphan image edge {i}"
                assert image.edges[i].w == 0
            # demand map is a bijection onto the image demands
            srcs = [a for a, _ in rmap.demand_map]
            dsts = [b for _, b in rmap.demand_map]
            assert sorted(srcs) == list(range(len(inst.demands)))
            assert sorted(dsts) == list(range(len(image.demands)))

    def test_serialization_round_trip(self):
        from tsn.variants import reduction_map_from_dict, reduction_map_to_dict

        rng = random.Random(72)
        inst = rand_instance(rng, directed=True, variant="node")
        _, rmap = to_simple(inst)
        assert reduction_map_from_dict(reduction_map_to_dict(rmap)) == rmap


class TestNormalize:
    @pytest.mark.parametrize("target", ["edge", "node", "node_and_edge"])
    def test_chain_reaches_target_and_preserves_optimum(self, target):
        rng = random.Random(43)
        done = 0
        while done < 30:
            inst = rand_instance(rng, max_edges=5)
            image, steps, pres = normalize_with_instances(inst, target)
            assert image.variant == target
            try:
                orig_opt = brute_force(inst)
            except InfeasibleInstanceError:
                with pytest.raises(InfeasibleInstanceError):
                    image_opt(image)
                continue
            img_sol = image_opt(image)
            assert img_sol.cost == orig_opt.cost
            lifted = lift_chain(steps, img_sol, pres)
            assert is_feasible(inst, lifted)
            assert lifted.cost == orig_opt.cost
            done += 1

    def test_identity_when_already_target(self):
        inst = rand_instance(random.Random(3), variant="edge")
        image, steps = normalize(inst, "edge")
        assert image is inst and steps == []
