import numpy as np
import pytest

from affectnego.affect import AffectFrame, ArousalValence
from affectnego.gwr import AffineDecoder, GwrError, GwrNetwork, GwrParams, perception_params


def make_net(weights, params=None, dim=2):
    net = GwrNetwork(dim=dim, params=params)
    for w in weights:
        net.weights.append(np.array(w, dtype=float))
        net.habituation.append(1.0)
    return net


def frames(points):
    return [AffectFrame.from_av(i, ArousalValence(a, v)) for i, (a, v) in enumerate(points)]


class TestParams:
    def test_rate_ordering_enforced(self):
        with pytest.raises(GwrError):
            GwrParams(eps_b=0.01, eps_n=0.1)

    def test_thresholds_in_unit_interval(self):
        with pytest.raises(GwrError):
            GwrParams(insertion_threshold=1.0)

    def test_perception_row(self):
        p = perception_params()
        assert (p.habituation_threshold, p.insertion_threshold, p.max_edge_age) == (0.2, 0.5, 50)


class TestFindBmus:
    def test_nearest_by_inspection(self):
        net = make_net([(0, 0), (1, 1)])
        [(idx, dist)] = net.find_bmus((0.1, 0), 1)
        assert idx == 0
        assert dist == pytest.approx(0.01)

    def test_tie_break_by_lowest_index(self):
        net = make_net([(0, 0), (1, 1)])
        hits = net.find_bmus((0.5, 0.5), 2)
        assert [i for i, _ in hits] == [0, 1]
        assert hits[0][1] == pytest.approx(0.5)

    def test_matches_exhaustive_sort(self):
        rng = np.random.default_rng(3)
        net = make_net(rng.uniform(-1, 1, (10, 2)))
        x = rng.uniform(-1, 1, 2)
        got = net.find_bmus(x, 2)
        dists = [float(np.sum((w - x) ** 2)) for w in net.weights]
        want = sorted(range(10), key=lambda i: (dists[i], i))[:2]
        assert [i for i, _ in got] == want

    def test_too_many_requested(self):
        net = make_net([(0, 0), (1, 1)])
        with pytest.raises(GwrError):
            net.find_bmus((0, 0), 3)


class TestTrainStep:
    def test_winner_moves_by_learning_rule(self):
        params = GwrParams(eps_b=0.3, insertion_threshold=0.5, habituation_threshold=0.2)
        net = make_net([(0.0, 0.0), (3.0, 3.0)], params)
        report = net.train_step((1.0, 0.0))
        # eta=1 keeps the gate closed (1 >= h_T), so the winner adapts
        assert not report.inserted
        assert net.weights[0] == pytest.approx([0.3, 0.0])

    def test_habituation_delta_at_eta_one(self):
        params = GwrParams(tau_b=0.3, kappa=1.05)
        net = make_net([(0.0, 0.0), (3.0, 3.0)], params)
        net.train_step((0.0, 0.0))
        # first term of the decay rule vanishes at eta=1: delta = -tau
        assert net.habituation[0] == pytest.approx(0.7)

    def test_exact_match_no_insertion_no_move(self):
        net = make_net([(0.5, 0.5), (2.0, 2.0)])
        net.habituation[0] = 0.5  # above the 0.2 threshold
        report = net.train_step((0.5, 0.5))
        assert not report.inserted
        assert net.weights[0] == pytest.approx([0.5, 0.5])

    def test_insertion_midpoint_and_rewiring(self):
        params = GwrParams(insertion_threshold=0.5, habituation_threshold=0.5)
        net = make_net([(0.0, 0.0), (0.1, 0.0)], params)
        net.habituation[1] = 0.3  # the winner for x=(2,0), habituated below threshold
        report = net.train_step((2.0, 0.0))  # activation exp(-1.9) < 0.5
        assert report.inserted and report.bmu == 1
        assert net.weights[2] == pytest.approx([1.05, 0.0])
        assert (0, 1) not in net.edges
        assert (0, 2) in net.edges and (1, 2) in net.edges


class TestInvariants:
    def stream(self, n=400, seed=0):
        rng = np.random.default_rng(seed)
        return rng.uniform(-1, 1, (n, 2))

    def test_growth_gating(self):
        net = GwrNetwork(2)
        for x in self.stream():
            r = net.train_step(x)
            if r.bootstrap:
                continue
            should = (r.activation < net.params.insertion_threshold
                      and r.bmu_habituation < net.params.habituation_threshold)
            assert r.inserted == should

    def test_contraction_when_not_inserting(self):
        net = GwrNetwork(2)
        for x in self.stream(seed=1):
            if net.neuron_count < 2:
                net.train_step(x)
                continue
            (_, d_before), _ = net.find_bmus(x, 2)
            r = net.train_step(x)
            if not r.inserted and d_before > 0:
                # the winner moved toward x and survives the step (fresh edge)
                assert net.find_bmus(x, 1)[0][1] < d_before

    def test_habituation_never_increases(self):
        # large max age: no pruning, so list indices are stable identities
        net = GwrNetwork(2, GwrParams(max_edge_age=10_000))
        rng = np.random.default_rng(2)
        prev: list[float] = []
        for x in rng.uniform(-1, 1, (300, 2)):
            net.train_step(x)
            for i, eta in enumerate(prev):
                assert net.habituation[i] <= eta
            assert all(0 < eta <= 1.0 for eta in net.habituation)
            prev = list(net.habituation)

    def test_edge_ages_bounded(self):
        net = GwrNetwork(2, GwrParams(max_edge_age=5))
        for x in self.stream(seed=3):
            net.train_step(x)
            assert all(age <= 5 for age in net.edges.values())

    def test_no_isolated_neurons_after_step(self):
        net = GwrNetwork(2, GwrParams(max_edge_age=3))
        for x in self.stream(seed=4):
            net.train_step(x)
            connected = {i for key in net.edges for i in key}
            if net.neuron_count > 1 and net.edges:
                assert connected == set(range(net.neuron_count))

    def test_bounded_drift(self):
        net = GwrNetwork(2)
        xs = self.stream(seed=5)
        lo, hi = xs.min(axis=0), xs.max(axis=0)
        for x in xs:
            net.train_step(x)
        for w in net.weights:
            assert np.all(w >= lo - 1e-12) and np.all(w <= hi + 1e-12)


class TestFit:
    def test_three_well_separated_clusters(self):
        rng = np.random.default_rng(7)
        centers = np.array([(-0.8, -0.8), (0.0, 0.8), (0.8, -0.4)])
        pts, owners = [], []
        for ci, c in enumerate(centers):
            pts.extend(np.clip(c + rng.normal(0, 0.05, (30, 2)), -1, 1))
            owners.extend([ci] * 30)
        radius = max(np.linalg.norm(p - centers[o]) for p, o in zip(pts, owners))
        order = rng.permutation(len(pts))
        stream = frames([pts[i] for i in order])
        # short edge lifetime prunes stale cross-cluster links quickly
        net = GwrNetwork(2, GwrParams(max_edge_age=5))
        _, trace = net.fit(stream, epochs=50)
        assert 3 <= net.neuron_count <= 30
        assert trace[-1] < radius

    def test_repeated_point_never_grows(self):
        net = GwrNetwork(2)
        _, _ = net.fit(frames([(0.3, 0.3)] * 50), epochs=2)
        assert net.neuron_count == 2

    def test_growth_stalls_on_stationary_stream(self):
        rng = np.random.default_rng(11)
        pts = np.clip(rng.normal(0, 0.3, (80, 2)), -1, 1)
        net = GwrNetwork(2, perception_params())
        counts = []
        for _ in range(50):
            net.fit(frames(pts), epochs=1)
            counts.append(net.neuron_count)
        assert counts[-1] == counts[-10]  # no growth over the last ten epochs

    def test_empty_stream_rejected(self):
        with pytest.raises(GwrError):
            GwrNetwork(2).fit([], epochs=1)


class TestDecode:
    def test_identity_decoder(self):
        net = make_net([(0.3, -0.2), (1, 1)])
        assert net.decode(0) == ArousalValence(0.3, -0.2)

    def test_zero_affine_map(self):
        net = make_net([(0.3, -0.2), (1, 1)])
        dec = AffineDecoder(matrix=((0, 0), (0, 0)))
        assert net.decode(0, dec) == ArousalValence(0, 0)

    def test_pair_averaging_decoder(self):
        net = make_net([(1, 0, 0, 1), (0, 0, 0, 0)], dim=4)
        dec = AffineDecoder(matrix=((0.5, 0.5, 0, 0), (0, 0, 0.5, 0.5)))
        assert net.decode(0, dec) == ArousalValence(0.5, 0.5)

    def test_bad_index(self):
        net = make_net([(0, 0), (1, 1)])
        with pytest.raises(GwrError):
            net.decode(5)


class TestSnapshot:
    def test_bit_exact_round_trip(self):
        net = GwrNetwork(2)
        rng = np.random.default_rng(13)
        for x in rng.uniform(-1, 1, (200, 2)):
            net.train_step(x)
        text = net.dumps()
        clone = GwrNetwork.loads(text)
        assert clone.dumps() == text
        for w1, w2 in zip(net.weights, clone.weights):
            assert np.array_equal(w1, w2)
        assert net.habituation == clone.habituation
        assert net.edges == clone.edges
