import numpy as np
import pytest

from affectnego.gamma import (
    GammaGwrNetwork,
    GammaGwrParams,
    default_alphas,
    memory_params,
    mood_params,
    social_core_params,
    time_core_params,
)
from affectnego.gwr import GwrError, GwrNetwork, GwrParams


def seeded_net(K=2, dim=2, **kw):
    return GammaGwrNetwork(dim, GammaGwrParams(K=K, **kw))


def plant_neuron(net, w, contexts=None, eta=1.0):
    K = net.params.K
    net.weights.append(np.array(w, dtype=float))
    ctx = np.zeros((K, net.dim)) if contexts is None else np.array(contexts, dtype=float)
    net.contexts.append(ctx)
    net.habituation.append(eta)
    return net.neuron_count - 1


class TestParams:
    def test_default_alphas_normalized(self):
        for K in range(0, 12):
            aw, ak = default_alphas(K)
            assert abs(aw + sum(ak) - 1.0) < 1e-9
            assert all(ak[i] >= ak[i + 1] for i in range(len(ak) - 1))

    def test_table_rows(self):
        assert (memory_params().K, memory_params().insertion_threshold) == (10, 0.8)
        assert (time_core_params().K, time_core_params().max_edge_age) == (5, 5)
        assert social_core_params().habituation_threshold == 0.5
        assert mood_params().K == 10

    def test_bad_normalization_rejected(self):
        with pytest.raises(GwrError):
            GammaGwrParams(K=1, alpha_w=0.5, alpha_k=(0.6,))

    def test_increasing_context_weights_rejected(self):
        with pytest.raises(GwrError):
            GammaGwrParams(K=2, alpha_w=0.5, alpha_k=(0.2, 0.3))


class TestRecurrentDistance:
    def test_k0_reduces_to_squared_distance(self):
        net = seeded_net(K=0)
        plant_neuron(net, (0, 0))
        assert net.recurrent_distance((1, 0), 0) == pytest.approx(1.0)

    def test_identity_case(self):
        net = seeded_net(K=1, alpha_w=0.5, alpha_k=(0.5,))
        i = plant_neuron(net, (0.4, 0.4), contexts=[(0.2, 0.2)])
        net.global_context = np.array([[0.2, 0.2]])
        assert net.recurrent_distance((0.4, 0.4), i) == pytest.approx(0.0)

    def test_hand_summation(self):
        net = seeded_net(K=2, alpha_w=0.5, alpha_k=(0.3, 0.2))
        i = plant_neuron(net, (0.1, 0.0), contexts=[(0.0, 0.2), (0.3, 0.0)])
        net.global_context = np.array([[0.1, 0.1], [0.0, 0.1]])
        x = (0.5, 0.5)
        want = 0.5 * ((0.4) ** 2 + 0.5 ** 2) \
            + 0.3 * ((0.1) ** 2 + (0.1 - 0.2) ** 2) \
            + 0.2 * ((0.3) ** 2 + (0.1) ** 2)
        assert net.recurrent_distance(x, i) == pytest.approx(want)


class TestGlobalContext:
    def test_equal_inputs_fixed_point(self):
        net = seeded_net(K=1, beta=0.7)
        i = plant_neuron(net, (0.5, 0.5), contexts=[(0.5, 0.5)])
        net.prev_bmu = i
        net.update_global_context()
        assert net.global_context[0] == pytest.approx([0.5, 0.5])

    def test_beta_one_degenerate(self):
        # beta must be < 1 by contract; 1 - 1e-12 is numerically the same case
        net = seeded_net(K=3, beta=1.0 - 1e-12)
        i = plant_neuron(net, (0.3, -0.1), contexts=[(9, 9), (9, 9), (9, 9)])
        net.prev_bmu = i
        net.update_global_context()
        for k in range(3):
            assert net.global_context[k] == pytest.approx([0.3, -0.1], abs=1e-9)

    def test_hand_chain(self):
        net = seeded_net(K=2, beta=0.7)
        i = plant_neuron(net, (1.0, 0.0), contexts=[(0.0, 1.0), (0.0, 0.0)])
        net.prev_bmu = i
        net.update_global_context()
        # C1 = 0.7*w + 0.3*c^0 with c^0 = w
        assert net.global_context[0] == pytest.approx([1.0, 0.0])
        # C2 = 0.7*w + 0.3*c^1
        assert net.global_context[1] == pytest.approx([0.7, 0.3])

    def test_zero_before_first_step(self):
        net = seeded_net(K=4)
        assert np.all(net.global_context == 0.0)
        assert net.prev_bmu is None
        net.update_global_context()  # no-op without a previous winner
        assert np.all(net.global_context == 0.0)


class TestTrainStep:
    def test_context_update_rule(self):
        params = GammaGwrParams(K=1, eps_b=0.2, insertion_threshold=0.5,
                                habituation_threshold=0.2)
        net = GammaGwrNetwork(2, params)
        plant_neuron(net, (0.0, 0.0), contexts=[(0.0, 0.0)])
        plant_neuron(net, (5.0, 5.0), contexts=[(5.0, 5.0)])
        net.global_context = np.array([[1.0, 0.0]])
        net.train_step((0.0, 0.0))  # winner 0, eta=1: adapts, no insertion
        # delta c = eps*eta*(C - c) = 0.2*(1,0); computed before prev_bmu chain
        assert net.contexts[0][0] == pytest.approx([0.2, 0.0])

    def test_habituation_hand_value(self):
        params = GammaGwrParams(K=0, tau_b=0.3, kappa=1.05,
                                insertion_threshold=0.5, habituation_threshold=0.2)
        net = GammaGwrNetwork(2, params)
        plant_neuron(net, (0.0, 0.0), eta=0.7)
        plant_neuron(net, (5.0, 5.0))
        net.train_step((0.0, 0.0))
        # delta = 0.3*1.05*0.3 - 0.3 = -0.2055
        assert net.habituation[0] == pytest.approx(0.7 - 0.2055)

    def test_inserted_neuron_midpoints(self):
        params = GammaGwrParams(K=1, insertion_threshold=0.9, habituation_threshold=0.5)
        net = GammaGwrNetwork(2, params)
        plant_neuron(net, (0.0, 0.0), contexts=[(0.2, 0.0)], eta=0.3)
        plant_neuron(net, (0.4, 0.0), contexts=[(0.0, 0.0)], eta=1.0)
        net.global_context = np.array([[0.6, 0.0]])
        report = net.train_step((-1.0, 0.0))
        assert report.inserted and report.bmu == 0
        assert net.weights[2] == pytest.approx([-0.5, 0.0])
        assert net.contexts[2][0] == pytest.approx([0.4, 0.0])


class TestK0Equivalence:
    def test_lockstep_with_plain_gwr(self):
        gwr = GwrNetwork(2, GwrParams())
        gamma = GammaGwrNetwork(2, GammaGwrParams(
            K=0, insertion_threshold=0.5, habituation_threshold=0.2, max_edge_age=50))
        rng = np.random.default_rng(17)
        for x in rng.uniform(-1, 1, (500, 2)):
            r1, r2 = gwr.train_step(x), gamma.train_step(x)
            assert (r1.bmu, r1.inserted) == (r2.bmu, r2.inserted)
        assert gwr.neuron_count == gamma.neuron_count
        for w1, w2 in zip(gwr.weights, gamma.weights):
            assert np.allclose(w1, w2, atol=1e-12)
        assert gwr.habituation == pytest.approx(gamma.habituation)
        assert gwr.edges == gamma.edges


class TestDecodedViews:
    def test_bmus_decoded_shortfall_flag(self):
        net = seeded_net(K=0)
        for w in [(0.1, 0.1), (0.2, 0.2), (0.3, 0.3)]:
            plant_neuron(net, w)
        out = net.bmus_decoded((0.0, 0.0), 5)
        assert out.shortfall and len(out.points) == 3

    def test_bmus_decoded_nearest(self):
        net = seeded_net(K=0)
        rng = np.random.default_rng(5)
        pts = rng.uniform(-1, 1, (8, 2))
        for w in pts:
            plant_neuron(net, w)
        x = rng.uniform(-1, 1, 2)
        got = [p.as_tuple() for p in net.bmus_decoded(x, 2).points]
        dists = [float(np.sum((w - x) ** 2)) for w in pts]
        want_idx = sorted(range(8), key=lambda i: (dists[i], i))[:2]
        assert got == [tuple(pts[i]) for i in want_idx]

    def test_mean_decoded_matches_mean_av(self):
        net = seeded_net(K=0)
        rng = np.random.default_rng(6)
        pts = rng.uniform(-1, 1, (5, 2))
        for w in pts:
            plant_neuron(net, w)
        m = net.mean_decoded()
        assert m.arousal == pytest.approx(float(np.mean(pts[:, 0])))
        assert m.valence == pytest.approx(float(np.mean(pts[:, 1])))

    def test_empty_network_query_rejected(self):
        with pytest.raises(GwrError):
            seeded_net(K=0).bmus_decoded((0, 0), 1)


class TestInvariants:
    def test_context_boundedness(self):
        net = GammaGwrNetwork(2, GammaGwrParams(K=3))
        rng = np.random.default_rng(21)
        for x in rng.uniform(-1, 1, (400, 2)):
            net.train_step(x)
            assert np.all(net.global_context >= -1.0) and np.all(net.global_context <= 1.0)
            for ctx in net.contexts:
                assert np.all(ctx >= -1.0) and np.all(ctx <= 1.0)

    def test_prev_bmu_always_live(self):
        net = GammaGwrNetwork(2, GammaGwrParams(K=2, max_edge_age=2))
        rng = np.random.default_rng(22)
        for x in rng.uniform(-1, 1, (400, 2)):
            net.train_step(x)
            assert net.prev_bmu is None or 0 <= net.prev_bmu < net.neuron_count

    def test_determinism(self):
        def run():
            net = GammaGwrNetwork(2, GammaGwrParams(K=5))
            rng = np.random.default_rng(23)
            for x in rng.uniform(-1, 1, (300, 2)):
                net.train_step(x)
            return net.dumps()
        assert run() == run()


class TestSnapshot:
    def test_bit_exact_round_trip(self):
        net = GammaGwrNetwork(2, memory_params())
        rng = np.random.default_rng(29)
        for x in rng.uniform(-1, 1, (150, 2)):
            net.train_step(x)
        text = net.dumps()
        clone = GammaGwrNetwork.loads(text)
        assert clone.dumps() == text
        assert clone.prev_bmu == net.prev_bmu
        assert np.array_equal(clone.global_context, net.global_context)
        for c1, c2 in zip(net.contexts, clone.contexts):
            assert np.array_equal(c1, c2)
