import numpy as np
import pytest

from mentor_curriculum.netcore import (
    BiLSTM,
    Dense,
    Embedding,
    LSTMCell,
    dropout_mask,
    softmax_xent_per_sample,
    substream,
)
from mentor_curriculum.verify import (
    check_bilstm,
    check_dense,
    check_embedding,
    check_lstm_cell,
    check_softmax,
)


def test_substream_reproducible_and_independent():
    a = substream(7, "site.a").random(5)
    b = substream(7, "site.a").random(5)
    c = substream(7, "site.b").random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, substream(8, "site.a").random(5))


def test_substream_rejects_negative_seed():
    with pytest.raises(ValueError):
        substream(-1, "x")


class TestDense:
    def test_zero_input_zero_bias_identity(self):
        layer = Dense(2, 1)
        layer.weights[...] = [[3.0], [-2.0]]
        assert layer.forward([[0.0, 0.0]]) == pytest.approx([[0.0]])

    def test_sigmoid_of_bias(self):
        layer = Dense(1, 1, activation="sigmoid")
        for c in (0.0, 1.5, -2.0):
            layer.bias[...] = [c]
            expected = 1.0 / (1.0 + np.exp(-c))
            assert layer.forward([[1.0]])[0, 0] == pytest.approx(expected)
        layer.bias[...] = [0.0]
        assert layer.forward([[1.0]])[0, 0] == 0.5

    def test_matches_naive_matmul_oracle(self):
        rng = substream(3, "test.dense.oracle")
        layer = Dense(4, 2, rng=rng)
        layer.bias[...] = rng.normal(size=2)
        x = rng.normal(size=(3, 4))
        out = layer.forward(x)
        # independent oracle: naive triple loop
        naive = np.zeros((3, 2))
        for i in range(3):
            for j in range(2):
                acc = layer.bias[j]
                for k in range(4):
                    acc += x[i, k] * layer.weights[k, j]
                naive[i, j] = acc
        assert np.max(np.abs(out - naive)) <= 1e-12

    def test_linear_layer_weight_grad(self):
        rng = substream(4, "test.dense.lin")
        layer = Dense(3, 2, rng=rng)
        x = rng.normal(size=(5, 3))
        layer.forward(x)
        lg = layer.backward(np.ones((5, 2)))
        assert np.allclose(lg.params["weights"], x.T @ np.ones((5, 2)))
        assert np.allclose(lg.params["bias"], np.full(2, 5.0))

    def test_zero_upstream_gives_zero_grads(self):
        rng = substream(5, "test.dense.zero")
        layer = Dense(3, 2, activation="tanh", rng=rng)
        layer.forward(rng.normal(size=(4, 3)))
        lg = layer.backward(np.zeros((4, 2)))
        assert not lg.params["weights"].any()
        assert not lg.params["bias"].any()
        assert not lg.wrt_input.any()

    def test_finite_difference(self):
        assert check_dense(substream(0, "test.dense.fd")) <= 1e-5

    def test_shape_mismatch(self):
        layer = Dense(3, 2)
        with pytest.raises(ValueError):
            layer.forward(np.zeros((2, 4)))

    def test_backward_before_forward(self):
        with pytest.raises(RuntimeError):
            Dense(2, 2).backward(np.zeros((1, 2)))

    def test_unknown_activation(self):
        with pytest.raises(ValueError):
            Dense(2, 2, activation="relu6")


class TestEmbedding:
    def test_zero_table_lookup(self):
        emb = Embedding(4, 3)
        assert not emb.lookup(np.array([1, 2])).any()

    def test_grad_flows_only_to_looked_up_rows(self):
        rng = substream(6, "test.emb")
        emb = Embedding(5, 2, rng=rng)
        emb.lookup(np.array([1, 3, 1]))
        lg = emb.backward(np.ones((3, 2)))
        grad = lg.params["table"]
        assert np.allclose(grad[1], [2.0, 2.0])  # row 1 hit twice
        assert np.allclose(grad[3], [1.0, 1.0])
        assert not grad[[0, 2, 4]].any()

    def test_finite_difference(self):
        assert check_embedding(substream(0, "test.emb.fd")) <= 1e-5

    def test_index_out_of_range(self):
        emb = Embedding(4, 3)
        with pytest.raises(IndexError):
            emb.lookup(np.array([4]))
        with pytest.raises(IndexError):
            emb.lookup(np.array([-1]))


class TestLSTM:
    def test_zero_params_zero_state_gives_zero_hidden(self):
        cell = LSTMCell(3, 4)
        h, c, _ = cell.step(np.zeros((2, 3)), np.zeros((2, 4)), np.zeros((2, 4)))
        assert not h.any()
        assert not c.any()

    def test_hidden_bounded_by_one(self):
        rng = substream(7, "test.lstm.bound")
        cell = LSTMCell(3, 4, rng=rng)
        h = np.zeros((8, 4))
        c = np.zeros((8, 4))
        for _ in range(5):
            h, c, _ = cell.step(rng.normal(size=(8, 3)), h, c)
        assert np.all(np.abs(h) < 1.0)

    def test_finite_difference_all_eight_arrays(self):
        assert check_lstm_cell(substream(0, "test.lstm.fd")) <= 1e-5
        assert len(LSTMCell(2, 3).params()) == 8

    def test_shape_mismatch(self):
        cell = LSTMCell(3, 4)
        with pytest.raises(ValueError):
            cell.step(np.zeros((2, 5)), np.zeros((2, 4)), np.zeros((2, 4)))
        with pytest.raises(ValueError):
            cell.step(np.zeros((2, 3)), np.zeros((2, 5)), np.zeros((2, 5)))


class TestBiLSTM:
    def test_length_one_sequence_concatenates_single_steps(self):
        rng = substream(8, "test.bilstm.t1")
        f = LSTMCell(2, 3, rng=rng)
        b = LSTMCell(2, 3, rng=rng)
        enc = BiLSTM(f, b)
        seq = rng.normal(size=(4, 1, 2))
        out = enc.encode(seq)
        hf, _, _ = f.step(seq[:, 0, :], np.zeros((4, 3)), np.zeros((4, 3)))
        hb, _, _ = b.step(seq[:, 0, :], np.zeros((4, 3)), np.zeros((4, 3)))
        assert np.allclose(out, np.concatenate([hf, hb], axis=1))

    def test_reversal_swaps_halves_with_shared_cells(self):
        rng = substream(9, "test.bilstm.rev")
        cell = LSTMCell(2, 3, rng=rng)
        enc = BiLSTM(cell, cell)
        seq = rng.normal(size=(2, 5, 2))
        out = enc.encode(seq)
        rev = enc.encode(seq[:, ::-1, :])
        assert np.allclose(rev[:, :3], out[:, 3:])
        assert np.allclose(rev[:, 3:], out[:, :3])

    def test_finite_difference_t3(self):
        assert check_bilstm(substream(0, "test.bilstm.fd"), T=3) <= 1e-5

    def test_empty_sequence(self):
        enc = BiLSTM(LSTMCell(2, 3), LSTMCell(2, 3))
        with pytest.raises(ValueError):
            enc.encode(np.zeros((2, 0, 2)))


class TestSoftmaxXent:
    def test_uniform_logits_gives_log_m(self):
        losses, _ = softmax_xent_per_sample(np.zeros((3, 4)), np.array([0, 1, 3]))
        assert losses == pytest.approx(np.full(3, np.log(4.0)))

    def test_confident_correct_prediction(self):
        losses, _ = softmax_xent_per_sample(np.array([[10.0, -10.0]]), np.array([0]))
        assert losses[0] == pytest.approx(np.log1p(np.exp(-20.0)))
        assert losses[0] == pytest.approx(2.061e-9, rel=1e-3)

    def test_gradient_is_softmax_minus_onehot(self):
        rng = substream(10, "test.softmax")
        logits = rng.normal(size=(4, 5))
        labels = rng.integers(0, 5, size=4)
        _, dlogits = softmax_xent_per_sample(logits, labels)
        p = np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
        onehot = np.eye(5)[labels]
        assert np.allclose(dlogits, p - onehot)
        assert check_softmax(substream(0, "test.softmax.fd")) <= 1e-5

    def test_losses_nonnegative_and_finite(self):
        rng = substream(11, "test.softmax.pos")
        for _ in range(20):
            logits = rng.normal(size=(6, 3)) * rng.uniform(0.1, 30)
            labels = rng.integers(0, 3, size=6)
            losses, _ = softmax_xent_per_sample(logits, labels)
            assert np.all(losses >= 0.0)
            assert np.all(np.isfinite(losses))

    def test_label_out_of_range(self):
        with pytest.raises(IndexError):
            softmax_xent_per_sample(np.zeros((2, 3)), np.array([0, 3]))


class TestDropout:
    def test_keep_prob_one_is_identity_mask(self):
        mask = dropout_mask((4, 5), 1.0, substream(0, "test.drop"))
        assert np.array_equal(mask, np.ones((4, 5)))

    def test_deterministic_under_fixed_seed(self):
        a = dropout_mask((100,), 0.5, substream(3, "test.drop"))
        b = dropout_mask((100,), 0.5, substream(3, "test.drop"))
        assert np.array_equal(a, b)

    def test_empirical_keep_fraction(self):
        mask = dropout_mask((100000,), 0.5, substream(1, "test.drop.mc"))
        keep = np.mean(mask > 0)
        assert abs(keep - 0.5) < 0.01
        assert set(np.unique(mask)) == {0.0, 2.0}  # scaled by 1/keep_prob

    def test_invalid_keep_prob(self):
        rng = substream(0, "test.drop.bad")
        with pytest.raises(ValueError):
            dropout_mask((2,), 0.0, rng)
        with pytest.raises(ValueError):
            dropout_mask((2,), 1.5, rng)
