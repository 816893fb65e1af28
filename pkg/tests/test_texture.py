"""Feature extractor, Gram signatures, and weights-container tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stylesym.data.images import ImageTensor
from stylesym.errors import ContainerError, DataError
from stylesym.texture import (
    ConvExtractor,
    ConvLayer,
    GramSignature,
    MaxPoolLayer,
    ReluLayer,
    artist_average_gram,
    conv2d,
    forward_features,
    gram,
    gram_distance,
    load_extractor,
    random_extractor,
    save_extractor,
    signature,
)


def brute_conv2d(x, w, b, stride, padding):
    """Quadruple-loop reference convolution."""
    c, h, wd = x.shape
    o, _, kh, kw = w.shape
    xp = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (wd + 2 * padding - kw) // stride + 1
    out = np.zeros((o, oh, ow))
    for k in range(o):
        for i in range(oh):
            for j in range(ow):
                patch = xp[:, i * stride : i * stride + kh, j * stride : j * stride + kw]
                out[k, i, j] = np.sum(patch * w[k]) + b[k]
    return out


class TestConv2d:
    def test_averaging_kernel_constant_interior(self):
        # 3x3 averaging kernel over a constant image: interior stays at the
        # constant, zero padding pulls the border down by the lost mass.
        x = np.full((1, 5, 5), 0.6)
        w = np.full((1, 1, 3, 3), 1.0 / 9.0)
        out = conv2d(x, w, np.zeros(1), stride=1, padding=1)
        assert out.shape == (1, 5, 5)
        assert np.allclose(out[0, 1:-1, 1:-1], 0.6, atol=1e-12)
        assert np.allclose(out[0, 0, 0], 0.6 * 4 / 9, atol=1e-12)
        assert np.allclose(out[0, 0, 2], 0.6 * 6 / 9, atol=1e-12)

    def test_matches_brute_force_random(self):
        rng = np.random.default_rng(11)
        for stride, padding, kh in [(1, 1, 3), (1, 0, 3), (2, 1, 3), (1, 0, 1)]:
            x = rng.standard_normal((2, 5, 5))
            w = rng.standard_normal((3, 2, kh, kh))
            b = rng.standard_normal(3)
            got = conv2d(x, w, b, stride=stride, padding=padding)
            want = brute_conv2d(x, w, b, stride=stride, padding=padding)
            assert got.shape == want.shape
            assert np.allclose(got, want, atol=1e-12)

    def test_channel_mismatch_raises(self):
        with pytest.raises(DataError, match="channels"):
            conv2d(np.zeros((2, 4, 4)), np.zeros((1, 3, 3, 3)), np.zeros(1), 1, 1)


class TestForward:
    def test_maxpool_crops_odd_edge(self):
        ex = ConvExtractor(
            layers=[
                ConvLayer("c", np.eye(1).reshape(1, 1, 1, 1), np.zeros(1), padding=0),
                MaxPoolLayer("p"),
            ]
        )
        x = np.arange(25, dtype=np.float64).reshape(1, 5, 5) / 25.0
        img = ImageTensor(pixels=x)
        out = forward_features(ex, img, ["p"])["p"]
        assert out.shape == (1, 2, 2)
        # max over each 2x2 block of the cropped 4x4 corner
        assert np.allclose(out[0], np.array([[6, 8], [16, 18]]) / 25.0)

    def test_relu_clamps(self):
        w = np.array([[[[1.0]]], [[[-1.0]]]])  # identity and negation channels
        ex = ConvExtractor(
            layers=[ConvLayer("c", w, np.array([-0.5, 0.0]), padding=0), ReluLayer("r")]
        )
        img = ImageTensor(pixels=np.full((1, 3, 3), 0.25))
        out = forward_features(ex, img, ["r"])["r"]
        assert np.all(out[0] == 0.0)   # 0.25 - 0.5 clamped
        assert np.all(out[1] == 0.0)   # -0.25 clamped

    def test_unknown_selection_name(self):
        ex = random_extractor(seed=0)
        img = ImageTensor(pixels=np.zeros((3, 16, 16)))
        with pytest.raises(DataError, match="nope"):
            forward_features(ex, img, ["nope"])

    def test_channel_count_checked(self):
        ex = random_extractor(seed=0)
        img = ImageTensor(pixels=np.zeros((1, 16, 16)))
        with pytest.raises(DataError, match="3 input channels"):
            forward_features(ex, img, ["conv1"])

    def test_fallback_shapes_and_determinism(self):
        ex1 = random_extractor(seed=7)
        ex2 = random_extractor(seed=7)
        img = ImageTensor(pixels=np.random.default_rng(3).random((3, 32, 32)))
        maps1 = forward_features(ex1, img, ["conv1", "conv2", "conv3", "conv4"])
        maps2 = forward_features(ex2, img, ["conv1", "conv2", "conv3", "conv4"])
        assert maps1["conv1"].shape == (8, 32, 32)
        assert maps1["conv2"].shape == (16, 16, 16)
        assert maps1["conv3"].shape == (32, 8, 8)
        assert maps1["conv4"].shape == (64, 4, 4)
        for name in maps1:
            np.testing.assert_array_equal(maps1[name], maps2[name])
        ex3 = random_extractor(seed=8)
        assert not np.array_equal(ex1.layers[0].weights, ex3.layers[0].weights)

    def test_capture_is_pre_relu(self):
        # conv output may be negative; the captured conv map must keep signs.
        ex = random_extractor(seed=7)
        img = ImageTensor(pixels=np.random.default_rng(5).random((3, 16, 16)))
        conv_map = forward_features(ex, img, ["conv1"])["conv1"]
        relu_map = forward_features(ex, img, ["relu1"])["relu1"]
        assert np.any(conv_map < 0)
        np.testing.assert_array_equal(relu_map, np.maximum(conv_map, 0.0))


class TestGram:
    def test_all_ones_2x2_single_channel(self):
        f = np.ones((1, 2, 2))
        g = gram(f)
        assert g.shape == (1, 1)
        assert g[0, 0] == pytest.approx(1.0)          # 4 / (1*2*2)
        assert g[0, 0] * (1 * 2 * 2) == pytest.approx(4.0)  # pre-normalization

    def test_rank_one_cauchy_schwarz_equality(self):
        rng = np.random.default_rng(2)
        base = rng.standard_normal((4, 4))
        f = np.stack([base, 2.0 * base])
        g = gram(f)
        assert g[0, 1] ** 2 == pytest.approx(g[0, 0] * g[1, 1], rel=1e-12)
        assert g[1, 1] == pytest.approx(4.0 * g[0, 0], rel=1e-12)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_positive_semidefinite(self, seed):
        rng = np.random.default_rng(seed)
        f = rng.standard_normal((5, 6, 7))
        eigs = np.linalg.eigvalsh(gram(f))
        assert eigs.min() >= -1e-6

    def test_spatial_permutation_invariant_for_1x1(self):
        rng = np.random.default_rng(9)
        w = rng.standard_normal((4, 3, 1, 1))
        ex = ConvExtractor(layers=[ConvLayer("c", w, np.zeros(4), padding=0)])
        x = rng.random((3, 6, 6))
        perm = rng.permutation(36)
        xp = x.reshape(3, 36)[:, perm].reshape(3, 6, 6)
        g1 = signature(ex, ImageTensor(pixels=x), ["c"]).layers["c"]
        g2 = signature(ex, ImageTensor(pixels=xp), ["c"]).layers["c"]
        assert np.max(np.abs(g1 - g2)) < 1e-12

    def test_gram_rejects_bad_rank(self):
        with pytest.raises(DataError, match="feature map"):
            gram(np.zeros((3, 3)))


class TestSignatures:
    def test_average_is_elementwise_mean(self):
        s1 = GramSignature(layers={"a": np.array([[0.0]])}, selection=("a",))
        s2 = GramSignature(layers={"a": np.array([[2.0]])}, selection=("a",))
        avg = artist_average_gram([s1, s2])
        assert avg.layers["a"][0, 0] == pytest.approx(1.0)

    def test_average_empty_raises(self):
        with pytest.raises(DataError, match="no signatures"):
            artist_average_gram([])

    def test_distance_zero_symmetric_hand_value(self):
        s1 = GramSignature(layers={"a": np.array([[1.0]])}, selection=("a",))
        s2 = GramSignature(layers={"a": np.array([[3.0]])}, selection=("a",))
        assert gram_distance(s1, s1) == 0.0
        assert gram_distance(s1, s2) == pytest.approx(4.0)
        assert gram_distance(s1, s2) == gram_distance(s2, s1)

    def test_distance_sums_layers(self):
        layers1 = {"a": np.array([[0.0]]), "b": np.zeros((2, 2))}
        layers2 = {"a": np.array([[1.0]]), "b": np.full((2, 2), 0.5)}
        s1 = GramSignature(layers=layers1, selection=("a", "b"))
        s2 = GramSignature(layers=layers2, selection=("a", "b"))
        assert gram_distance(s1, s2) == pytest.approx(1.0 + 4 * 0.25)

    def test_selection_mismatch_raises(self):
        s1 = GramSignature(layers={"a": np.zeros((1, 1))}, selection=("a",))
        s2 = GramSignature(layers={"b": np.zeros((1, 1))}, selection=("b",))
        with pytest.raises(DataError, match="selection"):
            gram_distance(s1, s2)


class TestContainer:
    def _check_roundtrip(self, tmp_path, single_file):
        ex = random_extractor(seed=7)
        target = tmp_path / ("w.bin" if single_file else "wdir")
        save_extractor(ex, target, single_file=single_file)
        loaded = load_extractor(target)
        assert loaded.layer_names() == ex.layer_names()
        img = ImageTensor(pixels=np.random.default_rng(1).random((3, 16, 16)))
        # float32 casting is lossy once, then stable
        a = forward_features(loaded, img, ["conv4"])["conv4"]
        b = forward_features(ex, img, ["conv4"])["conv4"]
        assert np.allclose(a, b, atol=1e-4)
        target2 = tmp_path / ("w2.bin" if single_file else "wdir2")
        save_extractor(loaded, target2, single_file=single_file)
        reloaded = load_extractor(target2)
        for lay1, lay2 in zip(loaded.layers, reloaded.layers):
            if isinstance(lay1, ConvLayer):
                np.testing.assert_array_equal(lay1.weights, lay2.weights)
                np.testing.assert_array_equal(lay1.bias, lay2.bias)

    def test_directory_roundtrip(self, tmp_path):
        self._check_roundtrip(tmp_path, single_file=False)

    def test_single_file_roundtrip(self, tmp_path):
        self._check_roundtrip(tmp_path, single_file=True)

    def test_save_is_deterministic(self, tmp_path):
        ex = random_extractor(seed=7)
        save_extractor(ex, tmp_path / "a.bin", single_file=True)
        save_extractor(ex, tmp_path / "b.bin", single_file=True)
        assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()

    def test_blob_corruption_fails_crc(self, tmp_path):
        ex = random_extractor(seed=7)
        save_extractor(ex, tmp_path / "wdir")
        blob_path = tmp_path / "wdir" / "weights.bin"
        blob = bytearray(blob_path.read_bytes())
        blob[100] ^= 0xFF
        blob_path.write_bytes(bytes(blob))
        with pytest.raises(ContainerError, match="CRC"):
            load_extractor(tmp_path / "wdir")

    def test_bad_byte_count_names_layer(self, tmp_path):
        import json

        ex = random_extractor(seed=7)
        save_extractor(ex, tmp_path / "wdir")
        header_path = tmp_path / "wdir" / "header.json"
        header = json.loads(header_path.read_bytes())
        for entry in header["layers"]:
            if entry["name"] == "conv2":
                entry["byte_len"] -= 4
        header_path.write_text(json.dumps(header))
        with pytest.raises(ContainerError, match="conv2"):
            load_extractor(tmp_path / "wdir")

    def test_sha_mismatch_names_layer(self, tmp_path):
        import json

        ex = random_extractor(seed=7)
        save_extractor(ex, tmp_path / "wdir")
        header_path = tmp_path / "wdir" / "header.json"
        header = json.loads(header_path.read_bytes())
        for entry in header["layers"]:
            if entry["name"] == "conv3":
                entry["sha256"] = "0" * 64
        header_path.write_text(json.dumps(header))
        with pytest.raises(ContainerError, match="conv3"):
            load_extractor(tmp_path / "wdir")

    def test_missing_container(self, tmp_path):
        with pytest.raises(ContainerError, match="not found"):
            load_extractor(tmp_path / "absent")

    def test_truncated_single_file(self, tmp_path):
        ex = random_extractor(seed=7)
        save_extractor(ex, tmp_path / "w.bin", single_file=True)
        data = (tmp_path / "w.bin").read_bytes()
        (tmp_path / "t.bin").write_bytes(data[:4])
        with pytest.raises(ContainerError, match="truncated"):
            load_extractor(tmp_path / "t.bin")
        # header intact but blob clipped: CRC must catch it
        (tmp_path / "t2.bin").write_bytes(data[:-50])
        with pytest.raises(ContainerError, match="CRC"):
            load_extractor(tmp_path / "t2.bin")
