import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpfl_pareto import datasets
from dpfl_pareto.datasets import (
    IdxFormatError,
    IdxLengthError,
    PartitionError,
    Samples,
    load_idx_images,
    load_idx_labels,
    partition_iid,
    synth_dataset,
    write_idx_images,
    write_idx_labels,
)


def make_image_file(path, pixels, n, rows, cols):
    path.write_bytes(struct.pack(">4I", 0x803, n, rows, cols) + bytes(pixels))


class TestIdxImages:
    def test_crafted_two_images(self, tmp_path):
        # header (n=2, 2x2) + bytes [0,255,0,255,255,0,255,0]
        f = tmp_path / "imgs"
        make_image_file(f, [0, 255, 0, 255, 255, 0, 255, 0], 2, 2, 2)
        mat = load_idx_images(f)
        assert mat.shape == (2, 4)
        np.testing.assert_array_equal(mat[0], [0.0, 1.0, 0.0, 1.0])
        np.testing.assert_array_equal(mat[1], [1.0, 0.0, 1.0, 0.0])

    def test_label_magic_in_image_slot(self, tmp_path):
        f = tmp_path / "imgs"
        f.write_bytes(struct.pack(">4I", 0x801, 1, 1, 1) + b"\x00")
        with pytest.raises(IdxFormatError):
            load_idx_images(f)

    def test_truncated_payload(self, tmp_path):
        f = tmp_path / "imgs"
        f.write_bytes(struct.pack(">4I", 0x803, 2, 2, 2) + bytes(5))
        with pytest.raises(IdxLengthError):
            load_idx_images(f)

    def test_empty_file(self, tmp_path):
        f = tmp_path / "imgs"
        f.write_bytes(b"")
        with pytest.raises(IdxFormatError):
            load_idx_images(f)

    @given(st.integers(0, 2**32 - 1))
    def test_wrong_magic_rejected(self, magic):
        if magic == 0x803:
            return
        import tempfile, os

        fd, name = tempfile.mkstemp()
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(struct.pack(">4I", magic, 0, 0, 0))
            with pytest.raises(IdxFormatError):
                load_idx_images(name)
        finally:
            os.unlink(name)


class TestIdxLabels:
    def test_crafted_labels(self, tmp_path):
        f = tmp_path / "labels"
        f.write_bytes(struct.pack(">2I", 0x801, 3) + bytes([7, 0, 9]))
        np.testing.assert_array_equal(load_idx_labels(f), [7, 0, 9])

    def test_empty_file_is_format_error(self, tmp_path):
        f = tmp_path / "labels"
        f.write_bytes(b"")
        with pytest.raises(IdxFormatError):
            load_idx_labels(f)

    def test_truncation(self, tmp_path):
        f = tmp_path / "labels"
        f.write_bytes(struct.pack(">2I", 0x801, 10) + bytes([1, 2]))
        with pytest.raises(IdxLengthError):
            load_idx_labels(f)


class TestIdxRoundTrip:
    @given(
        n=st.integers(1, 8),
        rows=st.integers(1, 5),
        cols=st.integers(1, 5),
        seed=st.integers(0, 2**31),
    )
    def test_write_then_load_reproduces_bytes(self, tmp_path_factory, n, rows, cols, seed):
        rng = np.random.default_rng(seed)
        pixels = rng.integers(0, 256, size=(n, rows * cols), dtype=np.uint8)
        path = tmp_path_factory.mktemp("idx") / "img"
        write_idx_images(path, pixels, rows, cols)
        loaded = load_idx_images(path)
        np.testing.assert_array_equal(loaded, pixels.astype(np.float64) / 255.0)

    def test_label_round_trip(self, tmp_path):
        labels = np.array([0, 5, 255, 9])
        write_idx_labels(tmp_path / "lab", labels)
        np.testing.assert_array_equal(load_idx_labels(tmp_path / "lab"), labels)

    @pytest.mark.skipif(True, reason="real MNIST files not bundled in this repo")
    def test_real_mnist_counts(self):
        assert load_idx_images("train-images-idx3-ubyte").shape == (60000, 784)
        assert len(load_idx_labels("t10k-labels-idx1-ubyte")) == 10000


class TestSynthDataset:
    def test_deterministic_in_seed(self):
        a = synth_dataset(2, 2, 100, 20, seed=1)
        b = synth_dataset(2, 2, 100, 20, seed=1)
        np.testing.assert_array_equal(a.train.features, b.train.features)
        np.testing.assert_array_equal(a.test_set.features, b.test_set.features)
        np.testing.assert_array_equal(a.train.labels, b.train.labels)

    def test_seed_changes_features(self):
        a = synth_dataset(2, 2, 100, 20, seed=1)
        b = synth_dataset(2, 2, 100, 20, seed=2)
        assert not np.array_equal(a.train.features, b.train.features)

    def test_balanced_classes(self):
        bundle = synth_dataset(3, 4, 300, 30, seed=5)
        counts = np.bincount(bundle.train.labels, minlength=3)
        np.testing.assert_array_equal(counts, [100, 100, 100])

    def test_unbalanced_remainder_within_one(self):
        bundle = synth_dataset(3, 4, 301, 30, seed=5)
        counts = np.bincount(bundle.train.labels, minlength=3)
        assert counts.max() - counts.min() <= 1

    def test_rejects_single_class(self):
        with pytest.raises(ValueError):
            synth_dataset(1, 4, 10, 5, seed=0)

    def test_class_means_separated(self):
        bundle = synth_dataset(2, 6, 4000, 10, seed=3)
        X, y = bundle.train.features, bundle.train.labels
        mu0, mu1 = X[y == 0].mean(axis=0), X[y == 1].mean(axis=0)
        assert np.linalg.norm(mu0 - mu1) == pytest.approx(3.0 * np.sqrt(2), abs=0.2)


class TestPartition:
    def test_even_split(self):
        samples = synth_dataset(2, 3, 10, 5, seed=0).train
        shards = partition_iid(samples, K=5, seed=0)
        assert [len(s) for s in shards] == [2, 2, 2, 2, 2]

    def test_remainder_spread(self):
        samples = synth_dataset(2, 3, 11, 5, seed=0).train
        sizes = sorted(len(s) for s in partition_iid(samples, K=5, seed=0))
        assert sizes == [2, 2, 2, 2, 3]

    def test_deterministic(self):
        samples = synth_dataset(2, 3, 37, 5, seed=0).train
        a = partition_iid(samples, K=4, seed=9)
        b = partition_iid(samples, K=4, seed=9)
        for sa, sb in zip(a, b):
            np.testing.assert_array_equal(sa.samples.features, sb.samples.features)

    def test_too_many_clients(self):
        samples = synth_dataset(2, 3, 4, 5, seed=0).train
        with pytest.raises(PartitionError):
            partition_iid(samples, K=5, seed=0)

    @given(n=st.integers(1, 200), k=st.integers(1, 20), seed=st.integers(0, 1000))
    def test_union_is_input_multiset(self, n, k, seed):
        if k > n:
            return
        rng = np.random.default_rng(seed)
        samples = Samples(
            features=rng.random((n, 3)), labels=rng.integers(0, 4, size=n)
        )
        shards = partition_iid(samples, K=k, seed=seed)
        assert sum(len(s) for s in shards) == n
        assert max(len(s) for s in shards) - min(len(s) for s in shards) <= 1
        merged = np.concatenate([s.samples.features for s in shards])
        assert sorted(map(tuple, merged)) == sorted(map(tuple, samples.features))
        assert {s.client_id for s in shards} == set(range(k))


class TestRepartitionSubset:
    def test_repartition_preserves_data(self, small_bundle):
        re = datasets.repartition(small_bundle, K=3, seed=1)
        assert len(re.train_shards) == 3
        assert len(re.train) == len(small_bundle.train)

    def test_subset_fraction(self, small_bundle):
        sub = datasets.subset_bundle(small_bundle, 0.10, K=2, seed=1)
        assert len(sub.train) == 30
        assert len(sub.test_set) == len(small_bundle.test_set)
