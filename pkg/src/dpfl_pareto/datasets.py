"""Dataset loading, synthesis, and IID partitioning across clients.

Supports IDX-format image/label files (big-endian, magic 0x803/0x801),
synthetic Gaussian-blob classification data, and deterministic splitting
of a sample set into K near-equal shards.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "IdxFormatError",
    "IdxLengthError",
    "PartitionError",
    "Sample",
    "Samples",
    "DataShard",
    "DatasetBundle",
    "load_idx_images",
    "load_idx_labels",
    "write_idx_images",
    "write_idx_labels",
    "load_mnist_bundle",
    "synth_dataset",
    "partition_iid",
    "repartition",
    "subset_bundle",
]

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """File does not start with the expected IDX magic/header."""


class IdxLengthError(ValueError):
    """IDX payload shorter than the header promises."""


class PartitionError(ValueError):
    """Partition request impossible for the given sample count."""


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    label: int


@dataclass(frozen=True)
class Samples:
    """Ordered, array-backed collection of feature/label pairs."""

    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (len(self.features),):
            raise ValueError("labels must align with feature rows")

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, idx) -> Sample:
        return Sample(features=self.features[idx], label=int(self.labels[idx]))

    def take(self, indices: np.ndarray) -> "Samples":
        return Samples(features=self.features[indices], labels=self.labels[indices])

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class DataShard:
    client_id: int
    samples: Samples

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class DatasetBundle:
    train_shards: list[DataShard]
    test_set: Samples
    num_classes: int
    feature_dim: int

    def __post_init__(self):
        if len(self.test_set) == 0:
            raise ValueError("test_set must be non-empty")
        if self.num_classes < 2:
            raise ValueError(f"need >= 2 classes, got {self.num_classes}")

    @property
    def train(self) -> Samples:
        """All training samples, shards concatenated in client order."""
        return Samples(
            features=np.concatenate([s.samples.features for s in self.train_shards]),
            labels=np.concatenate([s.samples.labels for s in self.train_shards]),
        )


def _read_header(data: bytes, path, magic: int, n_dims: int) -> tuple[int, ...]:
    header_len = 4 * (1 + n_dims)
    if len(data) < header_len:
        raise IdxFormatError(f"{path}: truncated IDX header ({len(data)} bytes)")
    fields = struct.unpack(f">{1 + n_dims}I", data[:header_len])
    if fields[0] != magic:
        raise IdxFormatError(
            f"{path}: bad magic 0x{fields[0]:08x}, expected 0x{magic:08x}"
        )
    return fields[1:]


def load_idx_images(path) -> np.ndarray:
    """Load an IDX image file as an (n, rows*cols) float64 matrix in [0, 1].

    Pixel byte b maps to b/255.
    """
    data = Path(path).read_bytes()
    count, rows, cols = _read_header(data, path, IDX_IMAGE_MAGIC, 3)
    expected = count * rows * cols
    payload = data[16:]
    if len(payload) < expected:
        raise IdxLengthError(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected}"
        )
    pixels = np.frombuffer(payload[:expected], dtype=np.uint8)
    return pixels.reshape(count, rows * cols).astype(np.float64) / 255.0


def load_idx_labels(path) -> np.ndarray:
    """Load an IDX label file as an (n,) int64 vector."""
    data = Path(path).read_bytes()
    (count,) = _read_header(data, path, IDX_LABEL_MAGIC, 1)
    payload = data[8:]
    if len(payload) < count:
        raise IdxLengthError(
            f"{path}: payload holds {len(payload)} labels, header promises {count}"
        )
    return np.frombuffer(payload[:count], dtype=np.uint8).astype(np.int64)


def write_idx_images(path, pixel_bytes: np.ndarray, rows: int, cols: int) -> None:
    """Write a (n, rows*cols) uint8 matrix in IDX image layout."""
    pixel_bytes = np.ascontiguousarray(pixel_bytes, dtype=np.uint8)
    n = len(pixel_bytes)
    if pixel_bytes.shape != (n, rows * cols):
        raise ValueError(f"pixel matrix shape {pixel_bytes.shape} != ({n}, {rows * cols})")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">4I", IDX_IMAGE_MAGIC, n, rows, cols))
        fh.write(pixel_bytes.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    """Write an int vector (values in [0, 255]) in IDX label layout."""
    labels = np.asarray(labels)
    if labels.min(initial=0) < 0 or labels.max(initial=0) > 255:
        raise ValueError("labels must fit in one byte")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">2I", IDX_LABEL_MAGIC, len(labels)))
        fh.write(labels.astype(np.uint8).tobytes())


def export_bundle_idx(bundle: DatasetBundle, out_dir, lo: float = -8.0, hi: float = 8.0) -> None:
    """Archive a bundle in IDX layout (one row per sample).

    Features are affinely mapped from [lo, hi] onto byte range and
    clipped, so re-loading recovers them only up to 1/255 quantization.
    Byte-exact round trips need byte-valued sources.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train = bundle.train
    for name, part in (("train", train), ("test", bundle.test_set)):
        scaled = np.clip((part.features - lo) / (hi - lo), 0.0, 1.0)
        write_idx_images(out / f"{name}-images-idx3-ubyte", np.round(scaled * 255).astype(np.uint8), 1, bundle.feature_dim)
        write_idx_labels(out / f"{name}-labels-idx1-ubyte", part.labels)


def load_mnist_bundle(
    train_images,
    train_labels,
    test_images,
    test_labels,
    K: int,
    seed: int,
    subset_fraction: float = 1.0,
) -> DatasetBundle:
    """Load an MNIST-format dataset and shard it across K clients.

    ``subset_fraction`` < 1 keeps a random fraction of the training set
    (the test set is always kept whole).
    """
    X = load_idx_images(train_images)
    y = load_idx_labels(train_labels)
    if len(X) != len(y):
        raise IdxLengthError(f"{train_images}: {len(X)} images vs {len(y)} labels")
    Xt = load_idx_images(test_images)
    yt = load_idx_labels(test_labels)
    if len(Xt) != len(yt):
        raise IdxLengthError(f"{test_images}: {len(Xt)} images vs {len(yt)} labels")
    train = Samples(features=X, labels=y)
    if subset_fraction < 1.0:
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0xDA7A)))
        keep = rng.permutation(len(train))[: max(1, int(round(subset_fraction * len(train))))]
        train = train.take(np.sort(keep))
    shards = partition_iid(train, K, seed)
    return DatasetBundle(
        train_shards=shards,
        test_set=Samples(features=Xt, labels=yt),
        num_classes=int(max(y.max(), yt.max())) + 1,
        feature_dim=X.shape[1],
    )


def synth_dataset(
    num_classes: int, feature_dim: int, n_train: int, n_test: int, seed: int
) -> DatasetBundle:
    """Deterministic Gaussian-blob classification data.

    Class c is an isotropic unit-variance blob centred at 3.0 times the
    (c mod feature_dim)-th coordinate axis, so any two class means sit
    3*sqrt(2) apart and logistic regression separates them quickly.
    Labels are balanced to within one sample.  The training set comes
    back as a single shard; repartition for multi-client runs.
    """
    if num_classes < 2:
        raise ValueError(f"need >= 2 classes, got {num_classes}")
    if feature_dim < 1 or n_train < 1 or n_test < 1:
        raise ValueError("dimensions and sizes must be positive")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5D47)))
    means = np.zeros((num_classes, feature_dim))
    for c in range(num_classes):
        means[c, c % feature_dim] = 3.0

    def draw(n: int) -> Samples:
        labels = np.arange(n) % num_classes  # balanced within +-1
        feats = rng.standard_normal((n, feature_dim)) + means[labels]
        order = rng.permutation(n)
        return Samples(features=feats[order], labels=labels[order])

    train = draw(n_train)
    test = draw(n_test)
    return DatasetBundle(
        train_shards=[DataShard(client_id=0, samples=train)],
        test_set=test,
        num_classes=num_classes,
        feature_dim=feature_dim,
    )


def partition_iid(samples: Samples, K: int, seed: int) -> list[DataShard]:
    """Shuffle with the seed and split into K near-equal shards.

    Shard sizes differ by at most one; their union is exactly the input.
    """
    if K < 1:
        raise PartitionError(f"K must be >= 1, got {K}")
    n = len(samples)
    if K > n:
        raise PartitionError(f"cannot split {n} samples across {K} clients")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x1D1D)))
    order = rng.permutation(n)
    return [
        DataShard(client_id=k, samples=samples.take(chunk))
        for k, chunk in enumerate(np.array_split(order, K))
    ]


def repartition(bundle: DatasetBundle, K: int, seed: int) -> DatasetBundle:
    """Re-shard a bundle's training data across K clients."""
    return DatasetBundle(
        train_shards=partition_iid(bundle.train, K, seed),
        test_set=bundle.test_set,
        num_classes=bundle.num_classes,
        feature_dim=bundle.feature_dim,
    )


def subset_bundle(bundle: DatasetBundle, fraction: float, K: int, seed: int) -> DatasetBundle:
    """Random training-set fraction, re-sharded; models pre-experiments."""
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    train = bundle.train
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5B5E7)))
    keep = np.sort(rng.permutation(len(train))[: max(K, int(round(fraction * len(train))))])
    return DatasetBundle(
        train_shards=partition_iid(train.take(keep), K, seed),
        test_set=bundle.test_set,
        num_classes=bundle.num_classes,
        feature_dim=bundle.feature_dim,
    )
