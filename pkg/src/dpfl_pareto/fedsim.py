"""DP-FedSGD simulation: client sampling, local steps, clipping,
Gaussian noising, and server averaging, fully seeded.

Per-round protocol (one communication round):

1. the server samples max(1, round(q*K)) participants,
2. each participant runs E local steps (one batch + one SGD step each)
   from the round-start global model and uploads the clipped, noised
   weight difference,
3. the server adds the participant average to the global model and
   evaluates test loss.

RNG streams are derived per (seed, purpose, round, client) through
``numpy.random.SeedSequence``, so any execution order - serial or
parallel across clients, rounds batched or not - produces bitwise
identical traces.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .datasets import DataShard, DatasetBundle
from .models import ModelArch, ModelParams, eval_loss_arrays, init_params, loss_grad_arrays

__all__ = [
    "ClipMode",
    "FedConfig",
    "RoundTrace",
    "ProtocolError",
    "participant_count",
    "sample_clients",
    "client_update",
    "clip_update",
    "add_noise",
    "aggregate",
    "run_dp_fedsgd",
    "multi_seed_trace",
    "init_rng",
    "round_rng",
    "client_rng",
]


class ProtocolError(RuntimeError):
    """Server-side protocol violation (e.g. aggregating zero updates)."""


class ClipMode(Enum):
    # divide by max(1, ||d||^2 / c): the protocol's literal clipping factor
    SQUARED_NORM = "squared_norm"
    # divide by max(1, ||d|| / c): standard bounded-sensitivity clipping
    NORM = "norm"


@dataclass(frozen=True)
class FedConfig:
    K: int
    E: int
    q: float
    sigma: float
    T_max: int
    eta: float
    B: int
    c_clip: float
    arch: ModelArch
    seed: int = 0
    momentum: float = 0.0
    clip_mode: ClipMode = ClipMode.SQUARED_NORM

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.E < 0:
            raise ValueError(f"E must be >= 0, got {self.E}")
        if not 0 < self.q <= 1:
            raise ValueError(f"q must be in (0, 1], got {self.q}")
        if not 1 <= participant_count(self.K, self.q) <= self.K:
            raise ValueError(f"q={self.q} yields no valid participant count for K={self.K}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.T_max < 1:
            raise ValueError(f"T_max must be >= 1, got {self.T_max}")
        if self.eta <= 0 or self.B < 1 or self.c_clip <= 0:
            raise ValueError("eta, B, c_clip must be positive")
        if self.momentum < 0:
            raise ValueError(f"momentum must be >= 0, got {self.momentum}")


@dataclass(frozen=True)
class RoundTrace:
    """Per-round record of one simulation; all lists have length T_max."""

    losses: np.ndarray  # test loss after each round's aggregation
    participants: list[tuple[int, ...]]  # sorted client ids per round
    param_digests: list[str]  # sha256 of the global weights per round
    clipped_norms: list[np.ndarray] = field(default_factory=list)  # pre-noise norms


# stream tags keep the per-purpose generators disjoint
_TAG_INIT = 0x1417
_TAG_ROUND = 0x2057
_TAG_CLIENT = 0x3C11


def init_rng(seed: int) -> np.random.Generator:
    """Model-initialization stream for a simulation seed."""
    return np.random.default_rng(np.random.SeedSequence((seed, _TAG_INIT)))


def round_rng(seed: int, t: int) -> np.random.Generator:
    """Client-sampling stream for round t."""
    return np.random.default_rng(np.random.SeedSequence((seed, _TAG_ROUND, t)))


def client_rng(seed: int, t: int, client_id: int) -> np.random.Generator:
    """Batch-sampling and noise stream for one client in one round."""
    return np.random.default_rng(np.random.SeedSequence((seed, _TAG_CLIENT, t, client_id)))


def participant_count(K: int, q: float) -> int:
    """max(1, q*K rounded half-up)."""
    return max(1, int(np.floor(q * K + 0.5)))


def sample_clients(K: int, q: float, rng: np.random.Generator) -> tuple[int, ...]:
    """Draw the round's participants uniformly without replacement."""
    m = participant_count(K, q)
    ids = rng.choice(K, size=m, replace=False)
    return tuple(sorted(int(i) for i in ids))


def client_update(
    global_params: ModelParams, shard: DataShard, cfg: FedConfig, rng: np.random.Generator
) -> np.ndarray:
    """E local steps from the global model; returns the weight difference.

    Each step samples one batch of size min(B, |shard|) without
    replacement.  Momentum state starts at zero every call (local state
    does not persist across rounds).
    """
    n = len(shard)
    if n == 0:
        raise ValueError(f"client {shard.client_id} has an empty shard")
    arch = global_params.arch
    X, y = shard.samples.features, shard.samples.labels
    batch = min(cfg.B, n)
    # accumulate the step sum rather than differencing endpoint weights,
    # so a single step uploads exactly -eta * grad
    delta = np.zeros_like(global_params.weights)
    velocity = None
    for _ in range(cfg.E):
        w = global_params.weights + delta
        idx = rng.choice(n, size=batch, replace=False)
        _, grad = loss_grad_arrays(arch, w, X[idx], y[idx])
        if cfg.momentum > 0:
            velocity = grad if velocity is None else cfg.momentum * velocity + grad
            delta = delta - cfg.eta * velocity
        else:
            delta = delta - cfg.eta * grad
    return delta


def clip_update(delta: np.ndarray, c_clip: float, mode: ClipMode) -> np.ndarray:
    """Scale the update down when its norm exceeds the clipping bound."""
    if c_clip <= 0:
        raise ValueError(f"c_clip must be positive, got {c_clip}")
    norm = float(np.linalg.norm(delta))
    if mode is ClipMode.SQUARED_NORM:
        factor = max(1.0, norm * norm / c_clip)
    else:
        factor = max(1.0, norm / c_clip)
    return delta / factor


def clip_bound(c_clip: float, mode: ClipMode) -> float:
    """Largest norm a clipped update can carry."""
    return np.sqrt(c_clip) if mode is ClipMode.SQUARED_NORM else c_clip


def add_noise(clipped: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Per-coordinate Gaussian(0, sigma^2) perturbation; identity at 0."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return clipped
    return clipped + rng.normal(0.0, sigma, size=clipped.shape)


def aggregate(global_params: ModelParams, updates: dict[int, np.ndarray]) -> ModelParams:
    """w + mean(updates), summed in ascending client-id order."""
    if not updates:
        raise ProtocolError("aggregate received no client updates")
    total = np.zeros_like(global_params.weights)
    for cid in sorted(updates):
        u = updates[cid]
        if u.shape != global_params.weights.shape:
            raise ValueError(f"update from client {cid} has wrong length")
        total += u
    return ModelParams(
        arch=global_params.arch, weights=global_params.weights + total / len(updates)
    )


def _digest(w: np.ndarray) -> str:
    return hashlib.sha256(w.tobytes()).hexdigest()


def run_dp_fedsgd(cfg: FedConfig, data: DatasetBundle) -> RoundTrace:
    """Run T_max rounds of the protocol; bitwise deterministic in cfg.seed."""
    if len(data.train_shards) != cfg.K:
        raise ValueError(f"bundle has {len(data.train_shards)} shards, config wants K={cfg.K}")
    params = init_params(cfg.arch, seed=int(init_rng(cfg.seed).integers(2**31)))
    bound = clip_bound(cfg.c_clip, cfg.clip_mode) * (1.0 + 1e-9)

    losses = np.empty(cfg.T_max)
    participants: list[tuple[int, ...]] = []
    digests: list[str] = []
    norms: list[np.ndarray] = []
    test_X, test_y = data.test_set.features, data.test_set.labels

    for t in range(cfg.T_max):
        ids = sample_clients(cfg.K, cfg.q, round_rng(cfg.seed, t))
        updates: dict[int, np.ndarray] = {}
        round_norms = np.empty(len(ids))
        for i, cid in enumerate(ids):
            rng = client_rng(cfg.seed, t, cid)
            delta = client_update(params, data.train_shards[cid], cfg, rng)
            clipped = clip_update(delta, cfg.c_clip, cfg.clip_mode)
            round_norms[i] = np.linalg.norm(clipped)
            assert round_norms[i] <= bound, "clipping bound violated"
            updates[cid] = add_noise(clipped, cfg.sigma, rng)
        params = aggregate(params, updates)
        losses[t] = eval_loss_arrays(cfg.arch, params.weights, test_X, test_y)
        participants.append(ids)
        digests.append(_digest(params.weights))
        norms.append(round_norms)

    return RoundTrace(
        losses=losses, participants=participants, param_digests=digests, clipped_norms=norms
    )


def multi_seed_trace(cfg: FedConfig, data: DatasetBundle, seeds: list[int]) -> np.ndarray:
    """Element-wise mean test-loss trace across seeds."""
    if not seeds:
        raise ValueError("need at least one seed")
    total = np.zeros(cfg.T_max)
    for s in seeds:
        run_cfg = FedConfig(**{**cfg.__dict__, "seed": s})
        total += run_dp_fedsgd(run_cfg, data).losses
    return total / len(seeds)
