"""Federated cGAN training: client sampling, local epochs and size-weighted averaging.

Clients live in-process. The only objects that cross the client boundary are
parameter snapshots and dataset sizes; each client's data and optimizer state
stay inside its ``ClientState``.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import EmptyUpdateSet, KTooLarge, LayoutMismatch
from .genmodel import losses
from .genmodel.networks import ModelParams
from .genmodel.train import TrainConfig, TrainState, predict, stack_dataset, train

log = logging.getLogger(__name__)


class GanParams(NamedTuple):
    generator: ModelParams
    discriminator: ModelParams


@dataclass
class ClientState:
    id: int
    dataset: Sequence
    seed: int = 0
    train_state: Optional[TrainState] = field(default=None, repr=False)
    last_losses: Optional[tuple] = None

    def __post_init__(self):
        if len(self.dataset) < 1:
            raise ValueError(f"client {self.id} has no data")

    @property
    def dataset_size(self) -> int:
        return len(self.dataset)


@dataclass(frozen=True)
class FedConfig:
    rounds: int = 10
    local_epochs: int = 2
    clients_per_round: Optional[int] = None  # None = every client
    seed: int = 0
    train: TrainConfig = TrainConfig()
    aggregate_discriminator: bool = True

    def __post_init__(self):
        if self.rounds < 1 or self.local_epochs < 0:
            raise ValueError("rounds must be >= 1 and local_epochs >= 0")
        if self.clients_per_round is not None and self.clients_per_round < 1:
            raise ValueError("clients_per_round must be >= 1")


def sample_clients(pool: Sequence[ClientState], k: int, round_idx: int, seed: int) -> list:
    """Uniform sample without replacement seeded by ``(seed, round)``, returned in id order."""
    if k > len(pool):
        raise KTooLarge(f"cannot sample {k} of {len(pool)} clients")
    ordered = sorted(pool, key=lambda c: c.id)
    if k == len(pool):
        return ordered
    rng = np.random.default_rng([seed, round_idx])
    picked = sorted(rng.choice(len(ordered), size=k, replace=False))
    return [ordered[i] for i in picked]


def local_update(client: ClientState, w_global: GanParams, epochs: int, cfg: TrainConfig) -> GanParams:
    """Start from the global parameters and train ``epochs`` epochs on the client's shard.

    The client's Adam moments and epoch counter persist across rounds; the
    parameters are always reset to ``w_global`` first.
    """
    state = client.train_state
    if state is None:
        x, _ = stack_dataset(client.dataset[:1])
        state = TrainState.initial(x.shape[1], client.seed)
    gen_global = w_global.generator
    disc_global = w_global.discriminator
    if disc_global is None:
        disc_global = state.discriminator
    state = state.with_params(gen_global, disc_global)
    result = train(client.dataset, replace(cfg, epochs=epochs, seed=client.seed), state)
    client.train_state = result.state
    if result.history:
        client.last_losses = result.history[-1][1:]
    return GanParams(result.generator, result.discriminator)


def aggregate(updates: Sequence[tuple]) -> ModelParams:
    """Dataset-size-weighted mean of ``(params, size)`` pairs, summed in the given order.

    Computed as ``W_0 + sum_i w_i (W_i - W_0)`` so identical updates reproduce
    ``W_0`` bit for bit.
    """
    if not updates:
        raise EmptyUpdateSet("nothing to aggregate")
    layout = updates[0][0].layout
    for params, _ in updates:
        if params.layout != layout:
            raise LayoutMismatch("client updates use different layouts")
    total = sum(size for _, size in updates)
    ref = updates[0][0].vector
    acc = np.zeros_like(ref)
    for params, size in updates:
        acc += (size / total) * (params.vector - ref)
    return ModelParams(layout, ref + acc)


@dataclass(frozen=True)
class RoundMetrics:
    round: int
    global_mse: float
    global_nmse: float
    client_losses: dict


@dataclass
class FedResult:
    params: GanParams
    history: list


def evaluate_params(generator: ModelParams, test_set: Sequence) -> tuple[float, float]:
    """Pooled MSE and NMSE of the generator over a test set."""
    x, y = stack_dataset(test_set)
    pred = predict(generator, x)
    err = losses.mse_loss(pred, y)
    return err, err / float(np.mean(y * y))


def fed_train(
    pool: Sequence[ClientState],
    cfg: FedConfig,
    test_set: Optional[Sequence] = None,
    init: Optional[GanParams] = None,
    on_event: Optional[Callable[[str, int], None]] = None,
) -> FedResult:
    """Rounds of sample -> broadcast -> local update -> aggregate."""
    if not pool:
        raise EmptyUpdateSet("empty client pool")
    if init is None:
        x, _ = stack_dataset(pool[0].dataset[:1])
        start = TrainState.initial(x.shape[1], cfg.train.seed)
        init = GanParams(start.generator, start.discriminator)
    w_global = init
    k = len(pool) if cfg.clients_per_round is None else cfg.clients_per_round
    history = []
    for rnd in range(cfg.rounds):
        selected = sample_clients(pool, k, rnd, cfg.seed)
        updates = []
        for client in selected:
            if on_event:
                on_event("local_update_start", client.id)
            broadcast = w_global if cfg.aggregate_discriminator else GanParams(w_global.generator, None)
            w_i = local_update(client, broadcast, cfg.local_epochs, cfg.train)
            if on_event:
                on_event("local_update_end", client.id)
            updates.append((client.id, w_i, client.dataset_size))
        updates.sort(key=lambda u: u[0])
        gen = aggregate([(w.generator, n) for _, w, n in updates])
        disc = aggregate([(w.discriminator, n) for _, w, n in updates]) if cfg.aggregate_discriminator else w_global.discriminator
        w_global = GanParams(gen, disc)
        mse_val = nmse_val = float("nan")
        if test_set:
            mse_val, nmse_val = evaluate_params(gen, test_set)
        losses_by_client = {c.id: c.last_losses for c in selected}
        history.append(RoundMetrics(rnd, mse_val, nmse_val, losses_by_client))
        log.info("round %d: global mse %.6f nmse %.6f", rnd, mse_val, nmse_val)
    return FedResult(w_global, history)


def write_round_csv(history: Sequence[RoundMetrics], path) -> None:
    ids = sorted({cid for r in history for cid in r.client_losses})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["round", "global_mse", "global_nmse"] + [f"client{c}_L_MSE" for c in ids])
        for r in history:
            row = [r.round, repr(r.global_mse), repr(r.global_nmse)]
            for c in ids:
                lost = r.client_losses.get(c)
                row.append("" if lost is None else repr(lost[2]))
            w.writerow(row)
