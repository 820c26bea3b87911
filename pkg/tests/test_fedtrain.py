import csv
from collections import Counter

import numpy as np
import pytest

from radiosem.errors import EmptyUpdateSet, KTooLarge, LayoutMismatch
from radiosem.fedtrain import (
    ClientState,
    FedConfig,
    GanParams,
    aggregate,
    fed_train,
    local_update,
    sample_clients,
    write_round_csv,
)
from radiosem.genmodel import TrainConfig, TrainState, discriminator_layout, generator_layout, init_params, train
from radiosem.genmodel.networks import ModelParams
from radiosem.genmodel.train import dataset_mse

TC = TrainConfig(lr=2e-3, batch=3, seed=0, augment=False)


def vec(values):
    lay = discriminator_layout(1)
    v = np.zeros(lay.n_params)
    v[: len(values)] = values
    return ModelParams(lay, v)


def pool(n, dataset):
    return [ClientState(i, dataset, seed=i) for i in range(n)]


def test_sample_clients(small_dataset):
    p = pool(4, small_dataset[:1])
    assert [c.id for c in sample_clients(p, 4, 0, 1)] == [0, 1, 2, 3]
    assert sample_clients(p, 2, 5, 9) == sample_clients(p, 2, 5, 9)
    with pytest.raises(KTooLarge):
        sample_clients(p, 5, 0, 0)
    counts = Counter(c.id for r in range(10**4) for c in sample_clients(p, 2, r, 3))
    sigma = np.sqrt(10**4 * 0.5 * 0.5)
    assert all(abs(counts[i] - 5000) <= 3 * sigma for i in range(4))


def test_aggregate_examples():
    a, b = vec([1, 2]), vec([3, 4])
    np.testing.assert_array_equal(aggregate([(a, 5), (b, 5)]).vector[:2], [2, 3])
    c, d = vec([0, 0]), vec([4, 4])
    np.testing.assert_array_equal(aggregate([(c, 1), (d, 3)]).vector[:2], [3, 3])
    assert aggregate([(a, 7)]) == a
    assert aggregate([(a, 2), (a, 9)]) == a
    with pytest.raises(EmptyUpdateSet):
        aggregate([])
    with pytest.raises(LayoutMismatch):
        aggregate([(a, 1), (init_params(generator_layout(), 0), 1)])


def test_aggregate_matches_hand_weighted_mean(rng):
    lay = discriminator_layout(1)
    vs = [rng.normal(size=lay.n_params) for _ in range(3)]
    sizes = [2, 3, 5]
    got = aggregate([(ModelParams(lay, v), s) for v, s in zip(vs, sizes)]).vector
    hand = sum(s / 10 * v for v, s in zip(vs, sizes))
    np.testing.assert_allclose(got, hand, rtol=0, atol=1e-14)
    scaled = aggregate([(ModelParams(lay, v), 10 * s) for v, s in zip(vs, sizes)]).vector
    np.testing.assert_array_equal(scaled, got)


def test_local_update(small_dataset):
    start = TrainState.initial(3, 0)
    w = GanParams(start.generator, start.discriminator)
    c = ClientState(0, small_dataset, seed=0)
    assert local_update(c, w, 0, TC) == w
    snapshot = w.generator.vector.copy()
    a = local_update(ClientState(0, small_dataset, seed=4), w, 2, TC)
    b = local_update(ClientState(1, small_dataset, seed=4), w, 2, TC)
    assert a == b
    np.testing.assert_array_equal(w.generator.vector, snapshot)
    assert dataset_mse(a.generator, small_dataset) < dataset_mse(w.generator, small_dataset)
    with pytest.raises(LayoutMismatch):
        local_update(c, GanParams(init_params(generator_layout(5), 0), start.discriminator), 1, TC)


def test_fed_train_identity_round(small_dataset):
    res = fed_train(pool(2, small_dataset[:3]), FedConfig(rounds=1, local_epochs=0, train=TC))
    start = TrainState.initial(3, TC.seed)
    assert res.params.generator == start.generator
    assert len(res.history) == 1


def test_single_client_equals_centralized(small_dataset):
    cfg = FedConfig(rounds=3, local_epochs=2, train=TC)
    res = fed_train([ClientState(0, small_dataset, seed=TC.seed)], cfg)
    central = train(small_dataset, TrainConfig(**{**TC.__dict__, "epochs": 6}))
    assert res.params.generator == central.generator
    assert res.params.discriminator == central.discriminator


def test_privacy_boundary(small_dataset):
    """Each local update touches only its own shard: reading another client's data fails loudly."""

    class Guarded(list):
        active = None

        def _check(self):
            assert Guarded.active == self.owner, "client data read outside its own update"

        def __getitem__(self, i):
            self._check()
            return list.__getitem__(self, i)

        def __iter__(self):
            self._check()
            return list.__iter__(self)

    shards = []
    for cid in range(2):
        g = Guarded(small_dataset[3 * cid : 3 * cid + 3])
        g.owner = cid
        shards.append(g)

    def on_event(kind, cid):
        Guarded.active = cid if kind == "local_update_start" else None

    # dataset_size uses len(), which the guard allows
    clients = [ClientState(i, shards[i], seed=i) for i in range(2)]
    init = TrainState.initial(3, 0)
    fed_train(clients, FedConfig(rounds=2, local_epochs=1, train=TC), init=GanParams(init.generator, init.discriminator), on_event=on_event)


def test_generator_only_aggregation(small_dataset):
    cfg = FedConfig(rounds=1, local_epochs=1, train=TC, aggregate_discriminator=False)
    res = fed_train(pool(2, small_dataset[:3]), cfg)
    assert res.params.discriminator == TrainState.initial(3, TC.seed).discriminator


def test_round_csv(small_dataset, tmp_path):
    res = fed_train(pool(2, small_dataset[:3]), FedConfig(rounds=2, local_epochs=1, train=TC), test_set=small_dataset[3:])
    write_round_csv(res.history, tmp_path / "r.csv")
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[0][:3] == ["round", "global_mse", "global_nmse"]
    assert len(rows) == 3 and float(rows[1][1]) > 0


def test_fed_config_validation(small_dataset):
    for bad in (dict(rounds=0), dict(local_epochs=-1), dict(clients_per_round=0)):
        with pytest.raises(ValueError):
            FedConfig(**bad)
