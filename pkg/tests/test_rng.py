import numpy as np
import pytest

from ifs_sync import rng as rngmod
from ifs_sync._parallel import ordered_map, worker_count


def test_streams_are_reproducible_and_distinct():
    a = rngmod.stream(7, 3).random(5)
    assert np.array_equal(a, rngmod.stream(7, 3).random(5))
    assert not np.array_equal(a, rngmod.stream(7, 4).random(5))
    assert not np.array_equal(a, rngmod.stream(8, 3).random(5))


def test_stream_uses_philox():
    assert isinstance(rngmod.stream(1).bit_generator, np.random.Philox)


def test_seed_range():
    rngmod.stream(2**64 - 1)
    with pytest.raises(ValueError):
        rngmod.stream(-1)
    with pytest.raises(ValueError):
        rngmod.stream(2**64)


def test_ordered_map_independent_of_workers():
    fn = lambda i: rngmod.stream(5, i).random(3).sum()
    assert ordered_map(fn, range(20), threads=1) == ordered_map(fn, range(20), threads=4)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("IFS_SYNC_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(2) == 2
    monkeypatch.delenv("IFS_SYNC_THREADS")
    assert worker_count() >= 1
