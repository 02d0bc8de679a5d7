import numpy as np
import pytest

from unlearn_forge.datasets import (
    gen_blobs,
    split_random,
    split_classwise,
    split_objective,
    save_uds,
    load_uds,
)
from unlearn_forge.models import logistic_spec


def test_blobs_shapes_and_determinism():
    a = gen_blobs(50, 3, 4, separation=2.0, noise_sd=1.0, seed=9)
    b = gen_blobs(50, 3, 4, separation=2.0, noise_sd=1.0, seed=9)
    assert a.features.shape == (150, 4)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    assert set(np.unique(a.labels)) == {0, 1, 2}


def test_blobs_test_split_is_stratified():
    ds = gen_blobs(50, 4, 3, separation=2.0, noise_sd=1.0, seed=1)
    test_labels = ds.labels[ds.test_idx]
    counts = np.bincount(test_labels, minlength=4)
    assert np.all(counts == 10)  # 20% of 50 per class


def test_random_split_disjoint_and_sized():
    ds = split_random(gen_blobs(50, 3, 4, 2.0, 1.0, seed=2), 0.3, seed=2)
    retain, forget = set(ds.retain_idx), set(ds.forget_idx)
    assert not retain & forget
    n_train = len(retain) + len(forget)
    assert len(forget) == int(0.3 * n_train)


def test_classwise_split_hits_whole_classes():
    ds = split_classwise(gen_blobs(40, 4, 3, 2.0, 1.0, seed=3), 0.25, seed=3)
    assert len(ds.forgotten_classes) == 1
    cls = ds.forgotten_classes[0]
    assert set(ds.labels[ds.forget_idx]) == {cls}
    assert cls not in set(ds.labels[ds.retain_idx])


def test_split_objective_views():
    ds = split_random(gen_blobs(30, 3, 4, 2.0, 1.0, seed=4), 0.3, seed=4)
    spec = logistic_spec(4, 3)
    for which in ("retain", "forget", "train", "test"):
        obj = split_objective(ds, spec, which)
        assert obj.n_examples == len(ds.indices(which))
    with pytest.raises(ValueError):
        split_objective(ds, spec, "nope")


def test_classwise_test_halves():
    ds = split_classwise(gen_blobs(40, 4, 3, 2.0, 1.0, seed=5), 0.25, seed=5)
    tr = ds.indices("test_retain")
    tf = ds.indices("test_forget")
    assert len(tr) + len(tf) == len(ds.test_idx)
    assert set(ds.labels[tf]) <= set(ds.forgotten_classes)


def test_uds_roundtrip(tmp_path):
    ds = split_random(gen_blobs(25, 3, 4, 2.0, 1.0, seed=6), 0.3, seed=6)
    path = tmp_path / "toy.uds"
    save_uds(ds, path)
    back = load_uds(path)
    assert np.array_equal(back.features, ds.features)
    assert np.array_equal(back.labels, ds.labels)
    assert np.array_equal(back.retain_idx, ds.retain_idx)
    assert np.array_equal(back.forget_idx, ds.forget_idx)
    assert np.array_equal(back.test_idx, ds.test_idx)
    # byte-stable: saving the loaded dataset reproduces the file exactly
    path2 = tmp_path / "toy2.uds"
    save_uds(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_empty_forget_rejected():
    ds = gen_blobs(10, 2, 3, 2.0, 1.0, seed=7)
    with pytest.raises(ValueError):
        split_random(ds, 0.0, seed=7)
