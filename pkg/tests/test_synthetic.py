import numpy as np

from aeddqn.data.idx import parse_idx
from aeddqn.data.synthetic import make_digits, write_idx_dataset


def test_generator_determinism():
    a = make_digits(100, seed=5)
    b = make_digits(100, seed=5)
    assert np.array_equal(a.images, b.images)
    assert np.array_equal(a.labels, b.labels)
    c = make_digits(100, seed=6)
    assert not np.array_equal(a.images, c.images)


def test_generator_shapes_and_range():
    ds = make_digits(200, seed=1)
    assert ds.images.shape == (200, 28, 28)
    assert ds.images.min() >= 0.0 and ds.images.max() <= 1.0
    assert ds.n_classes == 10
    assert set(np.unique(ds.labels)) == set(range(10))


def test_images_survive_idx_round_trip():
    # generator quantizes to 8 bits, so writing and re-parsing is lossless
    ds = make_digits(50, seed=2)
    paths_dir_independent = np.round(ds.images * 255.0).astype(np.uint8)
    from aeddqn.data.idx import write_idx_images, write_idx_labels

    round_tripped = parse_idx(
        write_idx_images(paths_dir_independent), write_idx_labels(ds.labels)
    )
    assert np.array_equal(round_tripped.images, ds.images)
    assert np.array_equal(round_tripped.labels, ds.labels)


def test_write_idx_dataset_files(tmp_path):
    paths = write_idx_dataset(str(tmp_path), n_train=60, n_test=20, seed=3)
    train = parse_idx(
        open(paths["train_images"], "rb").read(), open(paths["train_labels"], "rb").read()
    )
    test = parse_idx(
        open(paths["test_images"], "rb").read(), open(paths["test_labels"], "rb").read()
    )
    assert len(train) == 60 and len(test) == 20
    assert not np.array_equal(train.images[:20], test.images)


def test_classes_are_visually_distinct():
    ds = make_digits(400, seed=4)
    # mean image per class should differ clearly between classes
    means = np.stack([ds.images[ds.labels == c].mean(axis=0) for c in range(10)])
    for a in range(10):
        for b in range(a + 1, 10):
            assert np.abs(means[a] - means[b]).mean() > 0.01
