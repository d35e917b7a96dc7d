import numpy as np
import pytest

from aeddqn.exceptions import FormatError
from aeddqn.nn import Conv2D, Dense, Network, ReLU, Sigmoid
from aeddqn.nn.serialize import (
    MAGIC,
    load_network,
    network_from_bytes,
    network_to_bytes,
    save_network,
    svm_from_bytes,
    svm_to_bytes,
)
from aeddqn.rng import SeededRng


def _sample_net():
    rng = SeededRng(8)
    return Network([
        Conv2D(1, 4, 3, stride=2, rng=rng),
        ReLU(),
        Dense(4 * 3 * 3, 5, rng=rng),
        Sigmoid(),
    ])


def test_round_trip_is_bitwise(tmp_path):
    net = _sample_net()
    path = str(tmp_path / "model.net")
    save_network(path, net)
    loaded = load_network(path)
    originals = net.param_list()
    restored = loaded.param_list()
    assert len(originals) == len(restored)
    for (name_a, p_a, _), (name_b, p_b, _) in zip(originals, restored):
        assert name_a == name_b
        assert np.array_equal(p_a, p_b)
    x = SeededRng(2).uniform(2 * 1 * 8 * 8).reshape(2, 1, 8, 8)
    assert np.array_equal(net.forward(x), loaded.forward(x))


def test_magic_prefix():
    assert network_to_bytes(_sample_net())[:8] == MAGIC == b"AEDQNET1"


def test_bad_magic_rejected():
    with pytest.raises(FormatError, match="magic"):
        network_from_bytes(b"NOTMAGIC" + b"\x00" * 64)


def test_truncation_rejected():
    # cuts inside a layer block; a cut exactly at a block boundary is
    # indistinguishable from a shorter network in this self-delimiting format
    data = network_to_bytes(_sample_net())
    for cut in (9, 20, len(data) // 2, len(data) - 2):
        with pytest.raises(FormatError):
            network_from_bytes(data[:cut])


def test_unknown_tag_rejected():
    with pytest.raises(FormatError, match="kind tag"):
        network_from_bytes(MAGIC + bytes([99]))


def test_svm_block_round_trip():
    rng = SeededRng(3)
    weights = rng.uniform(3 * 7).reshape(3, 7) - 0.5
    bias = rng.uniform(3)
    blob = svm_to_bytes(weights, bias, 1e-4)
    w2, b2, lam = svm_from_bytes(blob)
    assert np.array_equal(weights, w2)
    assert np.array_equal(bias, b2)
    assert lam == 1e-4


def test_svm_block_rejects_network_payload():
    with pytest.raises(FormatError, match="kind tag"):
        svm_from_bytes(network_to_bytes(_sample_net()))
