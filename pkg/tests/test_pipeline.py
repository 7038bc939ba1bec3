import numpy as np
import pytest

from godl.errors import GodlError
from godl.inference import detect
from godl.pipeline import TrainConfig, pooled_units, segment_sequences, train_model
from godl.segmentation import Segmentation
from godl.skeleton_io import normalize
from godl.synthetic import SynthConfig, generate_synthetic

CFG = SynthConfig()


@pytest.fixture(scope="module")
def falls():
    return [generate_synthetic(CFG, "fall", seed=100 + i).sequence for i in range(20)]


@pytest.fixture(scope="module")
def model(falls):
    return train_model(falls)


def test_five_units_with_default_dims(model):
    assert [u.dictionary.n_atoms for u in model.units] == [4, 5, 6, 10, 13]
    assert model.units[0].unit_label == "standing"
    assert model.feature_dim == 90


def test_pooled_units_cover_all_frames(falls):
    pools = pooled_units(falls, TrainConfig())
    assert sum(p.shape[1] for p in pools) == sum(s.n_frames for s in falls)


def test_given_segmentation_is_used(falls):
    segs = [Segmentation((0, 10, 20, 30, 40, s.n_frames), tuple("abcde")) for s in falls]
    pools = pooled_units(falls, TrainConfig(), segmentations=segs)
    assert [p.shape[1] for p in pools[:4]] == [10 * len(falls)] * 4
    with pytest.raises(GodlError):
        pooled_units(falls, TrainConfig(), segmentations=segs[:2])


def test_segmentation_follows_motion(falls):
    # generator units are about twelve frames; k-means boundaries land nearby
    seg = segment_sequences(falls[:1], TrainConfig())[0]
    truth = generate_synthetic(CFG, "fall", seed=100).unit_bounds
    assert seg.n_units == 5
    assert abs(seg.boundaries[1] - truth[1]) <= 8


def test_no_sequences():
    with pytest.raises(GodlError, match="no sequences"):
        train_model([])


def test_detects_held_out_fall_not_sit(model):
    fall = normalize(generate_synthetic(CFG, "fall", seed=900).sequence)[0]
    sit = normalize(generate_synthetic(CFG, "sit_down", seed=900).sequence)[0]
    assert len(detect(fall, model).events) == 1
    assert detect(sit, model).events == []


def test_training_is_deterministic(falls, model):
    again = train_model(falls)
    for u, v in zip(model.units, again.units):
        assert np.array_equal(u.dictionary.atoms, v.dictionary.atoms)
