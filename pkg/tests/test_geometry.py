import numpy as np
import pytest

from idtrack.geometry import BBox, Detection, LossWeights, area, to_center, to_corner


def test_corner_worked_example():
    box = BBox(25.0, 40.0, 30.0, 40.0)
    assert to_corner(box) == (10.0, 20.0, 40.0, 60.0)


def test_center_worked_example():
    box = to_center(10.0, 20.0, 40.0, 60.0)
    assert box == BBox(25.0, 40.0, 30.0, 40.0)


def test_area():
    assert area(BBox(0.0, 0.0, 30.0, 40.0)) == 1200.0


def test_round_trip_exact_on_dyadic_lattice():
    # Centers and sizes that are multiples of 1/64 convert between center and
    # corner form without any rounding, so the round trip must be bit-exact.
    rng = np.random.default_rng(42)
    for _ in range(1000):
        cx, cy = (int(v) / 64.0 for v in rng.integers(-64000, 64000, size=2))
        w, h = (int(v) / 64.0 for v in rng.integers(1, 64000, size=2))
        box = BBox(cx, cy, w, h)
        assert to_center(*to_corner(box)) == box

        left, top = (int(v) / 64.0 for v in rng.integers(-64000, 64000, size=2))
        right = left + int(rng.integers(1, 64000)) / 64.0
        bottom = top + int(rng.integers(1, 64000)) / 64.0
        assert to_corner(to_center(left, top, right, bottom)) == (left, top, right, bottom)


def test_bbox_rejects_bad_sizes():
    with pytest.raises(ValueError):
        BBox(0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        BBox(0.0, 0.0, 1.0, -2.0)
    with pytest.raises(ValueError):
        BBox(float("nan"), 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        BBox(0.0, float("inf"), 1.0, 1.0)


def test_to_center_rejects_degenerate_extent():
    with pytest.raises(ValueError):
        to_center(5.0, 0.0, 5.0, 10.0)


def test_detection_validation():
    box = BBox(0.0, 0.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        Detection(box, 1.5, 1)
    with pytest.raises(ValueError):
        Detection(box, -0.1, 1)
    with pytest.raises(ValueError):
        Detection(box, 0.5, 0)
    with pytest.raises(ValueError):
        Detection(box, 0.5, 1, embedding=np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        Detection(box, 0.5, 1, embedding=np.eye(2))


def test_detection_embedding_coerced_to_float64():
    box = BBox(0.0, 0.0, 2.0, 2.0)
    det = Detection(box, 0.5, 1, embedding=np.array([1.0, 0.0], dtype=np.float32))
    assert det.embedding.dtype == np.float64
    assert np.array_equal(det.embedding, [1.0, 0.0])


def test_loss_weights_validation():
    LossWeights()  # defaults are fine
    with pytest.raises(ValueError):
        LossWeights(classification=-0.5)
    with pytest.raises(ValueError):
        LossWeights(tracking=float("inf"))
