# tests/test_point_process.py
import numpy as np
import pytest
import scipy.stats

from percolab.models.geometry import BoxSpec, PointCloud
from percolab.services.point_process import (derive_substream, sample_binomial_cube,
                                             sample_poisson_box)


def test_same_inputs_give_identical_draws():
    first = derive_substream(7, b"L1", 0).random(100)
    second = derive_substream(7, b"L1", 0).random(100)
    np.testing.assert_array_equal(first, second)


def test_replicas_get_distinct_streams():
    first = derive_substream(7, b"L1", 0).random(100)
    second = derive_substream(7, b"L1", 1).random(100)
    assert not np.array_equal(first, second)


def test_text_and_byte_labels_agree():
    assert derive_substream(3, "l1-poisson:20.0", 4).stream_id == \
        derive_substream(3, b"l1-poisson:20.0", 4).stream_id


def test_master_seed_and_label_change_the_stream():
    base = derive_substream(1, b"L1", 0).stream_id
    assert derive_substream(2, b"L1", 0).stream_id != base
    assert derive_substream(1, b"H", 0).stream_id != base


def test_neighbouring_substreams_are_uncorrelated():
    draws = np.stack([derive_substream(11, b"L1", i).random(1000) for i in range(1000)])
    r = np.corrcoef(draws[:-1].ravel(), draws[1:].ravel())[0, 1]
    assert abs(r) < 0.01


def test_poisson_points_stay_in_shifted_box():
    box = BoxSpec(dim=3, side=4.0, origin=(1.0, -2.0, 0.5))
    cloud = sample_poisson_box(derive_substream(0, b"box", 0), 2.0, box)
    assert cloud.points.shape[1] == 3
    assert cloud.contains_all()


def test_poisson_count_matches_intensity_on_average():
    box = BoxSpec(dim=2, side=5.0)
    counts = [len(sample_poisson_box(derive_substream(5, b"count", i), 2.0, box))
              for i in range(2000)]
    # mean 50, standard error about 0.16
    assert abs(np.mean(counts) - 50.0) < 1.0
    assert abs(np.var(counts, ddof=1) - 50.0) < 8.0


def test_tiny_intensity_gives_empty_cloud():
    cloud = sample_poisson_box(derive_substream(0, b"empty", 0), 1e-12, BoxSpec(dim=2, side=1.0))
    assert len(cloud) == 0
    assert cloud.points.shape == (0, 2)


@pytest.mark.parametrize('intensity', [0.0, -1.0])
def test_poisson_rejects_non_positive_intensity(intensity):
    with pytest.raises(ValueError):
        sample_poisson_box(derive_substream(0, b"x", 0), intensity, BoxSpec(dim=2, side=1.0))


def test_box_rejects_non_positive_side():
    with pytest.raises(ValueError):
        BoxSpec(dim=2, side=0.0)


def test_binomial_cube_has_exact_count():
    cloud = sample_binomial_cube(derive_substream(0, b"bin", 0), 5, 2)
    assert len(cloud) == 5
    assert np.all((cloud.points >= 0.0) & (cloud.points <= 1.0))


def test_binomial_cube_rejects_empty_sample():
    with pytest.raises(ValueError):
        sample_binomial_cube(derive_substream(0, b"bin", 0), 0, 2)


def test_poisson_empty_box_frequency():
    box = BoxSpec(dim=2, side=2.0)
    counts = np.array([len(sample_poisson_box(derive_substream(13, b"zero", i), 1.0, box))
                       for i in range(20000)])
    empty = np.mean(counts == 0)
    expected = np.exp(-4.0)
    stderr = np.sqrt(expected * (1 - expected) / counts.size)
    assert abs(empty - expected) < 4 * stderr
    assert abs(counts.mean() - 4.0) < 0.07


def test_count_in_uses_closed_bounds():
    cloud = PointCloud(box=BoxSpec(dim=2, side=2.0),
                       points=[(0.0, 0.0), (1.0, 1.0), (1.5, 0.5), (0.5, 1.2)])
    assert cloud.count_in((0.0, 0.0), (1.0, 1.0)) == 2
    assert cloud.count_in((1.0, 0.0), (2.0, 2.0)) == 2


def test_binomial_cube_moments_and_quadrant_count():
    n = 100_000
    cloud = sample_binomial_cube(derive_substream(16, b"bin-moments", 0), n, 2)
    np.testing.assert_allclose(cloud.points.mean(axis=0), [0.5, 0.5], atol=0.003)
    quadrant = cloud.count_in((0.0, 0.0), (0.5, 0.5))
    assert abs(quadrant - n / 4) < 3 * np.sqrt(n * 0.25 * 0.75)


@pytest.mark.slow
def test_sub_box_counts_are_poisson():
    # quarter of B(2) at intensity 1: counts should be Poisson(1)
    box = BoxSpec(dim=2, side=2.0)
    counts = np.array([
        sample_poisson_box(derive_substream(17, b"thinning", i), 1.0, box)
        .count_in((0.0, 0.0), (1.0, 1.0))
        for i in range(100_000)])
    observed = np.array([np.sum(counts == k) for k in range(6)] + [np.sum(counts >= 6)])
    pmf = scipy.stats.poisson.pmf(np.arange(6), 1.0)
    expected = counts.size * np.append(pmf, 1.0 - pmf.sum())
    assert scipy.stats.chisquare(observed, expected).pvalue > 0.001
