import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nfrange.errors import InvalidParameterError, UnsupportedModeError
from nfrange.geometry import (ArrayConfig, ArrayTag, DistanceMode, TargetKind,
                              TargetModel, distance, distance_derivative,
                              load_layout, make_ula, pair_distances,
                              rayleigh_distance)

PT = TargetModel(TargetKind.PT)
ET = TargetModel(TargetKind.ET)
ET_FRESNEL = ET.with_mode(DistanceMode.FRESNEL)
PT_FRESNEL = PT.with_mode(DistanceMode.FRESNEL)

pos = st.floats(-0.75, 0.75)
ranges = st.floats(1.8, 1e4)


def test_make_ula_examples():
    assert make_ula(1, 1.5).tolist() == [0.0]
    assert make_ula(3, 2.0).tolist() == [-1.0, 0.0, 1.0]
    assert np.diff(make_ula(25, 1.5)) == pytest.approx(np.full(24, 0.0625), rel=1e-12)


def test_make_ula_rejects_bad_counts():
    with pytest.raises(InvalidParameterError):
        make_ula(0, 1.0)
    with pytest.raises(InvalidParameterError):
        make_ula(2.5, 1.0)


def test_distance_examples():
    assert distance(PT, 10.0, 0.0, 0.0) == 20.0
    assert distance(ET, 10.0, 3.0, -1.0) == pytest.approx(math.sqrt(416), rel=1e-15)
    assert distance(ET_FRESNEL, 10.0, 3.0, -1.0) == pytest.approx(20.4, rel=1e-15)


def test_derivative_examples():
    assert distance_derivative(PT, 10.0, 0.0, 0.0) == 2.0
    assert distance_derivative(ET, 10.0, 3.0, -1.0) == pytest.approx(2 / math.sqrt(1.04), rel=1e-14)


def test_derivative_needs_exact_mode():
    with pytest.raises(UnsupportedModeError):
        distance_derivative(ET_FRESNEL, 10.0, 0.1, 0.2)


@given(st.sampled_from([PT, ET]), ranges, pos, pos)
def test_derivative_matches_finite_difference(model, R, z, y):
    h = 1e-4 * R
    fd = (distance(model, R + h, z, y) - distance(model, R - h, z, y)) / (2 * h)
    assert distance_derivative(model, R, z, y) == pytest.approx(fd, rel=1e-6)


@given(st.sampled_from([PT, ET]), pos, pos)
def test_plane_wave_limit(model, z, y):
    assert distance_derivative(model, 1e7, z, y) == pytest.approx(2.0, abs=1e-12)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), ranges)
def test_et_depends_on_difference_only(z, y, delta, R):
    assert distance(ET, R, z + delta, y + delta) == pytest.approx(distance(ET, R, z, y), rel=1e-14)


@given(pos, pos, ranges)
def test_pt_even_in_each_coordinate(z, y, R):
    d = distance(PT, R, z, y)
    assert distance(PT, R, -z, y) == d
    assert distance(PT, R, z, -y) == d


@pytest.mark.parametrize("exact, fresnel", [(PT, PT_FRESNEL), (ET, ET_FRESNEL)])
def test_fresnel_error_small_and_decreasing(exact, fresnel):
    D = 1.5
    z, y = make_ula(9, D)[:, None], make_ula(9, D)[None, :]
    errs = []
    for R in np.geomspace(1.2 * D, 100 * D, 30):
        rel = np.max(np.abs(distance(fresnel, R, z, y) - distance(exact, R, z, y)) / distance(exact, R, z, y))
        errs.append(rel)
    assert max(errs) < 1e-2
    assert np.all(np.diff(errs) < 0)


def test_rayleigh_distances():
    assert rayleigh_distance(1.5, 24e9) == pytest.approx(360, rel=5e-3)
    assert rayleigh_distance(1.5, 77e9) == pytest.approx(1155, rel=5e-3)
    assert rayleigh_distance(0.0, 24e9) == 0.0


def test_array_configs():
    simo = ArrayConfig.simo(4, 1.0)
    assert simo.tx.tolist() == [0.0] and simo.n_pairs == 4 and simo.tag is ArrayTag.SIMO
    mimo = ArrayConfig.mimo(3, 5, 2.0)
    assert (mimo.n_tx, mimo.n_rx) == (3, 5)
    assert pair_distances(mimo, ET, 10.0).shape == (5, 3)
    custom = ArrayConfig.custom([0.0, 0.3], [-0.5, 0.1, 0.9])
    assert custom.aperture == pytest.approx(1.4)
    with pytest.raises(InvalidParameterError):
        ArrayConfig(np.zeros(1), np.array([-1.0, 1.0]), 1.0, ArrayTag.SIMO)


def test_pair_distances_layout():
    a = ArrayConfig.mimo(2, 3, 1.0)
    d = pair_distances(a, PT, 5.0)
    for i, y in enumerate(a.rx):
        for j, z in enumerate(a.tx):
            assert d[i, j] == math.hypot(5.0, z) + math.hypot(5.0, y)


def test_load_layout(tmp_path):
    path = tmp_path / "layout.txt"
    path.write_text("# test layout\n[tx]\n0.0\n0.5\n\n[rx]\n-0.25\n0.25  # end\n")
    a = load_layout(path)
    assert a.tag is ArrayTag.CUSTOM
    assert a.tx.tolist() == [0.0, 0.5] and a.rx.tolist() == [-0.25, 0.25]
    path.write_text("[tx]\n0.0\n")
    with pytest.raises(InvalidParameterError):
        load_layout(path)
