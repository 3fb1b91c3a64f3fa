import math

import numpy as np
import pytest
from scipy import stats

from asrmeso.errors import ConfigurationError, PackingSaturationError
from asrmeso.meshgen import AGGREGATE, GEL, assign_phases, build_grid_mesh
from asrmeso.mesogen import (
    MesoStructure,
    SieveCurve,
    make_rng,
    pack,
    read_structure,
    sample_diameter,
    seed_gel_elements,
    write_structure,
)

CURVE = SieveCurve.from_target_fraction(4.0, 20.0, 0.5, 0.40)


def test_target_fraction_inverts_vagg_formula():
    # v_agg = [1 - (d_min/d_max)^n_f] v0
    assert CURVE.v0_agg == pytest.approx(0.40 / (1.0 - math.sqrt(0.2)), rel=1e-15)
    assert CURVE.v_agg == pytest.approx(0.40, rel=1e-15)


def test_passing_fraction_endpoints():
    assert CURVE.passing(20.0) == pytest.approx(1.0)
    assert CURVE.passing(5.0) == pytest.approx(0.5)


@pytest.mark.parametrize("u", [0.0, 0.1, 0.37, 0.5, 0.99, 1.0])
def test_sample_diameter_inverts_truncated_sieve_cdf(u):
    d = sample_diameter(CURVE, u)
    p_min = CURVE.passing(CURVE.d_min)
    assert (CURVE.passing(d) - p_min) / (1.0 - p_min) == pytest.approx(u, abs=1e-14)
    assert CURVE.d_min <= d <= CURVE.d_max


def test_sample_diameter_midpoint_value():
    p_min = math.sqrt(4.0 / 20.0)
    assert sample_diameter(CURVE, 0.5) == pytest.approx(20.0 * (0.5 * (1 - p_min) + p_min) ** 2, rel=1e-14)


def test_sampled_diameters_follow_sieve_curve_ks():
    rng = make_rng(123)
    d = sample_diameter(CURVE, rng.random(100_000))
    p_min = CURVE.passing(CURVE.d_min)

    def cdf(x):
        return (CURVE.passing(np.clip(x, CURVE.d_min, CURVE.d_max)) - p_min) / (1 - p_min)

    assert stats.kstest(d, cdf).statistic < 0.01


def test_sample_diameter_rejects_out_of_range():
    with pytest.raises(ConfigurationError):
        sample_diameter(CURVE, 1.5)


@pytest.mark.parametrize("args", [(4, 4, 0.5, 0.5), (4, 20, 0.0, 0.5), (4, 20, 0.5, 1.2)])
def test_invalid_sieve_curve(args):
    with pytest.raises(ConfigurationError):
        SieveCurve(*args)


@pytest.fixture(scope="module")
def packed():
    return pack(CURVE, (35.0, 35.0, 70.0), seed=3)


def test_pack_no_overlap_and_inside_box(packed):
    c = packed.centers
    r = packed.diameters / 2
    box = np.array(packed.box)
    assert np.all(c - r[:, None] >= -1e-12)
    assert np.all(c + r[:, None] <= box + 1e-12)
    for i in range(len(r)):
        for j in range(i):
            assert np.linalg.norm(c[i] - c[j]) >= r[i] + r[j] - 1e-12


def test_pack_reaches_target_with_bounded_overshoot(packed):
    frac = packed.sphere_fraction()
    assert frac == pytest.approx(packed.achieved_v_agg, rel=1e-12)
    assert frac >= CURVE.v_agg
    largest = math.pi / 6 * CURVE.d_max**3 / packed.box_volume
    assert frac - CURVE.v_agg <= largest


def test_pack_largest_first(packed):
    d = packed.diameters
    assert np.all(np.diff(d) <= 0)


def test_pack_respects_clearance():
    curve = SieveCurve.from_target_fraction(4.0, 8.0, 0.5, 0.15)
    s = pack(curve, (30.0, 30.0, 30.0), seed=5, clearance=1.5)
    c, r = s.centers, s.diameters / 2
    gaps = [np.linalg.norm(c[i] - c[j]) - r[i] - r[j] for i in range(len(r)) for j in range(i)]
    assert min(gaps) >= 1.5 - 1e-12


def test_pack_deterministic_per_seed():
    a = pack(CURVE, (35.0, 35.0, 70.0), seed=1)
    b = pack(CURVE, (35.0, 35.0, 70.0), seed=1)
    c = pack(CURVE, (35.0, 35.0, 70.0), seed=3)
    assert a.spheres == b.spheres
    assert a.spheres != c.spheres


def test_pack_saturation_reports_achieved_fraction():
    with pytest.raises(PackingSaturationError) as exc:
        pack(CURVE, (35.0, 35.0, 70.0), seed=1, clearance=2.5, max_rejects=2000)
    assert 0 < exc.value.achieved_fraction < CURVE.v_agg


def test_pack_box_smaller_than_dmax():
    with pytest.raises(ConfigurationError):
        pack(CURVE, (15.0, 40.0, 40.0), seed=1)


def test_structure_file_round_trip(tmp_path, packed):
    p = tmp_path / "s.txt"
    write_structure(p, packed)
    back = read_structure(p)
    assert back == packed
    write_structure(tmp_path / "t.txt", back)
    assert p.read_bytes() == (tmp_path / "t.txt").read_bytes()


def test_read_structure_rejects_foreign_file(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("hello\n")
    with pytest.raises(ConfigurationError):
        read_structure(p)


def test_empty_structure_round_trip(tmp_path):
    s = MesoStructure.empty((10.0, 10.0, 10.0), seed=4)
    write_structure(tmp_path / "e.txt", s)
    assert read_structure(tmp_path / "e.txt") == s


@pytest.fixture(scope="module")
def phased(packed):
    return assign_phases(build_grid_mesh(packed.box, 2.5), packed)


def test_gel_seeding_smallest_prefix_reaching_ratio(phased):
    ids = seed_gel_elements(phased, 0.025, seed=7)
    agg_vol = phased.phase_volume(AGGREGATE)
    vol = phased.element_volume[ids].sum()
    assert np.all(phased.phase[ids] == AGGREGATE)
    assert vol >= 0.025 * agg_vol * (1 - 1e-12)
    # one element fewer would fall short (all Kuhn elements have equal volume)
    assert vol - phased.element_volume[ids[0]] < 0.025 * agg_vol
    assert np.array_equal(ids, np.unique(ids))


def test_gel_seeding_deterministic(phased):
    a = seed_gel_elements(phased, 0.025, seed=7)
    assert np.array_equal(a, seed_gel_elements(phased, 0.025, seed=7))
    assert not np.array_equal(a, seed_gel_elements(phased, 0.025, seed=8))
    g = phased.with_gel(a)
    assert np.sum(g.phase == GEL) == len(a)


@pytest.mark.parametrize("ratio", [0.0, 1.0, -0.1])
def test_gel_seeding_bad_ratio(phased, ratio):
    with pytest.raises(ConfigurationError):
        seed_gel_elements(phased, ratio, seed=1)


def test_gel_seeding_tiny_ratio_gives_one_element(phased):
    assert len(seed_gel_elements(phased, 1e-9, seed=1)) == 1


def test_gel_seeding_half_of_uniform_toy_mesh():
    m = build_grid_mesh((10.0, 10.0, 5.0), 2.5)
    ph = np.zeros(m.n_elements, dtype=np.int8)
    ph[:100] = AGGREGATE
    m = m.with_phase(ph)
    for target in (0.5, 0.255, 0.01):
        assert len(seed_gel_elements(m, target, seed=2)) == math.ceil(round(target * 100, 9))
