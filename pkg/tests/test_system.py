from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unishear.system import (
    BandDescriptor,
    NotAdmissible,
    WrongAnchor,
    as_fraction,
    atom_ft,
    band_count,
    band_listing,
    band_weight,
    enumerate_bands,
    nearest_admissible,
    preset_alpha,
    preset_from_name,
    preset_parabolic,
    preset_wavelet,
    validate_scaling_sequence,
)


def test_validate_examples():
    assert validate_scaling_sequence([0, 1, 1]).values == (0, 1, 1)
    with pytest.raises(NotAdmissible) as e:
        validate_scaling_sequence([0, 1, 0.3])
    assert e.value.j == 2
    validate_scaling_sequence([0, 1, 1, Fraction(5, 3)])
    with pytest.raises(NotAdmissible) as e:
        validate_scaling_sequence([0, 1, 1, 2])
    assert e.value.j == 3
    with pytest.raises(WrongAnchor):
        validate_scaling_sequence([1, 1])


def test_values_are_exact_rationals():
    seq = validate_scaling_sequence(["0", "1", "3/2"])
    assert all(isinstance(v, Fraction) for v in seq.values)
    assert as_fraction(0.3) == Fraction(3, 10)


def test_preset_alpha_examples():
    assert preset_alpha(1, 6).values[1:] == (1,) * 5
    assert preset_alpha(0.5, 3).alpha(2) == Fraction(1, 2)
    assert preset_alpha(0.4, 3).alpha(2) == Fraction(1, 2)
    with pytest.raises(ValueError):
        preset_alpha(2, 3)


def test_tie_goes_up():
    # 0.25 lies halfway between 0 and 1/2 at j = 2
    assert nearest_admissible(0.25, 2) == Fraction(1, 2)
    assert nearest_admissible(Fraction(1, 6), 3) == Fraction(1, 3)


@given(st.fractions(min_value=0, max_value=Fraction(199, 100)), st.integers(1, 12))
def test_nearest_admissible_is_nearest(a, j):
    best = nearest_admissible(a, j)
    cands = [Fraction(m, j) for m in range(0, 2 * j)]
    assert best in cands
    assert abs(best - a) == min(abs(c - a) for c in cands)


def test_wavelet_preset():
    seq = preset_wavelet(4)
    assert seq.values == (0, 1, Fraction(3, 2), Fraction(5, 3))
    for j in range(1, 4):
        assert seq.shear_bound(j) == 2
        assert 2 ** seq.alpha_exp(j) == 2 ** (2 * j) // 2
    bands = enumerate_bands(seq)
    for j in range(1, 4):
        at = [b for b in bands if b.j == j]
        assert len(at) == 8
        assert sorted({b.l for b in at if b.iota != "boundary"}) == [-1, 0, 1]
        assert sorted(b.l for b in at if b.iota == "boundary") == [-2, 2]


def test_parabolic_bands_j2():
    bands = [b for b in enumerate_bands(preset_parabolic(3)) if b.j == 2]
    for iota in ("h", "v"):
        assert [b.l for b in bands if b.iota == iota] == list(range(-3, 4))
    assert [b.l for b in bands if b.iota == "boundary"] == [-4, 4]


def test_j0_bands():
    bands = [b for b in enumerate_bands(preset_parabolic(2)) if b.j == 0]
    assert [(b.iota, b.l) for b in bands] == [("h", 0), ("v", 0), ("boundary", -1), ("boundary", 1)]


@pytest.mark.parametrize("name,J,count", [("parabolic", 4, 61), ("wavelet", 4, 29), ("alpha=0.5", 4, 109)])
def test_band_count_formula(name, J, count):
    seq = preset_from_name(name, J)
    assert band_count(seq) == count == len(enumerate_bands(seq))


def test_enumeration_deterministic():
    a = enumerate_bands(preset_alpha(0.5, 4))
    b = enumerate_bands(preset_alpha(0.5, 4))
    assert a == b
    assert a[0].iota == "coarse"


def test_preset_from_name():
    assert preset_from_name("0,1,3/2", 3).values == (0, 1, Fraction(3, 2))
    with pytest.raises(ValueError):
        preset_from_name("0,1", 3)
    with pytest.raises(ValueError):
        preset_from_name("curvelet", 3)


def test_normalization():
    seq = preset_alpha(0.5, 3)
    for b in enumerate_bands(seq):
        if b.iota in ("h", "v"):
            assert b.normalization == pytest.approx(2.0 ** (-float((2 + b.alpha) * b.j) / 2))
        if b.iota == "boundary" and b.j >= 1:
            assert b.normalization == pytest.approx(2.0 ** (-float((2 + b.alpha) * b.j) / 2 - 0.5))


def test_interior_atom_outside_trapezoid_is_zero():
    seq = preset_parabolic(3)
    b = next(x for x in enumerate_bands(seq) if x.j == 2 and x.iota == "h" and x.l == 1)
    # slope xi2/xi1 outside [(l-1)/L, (l+1)/L]
    assert atom_ft(b, 6.0, 6.0) == 0.0
    assert atom_ft(b, 6.0, -1.0) == 0.0
    assert atom_ft(b, 6.0, 1.5) > 0


def test_coarse_atom_at_origin():
    coarse = enumerate_bands(preset_parabolic(2))[0]
    assert atom_ft(coarse, 0.0, 0.0) == 1.0


def _boundary_branches(b, x1, x2):
    L, s = b.shear_bound, np.sign(b.l)
    from unishear.atoms import bump, corona

    h = corona(x1, x2, b.j) * bump(L * (x2 / x1 - s))
    v = corona(x1, x2, b.j) * bump(L * (x1 / x2 - s))
    return h, v


@pytest.mark.parametrize("j", [1, 2, 3])
def test_boundary_seam(j):
    seq = preset_parabolic(4)
    for b in (x for x in enumerate_bands(seq) if x.j == j and x.iota == "boundary"):
        s = np.sign(b.l)
        a = np.arange(2 ** (2 * j - 4), 2 ** (2 * j - 1) + 1, 0.25)
        a = a[a > 0]
        for sign1 in (1, -1):
            x1, x2 = sign1 * a, s * sign1 * a
            h, v = _boundary_branches(b, x1, x2)
            assert np.allclose(h, v, atol=1e-15)
            assert np.allclose(band_weight(b, x1, x2), h, atol=1e-15)
            # gradients of the two branches agree on the seam
            d = 1e-4 * np.abs(a)
            for e1, e2 in ((1, 0), (0, 1)):
                hp, vp = _boundary_branches(b, x1 + d * e1, x2 + d * e2)
                hm, vm = _boundary_branches(b, x1 - d * e1, x2 - d * e2)
                gh, gv = (hp - hm) / (2 * d), (vp - vm) / (2 * d)
                assert np.max(np.abs(gh - gv)) < 1e-6


def test_band_listing_header_and_rows():
    seq = preset_wavelet(2)
    text = band_listing(enumerate_bands(seq))
    lines = text.strip().split("\n")
    assert lines[0] == "j,l,iota,alpha_num,alpha_den,normalization"
    assert len(lines) == 1 + band_count(seq)
    assert lines[1].startswith("-1,0,coarse,0,1,")


def test_band_weight_rejects_unknown_orientation():
    b = BandDescriptor(1, 0, "diag", Fraction(1), 1.0, 2)
    with pytest.raises(ValueError):
        band_weight(b, 1.0, 1.0)
