import warnings

import numpy as np
import pytest

from conftest import system
from unishear.model import (
    EmptyMask,
    ScaleTooFine,
    WeightSpec,
    default_weight,
    filter_recovery_check,
    filtered_model,
    make_mask,
    model_spectrum,
    project_known,
    project_missing,
    weight,
    weight_ft,
    weight_ft_quadrature,
)
from unishear.transform import image_spectrum

# mpmath (30 digits) values of w_hat(xi) for the bump with rho = 1/4
W_HAT_QUARTER = {
    0.0: 0.301725080609469043834059499083,
    1.0: 0.246782238356452452675010010527,
    2.5: 0.0612989736289467526744709285966,
    8.0: 0.000197628861220471376035960205166,
}


def test_weight_axioms():
    spec = WeightSpec(rho=0.3)
    x = np.linspace(-1, 1, 2001)
    w = weight(x, spec)
    assert np.all((0 <= w) & (w <= 1))
    assert np.all(w[np.abs(x) >= 0.3] == 0)
    assert weight(0.0, spec) == 1.0


def test_weight_spec_validation():
    with pytest.raises(ValueError):
        WeightSpec(rho=0)
    with pytest.raises(ValueError):
        WeightSpec(profile="box")
    with pytest.raises(ValueError):
        WeightSpec(amplitude=2)


def test_weight_ft_frozen_values():
    spec = WeightSpec(rho=0.25)
    for xi, ref in W_HAT_QUARTER.items():
        assert abs(weight_ft(xi, spec).real - ref) < 1e-12


def test_weight_ft_against_quadrature():
    spec = WeightSpec(rho=0.25)
    xi = np.random.default_rng(0).uniform(-40, 40, 20)
    fast = weight_ft(xi, spec)
    for x, v in zip(xi, fast):
        assert abs(v - weight_ft_quadrature(x, spec)) < 1e-9


def test_weight_ft_decay():
    spec = WeightSpec(rho=0.25)
    assert abs(weight_ft(32 / spec.rho, spec)) < 1e-6 * abs(weight_ft(0.0, spec))


def test_weight_ft_oversample_floor():
    with pytest.raises(ValueError):
        weight_ft(0.0, WeightSpec(), oversample=4)


def test_default_rho_is_quarter_of_T():
    sys = system("parabolic", 64)
    assert default_weight(sys).rho == sys.grid.T / 4


@pytest.mark.parametrize("j", [1, 2])
def test_model_is_real_and_even(j):
    sys = system("parabolic", 64)
    F = model_spectrum(j, sys, default_weight(sys))
    m = filtered_model(j, sys)
    raw = np.fft.fftshift(np.fft.ifft2(F * 64 * 64))
    assert np.max(np.abs(raw.imag)) <= 1e-12
    f = m.image
    # even in x2 about the center pixel
    assert np.allclose(f[:, 1:], f[:, 1:][:, ::-1], atol=1e-14)


def test_model_spectrum_inside_corona():
    sys = system("parabolic", 128)
    X1, X2 = sys.grid.frequencies()
    m = np.maximum(np.abs(X1), np.abs(X2))
    for j in (1, 2):
        F = np.abs(image_spectrum(filtered_model(j, sys).image))
        outside = (m >= 2.0 ** (2 * j - 1)) | (m <= 2.0 ** (2 * j - 4))
        assert np.max(F[outside]) <= 1e-10 * np.max(F)


def test_scale_too_fine():
    sys = system("parabolic", 64)
    with pytest.raises(ScaleTooFine):
        filtered_model(4, sys)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_horizontal_concentration(j):
    # 99% of the energy within |x2| <= C 2^{-2j}, C = 16 (one corona period band)
    sys = system("parabolic", 256)
    f = filtered_model(j, sys).image
    x2 = sys.grid.coordinates()
    band = np.abs(x2) <= 16 * 2.0 ** (-2 * j)
    assert np.sum(f[:, band] ** 2) >= 0.99 * np.sum(f**2)


def test_mask_examples():
    sys = system("parabolic", 64)
    px = sys.grid.pixel
    # 2h = 7 pixels removes 7 columns, 2h = 8 pixels still 7
    for h in (3.5 * px, 4 * px):
        spec, m = make_mask(h, sys)
        assert spec.count == 7 and m.sum() == 7 * 64
        assert spec.columns == (29, 35)
        assert np.all(m[29:36]) and not m[28].any() and not m[36].any()
    assert make_mask(0.5 * px, sys)[0].count == 1
    spec, m = make_mask(sys.grid.T, sys)
    assert spec.count == 64
    with pytest.raises(ValueError):
        make_mask(0.0, sys)
    with pytest.raises(ValueError):
        make_mask(2 * sys.grid.T, sys)


def test_mask_float_edge():
    sys = system("parabolic", 512, eta=256)
    h = 8 * sys.grid.pixel * 2.0 ** 1.2 * 2.0 ** -1.2
    assert make_mask(h, sys)[0].count == 15
    assert make_mask(0.5 * sys.grid.pixel * 3, sys)[0].count == 3


def test_empty_mask_warns():
    sys = system("parabolic", 64)
    with pytest.warns(EmptyMask):
        spec, m = make_mask(0.4 * sys.grid.pixel, sys)
    assert spec.count == 0 and not m.any()


def test_projection_identities():
    sys = system("parabolic", 32)
    f = np.random.default_rng(1).standard_normal((32, 32))
    _, m = make_mask(2 * sys.grid.pixel, sys)
    k, mm = project_known(f, m), project_missing(f, m)
    assert np.array_equal(k + mm, f)
    assert np.array_equal(project_known(k, m), k)
    assert np.array_equal(project_missing(mm, m), mm)
    assert not np.any(project_known(mm, m))
    with pytest.raises(ValueError):
        project_known(f, m[:4])


def test_filter_recovery_check():
    sys = system("parabolic", 64)
    spec = default_weight(sys)
    assert filter_recovery_check(spec, sys) <= 1e-12
    zero = np.zeros(sys.N)
    assert filter_recovery_check(spec, sys, skip=[len(sys.data)], w_hat=zero) == 0.0
    assert filter_recovery_check(spec, sys, skip=[len(sys.data)]) > 0


def test_model_header():
    sys = system("parabolic", 64)
    m = filtered_model(2, sys)
    h = m.header(0.1)
    assert h == {"N": 64, "j": 2, "T": sys.grid.T, "rho": sys.grid.T / 4, "h": 0.1}
