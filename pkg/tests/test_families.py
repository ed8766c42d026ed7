import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import multivariate_normal, ncx2, norm

from gaussfk.exceptions import DomainError
from gaussfk.families import (DEFAULT_PARAMS, FAMILIES, HALFSPACE_PARAM, domain_family,
                              family_level, parse_shape, shape_mask)
from gaussfk.gauss import GaussianGrid, Halfspace, gauss_measure, symdiff_measure


def exact_measure(name, p):
    """Gaussian measure of each family member in closed form or by quadrature."""
    if name == "wedge":
        return p / (2.0 * math.pi)
    if name == "two-slabs":
        return 0.5
    if name == "notch":
        return 0.5 - 0.5 * (1.0 - math.exp(-0.5 * p * p))
    if name == "tilted-cap":
        if p == 0.0:
            return norm.cdf(0.5)
        c = math.cos(p)
        return multivariate_normal(mean=[0, 0], cov=[[1, c], [c, 1]]).cdf([0.5, 0.5])
    if name == "bump":
        return quad(lambda y: norm.pdf(y) * norm.cdf(p * math.exp(-2.0 * y * y)), -10, 10)[0]
    if name == "shifted-ball-complement":
        if p == 0.0:
            return 0.5
        return 1.0 - ncx2.cdf(1.0 / p ** 2, 2, 1.0 / p ** 2)
    raise KeyError(name)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_measures_match_closed_forms(grid256, name):
    for mem in domain_family(name, grid256):
        assert gauss_measure(mem.mask) == pytest.approx(exact_measure(name, mem.param), abs=3e-3)


def test_wedge_measure_at_two_resolutions():
    for n in (128, 256):
        m = GaussianGrid(2, n).mask_from_level(family_level("wedge", 3 * math.pi / 4))
        assert gauss_measure(m) == pytest.approx(0.375, abs=2e-3)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_halfspace_end(grid256, name):
    p = HALFSPACE_PARAM[name]
    assert p == DEFAULT_PARAMS[name][0]
    mask = grid256.mask_from_level(family_level(name, p))
    m = gauss_measure(mask)
    # every limit is a halfspace; its normal is the rotated e1 (the wedge
    # around -e1 opens to {x1 < 0} as well)
    rot = 0.1
    omega = np.array([math.cos(rot), math.sin(rot)])
    r = {"tilted-cap": 0.5}.get(name, 0.0)
    hs = Halfspace(omega, r).rasterize(grid256)
    assert symdiff_measure(mask, hs) < 2e-3
    assert m == pytest.approx(hs.measure, abs=2e-3)


def test_wedge_pi_is_halfspace(grid256):
    mem = domain_family("wedge", grid256, params=[math.pi])[0]
    assert mem.is_halfspace
    assert gauss_measure(mem.mask) == pytest.approx(0.5, abs=1e-3)


def test_members_sorted_and_regrid(grid128):
    members = domain_family("bump", grid128, params=[0.6, 0.0, 0.2])
    assert [m.param for m in members] == [0.0, 0.2, 0.6]
    assert members[0].is_halfspace and not members[1].is_halfspace
    fine = members[1].regrid(GaussianGrid(2, 256))
    assert fine.grid.n == 256
    assert gauss_measure(fine) == pytest.approx(gauss_measure(members[1].mask), abs=5e-3)


def test_corpus_size(grid128):
    count = sum(len(domain_family(name, grid128)) for name in FAMILIES)
    assert len(FAMILIES) == 6 and count >= 30


def test_two_slabs_disconnected(grid128):
    from scipy import ndimage

    mask = grid128.mask_from_level(family_level("two-slabs", 0.3))
    assert ndimage.label(mask.inside)[1] == 2


def test_unknown_family(grid128):
    with pytest.raises(DomainError):
        family_level("spiral", 1.0)
    with pytest.raises(DomainError):
        domain_family("spiral", grid128)


def test_bad_parameters(grid128):
    with pytest.raises(DomainError):
        family_level("wedge", 7.0)
    with pytest.raises(DomainError):
        domain_family("wedge", grid128, params=[0.1])
    with pytest.raises(DomainError):
        GaussianGrid(1, 64).mask_from_level(family_level("wedge", 2.0))


def test_parse_shape():
    name, params = parse_shape("halfspace:omega=0.6/0.8,r=0.3")
    assert name == "halfspace"
    assert np.allclose(params["omega"], [0.6, 0.8]) and params["r"] == 0.3
    assert parse_shape(" disk ") == ("disk", {})
    with pytest.raises(DomainError):
        parse_shape("disk:radius")


def test_shape_masks(grid128):
    hs = shape_mask("halfspace:angle=0.5,r=0.2", grid128)
    assert gauss_measure(hs) == pytest.approx(norm.cdf(0.2), abs=2e-3)
    d = shape_mask("disk:center=0/0,radius=1.5", grid128)
    assert gauss_measure(d) == pytest.approx(1 - math.exp(-1.125), abs=5e-3)
    w = shape_mask("wedge:theta=2.356", grid128)
    assert gauss_measure(w) == pytest.approx(2.356 / (2 * math.pi), abs=3e-3)
    iv = shape_mask("interval:a=-1,b=0.5", GaussianGrid(1, 512))
    assert gauss_measure(iv) == pytest.approx(norm.cdf(0.5) - norm.cdf(-1), abs=3e-3)
    with pytest.raises(DomainError):
        shape_mask("wedge:theta=2,rotation=0.1,extra=1", grid128)
    with pytest.raises(DomainError):
        shape_mask("hexagon:r=1", grid128)
