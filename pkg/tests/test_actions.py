"""Manifold models, the action catalog and point parsing."""

import numpy as np
import pytest

from orthofold import actions, groups
from orthofold.errors import (
    InputError,
    PointSpecError,
    StabilizerError,
    UnknownActionError,
)


def test_catalog_ids_resolve():
    for name in actions.catalog_ids():
        a = actions.get_action(name)
        assert a.name == name
    with pytest.raises(UnknownActionError):
        actions.get_action("s3-so4")


def test_parametrized_family_members():
    a = actions.get_action("s2-zn(7)")
    assert a.group.elements.shape[0] == 7
    b = actions.get_action("cn-tn(3)")
    assert b.manifold.ambient_dim == 6
    assert b.group.lie_dim == 3
    with pytest.raises(UnknownActionError):
        actions.get_action("cn-tn(0)")


def test_normalize_and_validate():
    s2 = actions.sphere(2)
    x = actions.normalize(s2, np.array([3.0, 0.0, 4.0]))
    assert abs(np.linalg.norm(x) - 1.0) < 1e-14
    with pytest.raises(InputError):
        actions.validate_point(s2, np.array([0.5, 0.0, 0.0]))
    with pytest.raises(InputError):
        actions.validate_point(s2, np.array([np.nan, 0.0, 1.0]))
    eu = actions.euclidean(4)
    y = actions.normalize(eu, np.array([5.0, 1.0, 0.0, 0.0]))
    assert np.array_equal(y, [5.0, 1.0, 0.0, 0.0])


def test_projective_distance_ignores_representative():
    rp2 = actions.real_projective(2)
    x = actions.normalize(rp2, np.array([0.3, -0.5, 0.7]))
    assert actions.distance(rp2, x, -x) < 1e-14
    cp2 = actions.complex_projective(2)
    z = actions.normalize(cp2, np.array([1.0, 0.0, 0.2, 0.1, 0.0, 0.4]))
    w = actions.to_complex(z) * np.exp(1j * 0.83)
    z2 = actions.normalize(cp2, actions.from_complex(w))
    assert actions.distance(cp2, z, z2) < 1e-12


def test_tangent_frame_is_orthonormal_horizontal():
    rng = np.random.default_rng(4)
    for m in (actions.sphere(2), actions.real_projective(2), actions.complex_projective(2)):
        x = actions.sample_points(m, 1, rng)[0]
        f = actions.tangent_frame(m, x)
        assert f.shape == (m.ambient_dim, m.intrinsic_dim)
        assert np.allclose(f.T @ f, np.eye(m.intrinsic_dim), atol=1e-10)
        assert np.abs(f.T @ x).max() < 1e-10


def test_act_matches_ambient_matrix():
    a = actions.get_action("s2xs2-so3")
    rng = np.random.default_rng(2)
    x = actions.sample_points(a.manifold, 1, rng)[0]
    g = groups.sample_elements(a.group, 1, rng)[0]
    y = actions.act(a, g, x)
    assert np.allclose(y[:3], g @ x[:3], atol=1e-12)
    assert np.allclose(y[3:], g @ x[3:], atol=1e-12)


def test_infinitesimal_action_rank_is_orbit_dim():
    a = actions.get_action("rp2-so2")
    # generic point moves, the fixed point does not
    moving = actions.normalize(a.manifold, np.array([0.6, 0.2, 0.5]))
    assert np.linalg.matrix_rank(actions.infinitesimal_action(a, moving)) == 1
    fixed = np.array([0.0, 0.0, 1.0])
    assert np.abs(actions.infinitesimal_action(a, fixed)).max() < 1e-12


def test_differential_of_element_is_isometry():
    a = actions.get_action("cp2-u1")
    x = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])  # fixed by the whole circle
    g = groups.exp_coeffs(a.group, np.array([0.9]))
    d = actions.differential_of_element(a, g, x)
    assert d.shape == (4, 4)
    assert np.allclose(d.T @ d, np.eye(4), atol=1e-8)
    # a non-stabilizing element is rejected
    moving = actions.normalize(a.manifold, np.array([0.7, 0.0, 0.7, 0.0, 0.0, 0.1]))
    with pytest.raises(StabilizerError):
        actions.differential_of_element(a, g, moving)


def test_interval_projection_ranges():
    rng = np.random.default_rng(8)
    for name in ("s2xs2-so3", "rp2-so2", "cp2-so3"):
        a = actions.get_action(name)
        pts = actions.sample_points(a.manifold, 40, rng)
        vals = a.interval.projection(pts)
        lo, hi = a.interval.endpoints
        assert vals.min() >= lo - 1e-9 and vals.max() <= hi + 1e-9
        # the projection is invariant along orbits
        g = groups.sample_elements(a.group, 1, rng)[0]
        moved = a.interval.projection(np.stack([actions.act(a, g, p) for p in pts]))
        assert np.abs(moved - vals).max() < 1e-9


def test_parse_point_real_and_complex():
    a = actions.get_action("s2-zn(5)")
    x = actions.parse_point(a, "0, 0, 2")
    assert np.allclose(x, [0.0, 0.0, 1.0])
    c = actions.get_action("cp2-u1")
    z = actions.parse_point(c, "1, 0, 0")
    assert np.allclose(z, [1.0, 0, 0, 0, 0, 0])
    w = actions.parse_point(c, "0, 1+1i, 0")
    assert abs(np.linalg.norm(w) - 1.0) < 1e-12
    with pytest.raises(PointSpecError):
        actions.parse_point(a, "1, 2")
    with pytest.raises(PointSpecError):
        actions.parse_point(a, "0, 0, zero")
    with pytest.raises(PointSpecError):
        actions.parse_point(a, "0, 0, 0")


def test_sample_points_live_on_the_manifold():
    rng = np.random.default_rng(3)
    for m in (actions.sphere(2), actions.complex_projective(2)):
        pts = actions.sample_points(m, 25, rng)
        for p in pts:
            actions.validate_point(m, p)
