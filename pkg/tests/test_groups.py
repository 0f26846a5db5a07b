"""Group descriptors, exponentials, sampling and subgroup naming."""

import numpy as np
import pytest

from orthofold import groups
from orthofold.errors import ClassificationError, InputError


def test_descriptor_shapes():
    assert groups.so3().lie.shape == (3, 3, 3)
    assert groups.so2().lie.shape == (1, 2, 2)
    assert groups.torus(3).lie.shape == (3, 6, 6)
    z = groups.finite(np.eye(2)[None])
    assert z.lie_dim == 0 and z.kind == "finite"
    with pytest.raises(InputError):
        groups.torus(0)


def test_exp_coeffs_is_orthogonal():
    rng = np.random.default_rng(0)
    for g in (groups.so3(), groups.so2(), groups.torus(2)):
        for _ in range(5):
            c = rng.normal(size=g.lie_dim)
            q = groups.exp_coeffs(g, c)
            assert np.allclose(q.T @ q, np.eye(g.size), atol=1e-12)
            assert abs(np.linalg.det(q) - 1.0) < 1e-10


def test_exp_coeffs_batch_matches_single():
    g = groups.so3()
    rng = np.random.default_rng(1)
    C = rng.normal(size=(7, 3))
    Q = groups.exp_coeffs_batch(g, C)
    for c, q in zip(C, Q):
        assert np.allclose(q, groups.exp_coeffs(g, c), atol=1e-12)


def test_torus_angles_round_trip():
    g = groups.torus(2)
    th = np.array([0.4, -2.0])
    q = groups.exp_coeffs(g, th)
    assert np.allclose(groups.torus_angles(g, q), th, atol=1e-12)


def test_sampling_is_deterministic_and_valid():
    g = groups.so3()
    a = groups.sample_elements(g, 64, np.random.default_rng(9))
    b = groups.sample_elements(g, 64, np.random.default_rng(9))
    assert np.array_equal(a, b)
    prod = np.einsum("bij,bkj->bik", a, a)
    assert np.abs(prod - np.eye(3)).max() < 1e-12


def test_adjoint_of_torus_is_trivial():
    g = groups.torus(2)
    el = groups.exp_coeffs(g, np.array([0.3, 1.1]))
    assert np.allclose(groups.adjoint_coeffs(g, el), np.eye(2), atol=1e-12)


def test_classify_trivial_and_finite():
    g = groups.so2()
    wits = np.eye(2)[None]
    cls = groups.classify_subgroup(g, np.zeros((1, 0)), wits)
    assert cls.display() == "Trivial"
    rot = groups.exp_coeffs(g, np.array([np.pi]))
    two = groups.classify_subgroup(g, np.zeros((1, 0)), np.stack([np.eye(2), rot]))
    assert two.display() == "Zn(2)"
    assert two.order == 2


def test_classify_circle_o2_and_full():
    g = groups.so3()
    kz = np.array([[0.0], [0.0], [1.0]])
    circle = groups.classify_subgroup(g, kz, np.eye(3)[None])
    assert circle.display() == "SO2"
    # a flip inverting the axis makes the two-component orthogonal group
    flip = np.diag([1.0, -1.0, -1.0])
    o2 = groups.classify_subgroup(g, kz, np.stack([np.eye(3), flip]))
    assert o2.display() == "O2"
    full = groups.classify_subgroup(g, np.eye(3), np.eye(3)[None])
    assert full.display() == "FullGroup"
    with pytest.raises(ClassificationError):
        groups.classify_subgroup(g, kz, np.zeros((0, 3, 3)))


def test_witness_must_normalize_the_algebra():
    g = groups.so3()
    kz = np.array([[0.0], [0.0], [1.0]])
    # rotation about x maps the z axis elsewhere
    bad = groups.exp_coeffs(g, np.array([0.7, 0.0, 0.0]))
    with pytest.raises(ClassificationError):
        groups.classify_subgroup(g, kz, np.stack([np.eye(3), bad]))


def test_classes_conjugate():
    g = groups.so3()
    kz = np.array([[0.0], [0.0], [1.0]])
    kx = np.array([[1.0], [0.0], [0.0]])
    c1 = groups.classify_subgroup(g, kz, np.eye(3)[None])
    c2 = groups.classify_subgroup(g, kx, np.eye(3)[None])
    assert groups.classes_conjugate(c1, c2)
    rot = groups.exp_coeffs(groups.so2(), np.array([2.0 * np.pi / 3]))
    z3 = groups.classify_subgroup(
        groups.so2(), np.zeros((1, 0)), np.stack([np.eye(2), rot, rot @ rot])
    )
    assert not groups.classes_conjugate(c1, z3)


def test_in_identity_component():
    g = groups.so3()
    kz = np.array([[0.0], [0.0], [1.0]])
    inside = groups.exp_coeffs(g, np.array([0.0, 0.0, 1.3]))
    assert groups.in_identity_component(g, inside, kz)
    flip = np.diag([1.0, -1.0, -1.0])
    assert not groups.in_identity_component(g, flip, kz)


def test_product_group_blocks():
    g = groups.product([groups.so2(), groups.so2()])
    assert g.size == 4 and g.lie_dim == 2
    q = groups.exp_coeffs(g, np.array([0.5, -0.25]))
    assert np.allclose(q[:2, :2], groups.exp_coeffs(groups.so2(), np.array([0.5])))
    assert np.abs(q[:2, 2:]).max() == 0.0
