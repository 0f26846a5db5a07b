"""Cloud construction, partitions, principal data and singularity labels."""

import numpy as np
import pytest

from orthofold import actions, strata
from orthofold.errors import InputError

from oracles import refines


def test_build_cloud_is_deterministic(cloud_factory):
    a = actions.get_action("rp2-so2")
    small = strata.build_cloud(a, 12, seed=5)
    again = strata.build_cloud(a, 12, seed=5)
    assert np.array_equal(small.points, again.points)
    assert [st.subgroup.display() for st in small.stabs] == [
        st.subgroup.display() for st in again.stabs
    ]
    with pytest.raises(InputError):
        strata.build_cloud(a, 0)


def test_cloud_appends_special_loci(cloud_factory):
    cloud = cloud_factory("rp2-so2")
    assert len(cloud) > cloud.sample_count
    pole = np.array([0.0, 0.0, 1.0])
    dists = np.linalg.norm(np.abs(cloud.points) - pole, axis=1)
    assert dists.min() < 1e-9


def test_quotient_dimension_pointwise():
    a = actions.get_action("rp2-so2")
    assert strata.quotient_dimension(a, [0.0, 0.0, 1.0]) == 2
    assert strata.quotient_dimension(a, [0.6, 0.0, 0.8]) == 1
    z = actions.get_action("s2-zn(5)")
    assert strata.quotient_dimension(z, [0.0, 0.0, 1.0]) == 2
    assert strata.quotient_dimension(z, [0.6, 0.0, 0.8]) == 2


def test_dimension_identity_on_a_cloud(cloud_factory):
    cloud = cloud_factory("cp2-so3")
    intrinsic = cloud.model.manifold.intrinsic_dim
    assert np.all(cloud.orbit_dims + cloud.quotient_dims == intrinsic)


def test_orbit_type_partition_rp2(cloud_factory):
    cloud = cloud_factory("rp2-so2")
    part = strata.orbit_type_partition(cloud)
    labels = sorted(lab["label"] for lab in part.block_labels)
    assert labels == ["SO2", "Trivial", "Zn(2)"]
    strata.check_partition(part.blocks, len(cloud))


def test_isostabilizer_refines_orbit_type(cloud_factory):
    for name in ("rp2-so2", "cp2-u1", "s2-zn(5)"):
        cloud = cloud_factory(name)
        ot = strata.orbit_type_partition(cloud)
        iso = strata.isostabilizer_decomposition(cloud)
        strata.check_partition(iso.blocks, len(cloud))
        assert refines(iso.blocks, ot.blocks)


def test_isostabilizer_splits_conjugate_circles(cloud_factory):
    # both poles of the product action carry circle stabilizers around
    # different axes, which the decomposition must keep apart
    cloud = cloud_factory("s2xs2-so3")
    iso = strata.isostabilizer_decomposition(cloud)
    circles = [lab for lab in iso.block_labels if lab["subgroup"].display() == "SO2"]
    assert len(circles) >= 2


def test_principal_data_rp2(cloud_factory):
    cloud = cloud_factory("rp2-so2")
    pr = strata.principal_dimension(cloud)
    assert pr.value == 1
    assert pr.subgroup.display() == "Trivial"
    assert pr.orbit_dim == 1
    # exceptional flags mark the half-turn locus, not the fixed point
    for i, st in enumerate(cloud.stabs):
        if st.subgroup.display() == "Zn(2)":
            assert bool(pr.exceptional[i])
        else:
            assert not bool(pr.exceptional[i])


def test_singularity_labels_rp2(cloud_factory):
    cloud = cloud_factory("rp2-so2")
    labels = strata.singularity_labels(cloud)
    by_class = {}
    for st, lab in zip(cloud.stabs, labels):
        by_class.setdefault(st.subgroup.display(), set()).add(lab.display())
    assert by_class["Trivial"] == {"ManifoldPoint"}
    assert by_class["Zn(2)"] == {"OrbifoldPoint(2)"}
    assert by_class["SO2"] == {"OrthofoldPoint"}


def test_singularity_labels_zn(cloud_factory):
    cloud = cloud_factory("s2-zn(5)")
    labels = strata.singularity_labels(cloud)
    displays = {lab.display() for lab in labels}
    assert displays == {"ManifoldPoint", "OrbifoldPoint(5)"}


def test_toric_depth_values():
    assert strata.toric_depth([1.0, 2.0]) == (0, 2)
    assert strata.toric_depth([0.0, 2.0]) == (1, 3)
    assert strata.toric_depth([0.0, 0.0, 0.0]) == (3, 6)
    with pytest.raises(InputError):
        strata.toric_depth([-1.0, 0.0])
    with pytest.raises(InputError):
        strata.toric_depth([])


def test_toric_consistency_handpicked():
    a = actions.get_action("cn-tn(2)")
    assert strata.toric_consistency(a, [0.5, 0.1, -0.3, 0.9])
    assert strata.toric_consistency(a, [0.0, 0.0, 1.0, 0.0])
    assert strata.toric_consistency(a, [0.0, 0.0, 0.0, 0.0])
    with pytest.raises(InputError):
        strata.toric_consistency(actions.get_action("rp2-so2"), [0.0, 0.0, 1.0])


def test_check_partition_rejects_overlap_and_gap():
    with pytest.raises(InputError):
        strata.check_partition([(0, 1), (1, 2)], 3)
    with pytest.raises(InputError):
        strata.check_partition([(0,), (2,)], 3)
    strata.check_partition([(0, 2), (1,)], 3)
