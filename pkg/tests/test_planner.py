"""Planner tests: slicing, contours, meander, orientation, metrics."""

import numpy as np
import pytest

from conftest import grid_cloud, make_cloud, random_rotation
from surftreat.errors import (
    EmptyBand,
    NoContactWaypoints,
    NoContours,
    NotProjectivelyPlanar,
)
from surftreat.geometry import (
    PointCloud,
    RigidTransform,
    SpatialIndex,
    apply_transform,
    estimate_normals,
    pca_frame,
)
from surftreat.perception import ScanSpec, make_synthetic_scan
from surftreat.planner import (
    PlannerConfig,
    alignment_metrics,
    check_projectively_planar,
    connect_meander,
    define_slicing_planes,
    extract_contour,
    orient_waypoints,
    plan_path,
    quaternion_to_matrix,
)

CYL = ScanSpec(surface="cylinder-patch", size=(0.3, 0.2), spacing=1e-3, radius=2.0)


def _plane_cloud(size=(0.1, 0.1), spacing=1e-3, **kw):
    cloud, _ = make_synthetic_scan(ScanSpec(size=size, spacing=spacing, **kw))
    return cloud


# -------------------------------------------------------------- slicing


def test_plane_count_and_positions():
    frame = pca_frame(grid_cloud(101, 61))
    planes = define_slicing_planes(frame, stepover=0.02)
    assert len(planes) == 6
    offs = [p.offset_u for p in planes]
    np.testing.assert_allclose(offs, [-0.05, -0.03, -0.01, 0.01, 0.03, 0.05], atol=1e-12)


def test_single_plane_when_stepover_exceeds_surface():
    frame = pca_frame(grid_cloud(101, 61))
    planes = define_slicing_planes(frame, stepover=1.0)
    assert len(planes) == 1
    assert planes[0].offset_u == 0.0
    np.testing.assert_allclose(planes[0].point, frame.origin, atol=1e-12)


def test_edge_planes_are_inset_by_half_band():
    frame = pca_frame(grid_cloud(101, 61))
    planes = define_slicing_planes(frame, stepover=0.02, band_halfwidth=1.5e-3)
    assert planes[0].offset_u == pytest.approx(-0.05 + 0.75e-3)
    assert planes[-1].offset_u == pytest.approx(0.05 - 0.75e-3)


def test_plane_normals_follow_rotation(rng):
    cloud = grid_cloud(101, 61)
    rot = random_rotation(rng)
    frame0 = pca_frame(cloud)
    frame1 = pca_frame(apply_transform(cloud, RigidTransform(rot, np.zeros(3))))
    p0 = define_slicing_planes(frame0, 0.02)
    p1 = define_slicing_planes(frame1, 0.02)
    assert len(p0) == len(p1)
    dot = abs(np.dot(rot @ p0[0].normal, p1[0].normal))
    assert abs(dot - 1) < 1e-6


# -------------------------------------------------------------- contours


def _contour_for(cloud, offset_u=0.0, band=1.5e-3, spacing=5e-3, window=5):
    frame = pca_frame(cloud)
    planes = define_slicing_planes(frame, stepover=1.0)
    plane = planes[0]
    plane.point = frame.origin + offset_u * frame.u
    return extract_contour(cloud, frame, plane, 0, band, spacing, window), frame


def test_contour_on_plane_is_straight():
    contour, frame = _contour_for(grid_cloud(101, 81))
    pts = contour.positions
    u_coord = (pts - frame.origin) @ frame.u
    assert np.abs(u_coord).max() < 1e-9          # projected onto the plane
    assert np.abs(pts[:, 2]).max() < 1e-9        # stays on the surface
    assert np.all(np.diff(contour.arc_params) > 0)


def test_contour_follows_cylinder_arc():
    cloud, _ = make_synthetic_scan(CYL)
    contour, frame = _contour_for(cloud)
    # Analytic arc: z = R - sqrt(R^2 - y^2) in scan coordinates.
    z_true = CYL.radius - np.sqrt(CYL.radius**2 - contour.positions[:, 1]**2)
    assert np.abs(contour.positions[:, 2] - z_true).max() < 1e-4


def test_contour_empty_band():
    cloud = grid_cloud(41, 41)
    frame = pca_frame(cloud)
    planes = define_slicing_planes(frame, stepover=1.0)
    planes[0].point = frame.origin + 1.0 * frame.u  # far outside
    with pytest.raises(EmptyBand):
        extract_contour(cloud, frame, planes[0], 0, 1.5e-3, 5e-3, 5)


def test_contour_spacing_uniform_within_10pct():
    cloud, _ = make_synthetic_scan(CYL)
    contour, _ = _contour_for(cloud)
    gaps = np.diff(contour.arc_params)
    assert gaps.max() <= 2 * 5e-3
    assert np.abs(gaps - gaps.mean()).max() / gaps.mean() < 0.10


# --------------------------------------------------------------- meander


def _straight_contours(n, stepover=0.02, length=0.1, spacing=5e-3):
    from surftreat.planner import Contour
    contours = []
    for i in range(n):
        ys = np.arange(0, length + spacing / 2, spacing)
        pts = np.stack([np.full_like(ys, i * stepover), ys, np.zeros_like(ys)], axis=1)
        contours.append(Contour(plane_id=i, positions=pts,
                                arc_params=ys.copy()))
    return contours


def test_meander_single_contour_passthrough():
    contours = _straight_contours(1)
    positions, kinds = connect_meander(contours, 5e-3)
    np.testing.assert_array_equal(positions, contours[0].positions)
    assert set(kinds) == {"contact"}


def test_meander_reverses_second_contour_shortest_link():
    contours = _straight_contours(2)
    positions, kinds = connect_meander(contours, 5e-3)
    contact = positions[[k == "contact" for k in kinds]]
    n = len(contours[0].positions)
    end_first = contours[0].positions[-1]
    start_second = contact[n]
    # Oracle: of the two orientations of contour 1, the meander picks the
    # one whose connect hop is shortest; both end at y = max here.
    hop = np.linalg.norm(start_second - end_first)
    alt = np.linalg.norm(contours[1].positions[0] - end_first)
    assert hop == pytest.approx(0.02, abs=1e-9)
    assert hop <= alt
    np.testing.assert_allclose(start_second, contours[1].positions[-1], atol=1e-12)


def test_meander_parity_of_three_contours():
    contours = _straight_contours(3)
    positions, kinds = connect_meander(contours, 5e-3)
    contact = positions[[k == "contact" for k in kinds]]
    n = len(contours[0].positions)
    dirs = [np.sign(contact[i * n + n - 1][1] - contact[i * n][1]) for i in range(3)]
    assert dirs == [1.0, -1.0, 1.0]


def test_meander_rejects_empty():
    with pytest.raises(NoContours):
        connect_meander([], 5e-3)


# ------------------------------------------------------------ orientation


def test_orientation_flat_plane_zero_attack():
    cloud = estimate_normals(grid_cloud(41, 41), 16)
    positions = cloud.points[:5]
    wps = orient_waypoints(positions, ["contact"] * 5, cloud, 0.0)
    for wp in wps:
        tool_z = quaternion_to_matrix(wp.orientation)[:, 2]
        np.testing.assert_allclose(tool_z, [0, 0, -1], atol=1e-9)
        assert abs(np.linalg.norm(wp.orientation) - 1) < 1e-9


def test_orientation_attack_angle_tilts_about_travel():
    cloud = estimate_normals(grid_cloud(41, 41), 16)
    ys = np.arange(5) * 1e-3
    positions = np.stack([np.zeros(5), ys, np.zeros(5)], axis=1)  # travel +y
    wps = orient_waypoints(positions, ["contact"] * 5, cloud, 5.0)
    for wp in wps[:-1]:
        tool_z = quaternion_to_matrix(wp.orientation)[:, 2]
        assert np.dot(tool_z, [0, 0, -1]) == pytest.approx(np.cos(np.radians(5)), abs=1e-9)


def test_orientation_cylinder_tracks_radial():
    cloud, _ = make_synthetic_scan(CYL)
    cloud = estimate_normals(cloud, 16)
    sel = np.arange(0, len(cloud), 997)
    positions = cloud.points[sel]
    wps = orient_waypoints(positions, ["contact"] * len(sel), cloud, 2.0)
    for wp, p in zip(wps, positions):
        slope = p[1] / np.sqrt(CYL.radius**2 - p[1]**2)
        normal = np.array([0.0, -slope, 1.0])
        normal /= np.linalg.norm(normal)
        tool_z = quaternion_to_matrix(wp.orientation)[:, 2]
        angle = np.degrees(np.arccos(np.clip(np.dot(tool_z, -normal), -1, 1)))
        assert angle < 2.5


# ------------------------------------------------- approach/depart + checks


def test_approach_starts_at_clearance():
    cloud, _ = make_synthetic_scan(ScanSpec(size=(0.1, 0.08), spacing=1e-3))
    path, _ = plan_path(cloud, PlannerConfig(angle_of_attack_deg=0.0))
    kinds = path.kinds()
    assert kinds[0] == "approach" and kinds[-1] == "depart"
    first_contact = next(w for w in path.waypoints if w.kind == "contact")
    start = path.waypoints[0]
    dist = np.linalg.norm(start.position - first_contact.position)
    assert dist == pytest.approx(0.05, abs=1e-9)
    assert start.position[2] == pytest.approx(0.05, abs=1e-9)  # straight above


def test_approach_never_penetrates_plane():
    cloud, _ = make_synthetic_scan(ScanSpec(size=(0.1, 0.08), spacing=1e-3))
    path, _ = plan_path(cloud)
    pos = path.positions()
    pre = [p for p, k in zip(pos, path.kinds()) if k in ("approach", "depart")]
    assert min(p[2] for p in pre) >= -1e-12


def test_projectively_planar_accepts_height_fields():
    cloud, _ = make_synthetic_scan(CYL)
    ok, violations = check_projectively_planar(cloud, pca_frame(cloud), 0.005, 6e-3)
    assert ok and violations == []


def test_projectively_planar_rejects_double_layer():
    base = grid_cloud(51, 51).points
    double = np.vstack([base, base + [0, 0, 0.02]])
    cloud = make_cloud(double)
    ok, violations = check_projectively_planar(cloud, pca_frame(grid_cloud(51, 51)),
                                               0.005, 6e-3)
    assert not ok
    assert len(violations) > 0


def test_plan_rejects_double_layer():
    base = grid_cloud(81, 51).points
    cloud = make_cloud(np.vstack([base, base + [0, 0, 0.02]]))
    with pytest.raises(NotProjectivelyPlanar):
        plan_path(cloud)


# ---------------------------------------------------------------- metrics


def test_metrics_zero_for_sampled_path():
    cloud, _ = make_synthetic_scan(ScanSpec(size=(0.1, 0.08), spacing=1e-3))
    path, _ = plan_path(cloud)
    sampled = [w for w in path.waypoints if w.kind == "contact"]
    for wp in sampled:
        wp.position = cloud.points[SpatialIndex(cloud).nearest_ids([wp.position])[0]]
    m = alignment_metrics(path, SpatialIndex(cloud))
    assert m.rmse == m.mae == m.max == 0.0


def test_metrics_of_uniformly_offset_path():
    # 0.25 mm spacing: > 10 points/mm^2, commensurate with the 5 mm
    # waypoint spacing so the offset dominates every nearest distance.
    cloud, _ = make_synthetic_scan(ScanSpec(size=(0.1, 0.1), spacing=2.5e-4))
    path, _ = plan_path(cloud)
    for wp in path.waypoints:
        wp.position = wp.position + np.array([0.0, 0.0, 1e-3])
    m = alignment_metrics(path, SpatialIndex(cloud))
    assert m.rmse == pytest.approx(1e-3, rel=0.01)
    assert m.mae == pytest.approx(1e-3, rel=0.01)
    assert m.max == pytest.approx(1e-3, rel=0.01)


def test_metrics_need_contact_waypoints():
    cloud, _ = make_synthetic_scan(ScanSpec(size=(0.05, 0.05), spacing=1e-3))
    path, _ = plan_path(cloud)
    for wp in path.waypoints:
        wp.kind = "connect"
    with pytest.raises(NoContactWaypoints):
        alignment_metrics(path, SpatialIndex(cloud))


def test_metrics_ordering_invariant():
    cloud, _ = make_synthetic_scan(ScanSpec(size=(0.08, 0.06), spacing=1e-3,
                                            noise_sigma=3e-5, seed=5))
    _, m = plan_path(cloud)
    assert m.mae <= m.rmse <= m.max


# --------------------------------------------------------------- plan_path


def test_plan_flat_plane_structure_and_length():
    cloud, _ = make_synthetic_scan(ScanSpec(size=(0.1, 0.1), spacing=1e-3))
    path, metrics = plan_path(cloud)
    plane_ids = {w.kind for w in path.waypoints}
    assert plane_ids == {"approach", "contact", "connect", "depart"}
    length = path.length_of(("contact", "connect"))
    analytic = 6 * 0.1 + 5 * 0.02
    assert abs(length - analytic) / analytic < 0.02


def test_plan_contact_waypoints_stay_in_band():
    cloud, _ = make_synthetic_scan(ScanSpec(size=(0.1, 0.08), spacing=1e-3,
                                            noise_sigma=2e-5, seed=3))
    cfg = PlannerConfig()
    path, _ = plan_path(cloud, cfg)
    band = 1.5e-3  # default: 1.5 x median spacing (1 mm grid)
    idx = SpatialIndex(cloud)
    d = idx.nearest_distances(path.contact_positions())
    assert d.max() <= band


def test_plan_deterministic():
    cloud, _ = make_synthetic_scan(ScanSpec(size=(0.08, 0.06), spacing=1e-3,
                                            noise_sigma=2e-5, seed=17))
    p1, m1 = plan_path(cloud)
    p2, m2 = plan_path(cloud)
    assert p1.to_dict() == p2.to_dict()
    assert m1.to_dict() == m2.to_dict()


def test_plan_orientation_continuity():
    cloud, _ = make_synthetic_scan(ScanSpec(surface="cylinder-patch", size=(0.12, 0.1),
                                            spacing=1e-3, radius=2.0,
                                            noise_sigma=2e-5, seed=2))
    path, _ = plan_path(cloud)
    wps = path.waypoints
    for a, b in zip(wps, wps[1:]):
        if a.kind == "contact" and b.kind == "contact":
            dot = abs(np.clip(np.dot(a.orientation, b.orientation), -1, 1))
            angle = 2 * np.degrees(np.arccos(dot))
            assert angle <= 10.0


def test_plan_meander_parity_property():
    cloud, _ = make_synthetic_scan(ScanSpec(size=(0.1, 0.08), spacing=1e-3))
    path, _ = plan_path(cloud)
    frame = pca_frame(cloud)
    contact = path.contact_positions()
    v = contact @ frame.v
    # Split into contours by jumps in u.
    u = contact @ frame.u
    breaks = np.flatnonzero(np.abs(np.diff(u)) > 1e-6) + 1
    segments = np.split(v, breaks)
    dirs = [np.sign(seg[-1] - seg[0]) for seg in segments if len(seg) > 1]
    expected = [(-1.0) ** i * dirs[0] for i in range(len(dirs))]
    assert dirs == expected
