import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from trajkit.model import GeoCoordinate, Pose, Trajectory
from trajkit.parsers import (
    BadHeader,
    EmptyFile,
    EmptyLocations,
    MalformedCamera,
    MalformedLine,
    MalformedPoint,
    MissingColumn,
    MissingField,
    NonOrthonormalRotation,
    NoOverlap,
    NotJson,
    ParserDescriptor,
    TruncatedFile,
    interpolate_image_poses,
    parse_bdd_json,
    parse_csv_ins,
    parse_delimited,
    parse_kitti,
    parse_nvm,
    sniff_format,
)

INS_HEADER = "timestamp,latitude,longitude,altitude,roll,pitch,yaw"


class TestKitti:
    def test_identity_line(self):
        t = parse_kitti("1 0 0 0 0 1 0 0 0 0 1 0")
        assert len(t) == 1
        assert t.poses[0].position == (0.0, 0.0, 0.0)
        assert t.poses[0].orientation == (0.0, 0.0, 0.0)
        assert t.poses[0].gps is None

    def test_pure_translation(self):
        t = parse_kitti("1 0 0 4 0 1 0 5 0 0 1 6")
        assert t.poses[0].position == (4.0, 5.0, 6.0)
        assert t.poses[0].orientation == (0.0, 0.0, 0.0)

    def test_quarter_turn_about_vertical(self):
        # Rz(pi/2) = [[0,-1,0],[1,0,0],[0,0,1]], hand-derived
        t = parse_kitti("0 -1 0 0 1 0 0 0 0 0 1 0")
        roll, pitch, yaw = t.poses[0].orientation
        assert yaw == pytest.approx(math.pi / 2, abs=1e-9)
        assert roll == pytest.approx(0.0, abs=1e-9)
        assert pitch == pytest.approx(0.0, abs=1e-9)

    def test_timestamps_are_line_indices(self):
        text = "\n".join(["1 0 0 %d 0 1 0 0 0 0 1 0" % i for i in range(4)])
        t = parse_kitti(text)
        assert [p.timestamp for p in t.poses] == [0.0, 1.0, 2.0, 3.0]

    def test_wrong_token_count(self):
        with pytest.raises(MalformedLine) as err:
            parse_kitti("1 0 0 0 0 1 0 0 0 0 1")
        assert err.value.line_number == 1

    def test_non_numeric_token_line_number(self):
        good = "1 0 0 0 0 1 0 0 0 0 1 0"
        with pytest.raises(MalformedLine) as err:
            parse_kitti(good + "\n" + good.replace("1", "x", 1))
        assert err.value.line_number == 2

    def test_non_orthonormal_rotation(self):
        with pytest.raises(NonOrthonormalRotation) as err:
            parse_kitti("1 1 0 0 0 1 0 0 0 0 1 0")
        assert err.value.line_number == 1

    def test_empty_input(self):
        with pytest.raises(EmptyFile):
            parse_kitti("\n\n")

    def test_gimbal_lock_sets_roll_zero(self):
        # Ry(pi/2): pitch = +pi/2 exactly; roll folds into yaw
        t = parse_kitti("0 0 1 0 0 1 0 0 -1 0 0 0")
        roll, pitch, yaw = t.poses[0].orientation
        assert pitch == pytest.approx(math.pi / 2)
        assert roll == 0.0


def _ins_text(rows):
    return "\n".join([INS_HEADER] + rows)


class TestCsvIns:
    def test_identical_fixes_map_to_origin(self):
        t = parse_csv_ins(_ins_text([
            "0.0,51.76,-1.26,100.0,0,0,0",
            "0.5,51.76,-1.26,100.0,0,0,0",
        ]))
        assert len(t) == 2
        for p in t.poses:
            assert p.position[0] == pytest.approx(0.0, abs=1e-9)
            assert p.position[1] == pytest.approx(0.0, abs=1e-9)
        assert t.origin == GeoCoordinate(51.76, -1.26)

    def test_millidegree_north_step(self):
        t = parse_csv_ins(_ins_text([
            "0.0,51.000,-1.26,100.0,0,0,0",
            "0.5,51.001,-1.26,100.0,0,0,0",
        ]))
        assert t.poses[1].position[1] == pytest.approx(111.19492664455875, abs=0.01)

    def test_yaw_degrees_wraps_to_minus_pi(self):
        descriptor = ParserDescriptor(format_id="csv-ins", angle_unit="degrees")
        t = parse_csv_ins(
            _ins_text(["0.0,51.76,-1.26,100.0,0,0,180"]), descriptor=descriptor
        )
        assert t.poses[0].orientation[2] == -math.pi

    def test_altitude_relative_z(self):
        t = parse_csv_ins(_ins_text([
            "0.0,51.76,-1.26,100.0,0,0,0",
            "1.0,51.76,-1.26,107.5,0,0,0",
        ]))
        assert t.poses[0].position[2] == 0.0
        assert t.poses[1].position[2] == pytest.approx(7.5)
        assert t.poses[1].altitude == 107.5

    def test_missing_column(self):
        with pytest.raises(MissingColumn) as err:
            parse_csv_ins("timestamp,latitude,longitude\n0,1,2")
        assert err.value.name == "altitude"

    def test_malformed_line_number(self):
        with pytest.raises(MalformedLine) as err:
            parse_csv_ins(_ins_text(["0,51,“oops”,100,0,0,0"]))
        assert err.value.line_number == 2

    def test_empty_file(self):
        with pytest.raises(EmptyFile):
            parse_csv_ins("")
        with pytest.raises(EmptyFile):
            parse_csv_ins(INS_HEADER)

    def test_microsecond_timestamps(self):
        descriptor = ParserDescriptor(format_id="csv-ins", timestamp_unit="microseconds")
        t = parse_csv_ins(
            _ins_text([
                "1500000,51.76,-1.26,100,0,0,0",
                "2500000,51.76,-1.26,100,0,0,0",
            ]),
            descriptor=descriptor,
        )
        assert t.poses[0].timestamp == pytest.approx(1.5)
        assert t.poses[1].timestamp - t.poses[0].timestamp == pytest.approx(1.0)


NVM_ONE_CAMERA = "NVM_V3\n\n1\nimg/cam0.jpg 500 1 0 0 0 0 0 0 0.0 0\n\n0\n"


class TestNvm:
    def test_single_identity_camera(self):
        t = parse_nvm(NVM_ONE_CAMERA)
        assert len(t) == 1
        pose = t.poses[0]
        assert pose.position == (0.0, 0.0, 0.0)
        assert pose.orientation == (0.0, 0.0, 0.0)
        assert pose.image == "img/cam0.jpg"
        assert pose.image_index == 0
        assert t.image_manifest == ((0.0, "img/cam0.jpg"),)
        assert len(t.point_cloud) == 0

    def test_quarter_turn_quaternion(self):
        text = "NVM_V3\n1\na.jpg 500 0.7071068 0 0 0.7071068 1 2 3 0 0\n0\n"
        t = parse_nvm(text)
        roll, pitch, yaw = t.poses[0].orientation
        assert yaw == pytest.approx(math.pi / 2, abs=1e-6)
        assert roll == pytest.approx(0.0, abs=1e-6)
        assert pitch == pytest.approx(0.0, abs=1e-6)
        assert t.poses[0].position == (1.0, 2.0, 3.0)

    def test_zero_cameras(self):
        with pytest.raises(EmptyFile):
            parse_nvm("NVM_V3\n0\n")

    def test_bad_header(self):
        with pytest.raises(BadHeader):
            parse_nvm("BUNDLE_V1\n1\n")
        with pytest.raises(BadHeader):
            parse_nvm("")

    def test_truncated_cameras(self):
        with pytest.raises(TruncatedFile) as err:
            parse_nvm("NVM_V3\n3\na.jpg 500 1 0 0 0 0 0 0 0 0\n")
        assert err.value.expected == 3
        assert err.value.found == 1

    def test_malformed_camera(self):
        with pytest.raises(MalformedCamera) as err:
            parse_nvm("NVM_V3\n1\na.jpg 500 1 0 0\n")
        assert err.value.line_number == 3

    def test_points_parsed_with_colors(self):
        text = (
            "NVM_V3\n1\na.jpg 500 1 0 0 0 0 0 0 0 0\n2\n"
            "1 2 3 255 0 0 1 0 0 0.5 0.5\n"
            "4 5 6 0 255 0 0\n"
        )
        t = parse_nvm(text)
        assert len(t.point_cloud) == 2
        assert t.point_cloud.points[1].tolist() == [4.0, 5.0, 6.0]
        assert t.point_cloud.colors[0].tolist() == [255, 0, 0]

    def test_malformed_point_measurement_count(self):
        text = "NVM_V3\n1\na.jpg 500 1 0 0 0 0 0 0 0 0\n1\n1 2 3 0 0 0 2 9 9 0 0\n"
        with pytest.raises(MalformedPoint) as err:
            parse_nvm(text)
        assert err.value.line_number == 5

    def test_camera_path_with_spaces(self):
        text = "NVM_V3\n1\nmy photos/cam 0.jpg 500 1 0 0 0 7 8 9 0 0\n0\n"
        t = parse_nvm(text)
        assert t.poses[0].image == "my photos/cam 0.jpg"
        assert t.poses[0].position == (7.0, 8.0, 9.0)


class TestBddJson:
    def test_single_record(self):
        text = '{"locations": [{"latitude": 37.0, "longitude": -122.0, "timestamp": 0, "course": 0}]}'
        t = parse_bdd_json(text)
        assert len(t) == 1
        assert t.poses[0].position[:2] == (0.0, 0.0)
        assert t.poses[0].orientation[2] == 0.0
        assert t.origin == GeoCoordinate(37.0, -122.0)

    def test_timestamps_convert_from_milliseconds(self):
        text = (
            '[{"latitude": 37, "longitude": -122, "timestamp": 1000, "course": 0},'
            ' {"latitude": 37, "longitude": -122, "timestamp": 2000, "course": 0}]'
        )
        t = parse_bdd_json(text)
        assert t.poses[1].timestamp - t.poses[0].timestamp == 1.0

    def test_course_270_maps_to_east_heading(self):
        # compass 270 (clockwise from north) = +90 counter-clockwise = pi/2
        text = '[{"latitude": 37, "longitude": -122, "timestamp": 0, "course": 270}]'
        t = parse_bdd_json(text)
        assert t.poses[0].orientation[2] == pytest.approx(math.pi / 2, abs=1e-12)

    def test_not_json(self):
        with pytest.raises(NotJson):
            parse_bdd_json("this is { not json")

    def test_missing_field(self):
        text = '[{"latitude": 37, "longitude": -122, "timestamp": 0, "course": 0}, {"latitude": 37}]'
        with pytest.raises(MissingField) as err:
            parse_bdd_json(text)
        assert err.value.record_index == 1
        assert err.value.field_name == "longitude"

    def test_empty_locations(self):
        with pytest.raises(EmptyLocations):
            parse_bdd_json('{"locations": []}')
        with pytest.raises(EmptyLocations):
            parse_bdd_json('{"other": 1}')


DELIM_MAP = {"timestamp": 0, "latitude": 1, "longitude": 2}


class TestDelimited:
    def test_three_column_gps(self):
        descriptor = ParserDescriptor(format_id="delimited-generic", column_map=DELIM_MAP)
        rows = "\n".join(f"{i} 51.7{i} -1.26" for i in range(5))
        t = parse_delimited(rows, descriptor)
        assert len(t) == 5
        for p in t.poses:
            assert p.gps is not None
            assert p.orientation is None

    def test_missing_timestamp_column(self):
        with pytest.raises(MissingColumn) as err:
            ParserDescriptor(
                format_id="delimited-generic", column_map={"latitude": 0, "longitude": 1}
            )
        assert err.value.name == "timestamp"

    def test_tab_and_space_delimiters_identical(self):
        descriptor = ParserDescriptor(format_id="delimited-generic", column_map=DELIM_MAP)
        rows = [("%d" % i, "51.7", "-1.26") for i in range(4)]
        by_space = parse_delimited("\n".join(" ".join(r) for r in rows), descriptor)
        by_tab = parse_delimited("\n".join("\t".join(r) for r in rows), descriptor)
        for a, b in zip(by_space.poses, by_tab.poses):
            assert a == b
        assert by_space.origin == by_tab.origin

    def test_xy_columns_used_directly(self):
        descriptor = ParserDescriptor(
            format_id="delimited-generic",
            column_map={"timestamp": 0, "x": 1, "y": 2, "yaw": 3},
            angle_unit="degrees",
        )
        t = parse_delimited("0 10 20 90", descriptor)
        assert t.poses[0].position == (10.0, 20.0, 0.0)
        assert t.poses[0].orientation[2] == pytest.approx(math.pi / 2)
        assert t.poses[0].gps is None

    def test_malformed_line(self):
        descriptor = ParserDescriptor(format_id="delimited-generic", column_map=DELIM_MAP)
        with pytest.raises(MalformedLine) as err:
            parse_delimited("0 51.7 -1.26\n1 51.7", descriptor)
        assert err.value.line_number == 2


def _poses_on_x(xs, yaws=None, t0=0.0):
    poses = []
    for i, x in enumerate(xs):
        yaw = 0.0 if yaws is None else yaws[i]
        poses.append(
            Pose(index=i, timestamp=t0 + float(i), position=(float(x), 0.0, 0.0),
                 orientation=(0.0, 0.0, yaw))
        )
    return poses


class TestInterpolation:
    def test_knot_exactness(self):
        poses = _poses_on_x([0.0, 10.0, 30.0])
        traj = Trajectory(
            id="t", source_format="kitti", poses=poses,
            image_manifest=[(1.0, "a.png")],
        )
        out = interpolate_image_poses(traj)
        assert len(out.poses) == 1
        got = out.poses[0]
        src = poses[1]
        assert got.timestamp == src.timestamp
        assert got.position == src.position
        assert got.orientation == src.orientation
        assert got.altitude == src.altitude
        assert got.gps == src.gps
        assert got.image == "a.png"
        assert got.image_index == 0

    def test_midpoint_linearity(self):
        poses = _poses_on_x([0.0, 10.0])
        traj = Trajectory(
            id="t", source_format="kitti", poses=poses, image_manifest=[(0.5, "m.png")]
        )
        out = interpolate_image_poses(traj)
        assert out.poses[0].position[0] == pytest.approx(5.0, abs=1e-12)

    def test_shortest_arc_yaw(self):
        # 350 deg and 10 deg bracket north; the midpoint must be 0, not 180
        yaws = [math.radians(350.0), math.radians(10.0)]
        poses = _poses_on_x([0.0, 1.0], yaws=yaws)
        traj = Trajectory(
            id="t", source_format="kitti", poses=poses, image_manifest=[(0.5, "m.png")]
        )
        out = interpolate_image_poses(traj)
        assert out.poses[0].orientation[2] == pytest.approx(0.0, abs=1e-12)

    def test_out_of_range_images_dropped_and_counted(self):
        poses = _poses_on_x([0.0, 1.0, 2.0])
        manifest = [(-0.5, "early.png"), (0.5, "in.png"), (9.0, "late.png")]
        traj = Trajectory(
            id="t", source_format="kitti", poses=poses, image_manifest=manifest
        )
        out = interpolate_image_poses(traj)
        assert len(out.poses) == 1
        dropped = len(out.image_manifest) - len(out.poses)
        assert dropped == 2
        assert out.poses[0].image == "in.png"
        assert out.poses[0].image_index == 1

    def test_no_overlap(self):
        poses = _poses_on_x([0.0, 1.0])
        traj = Trajectory(
            id="t", source_format="kitti", poses=poses, image_manifest=[(5.0, "x.png")]
        )
        with pytest.raises(NoOverlap):
            interpolate_image_poses(traj)

    def test_pose_count_and_timestamps_match_manifest(self):
        poses = _poses_on_x(range(10))
        manifest = [(0.25 + k, f"{k}.png") for k in range(9)]
        traj = Trajectory(
            id="t", source_format="kitti", poses=poses, image_manifest=manifest
        )
        out = interpolate_image_poses(traj)
        assert len(out.poses) == 9
        assert [p.timestamp for p in out.poses] == [t for t, _ in manifest]

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_affine_between_knots(self, lam):
        a, b = (2.0, -3.0, 1.0), (12.0, 5.0, -7.0)
        poses = [
            Pose(index=0, timestamp=0.0, position=a, orientation=(0, 0, 0)),
            Pose(index=1, timestamp=1.0, position=b, orientation=(0, 0, 0)),
        ]
        traj = Trajectory(
            id="t", source_format="kitti", poses=poses, image_manifest=[(lam, "p.png")]
        )
        out = interpolate_image_poses(traj)
        for got, lo, hi in zip(out.poses[0].position, a, b):
            assert got == pytest.approx((1 - lam) * lo + lam * hi, abs=1e-9)

    def test_gps_interpolated_linearly(self):
        origin = GeoCoordinate(50.0, 10.0)
        poses = [
            Pose(index=0, timestamp=0.0, position=(0, 0, 0), gps=GeoCoordinate(50.0, 10.0),
                 altitude=100.0),
            Pose(index=1, timestamp=1.0, position=(0, 10, 0), gps=GeoCoordinate(50.001, 10.0),
                 altitude=110.0),
        ]
        traj = Trajectory(
            id="t", source_format="csv-ins", poses=poses, origin=origin,
            image_manifest=[(0.5, "m.png")],
        )
        out = interpolate_image_poses(traj)
        assert out.poses[0].gps.latitude == pytest.approx(50.0005, abs=1e-12)
        assert out.poses[0].altitude == pytest.approx(105.0)


class TestSniffFormat:
    def test_detects_each_format(self, tmp_path):
        kitti = tmp_path / "poses.txt"
        kitti.write_text("1 0 0 0 0 1 0 0 0 0 1 0\n")
        assert sniff_format(kitti) == "kitti"

        nvm = tmp_path / "model.nvm"
        nvm.write_text(NVM_ONE_CAMERA)
        assert sniff_format(nvm) == "nvm"

        bdd = tmp_path / "info.json"
        bdd.write_text('{"locations": [{"latitude": 1, "longitude": 2, "timestamp": 0, "course": 0}]}')
        assert sniff_format(bdd) == "bdd-json"

        ins = tmp_path / "ins.csv"
        ins.write_text(INS_HEADER + "\n0,51,1,0,0,0,0\n")
        assert sniff_format(ins) == "csv-ins"

    def test_delimited_requires_sidecar(self, tmp_path):
        log = tmp_path / "drive.log"
        log.write_text("0 51.7 -1.26\n")
        assert sniff_format(log) is None
        sidecar = tmp_path / "drive.log.columns.json"
        sidecar.write_text('{"formatId": "delimited-generic", "columnMap": {"timestamp": 0, "latitude": 1, "longitude": 2}}')
        assert sniff_format(log) == "delimited-generic"
