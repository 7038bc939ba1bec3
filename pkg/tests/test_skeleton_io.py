import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from godl.errors import DegenerateExtent, InvalidSequence, MalformedInput, TooShort
from godl.skeleton_io import (
    SkeletonSequence,
    build_features,
    frame_heights,
    normalization_params,
    normalize,
    parse_sequence,
    read_sequence,
    to_csv,
    to_json,
    write_sequence,
)


def two_joint_csv(rows):
    return "".join(",".join(str(v) for v in r) + "\n" for r in rows)


def test_csv_two_frames_two_joints():
    text = two_joint_csv([[0, 0, 0, 0, 1, 2, 0], [1, 0, 0, 0, 2, 2, 0]])
    s = parse_sequence(text, "csv")
    assert s.joints.shape == (2, 2, 3)
    np.testing.assert_array_equal(s.indices, [0, 1])


def test_csv_non_numeric_names_line():
    text = two_joint_csv([[0, 0, 0, 0, 1, 2, 0]]) + "1,0,0,x,1,2,0\n"
    with pytest.raises(MalformedInput, match="line 2") as ei:
        parse_sequence(text, "csv")
    assert ei.value.line == 2


@pytest.mark.parametrize(
    "text, line",
    [
        ("0,1,2,3,4,5\n", 1),  # 5 coordinates
        ("0,0,0,0,1,1,1\n1,0,0,0,1,1\n", 2),  # ragged
        ("0,0,0,0,1,1,1\n0,0,0,0,1,1,1\n", 2),  # repeated index
        ("0,0,0,0,1,1,1\n1,0,0,nan,1,1,1\n", 2),
        ("0,0,0,0,1,1,1\n1,0,0,inf,1,1,1\n", 2),
        ("0.5,0,0,0,1,1,1\n", 1),
    ],
)
def test_csv_defects(text, line):
    with pytest.raises(MalformedInput) as ei:
        parse_sequence(text, "csv")
    assert ei.value.line == line


def test_csv_blank_lines_and_crlf():
    s = parse_sequence("0,0,0,0,1,2,0\r\n\r\n3,0,0,0,2,2,0\r\n", "csv")
    np.testing.assert_array_equal(s.indices, [0, 3])


def test_json_roundtrip_and_errors(rng):
    s = SkeletonSequence(rng.standard_normal((3, 4, 3)), frame_rate_hz=25.0)
    back = parse_sequence(to_json(s), "json")
    assert np.array_equal(back.joints, s.joints)
    assert back.frame_rate_hz == 25.0
    with pytest.raises(MalformedInput):
        parse_sequence('{"joint_count": 2, "frames": [[1, 2, 3]]}', "json")
    with pytest.raises(MalformedInput):
        parse_sequence("{not json", "json")
    with pytest.raises(MalformedInput):
        parse_sequence(b"\xff\xfe", "json")


def test_sequence_invariants():
    with pytest.raises(InvalidSequence):
        SkeletonSequence(np.zeros((2, 1, 3)))
    with pytest.raises(InvalidSequence):
        SkeletonSequence(np.zeros((2, 2, 2)))
    with pytest.raises(InvalidSequence):
        SkeletonSequence(np.full((1, 2, 3), np.nan))
    with pytest.raises(InvalidSequence):
        SkeletonSequence(np.zeros((2, 2, 3)), indices=[1, 1])
    s = SkeletonSequence(np.zeros((2, 2, 3)))
    with pytest.raises(ValueError):
        s.joints[0, 0, 0] = 1.0


def test_normalize_example():
    J = np.array([[[0.0, 1.0, 2.0], [2.0, 3.0, 2.0]]])
    n, p = normalize(SkeletonSequence(J))
    np.testing.assert_allclose(n.joints, [[[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]]])
    assert p.scale == 2.0


def test_normalize_degenerate():
    J = np.array([[[1.0, 0.0, 0.0], [1.0, 2.0, 0.0]]])
    with pytest.raises(DegenerateExtent):
        normalize(SkeletonSequence(J))


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, (4, 3, 3), elements=st.floats(-100, 100)),
    st.floats(0.1, 10),
    st.tuples(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50)),
)
def test_normalize_invariant_to_shift_and_scale(J, s, t):
    if np.ptp(J[..., 0]) < 1e-3:
        return
    a, _ = normalize(SkeletonSequence(J))
    b, _ = normalize(SkeletonSequence(J * s + np.array(t)))
    np.testing.assert_allclose(a.joints, b.joints, atol=1e-8)
    assert a.joints[..., 0].min() == 0.0 and a.joints[..., 0].max() == pytest.approx(1.0)


def test_normalize_invert_roundtrip(rng):
    s = SkeletonSequence(rng.standard_normal((5, 3, 3)))
    n, p = normalize(s)
    np.testing.assert_allclose(p.invert(n.joints), s.joints, atol=1e-12)
    assert normalization_params(s) == p


def test_features_layout():
    J = np.zeros((3, 2, 3))
    J[1, 0, 0] = 1.0
    J[2, 0, 0] = 3.0
    f = build_features(SkeletonSequence(J), w_st=0.1)
    assert f.vectors.shape == (12, 3)
    np.testing.assert_array_equal(f.vectors[6:, 0], 0.0)
    np.testing.assert_allclose(f.vectors[6, 1:], [0.1, 0.2])
    np.testing.assert_allclose(f.vectors[0], [0.0, 1.0, 3.0])


def test_features_zero_velocity_for_static():
    f = build_features(SkeletonSequence(np.ones((4, 2, 3))))
    assert np.all(f.vectors[6:] == 0.0)


def test_features_too_short():
    with pytest.raises(TooShort):
        build_features(SkeletonSequence(np.ones((1, 2, 3))))


def test_frame_heights():
    J = np.array([[[0, 1, 0], [0, 4, 0]], [[0, 2, 0], [0, 2.5, 0]]], dtype=float)
    np.testing.assert_allclose(frame_heights(SkeletonSequence(J)), [3.0, 0.5])


def test_file_roundtrip_bit_exact(tmp_path, rng):
    s = SkeletonSequence(rng.standard_normal((4, 3, 3)) * 1e3, indices=[2, 5, 6, 9])
    for name in ("a.csv", "a.json"):
        write_sequence(s, tmp_path / name)
        back = read_sequence(tmp_path / name)
        assert np.array_equal(back.joints, s.joints)
        assert back.source_id == "a"
    assert np.array_equal(read_sequence(tmp_path / "a.csv").indices, s.indices)
    assert to_csv(parse_sequence(to_csv(s), "csv")) == to_csv(s)


def test_read_rejects_unknown_suffix(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("0,0,0,0,1,1,1\n")
    with pytest.raises(MalformedInput):
        read_sequence(p)
