import io
import json

import pytest

import synth
from signpipe.core import Side
from signpipe.stream import (
    CardinalityError,
    EmptyVideo,
    MalformedRecord,
    NonMonotonicFrames,
    parse_keypoint_stream,
    write_keypoint_stream,
)

HEADER = {"clip_id": "c1", "fps": 30.0, "width": 640, "height": 480}


def lines(*records) -> io.StringIO:
    return io.StringIO("\n".join(json.dumps(r) for r in records) + "\n")


def frame(index, persons=()):
    return {"frame_index": index, "persons": list(persons)}


def person_record(n_body=33, n_face=478, hands=(), bbox=(0.1, 0.1, 0.9, 0.9)):
    record = {"bbox": list(bbox)}
    record["body"] = [[0.4 + 0.001 * i, 0.3 + 0.001 * i] for i in range(n_body)] if n_body else None
    record["face"] = [[0.45, 0.25]] * n_face if n_face else None
    record["hands"] = [
        {"side": side, "points": [[0.5, 0.6]] * n} for side, n in hands
    ]
    return record


def test_round_trip():
    video = synth.clip(n_frames=5)
    buffer = io.StringIO()
    write_keypoint_stream(video, buffer)
    buffer.seek(0)
    parsed = parse_keypoint_stream(buffer)
    assert parsed == video


def test_round_trip_preserves_absent_groups():
    record = person_record(n_body=0, n_face=0)
    parsed = parse_keypoint_stream(lines(HEADER, frame(0, [record])))
    person = parsed.frames[0].persons[0]
    assert person.body is None
    assert person.face is None


def test_header_required_first():
    with pytest.raises(MalformedRecord):
        parse_keypoint_stream(lines(frame(0)))


def test_header_rejects_bad_fps():
    with pytest.raises(MalformedRecord, match="fps"):
        parse_keypoint_stream(lines({**HEADER, "fps": 0}, frame(0)))


def test_header_rejects_bad_dimensions():
    for key in ("width", "height"):
        with pytest.raises(MalformedRecord, match=key):
            parse_keypoint_stream(lines({**HEADER, key: -1}, frame(0)))


def test_empty_stream():
    with pytest.raises(EmptyVideo):
        parse_keypoint_stream(io.StringIO(""))


def test_header_only():
    with pytest.raises(EmptyVideo):
        parse_keypoint_stream(lines(HEADER))


def test_frame_indices_must_be_contiguous():
    with pytest.raises(NonMonotonicFrames) as exc:
        parse_keypoint_stream(lines(HEADER, frame(0), frame(2)))
    assert exc.value.line_no == 3


def test_duplicate_frame_index_rejected():
    with pytest.raises(NonMonotonicFrames):
        parse_keypoint_stream(lines(HEADER, frame(0), frame(0)))


def test_malformed_json_reports_line():
    stream = io.StringIO(json.dumps(HEADER) + "\n{not json\n")
    with pytest.raises(MalformedRecord) as exc:
        parse_keypoint_stream(stream)
    assert exc.value.line_no == 2


@pytest.mark.parametrize(
    "mutate",
    [
        lambda p: p.update(body=p["body"][:-1]),
        lambda p: p.update(face=p["face"][:-1]),
        lambda p: p.update(hands=[{"side": "left", "points": [[0.5, 0.6]] * 20}]),
    ],
)
def test_wrong_point_counts_rejected(mutate):
    record = person_record()
    mutate(record)
    with pytest.raises(CardinalityError):
        parse_keypoint_stream(lines(HEADER, frame(0, [record])))


def test_three_hands_rejected():
    record = person_record(hands=[("left", 21), ("right", 21), ("left", 21)])
    with pytest.raises(MalformedRecord, match="hands"):
        parse_keypoint_stream(lines(HEADER, frame(0, [record])))


def test_unknown_hand_side_rejected():
    record = person_record(hands=[("upper", 21)])
    with pytest.raises(MalformedRecord, match="side"):
        parse_keypoint_stream(lines(HEADER, frame(0, [record])))


@pytest.mark.parametrize("token", ["NaN", "Infinity", "-Infinity"])
def test_non_finite_coordinates_rejected(token):
    record = person_record()
    body_json = json.dumps(record["body"]).replace("0.4", token, 1)
    text = (
        json.dumps(HEADER)
        + "\n"
        + json.dumps(frame(0, [record])).replace(json.dumps(record["body"]), body_json)
        + "\n"
    )
    with pytest.raises(MalformedRecord):
        parse_keypoint_stream(io.StringIO(text))


def test_confidence_third_element_parsed():
    record = person_record()
    record["body"] = [[0.4, 0.3, 0.9]] + [[0.4, 0.3] for _ in range(32)]
    parsed = parse_keypoint_stream(lines(HEADER, frame(0, [record])))
    confs = parsed.frames[0].persons[0].body.confidences
    assert confs is not None
    assert confs[0] == pytest.approx(0.9)
    assert confs[1] == 0.0


def test_missing_bbox_rejected():
    record = person_record()
    del record["bbox"]
    with pytest.raises(MalformedRecord, match="bbox"):
        parse_keypoint_stream(lines(HEADER, frame(0, [record])))


def test_blank_lines_ignored():
    text = json.dumps(HEADER) + "\n\n" + json.dumps(frame(0)) + "\n\n"
    parsed = parse_keypoint_stream(io.StringIO(text))
    assert len(parsed.frames) == 1


def test_hand_sides_parsed():
    record = person_record(hands=[("left", 21), ("right", 21)])
    parsed = parse_keypoint_stream(lines(HEADER, frame(0, [record])))
    sides = [h.side for h in parsed.frames[0].persons[0].hands]
    assert sides == [Side.LEFT, Side.RIGHT]
