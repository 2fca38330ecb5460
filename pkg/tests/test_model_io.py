"""Model loading, document round-trips, normalization, config validation."""

import random

import numpy as np
import pytest

from h2s import model_io
from h2s.model_io import (
    EngineConfig,
    ModelFormatError,
    ModelValidationError,
    Segment,
    SegmentedModel,
    make_box_segment,
    model_from_doc,
    model_from_obj,
    model_to_doc,
    normalize_model,
    validate_model,
)
from h2s.sample_models import fixture_model


def two_box_model():
    return SegmentedModel(up_axis=1, segments=[
        make_box_segment(0, "base", ((0.0, 2.0), (0.0, 1.0), (0.0, 1.5))),
        make_box_segment(1, "top", ((0.5, 1.5), (1.0, 1.7), (0.25, 1.25))),
    ])


def test_doc_round_trip_identity():
    m = two_box_model()
    doc = model_to_doc(m)
    m2 = model_from_doc(doc)
    assert model_to_doc(m2) == doc
    assert [s.id for s in m2.segments] == [0, 1]
    for a, b in zip(m.segments, m2.segments):
        assert np.allclose(a.vertices, b.vertices)
        assert np.array_equal(a.triangles, b.triangles)


def test_doc_round_trip_preserves_contours():
    m = two_box_model()
    loop = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]])
    m.segments[0].contours.append(loop)
    m2 = model_from_doc(model_to_doc(m))
    assert len(m2.segments[0].contours) == 1
    assert np.allclose(m2.segments[0].contours[0], loop)


@pytest.mark.parametrize("mutate, path_part", [
    (lambda d: d.update(version=99), "version"),
    (lambda d: d.update(up_axis=5), "up_axis"),
    (lambda d: d.update(segments=[]), "segments"),
    (lambda d: d["segments"][0].pop("vertices"), "segments[0]"),
    (lambda d: d["segments"][0].update(vertices=[0.0, 1.0]), "segments[0]"),
    (lambda d: d["segments"][0].update(triangles=[0, 1]), "segments[0]"),
])
def test_doc_rejects_malformed(mutate, path_part):
    doc = model_to_doc(two_box_model())
    mutate(doc)
    with pytest.raises(ModelFormatError) as exc:
        model_from_doc(doc)
    assert path_part in str(exc.value)


def test_validate_catches_duplicate_ids():
    m = two_box_model()
    m.segments[1].id = 0
    with pytest.raises(ModelValidationError, match="duplicate"):
        validate_model(m)


def test_validate_catches_bad_indices():
    m = two_box_model()
    m.segments[0].triangles[0, 0] = 999
    with pytest.raises(ModelValidationError, match="out of range"):
        validate_model(m)


def test_validate_catches_nonfinite():
    m = two_box_model()
    m.segments[0].vertices[0, 0] = float("nan")
    with pytest.raises(ModelValidationError):
        validate_model(m)


OBJ_TEXT = """\
# two quads in separate groups
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
g left
f 1 2 3 4
v 2 0 0
v 3 0 0
v 3 1 0
g right
f 5/1 6/2/3 7
f -1 -2 -3
"""


def test_obj_groups_and_triangulation():
    m = model_from_obj(OBJ_TEXT)
    assert [s.name for s in m.segments] == ["left", "right"]
    left, right = m.segments
    # the quad fans into two triangles
    assert len(left.triangles) == 2
    assert len(left.vertices) == 4
    # slash syntax and negative indices both resolve
    assert len(right.triangles) == 2
    assert len(right.vertices) == 3


def test_obj_reports_line_numbers():
    with pytest.raises(ModelFormatError) as exc:
        model_from_obj("v 0 0\nf 1 2 3\n")
    assert exc.value.line == 1
    with pytest.raises(ModelFormatError) as exc:
        model_from_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n")
    assert exc.value.line == 4
    with pytest.raises(ModelFormatError):
        model_from_obj("# nothing\n")


def test_normalize_dedups_and_drops_degenerate():
    verts = np.array([
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [1.0 + 1e-13, 0.0, 0.0],   # duplicate of vertex 1 up to rounding
    ])
    tris = np.array([[0, 1, 2], [0, 3, 1], [1, 3, 0]], dtype=np.int32)
    seg = Segment(0, "p", verts, tris)
    normed = normalize_model(SegmentedModel(1, [seg]))
    out = normed.segments[0]
    assert len(out.vertices) == 3
    # both triangles through the duplicate pair collapse
    assert len(out.triangles) == 1


def test_normalize_is_idempotent():
    rng = random.Random(7)
    for _ in range(20):
        n = rng.randint(4, 30)
        verts = np.array([[rng.uniform(-2, 2) for _ in range(3)] for _ in range(n)])
        tris = np.array([
            [rng.randrange(n), rng.randrange(n), rng.randrange(n)]
            for _ in range(12)
        ], dtype=np.int32)
        seg = Segment(0, "p", verts, tris)
        try:
            once = normalize_model(SegmentedModel(1, [seg]))
        except ModelValidationError:
            continue            # all triangles happened to be degenerate
        twice = normalize_model(once)
        assert model_to_doc(twice) == model_to_doc(once)


def test_normalize_rejects_fully_degenerate():
    verts = np.zeros((3, 3))
    tris = np.array([[0, 1, 2]], dtype=np.int32)
    with pytest.raises(ModelValidationError, match="degenerate"):
        normalize_model(SegmentedModel(1, [Segment(0, "p", verts, tris)]))


def test_load_model_dispatch(tmp_path):
    m = two_box_model()
    doc_path = tmp_path / "m.json"
    model_io.save_model(m, str(doc_path))
    again = model_io.load_model(str(doc_path))
    assert model_to_doc(again) == model_to_doc(m)

    obj_path = tmp_path / "m.obj"
    obj_path.write_text(OBJ_TEXT)
    from_obj = model_io.load_model(str(obj_path), up_axis=2)
    assert from_obj.up_axis == 2
    assert len(from_obj.segments) == 2


def test_fixture_models_load_and_validate():
    for name in ("two_cuboids", "chain4", "mixer", "table8", "lamp", "hopper"):
        m = fixture_model(name)
        validate_model(m)
        norm = normalize_model(m)
        assert model_to_doc(normalize_model(norm)) == model_to_doc(norm)


def test_config_defaults_round_trip():
    cfg = EngineConfig()
    cfg.validate()
    again = EngineConfig.from_dict(cfg.to_dict())
    assert again == cfg
    assert again.hash() == cfg.hash()
    assert len(cfg.hash()) == 64


@pytest.mark.parametrize("field, value", [
    ("prune_fraction", 0.0),
    ("prune_fraction", 1.0),
    ("relation_distance_tol", -0.5),
    ("relation_angle_tol", 0.0),
    ("difficulty_weight", -1.0),
    ("unguided_axis_penalty", 0.0),
    ("eyeball_fraction", 0.0),
    ("guide_merge_tol", -1e-9),
    ("custom_residue_fraction", 1.5),
    ("max_candidates_per_part", 0),
    ("ratio_catalog", ("NoSuchRatio",)),
])
def test_config_rejects_bad_values(field, value):
    cfg = EngineConfig(**{field: value})
    with pytest.raises(ValueError):
        cfg.validate()


def test_config_hash_tracks_content():
    a = EngineConfig()
    b = EngineConfig(prune_fraction=0.11)
    assert a.hash() != b.hash()
