import numpy as np
import pytest

from temploc import PartScores, Window
from temploc.formats import (
    FormatError,
    read_annotations,
    read_detections,
    read_feature_file,
    read_priors,
    read_scores_file,
    read_test_manifest,
    read_train_manifest,
    write_annotations,
    write_detections,
    write_feature_file,
    write_priors,
    write_scores_file,
    write_test_manifest,
    write_train_manifest,
)
from temploc.postprocess import DurationPrior


class TestFeatureFile:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        features = rng.normal(size=(17, 5))
        path = tmp_path / "x.feat"
        write_feature_file(path, features)
        assert np.array_equal(read_feature_file(path), features)

    def test_row_count_mismatch(self, tmp_path):
        path = tmp_path / "bad.feat"
        path.write_text("3 2\n1.0 2.0\n3.0 4.0\n")
        with pytest.raises(FormatError, match="bad.feat:3"):
            read_feature_file(path)

    def test_bad_value_reports_line(self, tmp_path):
        path = tmp_path / "bad.feat"
        path.write_text("2 2\n1.0 2.0\n3.0 zap\n")
        with pytest.raises(FormatError, match="bad.feat:3"):
            read_feature_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError):
            read_feature_file(tmp_path / "absent.feat")


class TestScoresFile:
    def test_round_trip(self, tmp_path, rng):
        tracks = {c: PartScores(*rng.normal(size=(3, 9))) for c in range(2)}
        path = tmp_path / "v.scores"
        write_scores_file(path, ["walk", "run"], tracks)
        names, loaded = read_scores_file(path)
        assert names == ["walk", "run"]
        for c in range(2):
            assert np.array_equal(loaded[c].start_scores, tracks[c].start_scores)
            assert np.array_equal(loaded[c].middle_scores, tracks[c].middle_scores)
            assert np.array_equal(loaded[c].end_scores, tracks[c].end_scores)

    def test_track_line_count_checked(self, tmp_path):
        path = tmp_path / "v.scores"
        path.write_text("2 1 a\n0.0 0.0\n0.0 0.0\n")
        with pytest.raises(FormatError):
            read_scores_file(path)

    def test_track_width_checked(self, tmp_path):
        path = tmp_path / "v.scores"
        path.write_text("3 1 a\n0.0 0.0 0.0\n0.0 0.0\n0.0 0.0 0.0\n")
        with pytest.raises(FormatError, match="v.scores:3"):
            read_scores_file(path)


class TestManifests:
    def test_train_round_trip(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        rows = [("c0", "features/c0.feat", 3, 9, "classA"), ("c1", "features/c1.feat", 1, 2, "classB")]
        write_train_manifest(path, rows)
        loaded = read_train_manifest(path)
        assert loaded == [
            ("c0", "features/c0.feat", Window(3, 9), "classA"),
            ("c1", "features/c1.feat", Window(1, 2), "classB"),
        ]

    def test_invalid_window_reports_line(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("id\tfeatures\tstart\tend\tclass\nc0\tf.feat\t9\t3\tclassA\n")
        with pytest.raises(FormatError, match="manifest.tsv:2"):
            read_train_manifest(path)

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("a\tb\n1\t2\n")
        with pytest.raises(FormatError, match="manifest.tsv:1"):
            read_test_manifest(path)

    def test_test_round_trip(self, tmp_path):
        path = tmp_path / "test.tsv"
        write_test_manifest(path, [("v0", "features/v0.feat")])
        assert read_test_manifest(path) == [("v0", "features/v0.feat")]


class TestAnnotationsAndDetections:
    def test_annotations_round_trip(self, tmp_path):
        path = tmp_path / "ann.tsv"
        write_annotations(path, [("v0", "classA", 4, 19)])
        assert read_annotations(path) == [("v0", "classA", Window(4, 19))]

    def test_detections_format_and_round_trip(self, tmp_path):
        path = tmp_path / "dets.tsv"
        write_detections(path, [("v0", "classA", Window(11, 20), 1.2345678)], fps=5.0)
        text = path.read_text().splitlines()
        assert text[0] == "video_id\tclass\tstart_frame\tend_frame\tstart_seconds\tend_seconds\tscore"
        assert text[1] == "v0\tclassA\t11\t20\t2.000\t4.000\t1.234568"
        [(vid, name, window, score)] = read_detections(path)
        assert (vid, name, window) == ("v0", "classA", Window(11, 20))
        assert score == 1.234568

    def test_column_count_checked(self, tmp_path):
        path = tmp_path / "dets.tsv"
        path.write_text("video_id\tclass\tstart_frame\tend_frame\tstart_seconds\tend_seconds\tscore\nv0\tclassA\t1\n")
        with pytest.raises(FormatError, match="dets.tsv:2"):
            read_detections(path)


class TestPriors:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "priors.json"
        write_priors(path, {"classA": DurationPrior(0, 2.5, 0.3)})
        assert read_priors(path) == {"classA": (2.5, 0.3)}

    def test_bad_json(self, tmp_path):
        path = tmp_path / "priors.json"
        path.write_text("{nope")
        with pytest.raises(FormatError):
            read_priors(path)
