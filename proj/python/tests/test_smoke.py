import math

import pytest

import pivotwalk as pw


def test_word_algebra():
    a, b = pw.Word("a"), pw.Word("b")
    w = a * b * a.inverse()
    assert str(w) == "abA"
    assert len(w * w.inverse()) == 0
    assert str(w.cyclic_core()) == "b"
    assert pw.translation_length(w) == 1
    assert pw.classify(pw.Word("")) == "elliptic"
    assert pw.classify(a ** 3) == "loxodromic"
    assert {pw.Word("ab"), a * b} == {pw.Word("ab")}


def test_plane_distance():
    assert pw.plane_distance(1j, 2j) == pytest.approx(math.log(2))


def test_config_hash_tracks_seed():
    h1 = pw.config_hash("run: {seed: 1}\n")
    h2 = pw.config_hash("run: {seed: 2}\n")
    assert len(h1) == 16 and h1 != h2
    assert "model:" in pw.default_config()
    with pytest.raises(pw.ConfigError):
        pw.config_hash("model: {rnak: 2}\n")


def test_run_suite_in_process():
    assert "dyadic" in pw.suite_names()
    r = pw.run_suite("dyadic", seed=3, trials=20)
    assert r["schema_version"] == pw.schema_version
    assert r["suite"] == "dyadic"
    assert r["seed"] == 3
    assert r["pass"] is True
    again = pw.run_suite("dyadic", seed=3, trials=20, threads=2)
    assert again["summary"] == r["summary"]


def test_cli_exit_codes(tmp_path):
    code, out, _ = pw.cli(["run", "dyadic", "--seed", "3", "--trials", "20", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "dyadic.json").exists()
    assert "PASS dyadic." in out
    assert pw.cli(["run", "dyadic"])[0] == 2
