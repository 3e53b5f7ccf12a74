import json

import pytest

from atcforge.dataset import (
    Manifest,
    SplitConfig,
    Utterance,
    load_manifest,
    save_manifest,
    split,
)
from atcforge.errors import ManifestError


def make_manifest(n, speakers=None):
    utts = []
    for i in range(n):
        utts.append(
            Utterance(
                id=f"utt{i:03d}",
                audio_path=f"audio/utt{i:03d}.wav",
                transcript=f"word{i}",
                speaker=None if speakers is None else speakers[i % len(speakers)],
            )
        )
    return Manifest(tuple(utts), name="fixture")


class TestManifestIo:
    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        assert len(load_manifest(p)) == 0

    def test_round_trip_byte_identical(self, tmp_path):
        p = tmp_path / "m.jsonl"
        rows = [
            {"id": "a", "audio": "a.wav", "text": "alpha bravo"},
            {"id": "b", "audio": "b.wav", "text": "charlie", "speaker": "s1"},
            {"id": "c", "audio": "c.wav", "text": "", "duration": 1.5},
        ]
        p.write_text("".join(json.dumps(r) + "\n" for r in rows))
        out = tmp_path / "out.jsonl"
        save_manifest(load_manifest(p), out)
        assert out.read_text() == p.read_text()

    def test_duplicate_id_named_in_error(self, tmp_path):
        p = tmp_path / "dup.jsonl"
        row = {"id": "dup-id", "audio": "x.wav", "text": "t"}
        p.write_text(json.dumps(row) + "\n" + json.dumps(row) + "\n")
        with pytest.raises(ManifestError, match="dup-id"):
            load_manifest(p)

    def test_malformed_line_reports_number(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text('{"id": "a", "audio": "a.wav", "text": "t"}\nnot json\n')
        with pytest.raises(ManifestError, match=":2"):
            load_manifest(p)

    def test_missing_field(self, tmp_path):
        p = tmp_path / "mf.jsonl"
        p.write_text('{"id": "a", "audio": "a.wav"}\n')
        with pytest.raises(ManifestError, match="text"):
            load_manifest(p)


class TestSplit:
    def test_100_default_sizes(self):
        train, val, test = split(make_manifest(100), SplitConfig(seed=7))
        assert (len(train), len(val), len(test)) == (70, 15, 15)

    def test_10_rounding(self):
        train, val, test = split(make_manifest(10), SplitConfig(seed=7))
        assert (len(train), len(val), len(test)) == (7, 2, 1)

    def test_partition_exact(self):
        m = make_manifest(37)
        train, val, test = split(m, SplitConfig(seed=3))
        ids = sorted(train.ids() + val.ids() + test.ids())
        assert ids == sorted(m.ids())
        assert not (set(train.ids()) & set(val.ids()))
        assert not (set(train.ids()) & set(test.ids()))
        assert not (set(val.ids()) & set(test.ids()))

    def test_deterministic_same_seed(self):
        m = make_manifest(100)
        a = split(m, SplitConfig(seed=5))
        b = split(m, SplitConfig(seed=5))
        assert [p.ids() for p in a] == [p.ids() for p in b]

    def test_different_seeds_differ(self):
        m = make_manifest(100)
        a = split(m, SplitConfig(seed=1))
        b = split(m, SplitConfig(seed=2))
        assert a[0].ids() != b[0].ids()

    def test_group_mode_speaker_disjoint(self):
        m = make_manifest(60, speakers=[f"spk{i}" for i in range(12)])
        train, val, test = split(m, SplitConfig(seed=4, group_key="speaker"))
        speakers = [
            {u.speaker for u in part} for part in (train, val, test)
        ]
        assert not (speakers[0] & speakers[1])
        assert not (speakers[0] & speakers[2])
        assert not (speakers[1] & speakers[2])
        assert len(train) + len(val) + len(test) == 60

    def test_group_too_large(self):
        m = make_manifest(10, speakers=["only"])
        with pytest.raises(ManifestError, match="only"):
            split(m, SplitConfig(seed=0, group_key="speaker"))

    def test_empty_manifest(self):
        with pytest.raises(ManifestError):
            split(Manifest((), name="empty"), SplitConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SplitConfig(proportions=(0.5, 0.4, 0.2))
        with pytest.raises(ValueError):
            SplitConfig(group_key="channel")


def test_utterance_requires_id():
    with pytest.raises(ValueError):
        Utterance(id="", audio_path="x.wav", transcript="t")
