import hashlib
import json

import pytest

from swati.cli import main
from swati.ledger import load_ledger


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _gen(tmp_path, seed=4, n_volunteers=12, n_tasks=8):
    out = tmp_path / f"gen{seed}"
    rc = main(
        [
            "gen",
            "--out",
            str(out),
            "--seed",
            str(seed),
            "--n-volunteers",
            str(n_volunteers),
            "--n-tasks",
            str(n_tasks),
        ]
    )
    assert rc == 0
    return out


def test_gen_writes_corpus_history_manifest(tmp_path, capsys):
    out = _gen(tmp_path)
    assert (out / "corpus.jsonl").exists()
    assert (out / "history.jsonl").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "gen"
    assert manifest["seeds"] == {"synthetic": 4}
    assert manifest["stats"]["n_volunteers"] == 12
    assert "ontology" in manifest["input_digests"]
    assert "wrote 12 volunteers" in capsys.readouterr().out


def test_gen_is_bit_reproducible(tmp_path):
    a = _gen(tmp_path, seed=9)
    b_dir = tmp_path / "again"
    rc = main(
        ["gen", "--out", str(b_dir), "--seed", "9", "--n-volunteers", "12", "--n-tasks", "8"]
    )
    assert rc == 0
    assert _sha(a / "corpus.jsonl") == _sha(b_dir / "corpus.jsonl")
    assert _sha(a / "history.jsonl") == _sha(b_dir / "history.jsonl")
    assert _sha(a / "manifest.json") != ""  # exists and hashable


def test_extract_outputs(tmp_path):
    gen = _gen(tmp_path)
    out = tmp_path / "ex"
    rc = main(["extract", "--corpus", str(gen / "corpus.jsonl"), "--out", str(out)])
    assert rc == 0
    lines = (out / "extraction.jsonl").read_text().splitlines()
    assert len(lines) == 20  # 12 volunteers + 8 tasks
    first = json.loads(lines[0])
    assert set(first) == {"doc_id", "kind", "skills", "unresolved", "mentions", "cues"}
    stats = json.loads((out / "extraction_stats.json").read_text())
    assert stats["total_skills"] > 0
    assert stats["unique_vocabulary"] > 0


def test_match_deterministic_artifacts(tmp_path):
    gen = _gen(tmp_path)
    config = {"history_path": str(gen / "history.jsonl")}
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    digests = []
    for run in range(2):
        out = tmp_path / f"match{run}"
        rc = main(
            [
                "match",
                "--config",
                str(config_path),
                "--corpus",
                str(gen / "corpus.jsonl"),
                "--method",
                "swati",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        digests.append(
            (
                _sha(out / "assignment.jsonl"),
                _sha(out / "ledger.bin"),
                _sha(out / "quality.csv"),
                _sha(out / "manifest.json"),
            )
        )
    assert digests[0] == digests[1]


def test_match_ledger_is_valid_and_complete(tmp_path):
    gen = _gen(tmp_path)
    out = tmp_path / "match"
    rc = main(
        ["match", "--corpus", str(gen / "corpus.jsonl"), "--method", "swati", "--out", str(out)]
    )
    assert rc == 0
    ledger = load_ledger(str(out / "ledger.bin"))
    posted = [r for r in ledger.records if r.event == "Posted"]
    assigned = [r for r in ledger.records if r.event == "Assigned"]
    assert len(posted) == 8
    assert 0 < len(assigned) <= 8
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["ledger_head"] == ledger.head().hex()
    rc = main(["verify", str(out / "ledger.bin")])
    assert rc == 0


def test_match_random_requires_seed(tmp_path, capsys):
    gen = _gen(tmp_path)
    out = tmp_path / "match"
    rc = main(
        ["match", "--corpus", str(gen / "corpus.jsonl"), "--method", "random", "--out", str(out)]
    )
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError"
    assert "seed" in err["detail"]


def test_match_random_with_seed(tmp_path):
    gen = _gen(tmp_path)
    out = tmp_path / "match"
    rc = main(
        [
            "match",
            "--corpus",
            str(gen / "corpus.jsonl"),
            "--method",
            "random",
            "--seed",
            "5",
            "--out",
            str(out),
        ]
    )
    assert rc == 0


def test_match_epochs_flag(tmp_path):
    gen = _gen(tmp_path)
    out = tmp_path / "match"
    rc = main(
        [
            "match",
            "--corpus",
            str(gen / "corpus.jsonl"),
            "--epochs",
            "3",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    record = json.loads((out / "assignment.jsonl").read_text().splitlines()[0])
    assert set(record["components"]) == {"skill", "content", "willingness"}


def test_verify_detects_tampering(tmp_path, capsys):
    gen = _gen(tmp_path)
    out = tmp_path / "match"
    main(["match", "--corpus", str(gen / "corpus.jsonl"), "--out", str(out)])
    capsys.readouterr()
    blob = bytearray((out / "ledger.bin").read_bytes())
    blob[150] ^= 0xFF
    (out / "ledger.bin").write_bytes(bytes(blob))
    rc = main(["verify", str(out / "ledger.bin")])
    verdict = json.loads(capsys.readouterr().out)
    assert rc == 1
    assert verdict["ok"] is False
    assert verdict["reason"] in {"hash mismatch", "link broken"}


def test_strict_mode_rejects_unknown_fields(tmp_path, capsys):
    corpus_path = tmp_path / "c.jsonl"
    corpus_path.write_text(
        json.dumps({"id": "v1", "kind": "volunteer", "text": "alpha", "x": 1}) + "\n"
    )
    out = tmp_path / "ex"
    rc = main(["extract", "--corpus", str(corpus_path), "--out", str(out), "--strict"])
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ParseError"


def test_bad_config_is_machine_readable_error(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"utility": {"skill_weight": 0.9, "content_weight": 0.9}}))
    out = tmp_path / "gen"
    rc = main(["gen", "--config", str(config_path), "--out", str(out), "--seed", "1"])
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError"


def test_bench_smoke(tmp_path):
    out = tmp_path / "bench"
    rc = main(["bench", "--sizes", "4,8", "--seed", "2", "--out", str(out)])
    assert rc == 0
    assert (out / "timing.csv").exists()
    assert (out / "quality.csv").exists()
    assert (out / "cdf_4.csv").exists()
    assert (out / "cdf_8.csv").exists()
    header = (out / "cdf_4.csv").read_text().splitlines()[0]
    assert header == "threshold,swati,skill,random"


def test_bench_requires_seed(tmp_path, capsys):
    out = tmp_path / "bench"
    rc = main(["bench", "--sizes", "4", "--out", str(out)])
    assert rc == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"


def test_bench_rejects_malformed_sizes(tmp_path, capsys):
    out = tmp_path / "bench"
    rc = main(["bench", "--sizes", "4,huge", "--seed", "1", "--out", str(out)])
    assert rc == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"


def test_match_rejects_zero_epochs(tmp_path, capsys):
    gen = _gen(tmp_path)
    out = tmp_path / "match"
    rc = main(
        ["match", "--corpus", str(gen / "corpus.jsonl"), "--epochs", "0", "--out", str(out)]
    )
    assert rc == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"


def test_custom_config_overrides(tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps({"utility": {"form": "split"}, "willingness": {"smoothing": 0.4}})
    )
    gen = _gen(tmp_path)
    out = tmp_path / "match"
    rc = main(
        [
            "match",
            "--config",
            str(config_path),
            "--corpus",
            str(gen / "corpus.jsonl"),
            "--out",
            str(out),
        ]
    )
    assert rc == 0
