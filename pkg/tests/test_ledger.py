import dataclasses
import hashlib

import pytest

from swati.assignment import Assignment, AssignedPair, assignment_digest
from swati.errors import (
    DuplicateTaskError,
    IllegalTransitionError,
    ParseError,
    UnknownTaskError,
)
from swati.ledger import (
    ZERO_DIGEST,
    Ledger,
    export_ledger_text,
    load_ledger,
    save_ledger,
    verify,
)


def _ledger_with_assignment():
    ledger = Ledger()
    for task in ("t1", "t2", "t3"):
        ledger.post_task(task)
    assignment = Assignment(
        pairs=(AssignedPair("v2", "t2", 0.8), AssignedPair("v1", "t1", 0.9))
    )
    ledger.commit_assignment(assignment)
    return ledger, assignment


def test_genesis_record():
    ledger = Ledger()
    record = ledger.post_task("t1")
    assert record.index == 0
    assert record.prev_hash == ZERO_DIGEST
    assert len(record.hash) == 32


def test_duplicate_post_rejected():
    ledger = Ledger()
    ledger.post_task("t1")
    with pytest.raises(DuplicateTaskError):
        ledger.post_task("t1")


def test_records_chain():
    ledger = Ledger()
    first = ledger.post_task("t1")
    second = ledger.post_task("t2")
    assert second.index == 1
    assert second.prev_hash == first.hash


def test_commit_assignment_in_task_order():
    ledger, assignment = _ledger_with_assignment()
    assigned = [r for r in ledger.records if r.event == "Assigned"]
    assert [r.task_id for r in assigned] == ["t1", "t2"]
    digest = assignment_digest(assignment)
    assert all(r.assignment_digest == digest for r in assigned)
    assert all(r.volunteer_id is not None for r in assigned)


def test_commit_unposted_task_is_atomic():
    ledger = Ledger()
    ledger.post_task("t1")
    before = list(ledger.records)
    bad = Assignment(
        pairs=(AssignedPair("v1", "t1", 0.9), AssignedPair("v2", "t9", 0.8))
    )
    with pytest.raises(IllegalTransitionError):
        ledger.commit_assignment(bad)
    assert ledger.records == before
    assert ledger.state_index["t1"].value == "Posted"


def test_double_commit_rejected():
    ledger, assignment = _ledger_with_assignment()
    with pytest.raises(IllegalTransitionError):
        ledger.commit_assignment(assignment)


def test_transitions():
    ledger, _ = _ledger_with_assignment()
    ledger.transition("t1", "Completed")
    assert ledger.state_index["t1"].value == "Completed"
    ledger.transition("t2", "Cancelled")
    with pytest.raises(IllegalTransitionError):
        ledger.transition("t3", "Completed")  # still Posted
    ledger.transition("t3", "Cancelled")  # Posted -> Cancelled is legal
    with pytest.raises(UnknownTaskError):
        ledger.transition("t9", "Completed")
    with pytest.raises(IllegalTransitionError):
        ledger.transition("t1", "Posted")


def test_verify_clean_ledger():
    ledger, _ = _ledger_with_assignment()
    result = verify(ledger)
    assert result.ok and result.first_bad_index is None


def test_verify_detects_payload_tamper():
    ledger, _ = _ledger_with_assignment()
    k = 2
    tampered = list(ledger.records)
    tampered[k] = dataclasses.replace(tampered[k], task_id="t9")
    result = verify(Ledger(tampered))
    assert (result.ok, result.first_bad_index, result.reason) == (False, k, "hash mismatch")


def test_verify_detects_hash_field_tamper():
    ledger, _ = _ledger_with_assignment()
    k = 1
    tampered = list(ledger.records)
    tampered[k] = dataclasses.replace(tampered[k], hash=hashlib.sha256(b"x").digest())
    result = verify(Ledger(tampered))
    assert (result.first_bad_index, result.reason) == (k, "hash mismatch")


def test_verify_detects_splice():
    ledger, _ = _ledger_with_assignment()
    k = 2
    spliced = list(ledger.records)
    del spliced[k]
    result = verify(Ledger(spliced))
    assert (result.first_bad_index, result.reason) == (k, "link broken")


def test_verify_head_anchor_detects_tail_truncation():
    ledger, _ = _ledger_with_assignment()
    head = ledger.head()
    truncated = Ledger(ledger.records[:-1])
    assert verify(truncated).ok  # a bare chain cannot see tail loss
    result = verify(truncated, expected_head=head)
    assert (result.ok, result.first_bad_index, result.reason) == (
        False,
        len(truncated.records),
        "head mismatch",
    )
    assert verify(ledger, expected_head=head).ok


def test_verify_detects_forged_history():
    # internally consistent records that replay an illegal transition
    ledger = Ledger()
    ledger.post_task("t1")
    forged = Ledger(ledger.records)
    forged._append("t1", "Completed", None, 0, None)  # Posted -> Completed
    result = verify(forged)
    assert (result.first_bad_index, result.reason) == (1, "illegal transition")


def test_state_index_matches_replay():
    ledger, _ = _ledger_with_assignment()
    ledger.transition("t1", "Completed")
    replayed = Ledger(ledger.records)
    assert replayed.state_index == ledger.state_index


def test_persistence_round_trip(tmp_path):
    ledger, _ = _ledger_with_assignment()
    ledger.transition("t1", "Completed")
    path = tmp_path / "ledger.bin"
    save_ledger(ledger, str(path))
    loaded = load_ledger(str(path))
    assert loaded.records == ledger.records
    assert verify(loaded).ok
    # append still works after reload
    loaded.transition("t2", "Cancelled")
    assert verify(loaded).ok


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "ledger.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(ParseError):
        load_ledger(str(path))


def test_load_rejects_truncated_file(tmp_path):
    ledger, _ = _ledger_with_assignment()
    path = tmp_path / "ledger.bin"
    save_ledger(ledger, str(path))
    data = path.read_bytes()
    path.write_bytes(data[:-5])
    with pytest.raises(ParseError):
        load_ledger(str(path))


def test_text_export(tmp_path):
    ledger, _ = _ledger_with_assignment()
    path = tmp_path / "ledger.txt"
    export_ledger_text(ledger, str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == len(ledger.records)
    assert '"event": "Posted"' in lines[0]


def test_timestamps_are_logical_and_monotone():
    ledger, _ = _ledger_with_assignment()
    stamps = [r.timestamp for r in ledger.records]
    assert stamps == sorted(stamps)
    assert stamps == list(range(len(stamps)))
