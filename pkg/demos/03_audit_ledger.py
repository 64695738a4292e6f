"""Walkthrough: hash-chained assignment ledger and tamper detection.

Run with:  python demos/03_audit_ledger.py
"""

import dataclasses
import tempfile

from swati import Assignment, AssignedPair, Ledger, load_ledger, save_ledger, verify

ledger = Ledger()
for task in ("t001", "t002", "t003"):
    record = ledger.post_task(task)
    print(f"posted {task}: index={record.index} hash={record.hash.hex()[:16]}...")

# Committing an assignment appends one Assigned record per pair (task-id
# order), each embedding a digest of the full serialized assignment. The
# commit validates every precondition before touching the chain.
assignment = Assignment(
    pairs=(AssignedPair("v007", "t002", 0.83), AssignedPair("v003", "t001", 0.91))
)
for record in ledger.commit_assignment(assignment):
    print(f"assigned {record.task_id} -> {record.volunteer_id}"
          f" (digest {record.assignment_digest.hex()[:16]}...)")

ledger.transition("t001", "Completed")
ledger.transition("t003", "Cancelled")
print("states:", {t: s.value for t, s in sorted(ledger.state_index.items())})

result = verify(ledger)
print("verify:", "ok" if result.ok else f"BAD at {result.first_bad_index}: {result.reason}")

# Round-trip through the length-prefixed binary log.
with tempfile.NamedTemporaryFile(suffix=".bin") as tmp:
    save_ledger(ledger, tmp.name)
    reloaded = load_ledger(tmp.name)
print("reload verify:", verify(reloaded).ok)

# Any historical mutation breaks the chain at exactly the record touched.
tampered = list(ledger.records)
tampered[2] = dataclasses.replace(tampered[2], task_id="t999")
bad = verify(Ledger(tampered))
print(f"tampered verify: first_bad_index={bad.first_bad_index} reason={bad.reason!r}")

# Deleting the tail is invisible to a bare chain; an anchored head catches it.
truncated = Ledger(ledger.records[:-1])
print("truncated, no anchor: ", verify(truncated).ok)
anchored = verify(truncated, expected_head=ledger.head())
print(f"truncated, anchored:  first_bad_index={anchored.first_bad_index} "
      f"reason={anchored.reason!r}")
