"""Regenerate the workbench convergence fixtures.

Each fixture pairs a case's raw journal events with the case snapshot the
service would return, both produced by the real engine. The TypeScript
view-model reducer must fold the events into exactly the snapshot, so any
drift between the two reducers breaks the frontend test suite.

Usage: python scripts/gen_ui_fixtures.py [out_file]
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from gencase import build_random_case  # noqa: E402
from flowercase import CaseStore, SigningKey  # noqa: E402


def scripted_all_kinds(root) -> object:
    """One case that touches every journal event kind."""
    store = CaseStore(root, durable=False)
    key = SigningKey.generate(key_id="fixture")
    engine = store.create_case("all-kinds", opened_at="2019-03-01T00:00:00Z")
    engine.set_attacker_notes("public footprint reviewed", at="2019-03-01T01:00:00Z")
    t1 = engine.add_target("web-01", "2019-03-01T02:00:00Z", at="2019-03-01T02:05:00Z")
    t2 = engine.add_target("db-01", "2019-03-01T03:00:00Z", at="2019-03-01T03:05:00Z")
    item, _ = engine.ingest_evidence(
        b"auth log", "host", "sshd auth log", key, source_target=t1.id, at="2019-03-01T04:00:00Z"
    )
    engine.verify_item(item.id, key, at="2019-03-01T04:30:00Z")
    engine.record_custody_event(item.id, "accessed", key, at="2019-03-01T04:45:00Z")
    engine.record_initial_compromise(
        t1.id, "2019-03-01T05:00:00Z", "spearphish", [item.id], at="2019-03-01T05:05:00Z"
    )
    engine.record_move(
        t1.id, t2.id, "2019-03-01T06:00:00Z", "psexec", [item.id], at="2019-03-01T06:05:00Z"
    )
    engine.record_action(
        t1.id, "escalate_privileges", "2019-03-01T05:30:00Z", "2019-03-01T05:40:00Z",
        "kernel exploit", technique="CVE-XXXX", evidence=[item.id], at="2019-03-01T05:45:00Z",
    )
    q1 = engine.pose_question(
        "How did the attacker(s) get onto the system?", scope=t1.id, at="2019-03-01T07:00:00Z"
    )
    step = engine.plan_collection(q1.id, "host", "auth logs", at="2019-03-01T07:05:00Z")
    engine.attach_collected(step.id, [item.id], at="2019-03-01T07:10:00Z")
    engine.run_filter({"keyword": "ssh"}, at="2019-03-01T07:15:00Z")
    h1 = engine.propose_hypothesis(q1.id, "rdp entry", [item.id], at="2019-03-01T07:20:00Z")
    engine.record_check(h1.id, "no rdp sessions", "refuted", [item.id], at="2019-03-01T07:25:00Z")
    engine.open_iteration("new question", at="2019-03-01T07:26:00Z")
    h2 = engine.propose_hypothesis(q1.id, "phish entry", [item.id], at="2019-03-01T07:30:00Z")
    engine.record_check(h2.id, "timestamps align", "verified", [item.id], at="2019-03-01T07:35:00Z")
    engine.answer_question(q1.id, h2.id, at="2019-03-01T07:40:00Z")
    q2 = engine.pose_question("What was stolen?", spawned_from=h2.id, at="2019-03-01T07:45:00Z")
    engine.withdraw_question(q2.id, reason="handled elsewhere", at="2019-03-01T07:50:00Z")
    # Close requires t2's origin proven as well.
    q3 = engine.pose_question(
        "How did the attacker(s) escape / move laterally?", scope=t2.id, at="2019-03-01T08:00:00Z"
    )
    step2 = engine.plan_collection(q3.id, "network", "smb logs", at="2019-03-01T08:05:00Z")
    engine.attach_collected(step2.id, [item.id], at="2019-03-01T08:10:00Z")
    h3 = engine.propose_hypothesis(q3.id, "psexec move", [item.id], at="2019-03-01T08:15:00Z")
    engine.record_check(h3.id, "smb artifacts", "verified", [item.id], at="2019-03-01T08:20:00Z")
    engine.answer_question(q3.id, h3.id, at="2019-03-01T08:25:00Z")
    engine.close_case(actor="lead", at="2019-03-01T09:00:00Z")
    return engine


def main() -> None:
    out_file = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        REPO / "frontend" / "tests" / "fixtures" / "convergence.json"
    )
    out_file.parent.mkdir(parents=True, exist_ok=True)
    streams = []
    with tempfile.TemporaryDirectory() as tmp:
        engine = scripted_all_kinds(Path(tmp) / "scripted")
        streams.append(
            {
                "name": "scripted-all-kinds",
                "events": [e.to_dict() for e in engine.journal.read_events()],
                "snapshot": engine.case.to_dict(),
            }
        )
        for seed in range(110):
            builder = build_random_case(
                Path(tmp) / f"c{seed}", seed=50_000 + seed, ops=10 + (seed % 16)
            )
            if seed % 4 == 0:
                builder.finish_for_closure()
            if seed % 8 == 0:
                builder.engine.close_case()
            streams.append(
                {
                    "name": f"random-{seed}",
                    "events": [e.to_dict() for e in builder.engine.journal.read_events()],
                    "snapshot": builder.engine.case.to_dict(),
                }
            )
    out_file.write_text(json.dumps({"streams": streams}, sort_keys=True), encoding="utf-8")
    size_kb = out_file.stat().st_size // 1024
    print(f"wrote {out_file} ({len(streams)} streams, {size_kb} KiB)")


if __name__ == "__main__":
    main()
