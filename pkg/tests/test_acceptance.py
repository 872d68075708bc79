"""Acceptance suite: one test per criterion, at full stated scale.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion. Each test re-derives its expectations through the independent
oracles in oracles.py, never through the code paths under test.
"""

import dataclasses
import json
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from flowercase import (
    CaseStore,
    SigningKey,
    attack_chains,
    corpus_stats,
    emit_stats,
    load_corpus,
    state_digest,
    validate_graph,
    verify_custody_chain,
)
from flowercase.engine import CaseEngine, replay_events
from flowercase.journal import JournalFile, verify_events
from flowercase.report import export_dot, generate_report

from gencase import RandomCaseBuilder, build_random_case
from oracles import (
    check_dot,
    crossref_report,
    oracle_closed_allowed,
    oracle_filter,
    oracle_paths,
    oracle_stats,
    oracle_violations,
    raw_from_case_dict,
)

REPO = Path(__file__).resolve().parent.parent
GEN_AT = "2019-06-01T00:00:00Z"


def announce(name: str) -> None:
    print(f"\nACCEPTANCE {name}: PASS")


# ---------------------------------------------------------------------------


def test_criterion_tamper_detection(tmp_path, key):
    """100% detection of blob flips and custody/journal field edits, <30s."""
    started = time.monotonic()
    rng = random.Random(2024)
    store = CaseStore(tmp_path / "cases", durable=False)
    engine = store.create_case("tamper-rig", opened_at="2019-02-01T08:00:00Z")
    payloads = [rng.randbytes(rng.randint(16, 256)) for _ in range(8)]
    items = [
        engine.ingest_evidence(data, "host", f"artifact {i}", key)[0]
        for i, data in enumerate(payloads)
    ]
    for item in items[:4]:
        engine.record_custody_event(item.id, "accessed", key)

    # 1) >=100 randomized single-byte flips in stored blobs.
    blob_trials = 120
    detected = 0
    for _ in range(blob_trials):
        index = rng.randrange(len(items))
        item, original = items[index], payloads[index]
        path = engine.blobs.path_for(item.content_hash)
        mutated = bytearray(original)
        mutated[rng.randrange(len(mutated))] ^= 1 << rng.randrange(8)
        path.write_bytes(bytes(mutated))
        result = engine.verify_item(item.id, key)
        if not result.ok and result.actual != result.expected:
            detected += 1
        path.write_bytes(original)
    assert detected == blob_trials

    # 2) >=100 randomized field edits in custody entries, earliest seq reported.
    custody = engine.case.custody
    keys_map = dict(engine.case.signer_keys)
    custody_trials = 120
    custody_hits = 0
    fields = ["actor", "at", "evidence", "prev_hash", "entry_hash", "signature", "seq", "action"]
    for _ in range(custody_trials):
        position = rng.randrange(len(custody))
        entry = custody[position]
        field = rng.choice(fields)
        if field == "seq":
            mutated = dataclasses.replace(entry, seq=entry.seq + rng.randint(1, 5))
        elif field == "action":
            from flowercase import CustodyAction

            new_action = rng.choice([a for a in CustodyAction if a != entry.action])
            mutated = dataclasses.replace(entry, action=new_action)
        elif field in ("prev_hash", "entry_hash"):
            mutated = dataclasses.replace(entry, **{field: "f" * 64})
        elif field == "signature":
            mutated = dataclasses.replace(entry, signature="QUJD" + entry.signature[4:])
        else:
            mutated = dataclasses.replace(entry, **{field: str(getattr(entry, field)) + "x"})
        tampered = custody[:position] + [mutated] + custody[position + 1 :]
        result = verify_custody_chain(tampered, keys_map)
        if not result.ok and result.break_seq == position + 1:
            custody_hits += 1
    assert custody_hits == custody_trials

    # 3) >=100 randomized field edits in journal events, earliest seq reported.
    journal_lines = engine.journal.path.read_text().splitlines()
    journal_trials = 120
    journal_hits = 0
    for _ in range(journal_trials):
        position = rng.randrange(len(journal_lines))
        event = json.loads(journal_lines[position])
        field = rng.choice(["at", "actor", "kind", "prev_hash", "hash", "seq", "payload"])
        if field == "seq":
            event["seq"] += rng.randint(1, 3)
        elif field == "payload":
            event["payload"] = {**event["payload"], "smuggled": True}
        elif field in ("prev_hash", "hash"):
            event[field] = "e" * 64
        else:
            event[field] = str(event[field]) + "x"
        mutated_lines = list(journal_lines)
        mutated_lines[position] = json.dumps(
            event, sort_keys=True, separators=(",", ":"), ensure_ascii=False
        )
        tampered_path = tmp_path / "tampered.jsonl"
        tampered_path.write_text("\n".join(mutated_lines) + "\n")
        result = JournalFile(tampered_path).verify()
        if not result.ok and result.break_seq == position + 1:
            journal_hits += 1
    assert journal_hits == journal_trials

    elapsed = time.monotonic() - started
    assert elapsed < 30, f"tamper suite took {elapsed:.1f}s"
    announce(
        f"tamper-detection ({blob_trials} blob flips, {custody_trials} custody edits, "
        f"{journal_trials} journal edits, {elapsed:.1f}s)"
    )


def test_criterion_replay_determinism(tmp_path, key):
    """50 random scripted cases: live digest == replay digest; crash recovery."""
    cases = 50
    for seed in range(cases):
        ops = 20 + (seed * 7) % 41  # up to 60 ops
        builder = build_random_case(tmp_path / f"c{seed}", seed=seed, ops=ops, key=key)
        live = builder.engine
        events = live.journal.read_events()
        assert verify_events(events).ok
        assert state_digest(replay_events(events)) == live.state_digest(), f"seed {seed}"
        reopened = CaseEngine.open(live.case_dir)
        assert reopened.state_digest() == live.state_digest()

    # Crash simulation: persisted but never applied in memory -> replay recovers.
    crashes = 0
    for seed in range(10):
        store = CaseStore(tmp_path / f"crash{seed}", durable=False)
        engine = store.create_case("crashy", opened_at="2019-02-01T08:00:00Z")
        engine.add_target("pre-crash", "2019-02-01T08:00:00Z")

        class Boom(RuntimeError):
            pass

        def explode(event):
            raise Boom()

        engine.post_persist_hook = explode
        with pytest.raises(Boom):
            engine.add_target("crash-victim", "2019-02-01T09:00:00Z")
        engine.post_persist_hook = None
        assert len(engine.case.targets) == 1
        recovered = CaseEngine.open(engine.case_dir)
        labels = sorted(t.label for t in recovered.case.targets.values())
        assert labels == ["crash-victim", "pre-crash"]
        assert recovered.journal.verify().ok
        crashes += 1
    announce(f"replay-determinism ({cases} cases, {crashes} crash recoveries)")


def test_criterion_graph_invariants(tmp_path):
    """>=500 generated cases: validate_graph and attack_chains match oracles."""
    cases = 500
    paths_checked = 0
    for seed in range(cases):
        builder = build_random_case(
            tmp_path / f"g{seed}", seed=10_000 + seed, ops=25, max_targets=8
        )
        case = builder.engine.case
        raw = raw_from_case_dict(case.to_dict())
        got = {(v.rule, v.entity) for v in validate_graph(case)}
        assert got == oracle_violations(raw), f"seed {seed}"
        for target_id in case.targets:
            assert attack_chains(case, target_id) == oracle_paths(raw, target_id), f"seed {seed}"
            paths_checked += 1
    announce(f"graph-invariants ({cases} cases, {paths_checked} path enumerations)")


def test_criterion_state_machine_soundness(tmp_path):
    """>=10k ops across >=200 cases: legal transitions only; close iff oracle."""
    cases = 200
    ops_per_case = 50
    total_ops = 0
    closed = 0
    blocked = 0
    for seed in range(cases):
        builder = RandomCaseBuilder(tmp_path / f"s{seed}", seed=20_000 + seed, max_targets=6)
        builder.run(ops_per_case)  # asserts transition legality per op
        total_ops += builder.attempted
        if seed % 2 == 0:
            builder.finish_for_closure()
        engine = builder.engine
        oracle_says = oracle_closed_allowed(
            [e.to_dict() for e in engine.journal.read_events()]
        )
        from flowercase.errors import ClosureBlocked

        try:
            engine.close_case()
            engine_closed = True
        except ClosureBlocked as exc:
            engine_closed = False
            assert exc.detail, "blocked closure must carry a report"
        assert engine_closed == oracle_says, f"seed {seed}"
        closed += engine_closed
        blocked += not engine_closed
    assert total_ops >= 10_000
    assert closed and blocked, "both closure outcomes must be exercised"
    announce(
        f"state-machine-soundness ({total_ops} ops, {cases} cases, "
        f"{closed} closed / {blocked} blocked, oracle agreement 100%)"
    )


def test_criterion_corpus_pipeline():
    """Shipped samples: all multi-target, all six kinds, byte-stable emit."""
    samples = REPO / "sample_cases"
    first = load_corpus(samples)
    assert first.errors == []
    assert len(first.cases) >= 5
    stats = corpus_stats(first.cases)
    assert stats.multi_target_cases == stats.cases, "every sample must be multi-target"
    assert all(count >= 1 for count in stats.leaf_totals.values()), "all six kinds"
    assert stats.to_dict() == oracle_stats([c.to_dict() for c in first.cases])
    second = load_corpus(samples)
    assert emit_stats(corpus_stats(second.cases), "csv") == emit_stats(stats, "csv")
    assert emit_stats(corpus_stats(second.cases), "md") == emit_stats(stats, "md")
    for case in first.cases:
        assert verify_custody_chain(case.custody, case.signer_keys).ok
    announce(
        f"corpus-pipeline ({stats.cases} cases, {stats.multi_target_cases}/{stats.cases} "
        "multi-target, six kinds covered, byte-stable)"
    )


def test_criterion_filter_algebra():
    """>=200 random (vault, filter) pairs match brute force; algebra laws hold."""
    from test_filters import make_case, random_expr, random_items

    from flowercase import apply_filter

    pairs = 0
    for seed in range(60):
        rng = random.Random(30_000 + seed)
        items = random_items(rng, rng.randint(5, 25))
        case = make_case(items)
        dicts = [item.to_dict() for item in items]
        for _ in range(4):
            expr = random_expr(rng)
            assert apply_filter(case, expr) == oracle_filter(dicts, expr)
            pairs += 1
        a, b = random_expr(rng), random_expr(rng)
        sa, sb = set(apply_filter(case, a)), set(apply_filter(case, b))
        assert set(apply_filter(case, {"or": [a, b]})) == sa | sb
        assert set(apply_filter(case, {"and": [a, b]})) == sa & sb
        assert set(apply_filter(case, {"not": a})) == set(case.evidence) - sa
    assert pairs >= 200
    announce(f"filter-algebra ({pairs} oracle comparisons, laws exact)")


def test_criterion_report_completeness(tmp_path):
    """Zero missing journaled entities, zero orphans; byte-deterministic."""
    checked = 0
    for seed in range(30):
        builder = build_random_case(tmp_path / f"r{seed}", seed=40_000 + seed, ops=35)
        if seed % 3 == 0:
            builder.finish_for_closure()
        engine = builder.engine
        events = [e.to_dict() for e in engine.journal.read_events()]
        text = generate_report(engine.case, GEN_AT)
        problems = crossref_report(events, text)
        assert problems == [], f"seed {seed}: {problems[:3]}"
        assert text == generate_report(engine.case, GEN_AT)
        dot = export_dot(engine.case)
        assert dot == export_dot(engine.case)
        assert check_dot(dot) == []
        assert dot.count(" -> ") == len(engine.case.edges)
        checked += 1
    announce(f"report-completeness ({checked} cases, zero missing/orphans)")


def test_criterion_end_to_end_demo(tmp_path):
    """scripts/demo.sh runs CLI-only from case new to case close, exit 0."""
    env = dict(os.environ)
    env.update(
        FLOWER=f"{sys.executable} -m flowercase",
        FLOWER_HOME=str(tmp_path / "demo-home"),
    )
    env.pop("FLOWER_CASE", None)
    result = subprocess.run(
        ["bash", str(REPO / "scripts" / "demo.sh")],
        capture_output=True,
        text=True,
        env=env,
        cwd=REPO,
        timeout=300,
    )
    assert result.returncode == 0, result.stderr[-2000:]
    status = json.loads(result.stdout[result.stdout.rindex("\n{") + 1 :])
    assert status["state"] == "closed"
    assert status["closure"]["closed_allowed"] is True

    # The demo case's report cross-references cleanly too.
    case_dir = tmp_path / "demo-home" / status["case_id"]
    engine = CaseEngine.open(case_dir)
    events = [e.to_dict() for e in engine.journal.read_events()]
    report_text = (case_dir / "report.md").read_text()
    assert crossref_report(events, report_text) == []
    announce(f"end-to-end-demo ({status['seq']} journal events, closed)")
