"""Regenerate the sample_cases/ fixtures.

Six desk-scale cases hand-encoded from the shapes that public multi-host
intrusion reports describe (spearphish entry, lateral movement, staged
exfiltration). Every case is multi-target; the six action kinds all occur
across the corpus. FLOWER_SEED makes the output byte-reproducible.

Usage: python scripts/make_sample_corpus.py [out_dir]
"""

from __future__ import annotations

import os
import sys
import tempfile
from pathlib import Path

os.environ["FLOWER_SEED"] = "sample-corpus-1"

from flowercase import CaseStore, SigningKey  # noqa: E402
from flowercase.report import export_case_json  # noqa: E402

DAY = "2019-05-{d:02d}T{h:02d}:00:00Z"


def ts(d: int, h: int = 9) -> str:
    return DAY.format(d=d, h=h)


def build_case(store: CaseStore, key: SigningKey, name: str, hosts: list[str], plot):
    engine = store.create_case(name, opened_at=ts(1, 8), actor="encoder")
    targets = {}
    for index, host in enumerate(hosts):
        targets[host] = engine.add_target(host, ts(1 + index), at=ts(1 + index, 10)).id
    plot(engine, targets, key)
    return engine


def evidence(engine, key, text: str, category: str, description: str, day: int):
    item, _ = engine.ingest_evidence(
        text.encode(), category, description, key, at=ts(day, 11)
    )
    return item.id


def ruag_like(engine, targets, key):
    e_mail = evidence(engine, key, "mail gw log: dropper.doc", "misc", "mail gateway log", 2)
    e_proxy = evidence(engine, key, "proxy: c2 beacon", "network", "proxy log beacon", 3)
    e_smb = evidence(engine, key, "smb session est.", "network", "smb session log", 4)
    ws, fs, dc = targets.values()
    engine.record_initial_compromise(ws, ts(2, 9), "spearphish attachment", [e_mail], at=ts(2, 12))
    engine.record_action(ws, "information_gathering", ts(2, 10), ts(2, 12), "ad enumeration", evidence=[e_proxy], at=ts(2, 13))
    engine.record_action(ws, "maintain_access", ts(2, 14), ts(3, 9), "c2 beacon install", evidence=[e_proxy], at=ts(3, 10))
    engine.record_move(ws, fs, ts(4, 9), "stolen smb creds", [e_smb], at=ts(4, 12))
    engine.record_action(fs, "actions_on_objective", ts(5, 9), ts(5, 18), "staged archive exfil", evidence=[e_proxy], at=ts(5, 19))
    engine.record_move(fs, dc, ts(6, 9), "pass-the-hash", [e_smb], at=ts(6, 12))
    engine.record_action(dc, "escalate_privileges", ts(6, 10), ts(6, 11), "krbtgt extraction", evidence=[e_smb], at=ts(6, 13))


def carbanak_like(engine, targets, key):
    e_mail = evidence(engine, key, "mail: invoice.exe", "misc", "phish mail store", 2)
    e_vnc = evidence(engine, key, "vnc session rec", "host", "operator vnc capture", 4)
    ws, admin, atm = targets.values()
    engine.record_initial_compromise(ws, ts(2, 9), "phishing mail with exploit doc", [e_mail], at=ts(2, 11))
    engine.record_action(ws, "information_gathering", ts(2, 10), ts(3, 17), "screen recording of clerks", evidence=[e_vnc], at=ts(3, 18))
    engine.record_move(ws, admin, ts(4, 9), "keylogged admin password", [e_vnc], at=ts(4, 10))
    engine.record_action(admin, "escalate_privileges", ts(4, 11), ts(4, 12), "domain admin via svc account", evidence=[e_vnc], at=ts(4, 13))
    engine.record_move(admin, atm, ts(5, 9), "rdp with admin creds", [e_vnc], at=ts(5, 10))
    engine.record_action(atm, "actions_on_objective", ts(6, 2), ts(6, 4), "dispense command replay", evidence=[e_vnc], at=ts(6, 5))
    engine.record_action(atm, "cover_tracks", ts(6, 5), ts(6, 6), "journal file deletion", evidence=[], at=ts(6, 7))


def cleaver_like(engine, targets, key):
    e_web = evidence(engine, key, "webshell upload", "host", "iis w3svc log", 2)
    e_dump = evidence(engine, key, "lsass dump artifact", "host", "edr process dump alert", 3)
    web, db = targets.values()
    engine.record_initial_compromise(web, ts(2, 9), "sql injection to webshell", [e_web], at=ts(2, 10))
    engine.record_action(web, "escalate_privileges", ts(2, 11), ts(2, 12), "juicy potato token theft", evidence=[e_dump], at=ts(2, 13))
    engine.record_action(web, "cover_tracks", ts(2, 14), ts(2, 15), "iis log truncation", evidence=[e_web], at=ts(2, 16))
    engine.record_move(web, db, ts(3, 9), "cached sa credentials", [e_dump], at=ts(3, 10))
    engine.record_action(db, "actions_on_objective", ts(3, 11), ts(3, 15), "bulk table export", evidence=[e_dump], at=ts(3, 16))


def apt28_like(engine, targets, key):
    e_dns = evidence(engine, key, "dns tunnel queries", "network", "resolver query log", 2)
    e_usb = evidence(engine, key, "usb mount records", "host", "registry usbstor hive", 4)
    mail, ws, share = targets.values()
    engine.record_initial_compromise(mail, ts(2, 9), "owa credential phishing", [e_dns], at=ts(2, 10))
    engine.record_action(mail, "information_gathering", ts(2, 10), ts(2, 18), "mailbox sync", evidence=[e_dns], at=ts(2, 19))
    engine.record_move(mail, ws, ts(3, 9), "password reuse", [e_dns], at=ts(3, 10))
    engine.record_action(ws, "maintain_access", ts(3, 11), ts(9, 9), "implant with dns c2", evidence=[e_dns], at=ts(9, 10))
    engine.record_move(ws, share, ts(5, 9), "mapped drive traversal", [e_usb], at=ts(5, 10))
    engine.record_action(share, "actions_on_objective", ts(5, 11), ts(5, 12), "airgap jump staging", evidence=[e_usb], at=ts(5, 13))


def aurora_like(engine, targets, key):
    e_js = evidence(engine, key, "ie zero-day landing page", "network", "proxy cache page", 2)
    e_scm = evidence(engine, key, "scm repo access log", "host", "source control audit", 3)
    ws, scm = targets.values()
    engine.record_initial_compromise(ws, ts(2, 9), "watering hole browser exploit", [e_js], at=ts(2, 10))
    engine.record_action(ws, "maintain_access", ts(2, 10), ts(3, 9), "ssl beacon backdoor", evidence=[e_js], at=ts(3, 10))
    engine.record_move(ws, scm, ts(3, 11), "developer token theft", [e_scm], at=ts(3, 12))
    engine.record_action(scm, "actions_on_objective", ts(3, 13), ts(4, 9), "source tree clone", evidence=[e_scm], at=ts(4, 10))
    engine.record_action(scm, "information_gathering", ts(3, 12), ts(3, 13), "repo acl listing", evidence=[e_scm], at=ts(4, 11))


def ke3chang_like(engine, targets, key):
    e_rar = evidence(engine, key, "staged rar archives", "host", "temp dir listing", 3)
    e_cme = evidence(engine, key, "lateral smb exec", "network", "ids smb alerts", 4)
    mfa1, mfa2, gw = targets.values()
    engine.record_initial_compromise(mfa1, ts(2, 9), "g20 themed spearphish", [e_rar], at=ts(2, 10))
    engine.record_initial_compromise(mfa2, ts(2, 14), "second spearphish wave", [e_rar], at=ts(2, 15))
    engine.record_action(mfa1, "information_gathering", ts(2, 10), ts(2, 12), "net view recon", evidence=[e_cme], at=ts(2, 16))
    engine.record_move(mfa1, gw, ts(4, 9), "psexec with domain creds", [e_cme], at=ts(4, 10))
    engine.record_action(gw, "actions_on_objective", ts(4, 11), ts(4, 18), "rar exfil over https", evidence=[e_rar], at=ts(4, 19))
    engine.record_action(gw, "cover_tracks", ts(4, 19), ts(4, 20), "prefetch wipe", evidence=[], at=ts(4, 21))
    engine.record_move(mfa2, gw, ts(5, 9), "shared local admin", [e_cme], at=ts(5, 10))


CASES = [
    ("ruag-espionage", ["ws-fin-07", "files-01", "dc-01"], ruag_like),
    ("carbanak-bank", ["clerk-ws-12", "admin-ws-02", "atm-gw-01"], carbanak_like),
    ("cleaver-infra", ["web-dmz-01", "db-core-01"], cleaver_like),
    ("apt28-ministry", ["owa-01", "press-ws-03", "share-srv-01"], apt28_like),
    ("aurora-ip-theft", ["dev-ws-21", "scm-01"], aurora_like),
    ("ke3chang-mfa", ["mfa-ws-01", "mfa-ws-02", "mail-gw-01"], ke3chang_like),
]


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("sample_cases")
    out_dir.mkdir(parents=True, exist_ok=True)
    key = SigningKey.generate(key_id="encoder", seed=b"\x11" * 32)
    with tempfile.TemporaryDirectory() as tmp:
        store = CaseStore(tmp, durable=False)
        for name, hosts, plot in CASES:
            engine = build_case(store, key, name, hosts, plot)
            text = export_case_json(engine.case)
            (out_dir / f"{name}.case.json").write_text(text, encoding="utf-8")
            print(f"wrote {name}.case.json ({len(engine.case.targets)} targets)")


if __name__ == "__main__":
    main()
