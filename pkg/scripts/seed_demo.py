#!/usr/bin/env python3
"""Stand up a throwaway demo instance: admin + three accounts, one
12-lead dataset, memberships granted. Prints credentials and the serve
command. Point --data-dir at a fresh location (or pass --force).
"""
import argparse
import shutil
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ecganno import annotations, auth, ingest
from ecganno.storage import Storage

import gen_dataset

ACCOUNTS = (
    ("alice", "annotator"),
    ("bob", "annotator"),
    ("erika", "expert"),
)
PASSWORD = "demopass123"  # every demo account, admin included


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default="./demo-data")
    parser.add_argument("--records", type=int, default=20)
    parser.add_argument("--force", action="store_true",
                        help="wipe an existing --data-dir first")
    args = parser.parse_args()

    data_dir = Path(args.data_dir)
    if data_dir.exists():
        if not args.force:
            sys.exit(f"{data_dir} already exists; pass --force to wipe it")
        shutil.rmtree(data_dir)

    wfdb_dir = data_dir / "wfdb_src"
    wfdb_dir.mkdir(parents=True)
    rng = np.random.default_rng(7)
    for i in range(args.records):
        bpm = float(rng.uniform(55, 115))
        gen_dataset.write_record(
            wfdb_dir, f"rec{i:04d}", 250.0, 30.0, bpm, gen_dataset.TWELVE_LEADS, rng
        )

    store = Storage.initialize(data_dir)
    admin = auth.create_admin(store, "admin", PASSWORD)
    users = {}
    for username, role in ACCOUNTS:
        code = auth.issue_code(store, admin.user_id, role)
        users[username] = auth.register(store, code.code, username, PASSWORD)

    report = ingest.ingest_directory(store, "demo", wfdb_dir)
    ok = report.n_ok
    for username, role in ACCOUNTS:
        annotations.grant_member(
            store, report.dataset_id, users[username].user_id, expert=(role == "expert")
        )
    spare = auth.issue_code(store, admin.user_id, "annotator")
    store.close()

    print(f"data dir   : {data_dir}")
    print(f"dataset    : demo ({ok} records, 12 leads)")
    for username, role in (("admin", "admin"),) + ACCOUNTS:
        print(f"account    : {username} / {PASSWORD}  ({role})")
    print(f"spare code : {spare.code}  (annotator self-registration)")
    print(f"serve with : ecganno serve --data-dir {data_dir} "
          f"--static-dir frontend/dist")


if __name__ == "__main__":
    main()
