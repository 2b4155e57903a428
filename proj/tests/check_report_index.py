#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Runs simulate + report and checks index.json against the schema and the files on disk."""
import hashlib
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main(ipact, scenario, schema_path):
    schema = json.loads(pathlib.Path(schema_path).read_text())
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        subprocess.run([ipact, "simulate", "--spec", scenario, "-o", str(tmp / "bundle")], check=True)
        subprocess.run([ipact, "report", "--bundle", str(tmp / "bundle"), "-o", str(tmp / "report")], check=True)
        index = json.loads((tmp / "report" / "index.json").read_text())
        jsonschema.validate(index, schema)

        listed = set()
        for a in index["artifacts"]:
            f = tmp / "report" / a["path"]
            data = f.read_bytes()
            assert len(data) == a["bytes"], a["path"]
            assert hashlib.sha256(data).hexdigest() == a["sha256"], a["path"]
            listed.add(a["path"])
        on_disk = {p.relative_to(tmp / "report").as_posix() for p in (tmp / "report").rglob("*") if p.is_file()}
        missing = on_disk - listed - {"index.json", "config.json"}
        assert not missing, f"unlisted artifacts: {sorted(missing)}"
        assert index["validation"]["passed"] and index["validation"]["failed"] == 0
        print(f"index.json valid, {len(listed)} artifacts verified")


if __name__ == "__main__":
    main(*sys.argv[1:4])
