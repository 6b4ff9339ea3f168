"""Acceptance criteria 1-10, driven through the ``kvnlab accept`` command.

The suite runs twice in fresh processes; criteria 1-9 are read from the first
report and criterion 10 compares the two reports byte for byte.
"""

import json
import subprocess
import sys
import time

import pytest

from kvnlab.acceptance import CRITERIA, SUITE_LIMIT

RESULT_LINES = []


def _accept(out_dir):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "kvnlab.cli", "accept", "--seed", "0", "--out-dir", str(out_dir)],
                          capture_output=True, text=True)
    return proc, time.perf_counter() - t0


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("accept")
    return [(*_accept(base / f"run{i}"), base / f"run{i}") for i in (1, 2)]


def _record(cid, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {cid}: {title} ({detail})"
    RESULT_LINES.append(line)
    print(line)


@pytest.mark.parametrize("cid, title, limit", [(c, t, lim) for c, t, lim, _ in CRITERIA],
                         ids=[f"criterion_{c}" for c, *_ in CRITERIA])
def test_criterion(runs, cid, title, limit):
    _, _, out = runs[0]
    report = json.loads((out / "acceptance_report.json").read_text())
    timing = json.loads((out / "acceptance_timings.json").read_text())["criteria"][cid]
    res = report["criteria"][cid]
    ok = res["passed"] and timing["seconds"] < limit
    _record(cid, title, ok, f"{timing['seconds']:.1f}s of {limit:.0f}s")
    assert res["passed"], json.dumps(res, indent=1)
    assert timing["seconds"] < limit


def test_criterion_10_determinism(runs):
    (p1, t1, d1), (p2, t2, d2) = runs
    same = (d1 / "acceptance_report.json").read_bytes() == (d2 / "acceptance_report.json").read_bytes()
    ok = same and p1.returncode == 0 and p2.returncode == 0 and max(t1, t2) < SUITE_LIMIT
    _record("10", "determinism", ok, f"identical={same}, exit={p1.returncode}/{p2.returncode}, "
            f"wall={t1:.1f}s/{t2:.1f}s of {SUITE_LIMIT:.0f}s")
    assert same
    assert p1.returncode == 0, p1.stderr
    assert p2.returncode == 0, p2.stderr
    assert max(t1, t2) < SUITE_LIMIT


def test_manifest_lists_every_output(runs):
    for _, _, d in runs:
        manifest = json.loads((d / "manifest.json").read_text())
        assert sorted(p.name for p in d.iterdir()) == sorted(manifest["outputs"] + ["manifest.json"])
