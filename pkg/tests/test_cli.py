import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from invograph.formats import format_matrix, parse_certificate, parse_class_dump
from invograph.gf import make_field
from invograph.involutions import ClassSpec, canonical_t
from invograph.witnesses import far_involution


def run(*args, env=None):
    full_env = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-m", "invograph", *map(str, args)], capture_output=True, text=True, env=full_env)


def strip_runtime(obj):
    if isinstance(obj, dict):
        return {k: strip_runtime(v) for k, v in obj.items() if k != "runtime_ms"}
    if isinstance(obj, list):
        return [strip_runtime(v) for v in obj]
    return obj


def test_verify_pass(tmp_path):
    out = tmp_path / "r.json"
    r = run("verify", "--n", 4, "--k", 2, "--p", 2, "--e", 1, "--json", out)
    assert r.returncode == 0, r.stderr
    assert "PASS" in r.stdout
    report = json.loads(out.read_text())
    assert report["pass"] and report["reports"][0]["mode"] == "exact"


def test_census_csv(tmp_path):
    out = tmp_path / "out.csv"
    r = run("census", "--n", 4, "--k", 1, "--p", 3, "--e", 1, "--csv", out)
    assert r.returncode == 0, r.stderr
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["distance", "m", "count"]
    by_d = {}
    for d, _, c in rows[1:]:
        by_d[int(d)] = by_d.get(int(d), 0) + int(c)
    assert by_d == {0: 1, 1: 117, 2: 962}


def test_witness_transpose_certificate(tmp_path):
    out = tmp_path / "cert.txt"
    r = run("witness", "--case", "lemma27", "--n", 6, "--p", 2, "--e", 1, "--emit", out)
    assert r.returncode == 0, r.stderr
    cert = parse_certificate(out.read_text())
    t = canonical_t(ClassSpec(6, 3, make_field(2)))
    assert cert.length == 4 and cert.validate(t, t.T)


@pytest.mark.parametrize("case,n,k,p", [("prop24", 5, 2, 3), ("prop28", 5, 2, 2), ("cor26", 4, 1, 3)])
def test_witness_cases(tmp_path, case, n, k, p):
    out = tmp_path / "w.json"
    r = run("witness", "--case", case, "--n", n, "--k", k, "--p", p, "--json", out)
    assert r.returncode == 0, r.stderr
    assert json.loads(out.read_text())["case"] == case


def test_json_deterministic_across_workers(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("census", "--n", 4, "--k", 2, "--p", 3, "--cells", "--json", a, "--workers", 1).returncode == 0
    assert run("census", "--n", 4, "--k", 2, "--p", 3, "--cells", "--json", b, env={"INVOGRAPH_WORKERS": "3"}).returncode == 0
    ja, jb = json.loads(a.read_text()), json.loads(b.read_text())
    assert strip_runtime(ja) == strip_runtime(jb)
    assert set(ja) == {"spec", "counts", "diameter", "connected", "cells", "runtime_ms"}


def test_class_listing(tmp_path):
    out = tmp_path / "dump.txt"
    r = run("class", "--n", 3, "--k", 1, "--p", 2, "--list", out)
    assert r.returncode == 0
    F, mats = parse_class_dump(out.read_text())
    assert len(mats) == 21


def test_distance_and_diameter(tmp_path):
    F = make_field(3)
    spec = ClassSpec(4, 2, F)
    y = tmp_path / "y.txt"
    y.write_text(format_matrix(F, far_involution(spec)))
    cert = tmp_path / "c.txt"
    r = run("distance", "--n", 4, "--k", 2, "--p", 3, "--y", y, "--emit", cert)
    assert r.returncode == 0 and "distance 3" in r.stdout
    assert parse_certificate(cert.read_text()).validate()
    r = run("diameter", "--n", 4, "--k", 2, "--p", 3)
    assert r.returncode == 0 and "PASS" in r.stdout
    r = run("all-involutions", "--n", 3, "--p", 2)
    assert r.returncode == 0 and "diameter 3" in r.stdout


def test_errors_exit_nonzero(tmp_path):
    assert run("census", "--n", 4, "--k", 3, "--p", 2).returncode != 0
    r = run("witness", "--case", "prop24", "--n", 5, "--k", 2, "--p", 2)
    assert r.returncode != 0 and "error" in r.stderr
    assert run("census", "--n", 4, "--k", 2, "--p", 3, "--cap", 100).returncode != 0
    assert run("census", "--bogus").returncode == 2
    r = run("verify", "--n", 6, "--k", 1, "--p", 3, "--cap", 1000)
    assert r.returncode == 0 and "witness-only" in r.stdout
