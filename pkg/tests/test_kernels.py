import json
import os
import subprocess
import sys

import pytest

from bnlab import _kernels

SCRIPT = """
import json
from bnlab import _kernels
from bnlab.branch import shoot
out = {"numba": _kernels.HAS_NUMBA, "pts": []}
for N, a in ((3, 2.0), (5, 50.0), (6, 10.0)):
    p = shoot(N, 2, a, 1e-12)
    out["pts"].append([p.lam, p.r_lambda, p.sup_norm])
print(json.dumps(out))
"""


def _run(disable: str) -> dict:
    env = dict(os.environ, BNLAB_DISABLE_NUMBA=disable)
    r = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(r.stdout)


def test_fallback_matches_compiled():
    py = _run("1")
    assert py["numba"] is False
    nb = _run("0")
    for x, y in zip(nb["pts"], py["pts"]):
        assert x == pytest.approx(y, rel=1e-11)


def test_flag_parsing(monkeypatch):
    for v in ("1", "true", "YES", " on "):
        monkeypatch.setenv("BNLAB_DISABLE_NUMBA", v)
        assert not _kernels._numba_requested()
    monkeypatch.setenv("BNLAB_DISABLE_NUMBA", "0")
    assert _kernels._numba_requested()
