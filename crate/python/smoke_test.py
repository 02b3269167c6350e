"""Smoke test for the Python bindings. Build first with
`pip install --no-build-isolation ./crates/python` (or `maturin develop`)."""

import json
import math
import os
import sys
import tempfile

import lattice_spectral_py as ls


def check(cond, msg):
    if not cond:
        print(f"FAIL: {msg}")
        sys.exit(1)
    print(f"ok: {msg}")


kag = ls.Lattice("kagome")
check(kag.cells == 3 and kag.dim == 2, "kagome has 3 cells in dimension 2")
(lo, hi), = kag.spectrum(201)
check(abs(lo + 1) <= 1e-4 and abs(hi - 0.5) <= 1e-4, f"kagome spectrum [{lo}, {hi}]")
check(kag.excluded(0.5) is True and kag.excluded(0.1) is False, "kagome exclusion set")

hexa = ls.Lattice("hexagonal")
want = [-1, -1 / 3, 0, 1 / 3, 1]
got = hexa.thresholds()
check(len(got) == 5 and all(abs(a - b) <= 1e-5 for a, b in zip(got, want)), f"hexagonal thresholds {got}")

sq = ls.Lattice("square", 2)
p = sq.char_poly([complex(0.3, 0.1), complex(1.2, -0.2)], complex(0.1, 0))
x1, x2 = complex(0.3, 0.1), complex(1.2, -0.2)
closed = -(complex(math.cos(x1.real) * math.cosh(x1.imag), -math.sin(x1.real) * math.sinh(x1.imag))
           + complex(math.cos(x2.real) * math.cosh(x2.imag), -math.sin(x2.real) * math.sinh(x2.imag))) / 2 - 0.1
check(abs(p - closed) < 1e-12, "square characteristic polynomial at a complex point")
pts = sq.fermi(0.25, 64)
check(len(pts) > 0 and all(abs(-(math.cos(a) + math.cos(b)) / 2 - 0.25) < 1e-8 for a, b in pts),
      f"{len(pts)} Fermi points on the square lattice")

audit = ls.ucp_audit("square", math.sqrt(2))
check(audit["two_points"]["verdict"] == "holds" and audit["a5_passed"], "3x3 square block passes both hypotheses")
kaudit = ls.ucp_audit("kagome", 3.0, mode="random", samples=50)
check(kaudit["two_points"]["verdict"] == "fails", "kagome hexagon ring is a two-points witness")

path = ls.connect("hexagonal", 0.4, seed=3)
check(path["passed"] and len(path["rows"]) == 1001, "hexagonal path verifies")
try:
    ls.connect("hexagonal", 0.0)
    check(False, "lambda = 0 rejected on the hexagonal lattice")
except ValueError:
    check(True, "lambda = 0 rejected on the hexagonal lattice")

rep = ls.rellich_demo(radii=[6.0, 9.0])
check(rep["invariants_hold"] and len(rep["rows"]) == 2, "small rellich demo runs")

with tempfile.TemporaryDirectory() as d:
    res = ls.run("spectrum", json.dumps({"lattice": "ladder", "d": 2, "grid": 101, "out": d}))
    check(res["ok"] and os.path.exists(os.path.join(d, "spectrum.json")), "run() writes spectrum.json")

print("smoke test passed")
