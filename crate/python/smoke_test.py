"""Smoke test for the `geopep` Python module.

Either install it (``pip install ./crates/py``) or build it in place:

    cargo build --release -p geopep-py --features extension-module
    python3 python/smoke_test.py

Without an installed module the script copies
``target/release/libgeopep.so`` next to a temporary import path.
"""

import glob
import importlib
import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def import_geopep():
    try:
        return importlib.import_module("geopep")
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for lib in glob.glob(os.path.join(ROOT, "target", profile, "libgeopep.*")):
            if lib.endswith((".so", ".dylib")):
                tmp = tempfile.mkdtemp()
                shutil.copy(lib, os.path.join(tmp, "geopep.so"))
                sys.path.insert(0, tmp)
                return importlib.import_module("geopep")
    sys.exit("geopep module not found; build crates/py with --features extension-module")


def main():
    gp = import_geopep()

    cube = [[x, y, z] for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)]
    assert abs(gp.hull_volume(cube) - 1.0) < 1e-12
    inner = [[0.5 * c for c in p] for p in cube]
    assert gp.tpvr(cube + inner, inner) == 0.125

    area = gp.sphere_sasa([[0.0, 0.0, 0.0]], [1.7])[0]
    assert abs(area - 4 * math.pi * 3.1 ** 2) / area < 0.005

    assert gp.roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert gp.wilcoxon([-1.0, -2.0, -3.0, -4.0, -5.0])["p_value"] == 0.03125
    assert abs(sum(gp.bspline_basis(0.3, degree=2)) - 1.0) < 1e-12

    atoms = [[[0.0, 0.0, 0.0]], [[2.0, 0.0, 0.0]], [[4.0, 0.0, 0.0]]]
    loss = gp.total_loss([0.9, 0.5, 0.5], [1, 0, 0], atoms, lambda_=0.5)
    assert loss["struct"] == 0.25
    assert abs(loss["total"] - (loss["ce"] + 0.5 * loss["struct"])) < 1e-15

    for mode in ("kan", "mlp"):
        report = gp.gradient_check(mode=mode, seed=1)
        assert report["passed"], report["max_rel_error"]

    micro = os.path.join(ROOT, "crates", "cli", "tests", "fixtures", "micro")
    pairs = []
    for name in sorted(os.listdir(micro))[:6]:
        s = gp.Structure.from_file(os.path.join(micro, name))
        pairs.append(s.label_interface("P", "A"))
    assert all(len(p) == len(p.protein_sequence) for p in pairs)
    assert all(p.interface_count() > 0 for p in pairs)

    model = gp.Model(hidden=[8], seed=3)
    log = model.fit(pairs[:5], pairs[5:], epochs=3, lr=2e-4)
    assert len(log) == 3 and all(math.isfinite(e["total"]) for e in log)
    probs = model.predict(pairs[5])
    assert len(probs) == len(pairs[5]) and all(0.0 < p < 1.0 for p in probs)

    path = os.path.join(tempfile.mkdtemp(), "model.txt")
    model.save(path)
    assert gp.Model.load(path).predict(pairs[5]) == probs

    print(f"geopep smoke test ok: {model!r}, {len(pairs)} pairs")


if __name__ == "__main__":
    main()
