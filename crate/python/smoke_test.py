"""Smoke test for the polaraug_py extension.

Run after installing the wheel:

    python python/smoke_test.py

When a built `polaraug` binary is found (``$POLARAUG_BIN`` or the cargo
target directory), outputs are also compared byte for byte with the CLI.
"""

import math
import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
import polaraug_py as pa

ROOT = Path(__file__).resolve().parent.parent


def check(cond, what):
    if not cond:
        raise AssertionError(what)
    print(f"ok   {what}")


def retarder_scene(h, w, phi, delta):
    c, s = math.cos(delta), math.sin(delta)
    base = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, c, -s], [0, 0, s, c]], dtype=np.float64)
    r = pa.polar_matrix({"rotation": phi})
    m = r @ base @ r.T
    return np.broadcast_to(m, (h, w, 4, 4)).copy()


def wrapped(a, b):
    d = (a - b) % math.pi
    return np.minimum(d, math.pi - d)


def find_cli():
    env = os.environ.get("POLARAUG_BIN")
    if env and Path(env).is_file():
        return env
    for profile in ("release", "debug"):
        p = ROOT / "target" / profile / "polaraug"
        if p.is_file():
            return str(p)
    return shutil.which("polaraug")


def main():
    check(pa.RNG_ALGORITHM.startswith("chacha8"), "RNG identifier exposed")

    scene = retarder_scene(32, 32, 0.3, math.pi / 2)
    az0, ret0 = pa.decompose(scene)
    check(np.allclose(ret0, math.pi / 2, atol=1e-10), "constant scene retardance")

    theta = math.radians(30)
    out = pa.augment(scene, {"rotation": theta})
    check(out.shape == scene.shape and out.dtype == np.float64, "augment keeps shape and dtype")
    az1, _ = pa.decompose(out)
    check(wrapped(az1[16, 16], az0[16, 16] + theta) < 1e-9, "azimuth follows the rotation")
    check(pa.is_admissible(out[16, 16]), "rotated pixel admissible")

    out32 = pa.augment(scene.astype(np.float32), {"rotation": theta})
    check(out32.dtype == np.float32, "float32 in, float32 out")

    analyzer = np.array(
        [[1, 1, 0, 0], [1, -1 / 3, 0.9428, 0], [1, -1 / 3, -0.4714, 0.8165], [1, -1 / 3, -0.4714, -0.8165]]
    )
    modulator = analyzer.T.copy()
    b = analyzer @ scene @ modulator
    check(np.allclose(pa.compute_mueller(b, analyzer, modulator), scene, atol=1e-10), "compute_mueller inverts A M W")
    spec = {"rotation": 0.4, "flip_h": True}
    a2, w2 = pa.embed_calibration(analyzer, modulator, spec)
    t = pa.polar_matrix(spec)
    via_cal = pa.compute_mueller(b, a2, w2)
    check(np.allclose(via_cal, t @ scene @ t.T, atol=1e-10), "calibration embedding matches conjugation")
    check(np.allclose(a2 @ (t @ scene @ t.T) @ w2, b, atol=1e-9), "intensities invariant under embedding")

    s1, s2 = pa.sample_spec(7), pa.sample_spec(7)
    check(s1 == s2 and -math.pi / 4 <= s1["rotation"] < math.pi / 4, "sample_spec deterministic and in range")

    try:
        pa.compute_mueller(b, np.zeros((4, 4)), modulator)
        check(False, "singular calibration raises")
    except pa.SingularCalibrationError:
        check(True, "singular calibration raises")
    try:
        pa.augment(np.zeros((3, 3, 3)))
        check(False, "bad shape raises")
    except pa.ShapeError:
        check(True, "bad shape raises")
    try:
        pa.augment(scene, {"rotaton": 1.0})
        check(False, "unknown spec key raises")
    except KeyError:
        check(True, "unknown spec key raises")

    cli = find_cli()
    if cli is None:
        print("skip CLI parity: no polaraug binary found")
        return
    with tempfile.TemporaryDirectory() as d:
        d = Path(d)
        np.save(d / "in.npy", scene)
        subprocess.run([cli, "augment", "--input", d / "in.npy", "--output", d / "out.npy", "--angle", "30"], check=True,
                       stdout=subprocess.DEVNULL)
        check(np.array_equal(np.load(d / "out.npy"), out), "augment identical to CLI")
        subprocess.run([cli, "decompose", "--input", d / "out.npy", "--output-dir", d / "maps"], check=True,
                       stdout=subprocess.DEVNULL)
        check(np.array_equal(np.load(d / "maps" / "azimuth.npy"), az1, equal_nan=True), "decompose identical to CLI")


if __name__ == "__main__":
    main()
    print("smoke test passed")
    sys.exit(0)
