"""Smoke tests for the spatialmc extension module.

Runs standalone (no pytest): python test_smoke.py
"""

import os
import sys
import tempfile

import numpy as np

import spatialmc as smc


def test_grid_and_attributes():
    g = smc.VoxelGrid([4, 3], [1.0, 2.0])
    values = np.arange(12, dtype=np.float64).reshape(3, 4)  # shape (h, w) for dims (w, h)
    g.add_attribute("intensity", values)
    assert g.dims == [4, 3]
    assert g.spacing == [1.0, 2.0]
    back = g.attribute("intensity")
    assert back.shape == (3, 4)
    assert np.array_equal(back, values)
    assert "intensity" in g.attribute_names()


def test_formula_round_trip():
    f = smc.parse_formula("D[2 <= z <= 5](tumor) & !N oedema")
    text = smc.print_formula(f)
    again = smc.parse_formula(text)
    assert smc.print_formula(again) == text
    try:
        smc.parse_formula("(broken")
    except ValueError:
        pass
    else:
        raise AssertionError("expected a parse error")


def test_check_matches_numpy():
    rng = np.random.default_rng(12345)
    values = rng.uniform(0.0, 255.0, size=(16, 16))
    g = smc.VoxelGrid([16, 16], [1.0, 1.0])
    g.add_attribute("intensity", values)
    model = smc.make_model(g, smc.NeighborhoodSpec.moore(2))

    mask = smc.check(model, "intensity > 128")
    assert mask.dtype == np.bool_
    assert np.array_equal(mask, values > 128)

    both = smc.check(model, "intensity > 64 & !(intensity > 192)")
    assert np.array_equal(both, (values > 64) & ~(values > 192))

    errors = smc.validate(smc.parse_formula("ghost > 1"), model)
    assert errors and "ghost" in errors[0]


def test_model_metrics():
    g = smc.VoxelGrid([5, 5], [1.0, 1.0])
    seed = np.zeros((5, 5))
    seed[2, 2] = 1.0
    g.add_attribute("seed", seed)

    euclid = smc.make_model(g, smc.NeighborhoodSpec.moore(2))
    assert smc.check(euclid, "D[z <= 1](seed)").sum() == 5  # axis neighbors only

    chess = smc.make_model(g, smc.NeighborhoodSpec.moore(2), metric="chessboard")
    assert smc.check(chess, "D[z <= 1](seed)").sum() == 9  # the full Moore square

    try:
        smc.make_model(g, smc.NeighborhoodSpec.moore(2), metric="warp")
    except ValueError:
        pass
    else:
        raise AssertionError("expected a metric error")


def test_dilate_and_distances():
    source = np.zeros((5, 5), dtype=bool)
    source[2, 2] = True

    grown = smc.dilate(source, smc.NeighborhoodSpec.von_neumann(2))
    assert grown.sum() == 5 and grown[2, 2] and grown[1, 2]

    d = smc.edt(source, [1.0, 1.0])
    ys, xs = np.mgrid[0:5, 0:5]
    expected = np.hypot(xs - 2.0, ys - 2.0)
    assert np.allclose(d, expected, atol=1e-12)

    aniso = smc.edt(source, [1.0, 2.0])
    assert abs(aniso[0, 2] - 4.0) < 1e-12  # two rows away, spacing 2

    chamfer = smc.graph_dt(source, smc.NeighborhoodSpec.moore(2).with_uniform_weight(1.0),
                           [1.0, 1.0])
    chess = smc.closed_form_dt(source, "chessboard")
    assert np.array_equal(chamfer, chess)

    err = smc.percentage_error(chamfer, d)
    assert err.min() >= 0.0


def test_image_io_and_script():
    with tempfile.TemporaryDirectory() as tmp:
        rng = np.random.default_rng(7)
        img = rng.integers(0, 256, size=(12, 10)).astype(np.float64)
        g = smc.VoxelGrid([10, 12], [1.0, 1.0])
        g.add_attribute("intensity", img)

        mask = img > 100
        mask_path = os.path.join(tmp, "mask.png")
        smc.save_mask(mask_path, mask)
        back = smc.load_image2d(mask_path)
        assert np.array_equal(back.attribute("intensity") > 128, mask)

        overlay_path = os.path.join(tmp, "overlay.png")
        smc.save_overlay(overlay_path, g, "intensity", [(mask, (255, 165, 0))])
        assert os.path.exists(overlay_path)

        image_path = os.path.join(tmp, "input.pgm")
        smc.save_mask(image_path, mask)  # any 8-bit image will do as input
        script_path = os.path.join(tmp, "job.mc")
        with open(script_path, "w") as fh:
            fh.write('load img = image "input.pgm"\n'
                     "let white = intensity > 128\n"
                     "let halo = D[z <= 1](white) & !white\n"
                     'save mask "halo.pgm" halo\n'
                     "print stats white\n")
        code, out, err = smc.run_script(script_path)
        assert code == 0, err
        assert out.startswith("stats white: count=")
        assert os.path.exists(os.path.join(tmp, "halo.pgm"))


def test_cli_binary():
    cli = os.environ.get("SPATIAL_MC_BIN")
    if not cli:
        print("skip test_cli_binary (SPATIAL_MC_BIN not set)")
        return
    import subprocess

    with tempfile.TemporaryDirectory() as tmp:
        mask = np.zeros((6, 6), dtype=bool)
        mask[2:4, 2:4] = True
        smc.save_mask(os.path.join(tmp, "input.pgm"), mask)
        script = os.path.join(tmp, "job.mc")
        with open(script, "w") as fh:
            fh.write('load i = image "input.pgm"\n'
                     "let core = intensity > 128\n"
                     "print stats core\n")
        done = subprocess.run([cli, "run", script, "--threads", "2"],
                              capture_output=True, text=True)
        assert done.returncode == 0, done.stderr
        assert done.stdout == "stats core: count=4 percent=11.1111\n"

        missing = subprocess.run([cli, "run", os.path.join(tmp, "nope.mc")],
                                 capture_output=True, text=True)
        assert missing.returncode == 2


def test_volume_round_trip():
    with tempfile.TemporaryDirectory() as tmp:
        g = smc.VoxelGrid([4, 3, 2], [1.0, 1.0, 2.5])
        data = np.arange(24, dtype=np.float64).reshape(2, 3, 4)
        g.add_attribute("ct", data)
        path = os.path.join(tmp, "vol.rawvol")
        smc.save_volume(path, g)
        back = smc.load_volume(path)
        assert back.dims == [4, 3, 2]
        assert np.array_equal(back.attribute("ct"), data)


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
