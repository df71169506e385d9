"""Smoke test for the qis_toolkit extension module.

Build and install first:  pip install ./crates/py
Then run:                 python python/smoke_test.py
"""

import math
import os
import tempfile

import qis_toolkit as qt


def main():
    cfg = qt.SensorConfig(adc_bits=3)
    assert cfg.frames_per_burst == 8 and cfg.adc_bits == 3
    assert qt.adc_quantize(9.4, cfg) == 7
    assert qt.adc_quantize(2.5, cfg) == 3

    scene = qt.textured_scene(64, 64, 1)
    alpha = qt.calibrate_gain(scene, 2.0)
    cfg = cfg.with_gain(alpha)
    burst = qt.simulate_static_burst(scene, cfg, 42)
    assert (burst.width, burst.height, burst.frame_count) == (64, 64, 8)
    assert max(burst.data()) <= 7
    assert burst == qt.simulate_static_burst(scene, cfg, 42)

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "b.qisb")
        burst.write(path)
        assert qt.Burst.read(path) == burst
        assert os.path.exists(path + ".toml")

    avg = qt.reconstruct(burst, "burst-average")
    den = qt.reconstruct(burst, "average-then-denoise")
    db_avg, db_den = qt.psnr(avg, scene), qt.psnr(den, scene)
    assert db_den > db_avg, (db_den, db_avg)

    try:
        qt.reconstruct(burst, "mle-binary")
    except ValueError as e:
        assert "1-bit" in str(e)
    else:
        raise AssertionError("mle-binary accepted a 3-bit burst")

    traj = qt.sample_global_trajectory(7, (7.0, 35.0), 8, "linear")
    assert traj[0] == (0.0, 0.0)
    assert 7.0 <= math.hypot(*traj[-1]) <= 35.0
    x_true, x_motion, x_noise, x_qis = qt.make_triplet(scene, cfg, 3, traj)
    assert x_motion[0] == x_true and len(x_motion) == 8
    assert x_noise.frame_count == 1 and x_qis.frame_count == 8

    z = qt.anscombe_binomial([0, 8], 8)
    assert abs(z[0] - 1.2159146792354554) < 1e-12

    csv = qt.sweep_motion(["burst-average"], 2.0, [0.0, 14.0], [qt.textured_scene(64, 64, 5)], [1])
    lines = csv.strip().splitlines()
    assert lines[0] == "variable,method,psnr_db,mse,n" and len(lines) == 3
    curve = [float(l.split(",")[2]) for l in lines[1:]]
    assert curve[0] > curve[1], curve

    print(f"ok: burst-average {db_avg:.2f} dB, average-then-denoise {db_den:.2f} dB")


if __name__ == "__main__":
    main()
