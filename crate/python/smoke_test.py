"""Smoke test for the noma_lab extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`
or `pip install crates/py`, then run `python python/smoke_test.py`.
"""

import math

import noma_lab


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    lat = noma_lab.Lattice(5)
    assert lat.n == 2 and lat.p == 5
    g = lat.generator()
    assert close(g[0][0], -0.525731, 1e-6) and close(g[0][1], -0.850651, 1e-6)
    assert lat.orthogonality_residual() < 1e-10
    assert close(lat.dpmin, 5 ** -0.5, 1e-12)
    x = lat.point([0.0, 1.0])
    assert close(abs(x[0] * x[1]), 5 ** -0.5, 1e-10)

    try:
        noma_lab.Lattice(4)
    except ValueError as e:
        assert "prime" in str(e)
    else:
        raise AssertionError("p = 4 accepted")

    lp = noma_lab.Scheme.lattice_partition(lat, 1, 1)
    assert len(lp) == 16 and lp.mode == "lattice_partition"
    assert close(lp.alpha, 0.2, 1e-15)
    assert close(lp.average_power(), 2.0, 1e-9)
    dp, witness = noma_lab.dpmin_bruteforce(lp)
    assert close(dp, 0.357771, 1e-6) and witness is not None
    assert close(dp, noma_lab.dpmin_lattice_partition(1, 1, 2, 5), 1e-9)
    assert close(noma_lab.demin_bruteforce(lp), lp.eta, 1e-12)

    general = noma_lab.Scheme.superimpose(lat, 2, 1, 0.31)
    assert close(general.eta, math.sqrt(12 / (12 * 0.31 + 3)), 1e-12)
    assert close(noma_lab.min_determinant(general), 0.449e-2, 0.01 * 0.449e-2)
    for alpha in (0.05, 0.3, 0.7):
        s = noma_lab.Scheme.superimpose(lat, 1, 1, alpha)
        bound = noma_lab.dpmin_upper_bound(1, 1, 2, 5, alpha)
        assert noma_lab.dpmin_bruteforce(s)[0] <= bound + 1e-12

    run = lambda: noma_lab.simulate_ser(lp, [10.0, 20.0, 30.0], trials=20_000, seed=7)
    a, b = run(), run()
    assert a == b, "same seed must reproduce"
    sers = [p["ser"] for p in a["user1"]]
    assert sers[0] > sers[1] > sers[2] > 0
    slope = noma_lab.diversity_slope([(p["snr_db"], p["ser"]) for p in a["user1"]])
    assert 1.0 < slope < 3.0, slope

    print(f"noma_lab smoke test OK: dpmin={dp:.6f}, SER@30dB={sers[2]:.2e}, slope={slope:.2f}")


if __name__ == "__main__":
    main()
