"""Smoke test for the psystem_py extension module."""

import json
import math
import os
import tempfile

import psystem_py as ps


def main():
    p = ps.Parameters(gamma=1.4, lambda_=1.0, mu=0.5, epsilon=0.01)
    r, s = p.to_riemann(1.2, 0.3)
    u, v = p.from_riemann(r, s)
    assert abs(u - 1.2) < 1e-12 and abs(v - 0.3) < 1e-12
    assert p.to_riemann(1.0, 0.0) == (0.0, 0.0)

    grid = ps.Grid(0.0, 2.0 * math.pi, 128)
    out = ps.run(ps.InitialData("sine", wavenumber=1.0), grid, p, horizon=20.0)
    assert out.status == "global_to_horizon", out.status
    assert out.check_lemma_esp()
    ts = [row[0] for row in out.series]
    assert all(a < b for a, b in zip(ts, ts[1:]))

    status, t, us, vs = ps.fv_run(ps.InitialData(), grid, p, horizon=1.0)
    assert status == "global_to_horizon" and len(us) == 128

    sup, _ = ps.check_lemma_dec_a(ps.Parameters(lambda_=4.0, mu=1.0), 1e7)
    assert abs(sup - 1.0) < 1e-6

    t_star = ps.lax_oracle_blowup_time(-0.1, ps.Parameters(lambda_=0.0, gamma=3.0), 100.0)
    assert abs(t_star - 10.0) < 1e-6, t_star

    series = [(t, 3.0 * (1.0 + t) ** -0.5) for t in [10.0 * 1.2 ** k for k in range(30)]]
    exponent, *_ = ps.fit_decay_exponent(series, 10.0, 1000.0)
    assert abs(exponent + 0.5) < 1e-12

    try:
        ps.Parameters(gamma=0.9)
    except ValueError as e:
        assert "gamma must exceed 1" in str(e)
    else:
        raise AssertionError("gamma=0.9 accepted")

    with tempfile.TemporaryDirectory() as d:
        code, summary = ps.execute_config(
            f"kind=lemma_check mu=1 lambda=4 t_max=1e7 output={os.path.join(d, 'lemma')}"
        )
        assert code == 0
        assert abs(json.loads(summary)["results"]["sup_value"] - 1.0) < 1e-6

    print("smoke test passed")


if __name__ == "__main__":
    main()
