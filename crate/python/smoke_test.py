"""Import the built extension and exercise each binding once.

    cargo build --release -p carpet-py --features extension-module
    cp target/release/libcarpet.so python/carpet.so
    python3 python/smoke_test.py
"""

import json
import math
import sys

import carpet


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    spec = carpet.CarpetSpec.preset("SC31")
    assert spec.is_valid()
    assert close(spec.hausdorff_dimension, math.log(8) / math.log(3), 1e-14)
    print(spec, spec.dimension_bounds())

    s = carpet.Spectrum.of_carpet(spec, 3, "neumann")
    model = carpet.HeatTraceModel.fit(s, spec)
    print(s, model)
    assert 1.5 < model.d_s < 2.0
    json.loads(model.to_json())

    z = carpet.ZetaFunction.from_spectrum(model, s, 1.0)
    print("zeta(2, 1) =", z(2.0), "poles:", len(z.poles()))

    iv = carpet.ZetaFunction.interval()
    assert close(iv.casimir_energy(), -math.pi / 24, 1e-4)

    e3 = carpet.HeatTraceModel.euclidean(3)
    hi, lo = carpet.critical_densities(e3, 1.0)
    assert close(hi, carpet.riemann_zeta(1.5).real / (4 * math.pi) ** 1.5, 1e-10)
    bb = carpet.blackbody(e3, 2.0)
    assert close(bb["energy_density"], math.pi**2 / (30 * 16), 1e-12)
    print("bec:", carpet.bec_diagnose(spec, model)["bec"])

    report = carpet.oracle_selftest()
    assert report["passed"], report
    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
