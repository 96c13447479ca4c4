#!/usr/bin/env python3
"""Smoke test for the spinbath_py extension module.

Build the extension first:

    cargo build -p spinbath-py --release

The script locates the compiled cdylib in target/, stages it under the
import name `spinbath_py`, and exercises the main types and operations.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libspinbath_py.so", "libspinbath_py.dylib", "spinbath_py.dll")
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("build the extension first: cargo build -p spinbath-py")
    stage = Path(tempfile.mkdtemp(prefix="spinbath_py_"))
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy2(lib, stage / f"spinbath_py{suffix}")
    sys.path.insert(0, str(stage))


stage_module()
import spinbath_py as sb  # noqa: E402

checks = 0


def check(name: str, ok: bool, detail: str = "") -> None:
    global checks
    checks += 1
    print(f"[smoke] {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    if not ok:
        sys.exit(1)


# System specification and band geometry (h = 0.3 shifts the band center).
spec = sb.SystemSpec(n=60, j=1.0, h=0.3, omega=0.4, delta=1.6, m0=1)
lo, hi = spec.band_edges()
check("band_edges", abs(lo - (-1.4)) < 1e-12 and abs(hi - 2.6) < 1e-12, f"({lo}, {hi})")
check("detuning", abs(spec.detuning - 1.0) < 1e-12)

# Engine agreement: sector vs gaussian on the vacuum.
dt, steps = 0.05, 100
g = sb.gaussian_channel(spec, dt, steps, env="vacuum")
s = sb.evolve_vacuum(spec, dt, steps)
diff = max(
    max(abs(x - y) for x, y in zip(g.a, s.a)),
    max(abs(x - y) for x, y in zip(g.b, s.b)),
)
check("sector_vs_gaussian", diff < 1e-10, f"max diff {diff:.2e}")

# Dense tomography at small N reproduces the gaussian channel (thermal).
small = sb.SystemSpec(n=6, j=1.0, h=0.3, omega=0.4, delta=1.6, m0=1)
d = sb.dense_tomography(small, dt, 40, env="thermal", beta=1.0)
g6 = sb.gaussian_channel(small, dt, 40, env="thermal", beta=1.0)
diff = max(abs(x - y) for x, y in zip(d.a, g6.a))
check("dense_vs_gaussian", diff < 1e-8, f"max diff {diff:.2e}")

# Rates, measures, and flags from a trajectory.
rates = g.rates()
check("rates_keys", all(k in rates for k in ("t", "E_LS", "gamma1", "gamma2", "gamma3", "mu")))
check("gamma1_vanishes_at_edge", max(abs(x) for x in rates["gamma1"]) < 1e-8)
check("degrees_nonnegative", g.degree() >= 0.0 and g.robustness_degree() >= 0.0)
check("blp_nonnegative", g.blp() >= 0.0)

# Thermodynamic limit: bound states straddle the band for bulk coupling.
bulk = sb.SystemSpec(n=101, j=1.0, h=0.0, omega=0.4, delta=0.0, m0=51)
lower, upper = sb.bound_states(bulk)
check(
    "bound_states",
    lower is not None and upper is not None and lower < -2.0 < 2.0 < upper,
    f"({lower}, {upper})",
)
ce = sb.vacuum_amplitude_tdl(bulk, 0.1, 50)
check("tdl_amplitude_start", abs(ce[0] - 1.0) < 1e-3)
check("tdl_amplitude_decays", abs(ce[-1]) < abs(ce[0]))

# High-temperature correlator: center coupling approaches (1/2) e^{-t^2}.
center = sb.SystemSpec(n=121, j=1.0, h=0.2, omega=0.4, delta=0.4, m0=61)
alpha_plus, alpha_minus = sb.correlation_gaussian(center, beta=0.05, dt=0.05, steps=40)
worst = max(
    abs(abs(a) - 0.5 * math.exp(-((i * 0.05) ** 2)))
    for i, a in enumerate(alpha_plus)
)
check("gaussian_envelope", worst < 0.01, f"worst {worst:.2e}")
check("sum_rule", abs(alpha_plus[0] + alpha_minus[0] - 1.0) < 1e-10)

# Correlation time of the Gaussian envelope is ~1/J.
tau_c, no_decay, slow_decay = sb.correlation_time([abs(a) for a in alpha_plus], 0.05)
check("correlation_time", abs(tau_c - 1.0) < 0.15 and not no_decay, f"tau_c {tau_c:.3f}")

print(f"[smoke] all {checks} checks passed")
