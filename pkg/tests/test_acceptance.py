"""Acceptance criteria 1-11 at their stated tolerances.

Each check returns (passed, detail). Under pytest every criterion is one test and
its PASS/FAIL line is echoed in the terminal summary; run this file directly to
print the lines without pytest.
"""

import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.integrate

from toruscs import (
    FourierField,
    Superposition,
    TorusGrid,
    analyze,
    count_states,
    eigendecompose,
    frame_constant,
    husimi,
    kn_matrix,
    localization_radius,
    propagate,
    reconstruct_error,
    sublevel_volume,
    symbol_from_spec,
    synthesize,
    weyl_matrix,
)
from toruscs.fbi import ample_radius, frame_constant_poisson
from toruscs.symbols import PRESETS

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE_LINES, random_field  # noqa: E402

PENDULUM = symbol_from_spec(PRESETS["pendulum"])
_DECS: dict = {}


def pendulum_dec(h, K):
    if (h, K) not in _DECS:
        _DECS[(h, K)] = eigendecompose(kn_matrix(PENDULUM, TorusGrid.create(1, K, h)))
    return _DECS[(h, K)]


def tight_frame_check(h):
    """20 random unit states on |k| <= 2, R = 4: ||T*T psi - c psi|| <= 1e-10."""
    g = TorusGrid.create(1, 16, h, 64)
    c = frame_constant(1, h)
    rng = np.random.default_rng(20240501)
    worst = 0.0
    for _ in range(20):
        psi = random_field(g, rng, band=2)
        worst = max(worst, (synthesize(analyze(psi, 4.0)) - psi * c).norm())
    return worst, c, g


def check_1():
    worst, c, _ = tight_frame_check(0.5)
    series_gap = abs(frame_constant(1, 0.5) - frame_constant_poisson(1, 0.5))
    ok = worst <= 1e-10 and series_gap <= 1e-14 and abs((c - 1) / 5.36e-9 - 1) < 0.01
    return ok, f"max deviation {worst:.3e}, c-1 = {c - 1:.4e}, series gap {series_gap:.1e}"


def check_2():
    g = TorusGrid.create(1, 16, 0.5)
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        psi = random_field(g, rng)
        for R in (0.5, 1.5, 3.0):
            worst = max(worst, abs(reconstruct_error(psi, R) - reconstruct_error(psi, R, "multiplier")))
    return worst <= 1e-10, f"max |direct - multiplier| = {worst:.3e}"


def check_3():
    stated = {1.0: 1.03e-4, 0.5: 5.4e-9, 1 / 3: 1.4e-13}
    measured = {}
    for h in (1.0, 0.5, 1 / 3, 0.25):
        g = TorusGrid.create(1, 16, h)
        psi = FourierField.from_modes(g, {(1,): 1.0}).normalized()
        measured[h] = reconstruct_error(psi, ample_radius(g), "multiplier")
    misses = [h for h, v in stated.items() if not (v / 1.5 <= measured[h] <= v * 1.5)]
    tiny = measured[0.25] < 1e-16
    hs = sorted(measured, reverse=True)[:3]
    ratio_ok = all(measured[b] / measured[a] < (b / a) ** 10 for a, b in zip(hs, hs[1:]))
    detail = ", ".join(f"h={h:.4g}: {measured[h]:.3e}" for h in sorted(measured, reverse=True))
    if misses:
        detail += f"; outside factor 1.5 at h = {', '.join(f'{h:.4g}' for h in misses)}"
    return not misses and tiny and ratio_ok, detail


def check_4():
    worst, c, g = tight_frame_check(0.4)
    return worst <= 1e-10, f"h=0.4 (1/h integer: {g.integer_reciprocal}) max deviation {worst:.3e}, c-1 = {c - 1:.3e}"


def check_5():
    h = 0.1
    g = TorusGrid.create(1, 32, h)
    free = eigendecompose(kn_matrix(symbol_from_spec(PRESETS["free"]), g)).eigenvalues
    expected = np.sort(0.5 * h * h * np.arange(-32, 33) ** 2.0)
    nz = expected > 0
    rel = float(np.max(np.abs(free[nz] - expected[nz]) / expected[nz]))
    zero_ok = free[0] == 0.0
    b = symbol_from_spec(
        {"n": 1, "order": 2, "terms": [{"xi": "0.5*|xi|^2"}, {"x": {"1": 0.5, "-1": 0.5}, "xi": "1"}]}
    )
    diff = float(np.max(np.abs(kn_matrix(b, g).entries - weyl_matrix(b, g).entries)))
    return rel <= 1e-13 and zero_ok and diff <= 1e-12, f"free rel dev {rel:.1e}, |KN - Weyl| = {diff:.1e}"


def check_6():
    h = 1 / 8
    e64 = pendulum_dec(h, 64).eigenvalues[0]
    e128 = pendulum_dec(h, 128).eigenvalues[0]
    ok = h / 2 - h * h / 8 <= e64 <= h / 2 and abs(e64 - e128) < 1e-10
    return ok, f"E0 = {e64:.15f}, |E0(K=128) - E0(K=64)| = {abs(e64 - e128):.1e}"


def check_7():
    h = 1 / 64
    count = count_states(pendulum_dec(h, 256), 1.0, refined=pendulum_dec(h, 512))
    vol = sublevel_volume(PENDULUM, 1.0, samples=1_000_000, seed=0)
    quad, _ = scipy.integrate.quad(lambda x: 2 * math.sqrt(2 * math.cos(x)), -math.pi / 2, math.pi / 2)
    lhs = abs(count * 2 * math.pi * h - vol.volume)
    ok = 62 <= count <= 76 and lhs <= 0.15 * vol.volume and abs(vol.volume - quad) <= 3 * vol.stderr
    return ok, (
        f"count {count}, MC volume {vol.volume:.5f} +- {vol.stderr:.4f}, quadrature {quad:.5f}, "
        f"|count 2 pi h - vol| / vol = {lhs / vol.volume:.4f}"
    )


def check_8():
    dec = pendulum_dec(1 / 32, 128)
    g, radii = localization_radius(dec, 1.0, 1e-8)
    R = ample_radius(dec.grid)
    worst_err = worst_mass = 0.0
    for j in range(len(radii)):
        psi = dec.state(j)
        worst_err = max(worst_err, reconstruct_error(psi, g))
        H = husimi(psi, R)
        outside = np.linalg.norm(H.momenta, axis=1) > g
        worst_mass = max(worst_mass, H.mass(outside))
    ok = len(radii) > 0 and g <= 2.5 and worst_err <= 1e-8 and worst_mass <= 1e-7
    return ok, f"{len(radii)} states, g = {g}, max error {worst_err:.2e}, max outside mass {worst_mass:.2e}"


def _superposition():
    return Superposition.equal_weights(pendulum_dec(1 / 16, 64), range(5))


def check_9():
    import toruscs.dynamics as dyn

    calls = []
    real = dyn.ell_radius

    def counted(*a, **k):
        calls.append(1)
        return real(*a, **k)

    dyn.ell_radius = counted
    try:
        R, rows = dyn.invariance_experiment(_superposition(), [0.0, 1.0, 10.0, 100.0])
    finally:
        dyn.ell_radius = real
    e0 = rows[0][1]
    ok = all(e <= 2 * e0 + 1e-12 for _, e in rows) and len(calls) == 1
    errs = ", ".join(f"{e:.3e}" for _, e in rows)
    return ok, f"ell = {R}, radius evaluations {len(calls)}, err = [{errs}]"


def check_10():
    s = _superposition()
    A = kn_matrix(PENDULUM, s.dec.grid)
    norms, energies = [], []
    for t in (0.0, 1.0, 10.0, 100.0):
        phi = propagate(s, t)
        norms.append(abs(phi.norm() - 1.0))
        energies.append(A.expectation(phi).real)
    drift = max(energies) - min(energies)
    return max(norms) <= 1e-12 and drift <= 1e-10, f"norm deviation {max(norms):.1e}, energy drift {drift:.1e}"


CLI_RUNS = [
    ["frame-check", "--h", "0.5", "--band-limit", "16"],
    ["reconstruct", "--h", "0.5", "--state", "random:5"],
    ["spectrum", "--h", "0.125", "--band-limit", "64"],
    ["localization", "--h", "0.0625", "--band-limit", "64"],
    ["weyl-law", "--h", "0.03125", "--band-limit", "128", "--samples", "200000", "--seed", "3"],
    ["evolve", "--h", "0.0625", "--band-limit", "64", "--coeffs", "equal:5"],
    ["husimi", "--h", "0.5", "--band-limit", "8", "--state", "random:1"],
]


def check_11(base: Path):
    outputs = {}
    for workers in ("1", "8"):
        root = base / f"w{workers}"
        root.mkdir(parents=True)
        env = dict(os.environ, TORUSCS_WORKERS=workers)
        for args in CLI_RUNS:
            proc = subprocess.run(
                [sys.executable, "-m", "toruscs.cli", *args, "--out-dir", f"out/{args[0]}"],
                cwd=root,
                env=env,
                capture_output=True,
                text=True,
            )
            if proc.returncode != 0:
                return False, f"{args[0]} exited {proc.returncode}: {proc.stderr.strip()}"
        outputs[workers] = {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
    same = outputs["1"] == outputs["8"]
    return same, f"{len(outputs['1'])} files over {len(CLI_RUNS)} commands, byte-identical: {same}"


CHECKS = {1: check_1, 2: check_2, 3: check_3, 4: check_4, 5: check_5, 6: check_6, 7: check_7, 8: check_8,
          9: check_9, 10: check_10}


def record(k, ok, detail):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


@pytest.mark.parametrize("k", sorted(CHECKS))
def test_criterion(k):
    ok, detail = CHECKS[k]()
    line = record(k, ok, detail)
    assert ok, line


def test_criterion_11(tmp_path):
    ok, detail = check_11(tmp_path)
    line = record(11, ok, detail)
    assert ok, line


if __name__ == "__main__":
    import tempfile

    failed = 0
    for k, fn in CHECKS.items():
        ok, detail = fn()
        record(k, ok, detail)
        failed += not ok
    with tempfile.TemporaryDirectory() as tmp:
        ok, detail = check_11(Path(tmp))
        record(11, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
