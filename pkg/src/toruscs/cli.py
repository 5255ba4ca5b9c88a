"""Command-line harness.

Every command reads an optional JSON config, applies flag overrides, validates
the grid before computing anything, and writes its outputs only on success
(or, for ``frame-check``, also when the tight-frame check itself fails).

Exit codes: 0 ok, 2 config/validation, 3 resource cap, 4 unattainable
tolerance, 5 quantization/Hermiticity, 6 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import cache
from .dynamics import Superposition, invariance_experiment, propagate
from .errors import ConfigError, QuantizationError, TorusError
from .fbi import (
    ample_radius,
    analyze,
    frame_constant,
    frame_constant_poisson,
    frame_defect,
    husimi,
    multiplier_table,
    one_minus_multiplier,
    reconstruct_error,
    synthesize,
    truncation_radius,
)
from .grid import TWO_PI, FourierField, TorusGrid
from .outputs import OutputSet, csv_text, json_text
from .parallel import workers_from_env
from .quantize import quantize
from .spectral import (
    EigenDecomposition,
    assemble_decomposition,
    classical_radius,
    count_states,
    eigendecompose,
    sublevel_volume,
)
from .symbols import canonical_text, fnv1a64, lift_preset, load_symbol_spec, symbol_from_spec

log = logging.getLogger("toruscs")

TIGHTNESS_ATOL = 1e-10
SERIES_ATOL = 1e-14
CACHE_NAME = "eig.tcs"


@dataclass
class RunConfig:
    n: int = 1
    h: float = 0.5
    band_limit: int = 16
    samples_per_dim: int | None = None
    symbol: str | dict = "pendulum"
    weyl: bool = False
    tol: float = 1e-8
    radius: str | float = "auto"
    samples: int = 1_000_000
    seed: int = 0
    times: list = field(default_factory=lambda: [0.0, 1.0, 10.0, 100.0])
    out_dir: str = "out"
    energy: float = 1.0
    state: str | dict | None = None
    coeffs: str | dict | None = None
    random_states: int = 20
    max_lattice: int = 200_000
    J0: float = 1.0
    Q_exp: float = 1.0
    refine: bool = True

    @classmethod
    def from_sources(cls, config_path: str | None, overrides: dict) -> "RunConfig":
        data: dict = {}
        if config_path:
            try:
                data = json.loads(Path(config_path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {config_path}: {exc}") from None
            if not isinstance(data, dict):
                raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        cfg._coerce()
        return cfg

    def _coerce(self) -> None:
        try:
            self.n = int(self.n)
            self.h = float(self.h)
            self.band_limit = int(self.band_limit)
            if self.samples_per_dim is not None:
                self.samples_per_dim = int(self.samples_per_dim)
            self.tol = float(self.tol)
            if self.radius != "auto":
                self.radius = float(self.radius)
            self.samples = int(self.samples)
            self.seed = int(self.seed)
            self.energy = float(self.energy)
            self.times = [float(t) for t in self.times]
            self.random_states = int(self.random_states)
            self.max_lattice = int(self.max_lattice)
            self.J0 = float(self.J0)
            self.Q_exp = float(self.Q_exp)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from None
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.radius != "auto" and not (self.radius >= 0 and math.isfinite(self.radius)):
            raise ConfigError("radius must be 'auto' or a finite number >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")

    def grid(self) -> TorusGrid:
        return TorusGrid.create(self.n, self.band_limit, self.h, self.samples_per_dim)

    def as_metadata(self, grid: TorusGrid) -> dict:
        d = asdict(self)
        d["samples_per_dim"] = grid.M
        d["integer_reciprocal"] = grid.integer_reciprocal
        return d


# --- state / symbol inputs -------------------------------------------------


def parse_state(spec, grid: TorusGrid, seed: int = 0) -> FourierField:
    """Field from 'const', 'mode:k1[,k2..]', 'random[:seed]' or a JSON mode map."""
    if spec is None:
        raise ConfigError("this command needs --state")
    if isinstance(spec, str):
        text = spec.strip()
        if text == "const":
            return FourierField.from_modes(grid, {(0,) * grid.n: 1.0})
        if text.startswith("mode:"):
            k = tuple(int(v) for v in text[5:].split(","))
            if len(k) != grid.n:
                raise ConfigError(f"mode {k} has the wrong dimension")
            return FourierField.from_modes(grid, {k: 1.0})
        if text.startswith("random"):
            s = int(text.split(":", 1)[1]) if ":" in text else seed
            return random_states(grid, 1, s)[0]
        try:
            spec = json.loads(text)
        except json.JSONDecodeError:
            raise ConfigError(f"cannot parse state {text!r}") from None
    if not isinstance(spec, dict):
        raise ConfigError("state must be a string or a JSON object of mode -> coefficient")
    modes = {}
    for key, v in spec.items():
        k = tuple(int(t) for t in str(key).split(","))
        if len(k) != grid.n:
            raise ConfigError(f"mode {key!r} has the wrong dimension")
        modes[k] = complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
    field_ = FourierField.from_modes(grid, modes)
    if not np.any(field_.coeffs):
        raise ConfigError("state is identically zero")
    return field_


def random_states(grid: TorusGrid, count: int, seed: int) -> list[FourierField]:
    """Unit-norm states with i.i.d. complex Gaussian coefficients on all retained modes."""
    rng = np.random.Generator(np.random.Philox(seed))
    out = []
    for _ in range(count):
        c = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        out.append(FourierField(grid, c).normalized())
    return out


def load_symbol(cfg: RunConfig):
    spec = lift_preset(load_symbol_spec(cfg.symbol), cfg.n)
    return spec, symbol_from_spec(spec)


def symbol_hash(spec: dict, kind: str) -> int:
    return fnv1a64(canonical_text({"quantization": kind, "symbol": spec}).encode("utf-8"))


def solve(cfg: RunConfig, grid: TorusGrid, workers: int, use_cache: bool = True):
    """(symbol, matrix, decomposition, cache key or None when the cache was reused)."""
    spec, b = load_symbol(cfg)
    kind = "weyl" if cfg.weyl else "kn"
    A = quantize(b, grid, kind, workers)
    if not A.hermitian:
        raise QuantizationError("Kohn-Nirenberg matrix is not Hermitian; rerun with --weyl")
    key = symbol_hash(spec, kind)
    path = Path(cfg.out_dir) / CACHE_NAME
    hit = cache.read_matching(path, grid, key) if use_cache else None
    if hit is not None:
        log.info("reusing eigendecomposition cache %s", path)
        return b, A, assemble_decomposition(A, *hit), None
    return b, A, eigendecompose(A), key


# --- commands --------------------------------------------------------------


def cmd_frame_check(cfg: RunConfig, workers: int) -> int:
    grid = cfg.grid()
    R = ample_radius(grid) if cfg.radius == "auto" else float(cfg.radius)
    c1 = frame_constant(grid.n, grid.h)
    c2 = frame_constant_poisson(grid.n, grid.h)
    if abs(c1 - c2) > SERIES_ATOL:
        raise ConfigError(f"frame-constant series disagree: {c1!r} vs {c2!r}")
    m = multiplier_table(grid, R, cfg.max_lattice)
    deviations = []
    for psi in random_states(grid, cfg.random_states, cfg.seed):
        rec = synthesize(analyze(psi, R, workers, cfg.max_lattice), workers)
        deviations.append((rec - c1 * psi).norm())
    max_dev = max(deviations) if deviations else 0.0
    meta = cfg.as_metadata(grid)
    out = OutputSet(Path(cfg.out_dir))
    header = ["k"] if grid.n == 1 else [f"k_{j + 1}" for j in range(grid.n)]
    rows = [list(map(int, k)) + [float(v), abs(float(v) - c1)] for k, v in zip(grid.modes, m)]
    out.add("multiplier.csv", csv_text(header + ["m_R", "abs_dev"], rows, meta))
    summary = {
        "c_tilde": c1,
        "c_tilde_poisson": c2,
        "frame_defect": frame_defect(grid.n, grid.h),
        "max_deviation": max_dev,
        "R": R,
        "h": grid.h,
        "n": grid.n,
        "states": len(deviations),
        "passed": max_dev <= TIGHTNESS_ATOL,
    }
    out.add("frame.json", json_text(summary, meta))
    out.commit()
    if max_dev > TIGHTNESS_ATOL:
        print(f"tight-frame deviation {max_dev:.3e} exceeds {TIGHTNESS_ATOL:g} at R = {R}", file=sys.stderr)
        return 2
    return 0


def cmd_reconstruct(cfg: RunConfig, workers: int) -> int:
    grid = cfg.grid()
    psi = parse_state(cfg.state, grid, cfg.seed)
    f = truncation_radius(psi, cfg.tol)
    top = max(f, float(cfg.radius) if cfg.radius != "auto" else 2 * f)
    jmax = int(round(top / grid.h))
    rows = []
    for j in range(jmax + 1):
        R = j * grid.h
        d = one_minus_multiplier(grid, R, cfg.max_lattice)
        rows.append([R, float(np.linalg.norm(d * psi.coeffs) / np.linalg.norm(psi.coeffs))])
    direct = reconstruct_error(psi, f, "direct", workers)
    meta = cfg.as_metadata(grid)
    out = OutputSet(Path(cfg.out_dir))
    out.add("recon.csv", csv_text(["R", "error"], rows, meta))
    summary = {
        "f_h": f,
        "tol": cfg.tol,
        "error_at_f": direct,
        "c_tilde": frame_constant(grid.n, grid.h),
        "frame_defect": frame_defect(grid.n, grid.h),
    }
    out.add("recon.json", json_text(summary, meta))
    out.commit()
    return 0


def cmd_spectrum(cfg: RunConfig, workers: int) -> int:
    grid = cfg.grid()
    _, _, dec, key = solve(cfg, grid, workers)
    meta = cfg.as_metadata(grid)
    out = OutputSet(Path(cfg.out_dir))
    rows = [[j, float(e), float(r)] for j, (e, r) in enumerate(zip(dec.eigenvalues, dec.residuals))]
    out.add("spectrum.csv", csv_text(["index", "eigenvalue", "residual"], rows, meta))
    out.commit()
    if key is not None:
        cache.write(Path(cfg.out_dir) / CACHE_NAME, grid, key, dec.eigenvalues, dec.vectors)
    return 0


def cmd_localization(cfg: RunConfig, workers: int) -> int:
    grid = cfg.grid()
    b, _, dec, _ = solve(cfg, grid, workers)
    E = cfg.energy
    count = count_states(dec, E)
    rows = []
    for j in range(count):
        rows.append([j, float(dec.eigenvalues[j]), truncation_radius(dec.state(j), cfg.tol)])
    g = max((r[2] for r in rows), default=0.0)
    meta = cfg.as_metadata(grid)
    out = OutputSet(Path(cfg.out_dir))
    out.add("localization.csv", csv_text(["j", "E_j", "f_j"], rows, meta))
    summary = {"g": g, "E": E, "count": count, "tol": cfg.tol, "classical_radius": classical_radius(b, E)}
    out.add("localization.json", json_text(summary, meta))
    out.commit()
    return 0


def cmd_weyl_law(cfg: RunConfig, workers: int) -> int:
    grid = cfg.grid()
    b, _, dec, _ = solve(cfg, grid, workers)
    refined = None
    if cfg.refine:
        _, _, refined, _ = solve(cfg, grid.with_band(2 * grid.K), workers, use_cache=False)
    count = count_states(dec, cfg.energy, refined)
    vol = sublevel_volume(b, cfg.energy, cfg.samples, cfg.seed)
    cell = (TWO_PI * grid.h) ** grid.n
    ratio = count * cell / vol.volume if vol.volume > 0 else None
    meta = cfg.as_metadata(grid)
    out = OutputSet(Path(cfg.out_dir))
    summary = {
        "count": count,
        "volume": vol.volume,
        "volume_stderr": vol.stderr,
        "ratio": ratio,
        "E": cfg.energy,
        "box_radius": vol.box_radius,
        "samples": vol.samples,
        "seed": vol.seed,
    }
    out.add("weyl.json", json_text(summary, meta))
    out.commit()
    return 0


def parse_coeffs(spec, dec: EigenDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """'equal:J' (J lowest states) or a JSON map index -> coefficient."""
    if spec is None:
        raise ConfigError("this command needs --coeffs")
    if isinstance(spec, str) and spec.strip().startswith("equal:"):
        J = int(spec.split(":", 1)[1])
        if J < 1:
            raise ConfigError("equal:J needs J >= 1")
        return np.arange(J), np.full(J, 1 / math.sqrt(J), dtype=complex)
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError:
            raise ConfigError(f"cannot parse coefficients {spec!r}") from None
    if not isinstance(spec, dict) or not spec:
        raise ConfigError("coefficients must be 'equal:J' or a non-empty JSON object")
    idx = np.array(sorted(int(k) for k in spec), dtype=int)
    vals = {int(k): v for k, v in spec.items()}
    c = np.array([complex(*vals[i]) if isinstance(vals[i], (list, tuple)) else complex(vals[i]) for i in idx])
    nrm = np.linalg.norm(c)
    if nrm == 0:
        raise ConfigError("coefficients are all zero")
    return idx, c / nrm


def cmd_evolve(cfg: RunConfig, workers: int) -> int:
    grid = cfg.grid()
    if not cfg.times:
        raise ConfigError("need at least one time")
    _, A, dec, _ = solve(cfg, grid, workers)
    idx, c = parse_coeffs(cfg.coeffs, dec)
    s = Superposition(dec, idx, c, cfg.J0, cfg.Q_exp)
    R, rows = invariance_experiment(s, cfg.times, cfg.tol, workers=workers)
    energies = [A.expectation(propagate(s, t)).real for t in cfg.times]
    norms = [propagate(s, t).norm() for t in cfg.times]
    meta = cfg.as_metadata(grid)
    out = OutputSet(Path(cfg.out_dir))
    out.add("invariance.csv", csv_text(["t", "error"], rows, meta))
    summary = {
        "ell": R,
        "J": s.J,
        "J0": cfg.J0,
        "Q_exp": cfg.Q_exp,
        "tol": cfg.tol,
        "max_error": max(e for _, e in rows),
        "norm_deviation": max(abs(v - 1.0) for v in norms),
        "energy_drift": max(energies) - min(energies),
    }
    out.add("invariance.json", json_text(summary, meta))
    out.commit()
    return 0


def cmd_husimi(cfg: RunConfig, workers: int) -> int:
    grid = cfg.grid()
    psi = parse_state(cfg.state, grid, cfg.seed)
    R = ample_radius(grid) if cfg.radius == "auto" else float(cfg.radius)
    H = husimi(psi, R, workers)
    header = [f"x_{j + 1}" for j in range(grid.n)] + [f"xi_{j + 1}" for j in range(grid.n)] + ["density"]
    nodes = grid.nodes
    rows = []
    for a, dens in zip(H.lattice, H.values):
        xi = list(grid.h * a)
        for x, d in zip(nodes, dens):
            rows.append(list(x) + xi + [float(d)])
    meta = cfg.as_metadata(grid)
    out = OutputSet(Path(cfg.out_dir))
    out.add("husimi.csv", csv_text(header, rows, meta))
    out.add("husimi.json", json_text({"mass": H.mass(), "c_tilde": frame_constant(grid.n, grid.h), "R": R}, meta))
    out.commit()
    return 0


COMMANDS = {
    "frame-check": (cmd_frame_check, "tight-frame constant, multiplier table, random-state check"),
    "reconstruct": (cmd_reconstruct, "error-vs-radius curve and truncation radius f(h) of a state"),
    "spectrum": (cmd_spectrum, "eigenvalues of the quantized symbol (writes the eigen cache)"),
    "localization": (cmd_localization, "per-eigenfunction radii and g(E, h)"),
    "weyl-law": (cmd_weyl_law, "state count below E against the sublevel-set volume"),
    "evolve": (cmd_evolve, "decomposition error of an evolved superposition at a fixed radius"),
    "husimi": (cmd_husimi, "Husimi density of a state on the phase-space grid"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toruscs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--n", type=int)
        p.add_argument("--h", type=float)
        p.add_argument("--band-limit", dest="band_limit", type=int)
        p.add_argument("--samples-per-dim", dest="samples_per_dim", type=int)
        p.add_argument("--symbol", help="preset name (free, pendulum, identity), JSON file, or inline JSON")
        p.add_argument("--weyl", action="store_true", default=None)
        p.add_argument("--tol", type=float)
        p.add_argument("--radius", help="'auto' or a momentum radius")
        p.add_argument("--samples", type=int, help="Monte Carlo samples")
        p.add_argument("--seed", type=int)
        p.add_argument("--times", help="comma-separated times")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--energy", type=float)
        p.add_argument("--state", help="const | mode:k1[,k2] | random[:seed] | JSON mode map")
        p.add_argument("--coeffs", help="equal:J | JSON map eigen-index -> coefficient")
        p.add_argument("--random-states", dest="random_states", type=int)
        p.add_argument("--max-lattice", dest="max_lattice", type=int)
        p.add_argument("--no-refine", dest="refine", action="store_false", default=None)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = [f.name for f in fields(RunConfig)]
    out = {k: getattr(args, k, None) for k in keys}
    if args.times is not None:
        text = args.times.strip()
        out["times"] = [float(t) for t in text.split(",")] if text else []
    return out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    fn, _ = COMMANDS[args.command]
    try:
        cfg = RunConfig.from_sources(args.config, _overrides(args))
        workers = workers_from_env()
        return fn(cfg, workers)
    except TorusError as exc:
        print(f"toruscs {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"toruscs {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
