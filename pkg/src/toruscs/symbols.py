"""Real phase-space symbols b(x, xi) on T^n x R^n and their text format.

A symbol is a finite sum of separable terms a_j(x) c_j(xi), with a_j given by
finitely many Fourier coefficients and c_j an expression in xi.  The text
format is a JSON document::

    {
      "n": 1,
      "order": 2,
      "ellipticity": {"C": 0.25, "c": 3},
      "terms": [
        {"x": {"0": 1}, "xi": "0.5*|xi|^2"},
        {"x": {"0": 1, "1": -0.5, "-1": -0.5}, "xi": "1"}
      ]
    }

Mode keys are comma-separated integers ("1,-2" in two dimensions); values are
numbers or [re, im] pairs.  The xi grammar allows numbers, + - * / and
powers, the variables xi (one dimension), xi1, xi2, xi3, and the shorthands
|xi|^2 and <xi> = (1 + |xi|^2)^{1/2}.
"""

from __future__ import annotations

import ast
import json
import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigError, QuantizationError

PRESETS: dict[str, dict] = {
    "free": {"n": 1, "order": 2, "terms": [{"x": {"0": 1}, "xi": "0.5*|xi|^2"}]},
    "pendulum": {
        "n": 1,
        "order": 2,
        "ellipticity": {"C": 0.25, "c": 3},
        "terms": [
            {"x": {"0": 1}, "xi": "0.5*|xi|^2"},
            {"x": {"0": 1, "1": -0.5, "-1": -0.5}, "xi": "1"},
        ],
    },
    "identity": {"n": 1, "order": 0, "ellipticity": {"C": 1, "c": 0}, "terms": [{"x": {"0": 1}, "xi": "1"}]},
}


@dataclass(frozen=True)
class SymbolTerm:
    x_coeffs: Mapping[tuple[int, ...], complex]
    xi_func: Callable[[np.ndarray], np.ndarray]
    xi_expr: str = ""

    @property
    def degree(self) -> int:
        return max((max(abs(v) for v in m) for m in self.x_coeffs), default=0)

    def x_values(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        out = np.zeros(len(x), dtype=complex)
        for m, c in self.x_coeffs.items():
            out += c * np.exp(1j * (x @ np.asarray(m, dtype=float)))
        return out

    def xi_values(self, xi: np.ndarray) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return np.broadcast_to(np.asarray(self.xi_func(xi), dtype=complex), (len(xi),))


@dataclass(frozen=True, eq=False)
class Symbol:
    """b(x, xi) = sum_j a_j(x) c_j(xi), or a raw evaluator with declared x-degree."""

    n: int
    order_m: float
    terms: tuple[SymbolTerm, ...] = ()
    raw_eval: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    x_degree: int | None = None
    ellipticity: tuple[float, float] | None = None
    spec_text: str | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ConfigError(f"symbol dimension must be 1, 2 or 3, got {self.n}")
        if not self.terms and self.raw_eval is None:
            raise ConfigError("symbol needs separable terms or a raw evaluator")
        if not self.terms and self.x_degree is None:
            raise ConfigError("a raw-only symbol must declare its x-degree")
        for t in self.terms:
            if any(len(m) != self.n for m in t.x_coeffs):
                raise ConfigError("x-mode dimension does not match the symbol dimension")
        if self.ellipticity is not None:
            C, c = self.ellipticity
            if not (C > 0 and c >= 0):
                raise ConfigError("ellipticity needs C > 0 and c >= 0")
        self._validate()

    @property
    def separable(self) -> bool:
        return bool(self.terms)

    @property
    def degree(self) -> int:
        if self.x_degree is not None:
            return self.x_degree
        return max(t.degree for t in self.terms)

    def evaluate(self, x, xi) -> np.ndarray:
        """b at paired points x (P, n) and xi (P, n); returns complex (P,)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if self.raw_eval is not None and not self.terms:
            return np.asarray(self.raw_eval(x, xi), dtype=complex)
        out = np.zeros(max(len(x), len(xi)), dtype=complex)
        for t in self.terms:
            out += t.x_values(x) * t.xi_values(xi)
        return out

    def __call__(self, x, xi) -> np.ndarray:
        return self.evaluate(x, xi).real

    def _validate(self, probe: int = 9) -> None:
        rng = np.random.default_rng(12345)
        x = rng.uniform(0, 2 * np.pi, size=(probe * probe, self.n))
        xi = rng.normal(scale=3.0, size=(probe * probe, self.n))
        vals = self.evaluate(x, xi)
        if not np.all(np.isfinite(vals)):
            raise QuantizationError("symbol produces non-finite values on the probe grid")
        scale = max(1.0, float(np.max(np.abs(vals))))
        if np.max(np.abs(vals.imag)) > 1e-12 * scale:
            raise QuantizationError("symbol is not real-valued on the probe grid")
        if self.terms and self.raw_eval is not None:
            raw = np.asarray(self.raw_eval(x, xi), dtype=complex)
            if np.max(np.abs(raw - vals)) > 1e-10 * scale:
                raise QuantizationError("separable terms and raw evaluator disagree")


# --- xi expressions -------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def _normalize_expr(text: str) -> str:
    out = text.replace("|xi|^2", "absxi2").replace("|xi|**2", "absxi2").replace("<xi>", "jxi")
    return out.replace("^", "**")


def compile_xi_expr(text: str, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an xi-expression into a function of an (P, n) array."""
    try:
        tree = ast.parse(_normalize_expr(text), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse xi expression {text!r}: {exc.msg}") from None
    names = {"absxi2", "jxi"} | {f"xi{j + 1}" for j in range(n)}
    if n == 1:
        names.add("xi")

    def check(node: ast.AST) -> None:
        if isinstance(node, ast.Expression):
            check(node.body)
        elif isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            check(node.operand)
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            pass
        elif isinstance(node, ast.Name) and node.id in names:
            pass
        else:
            raise ConfigError(f"unsupported construct in xi expression {text!r}")

    check(tree)

    def ev(node: ast.AST, env: dict):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](ev(node.left, env), ev(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](ev(node.operand, env))
        if isinstance(node, ast.Constant):
            return float(node.value)
        return env[node.id]

    def func(xi: np.ndarray) -> np.ndarray:
        xi = np.atleast_2d(xi)
        abs2 = np.sum(xi * xi, axis=1)
        env = {"absxi2": abs2, "jxi": np.sqrt(1.0 + abs2)}
        for j in range(n):
            env[f"xi{j + 1}"] = xi[:, j]
        if n == 1:
            env["xi"] = xi[:, 0]
        with np.errstate(all="ignore"):
            return np.broadcast_to(ev(tree.body, env), (len(xi),)).astype(float)

    return func


# --- spec documents -------------------------------------------------------


def canonical_text(spec: Mapping) -> str:
    return json.dumps(spec, sort_keys=True, separators=(",", ":"))


def fnv1a64(data: bytes) -> int:
    value = 0xCBF29CE484222325
    for byte in data:
        value ^= byte
        value = (value * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return value


def _parse_mode(key: str, n: int) -> tuple[int, ...]:
    try:
        mode = tuple(int(v) for v in str(key).split(","))
    except ValueError:
        raise ConfigError(f"bad mode key {key!r}") from None
    if len(mode) != n:
        raise ConfigError(f"mode key {key!r} has dimension {len(mode)}, expected {n}")
    return mode


def _parse_value(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    raise ConfigError(f"bad coefficient value {v!r}")


def symbol_from_spec(spec: Mapping) -> Symbol:
    try:
        n = int(spec["n"])
        order = float(spec["order"])
        raw_terms = spec["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"symbol spec is missing or has a bad field: {exc}") from None
    terms = []
    for t in raw_terms:
        coeffs: dict[tuple[int, ...], complex] = {}
        for key, v in dict(t.get("x", {",".join(["0"] * n): 1})).items():
            m = _parse_mode(key, n)
            coeffs[m] = coeffs.get(m, 0) + _parse_value(v)
        expr = str(t.get("xi", "1"))
        terms.append(SymbolTerm(coeffs, compile_xi_expr(expr, n), expr))
    ell = spec.get("ellipticity")
    ellipticity = None if ell is None else (float(ell["C"]), float(ell.get("c", 0.0)))
    return Symbol(n, order, tuple(terms), ellipticity=ellipticity, spec_text=canonical_text(spec))


def load_symbol_spec(source: str | Mapping) -> dict:
    """Spec dict from a preset name, a path to a JSON file, or inline JSON."""
    if isinstance(source, Mapping):
        return dict(source)
    text = str(source).strip()
    if text in PRESETS:
        return json.loads(json.dumps(PRESETS[text]))
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"inline symbol spec is not valid JSON: {exc}") from None
    path = Path(text)
    if not path.is_file():
        raise ConfigError(f"symbol {text!r} is neither a preset, inline JSON, nor a file")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"symbol file {path} is not valid JSON: {exc}") from None


def lift_preset(spec: dict, n: int) -> dict:
    """Extend a one-dimensional preset to n dimensions as a sum over axes."""
    if spec.get("n") == n or n == 1:
        return spec
    if spec.get("n") != 1:
        raise ConfigError(f"symbol has dimension {spec.get('n')}, grid has {n}")
    terms = []
    for t in spec["terms"]:
        xs = t.get("x", {"0": 1})
        expr = t.get("xi", "1")
        x_dependent = any(int(k) != 0 for k in xs)
        uses_axis = "xi" in expr.replace("|xi|^2", "").replace("<xi>", "")
        if x_dependent or uses_axis:
            for axis in range(n):
                keys = {}
                for k, v in xs.items():
                    mode = [0] * n
                    mode[axis] = int(k)
                    keys[",".join(map(str, mode))] = v
                e = expr.replace("|xi|^2", "\0").replace("<xi>", "\1").replace("xi", f"xi{axis + 1}")
                terms.append({"x": keys, "xi": e.replace("\0", "|xi|^2").replace("\1", "<xi>")})
        else:
            terms.append({"x": {",".join(["0"] * n): xs.get("0", 1)}, "xi": expr})
    return dict(spec, n=n, terms=terms)
