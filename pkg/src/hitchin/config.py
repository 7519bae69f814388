r"""Run configuration: a JSON document with sections, schema-checked.

Numbers may be written as JSON numbers or as exact fraction strings
"p/q"; the exact backend keeps them rational end to end.  Unknown keys
are rejected so that typos fail loudly before any computation starts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .fuchsian import genus2_surface
from .pants import HitchinParams, PantsInvariants, chain_decomposition


class ConfigError(ValueError):
    """Malformed configuration or parameter file."""


_TOP_KEYS = {
    "n",
    "genus",
    "backend",
    "seed",
    "tolerances",
    "surface",
    "decomposition",
    "parameters",
    "scan",
    "tracer",
    "output",
}
_SECTION_KEYS = {
    "tolerances": {"closed_leaf"},
    "surface": {"a1", "b1", "twist"},
    "decomposition": {"standard_genus"},
    "parameters": {"boundary", "internal", "gluing", "invariants", "fuchsian"},
    "scan": {"direction", "steps"},
    "tracer": {"depth_cap", "word"},
    "output": {"path"},
}


def parse_scalar(value, exact=False):
    """A config number: JSON numeric, or a string like "3/7" or "0.25"."""
    if isinstance(value, bool):
        raise ConfigError(f"boolean is not a number: {value!r}")
    if isinstance(value, (int, float)):
        return Fraction(value) if exact else float(value)
    if isinstance(value, str):
        try:
            frac = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse number {value!r}") from exc
        return frac if exact else float(frac)
    raise ConfigError(f"cannot parse number {value!r}")


def format_scalar(value):
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return float(value)


def _label_to_str(label):
    kind, idx = label
    return f"{kind}:{idx[0]},{idx[1]},{idx[2]}"


def _str_to_label(text):
    try:
        kind, idx = text.split(":")
        parts = tuple(int(p) for p in idx.split(","))
        if kind not in ("tau", "tau_prime", "sigma") or len(parts) != 3:
            raise ValueError
    except ValueError as exc:
        raise ConfigError(f"bad coordinate label {text!r}") from exc
    return (kind, parts)


def _check_keys(section, data, allowed):
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")


@dataclass
class RunConfig:
    n: int = 3
    genus: int = 2
    backend: str = "float64"
    seed: int = 0
    closed_leaf_tol: float = 1e-9
    depth_cap: int = 64
    word: str = ""
    steps: int = 10
    direction: dict = field(default_factory=dict)
    output_path: str = ""
    raw: dict = field(default_factory=dict)

    @property
    def exact(self):
        return self.backend == "exact"

    def config_hash(self):
        blob = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    # -- constructors ---------------------------------------------------------

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config root must be an object")
        _check_keys("root", data, _TOP_KEYS)
        for section, keys in _SECTION_KEYS.items():
            if section in data:
                if not isinstance(data[section], dict):
                    raise ConfigError(f"[{section}] must be an object")
                _check_keys(section, data[section], keys)
        cfg = cls(raw=data)
        cfg.n = int(data.get("n", 3))
        if not 2 <= cfg.n <= 8:
            raise ConfigError(f"n must be in 2..8, got {cfg.n}")
        cfg.genus = int(data.get("genus", 2))
        if cfg.genus < 2:
            raise ConfigError("genus must be at least 2")
        cfg.backend = data.get("backend", "float64")
        if cfg.backend not in ("exact", "float64"):
            raise ConfigError(f"unknown backend {cfg.backend!r}")
        cfg.seed = int(data.get("seed", 0))
        tol = data.get("tolerances", {})
        cfg.closed_leaf_tol = float(parse_scalar(tol.get("closed_leaf", 1e-9)))
        tracer = data.get("tracer", {})
        cfg.depth_cap = int(tracer.get("depth_cap", 64))
        cfg.word = tracer.get("word", "")
        scan = data.get("scan", {})
        cfg.steps = int(scan.get("steps", 10))
        cfg.direction = {
            _str_to_label(k): parse_scalar(v, exact=False)
            for k, v in scan.get("direction", {}).items()
        }
        cfg.output_path = data.get("output", {}).get("path", "")
        return cfg

    # -- derived objects ------------------------------------------------------

    def decomposition(self):
        spec = self.raw.get("decomposition", {})
        genus = int(spec.get("standard_genus", self.genus))
        if genus != self.genus:
            raise ConfigError("decomposition genus disagrees with [genus]")
        return chain_decomposition(genus)

    def surface(self):
        spec = self.raw.get("surface", {})
        kwargs = {}
        if "a1" in spec:
            kwargs["a1"] = [[parse_scalar(x, exact=True) for x in row] for row in spec["a1"]]
        if "b1" in spec:
            kwargs["b1"] = [[parse_scalar(x, exact=True) for x in row] for row in spec["b1"]]
        if "twist" in spec:
            kwargs["twist"] = parse_scalar(spec["twist"], exact=True)
        if self.genus != 2:
            raise ConfigError("the built-in Fuchsian surface has genus 2")
        return genus2_surface(**kwargs)

    def invariants(self, decomp=None):
        """PantsInvariants list from [parameters].invariants or the surface."""
        decomp = decomp or self.decomposition()
        params = self.raw.get("parameters", {})
        if params.get("fuchsian"):
            from .fuchsian import fuchsian_invariants

            return fuchsian_invariants(self.surface(), self.n)
        blocks = params.get("invariants")
        if blocks is None:
            raise ConfigError("[parameters].invariants is missing")
        if len(blocks) != decomp.num_pants:
            raise ConfigError(
                f"expected {decomp.num_pants} invariant blocks, got {len(blocks)}"
            )
        out = []
        for j, block in enumerate(blocks):
            _check_keys(f"invariants[{j}]", block, {"tau", "tau_prime", "sigma"})
            try:
                tau = {
                    self._idx(k): parse_scalar(v, self.exact)
                    for k, v in block["tau"].items()
                }
                taup = {
                    self._idx(k): parse_scalar(v, self.exact)
                    for k, v in block["tau_prime"].items()
                }
                sigma = {
                    self._idx(k): parse_scalar(v, self.exact)
                    for k, v in block["sigma"].items()
                }
            except KeyError as exc:
                raise ConfigError(f"invariant block {j} missing {exc}") from exc
            out.append(PantsInvariants(n=self.n, tau=tau, tau_prime=taup, sigma=sigma))
        return out

    def gluing(self, decomp=None):
        decomp = decomp or self.decomposition()
        params = self.raw.get("parameters", {})
        raw = params.get("gluing")
        if raw is None:
            return {
                c: tuple(0.0 for _ in range(self.n - 1))
                for c in range(decomp.num_curves)
            }
        out = {}
        for key, vals in raw.items():
            out[int(key)] = tuple(parse_scalar(v, self.exact) for v in vals)
        return out

    def hitchin_params(self, decomp=None):
        decomp = decomp or self.decomposition()
        params = self.raw.get("parameters", {})
        if params.get("fuchsian") or "boundary" not in params:
            from .fuchsian import fuchsian_invariants
            from .pants import xi_forward

            invs = fuchsian_invariants(self.surface(), self.n)
            return xi_forward(decomp, invs, self.gluing(decomp))
        boundary = {
            int(k): tuple(parse_scalar(v, self.exact) for v in vals)
            for k, vals in params["boundary"].items()
        }
        internal_raw = params.get("internal")
        if internal_raw is None:
            raise ConfigError("[parameters].internal is missing")
        internal = []
        for j, block in enumerate(internal_raw):
            internal.append(
                {_str_to_label(k): parse_scalar(v, self.exact) for k, v in block.items()}
            )
        return HitchinParams(
            n=self.n,
            decomp=decomp,
            boundary=boundary,
            internal=tuple(internal),
            gluing=self.gluing(decomp),
        )

    @staticmethod
    def _idx(text):
        parts = tuple(int(p) for p in text.split(","))
        if len(parts) != 3:
            raise ConfigError(f"bad invariant index {text!r}")
        return parts


# -- serialization helpers -----------------------------------------------------


def invariants_to_dict(invariants):
    out = []
    for inv in invariants:
        out.append(
            {
                "tau": {_idx_str(k): format_scalar(v) for k, v in sorted(inv.tau.items())},
                "tau_prime": {
                    _idx_str(k): format_scalar(v) for k, v in sorted(inv.tau_prime.items())
                },
                "sigma": {
                    _idx_str(k): format_scalar(v) for k, v in sorted(inv.sigma.items())
                },
            }
        )
    return out


def params_to_dict(params):
    return {
        "boundary": {
            str(c): [format_scalar(v) for v in gaps]
            for c, gaps in sorted(params.boundary.items())
        },
        "internal": [
            {_label_to_str(k): format_scalar(v) for k, v in sorted(block.items())}
            for block in params.internal
        ],
        "gluing": {
            str(c): [format_scalar(v) for v in vals]
            for c, vals in sorted(params.gluing.items())
        },
    }


def _idx_str(idx):
    return f"{idx[0]},{idx[1]},{idx[2]}"
