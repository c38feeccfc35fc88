"""Configuration ingestion and validation for the pipeline runner."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .cocycle import CocycleError, FiniteRangeCocycle, build_cocycle
from .potential import PotentialError, WordPotential, make_potential
from .sft import Sft, SftError, build_sft


class ConfigError(ValueError):
    pass


KNOWN_OPS = {
    "pressure", "gibbs", "qm", "lps", "bunching", "holonomy", "typicality",
    "irreducibility", "lyapunov", "kscan", "vwbscan",
}

# Ops whose inputs depend on earlier ops (pressure feeds gibbs, gibbs feeds
# the weight-consuming analyses).
OP_ORDER = [
    "bunching", "irreducibility", "holonomy", "typicality",
    "pressure", "gibbs", "qm", "lps", "lyapunov", "kscan", "vwbscan",
]


@dataclass
class SystemConfig:
    sft: Sft
    cocycle: FiniteRangeCocycle
    potential: WordPotential
    potential_kind: str
    analyses: list[dict]
    seed: int
    semantic: dict = field(repr=False, default_factory=dict)


def parse_word(s) -> tuple[int, ...]:
    if isinstance(s, (list, tuple)):
        return tuple(int(c) for c in s)
    return tuple(int(c) for c in str(s))


def load_config(path) -> SystemConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config: {e}") from e
    return parse_config(raw)


def parse_config(raw: dict) -> SystemConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    system = raw.get("system", raw)
    if "adjacency" not in system:
        raise ConfigError("missing 'adjacency'")
    try:
        sft = build_sft(system["adjacency"])
    except SftError as e:
        raise ConfigError(f"bad adjacency matrix: {e}") from e

    cspec = system.get("cocycle")
    if cspec is None:
        # identity cocycle in dimension 1 as default substrate
        cspec = {"d": 1, "k": 0, "alpha": 1.0,
                 "entries": [{"window": [a], "matrix": [[1.0]]}
                             for a in range(sft.q)]}
    try:
        table = {parse_word(e["window"]): e["matrix"]
                 for e in cspec["entries"]}
        coc = build_cocycle(sft, int(cspec["d"]), int(cspec["k"]),
                            float(cspec.get("alpha", 1.0)), table)
    except (KeyError, TypeError, CocycleError) as e:
        raise ConfigError(f"bad cocycle spec: {e}") from e

    kind = system.get("potential", "norm")
    try:
        pot = make_potential(coc, kind)
    except (PotentialError, ValueError) as e:
        raise ConfigError(f"bad potential kind: {e}") from e

    analyses = raw.get("analyses", [])
    if not isinstance(analyses, list):
        raise ConfigError("'analyses' must be a list")
    for a in analyses:
        if not isinstance(a, dict) or "op" not in a:
            raise ConfigError(f"analysis entry {a!r} lacks an 'op'")
        if a["op"] not in KNOWN_OPS:
            raise ConfigError(f"unknown analysis op {a['op']!r}")
        _validate_params(a)

    seed = int(raw.get("seed", 0))
    semantic = {
        "adjacency": [[int(v) for v in row] for row in system["adjacency"]],
        "cocycle": {
            "d": coc.d, "k": coc.k, "alpha": coc.alpha,
            "entries": [
                {"window": "".join(map(str, w)),
                 "matrix": [[float(v) for v in row] for row in M]}
                for w, M in sorted(coc.table.items())
            ],
        },
        "potential": kind,
        "analyses": analyses,
        "seed": seed,
    }
    ordered = sorted(analyses, key=lambda a: OP_ORDER.index(a["op"]))
    return SystemConfig(sft=sft, cocycle=coc, potential=pot,
                        potential_kind=kind, analyses=ordered, seed=seed,
                        semantic=semantic)


_REQUIRED = {
    "pressure": ["n_max"],
    "gibbs": ["n"],
    "qm": ["n", "k_max"],
    "lps": ["n"],
    "holonomy": ["cycle"],
    "typicality": ["p", "bridge"],
    "lyapunov": ["n"],
    "kscan": ["m1", "m2", "eps"],
    "vwbscan": ["n", "m1", "m2", "eps"],
}

_POSITIVE = {"n_max", "n", "m1", "m2"}


def _validate_params(a: dict) -> None:
    for key in _REQUIRED.get(a["op"], []):
        if key not in a:
            raise ConfigError(f"analysis {a['op']!r} missing parameter {key!r}")
    for key in _POSITIVE:
        if key in a and int(a[key]) < 1:
            raise ConfigError(f"{a['op']}: parameter {key}={a[key]} out of range")
    if "eps" in a and not 0 < float(a["eps"]) <= 1:
        raise ConfigError(f"{a['op']}: eps={a['eps']} outside (0, 1]")
    if "k_max" in a and int(a["k_max"]) < 0:
        raise ConfigError(f"{a['op']}: k_max must be >= 0")
    if a.get("mode") not in (None, "fiber", "strong"):
        raise ConfigError(f"bunching mode {a.get('mode')!r} unknown")
    if a.get("side") not in (None, "s", "u", "stable", "unstable"):
        raise ConfigError(f"holonomy side {a.get('side')!r} unknown")
