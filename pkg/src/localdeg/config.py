"""Run configuration: a sectioned ``key = value`` text format with a fixed schema.

Example::

    [run]
    seed = 20240101

    [model]
    kind = sbm
    sizes = 10, 25, 15
    p = 0.3, 0.5, 0.3
    q = 0.01

    [estimator]
    schemes = annulus-size, constant-one, geometric
    gamma = 0.1

Lists are comma-separated; matrices separate rows with ``;`` and entries with
spaces. Unknown sections or keys are rejected. ``format_config`` writes the
canonical form, and parsing it gives back the same values.
"""

from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .estimator import AnnulusSize, ConstantOne, Custom, Geometric, WeightScheme
from .mccv import SplitPlan
from .model import (
    BetaScalar,
    Empirical,
    ExponentialDecay,
    GaussianMixture,
    HardThreshold,
    Model,
    RcmSpec,
    SbmSpec,
    UniformCube,
)


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _list(conv: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(s: str) -> tuple:
        parts = [p.strip() for p in s.split(",")]
        if parts == [""]:
            return ()
        return tuple(conv(p) for p in parts)

    return parse


def _matrix(s: str) -> tuple[tuple[float, ...], ...]:
    rows = [r.strip() for r in s.split(";") if r.strip()]
    return tuple(tuple(float(v) for v in r.replace(",", " ").split()) for r in rows)


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return "; ".join(" ".join(repr(float(x)) for x in row) for row in v)
        return ", ".join(_fmt(x) for x in v)
    return str(v)


INT, FLOAT, STR, BOOL = int, float, str, _bool
INTS, FLOATS, STRS, MATRIX = _list(int), _list(float), _list(str), _matrix

SCHEMA: dict[str, dict[str, Callable[[str], Any]]] = {
    "run": {"seed": INT, "out_dir": STR, "label": STR},
    "model": {
        "kind": STR,  # sbm | growing-sbm | rcm
        "sizes": INTS, "p": FLOATS, "q": FLOAT, "origin_community": INT,
        "distribution": STR,  # beta | gaussian-mixture | uniform-cube | empirical | cities
        "a": FLOAT, "b": FLOAT,
        "weights": FLOATS, "means": MATRIX, "covariances": MATRIX, "box": MATRIX,
        "d": INT,
        "points_path": STR, "cities_path": STR, "replace": BOOL,
        "connection": STR,  # hard-threshold | exponential-decay
        "alpha": FLOAT, "rate": FLOAT,
        "origin": FLOATS, "origin_from_data": STR,
        "edge_mode": STR, "metric": STR,
        "n": INT,
    },
    "estimator": {"schemes": STRS, "gamma": FLOAT, "custom_weights": FLOATS, "geodesic": STR},
    "mccv": {"M": INT, "fraction": FLOAT},
    "experiment": {
        "n_grid": INTS, "replicates": INT, "truth_samples": INT, "m_max": INT, "q": FLOAT,
        "verify_replicates": INT, "M_grid": INTS, "distributions": STRS,
    },
    "truth": {"method": STR, "samples": INT},
}


@dataclass
class RunConfig:
    sections: dict[str, dict[str, Any]] = field(default_factory=dict)
    base_dir: Path = field(default=Path("."), compare=False)

    def get(self, section: str, key: str, default: Any = None) -> Any:
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str) -> Any:
        v = self.get(section, key)
        if v is None:
            raise ConfigError(f"[{section}] {key} is required")
        return v

    def path(self, section: str, key: str) -> Path:
        p = Path(self.require(section, key))
        return p if p.is_absolute() else self.base_dir / p


def parse_config(text: str, base_dir: str | Path = ".") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=None,
                                   default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    sections: dict[str, dict[str, Any]] = {}
    for name in cp.sections():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        sec = {}
        for key, raw in cp.items(name):
            conv = SCHEMA[name].get(key)
            if conv is None:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            try:
                sec[key] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"[{name}] {key}: {exc}") from None
        sections[name] = sec
    return RunConfig(sections, Path(base_dir))


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, p.parent)


def format_config(cfg: RunConfig) -> str:
    out = []
    for name in SCHEMA:
        if name not in cfg.sections:
            continue
        out.append(f"[{name}]")
        for key in SCHEMA[name]:
            if key in cfg.sections[name]:
                out.append(f"{key} = {_fmt(cfg.sections[name][key])}")
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# builders


def build_model(cfg: RunConfig) -> Model | str:
    kind = cfg.require("model", "kind")
    if kind == "sbm":
        sizes = cfg.require("model", "sizes")
        return SbmSpec(sizes, cfg.require("model", "p"), cfg.require("model", "q"),
                       cfg.get("model", "origin_community", 1))
    if kind == "growing-sbm":
        return "growing-sbm"
    if kind != "rcm":
        raise ConfigError(f"unknown model kind {kind!r}")
    dist, names = build_distribution(cfg)
    conn = cfg.require("model", "connection")
    if conn == "hard-threshold":
        cf = HardThreshold(cfg.require("model", "alpha"))
    elif conn == "exponential-decay":
        cf = ExponentialDecay(cfg.require("model", "rate"))
    else:
        raise ConfigError(f"unknown connection function {conn!r}")
    origin_name = cfg.get("model", "origin_from_data")
    if origin_name is not None:
        if names is None or origin_name not in names:
            raise ConfigError(f"origin {origin_name!r} not found in the data")
        origin = dist.points[names.index(origin_name)]
    else:
        origin = cfg.require("model", "origin")
    return RcmSpec(dist, cf, origin, cfg.get("model", "edge_mode", "undirected"),
                   cfg.get("model", "metric", "euclidean"))


def build_distribution(cfg: RunConfig):
    """The feature distribution, plus point names when loaded from a city file."""
    kind = cfg.require("model", "distribution")
    if kind == "beta":
        return BetaScalar(cfg.require("model", "a"), cfg.require("model", "b")), None
    if kind == "uniform-cube":
        return UniformCube(cfg.require("model", "d")), None
    if kind == "gaussian-mixture":
        means = np.array(cfg.require("model", "means"))
        d = means.shape[1]
        covs = np.array(cfg.require("model", "covariances")).reshape(len(means), d, d)
        box = cfg.get("model", "box")
        return GaussianMixture(cfg.require("model", "weights"), means, covs,
                               None if box is None else np.array(box)), None
    if kind == "empirical":
        return _load_points(cfg.path("model", "points_path"), cfg.get("model", "replace", True)), None
    if kind == "cities":
        from .cities import city_distribution, read_cities

        recs = read_cities(cfg.path("model", "cities_path"))
        return city_distribution(recs), [r.name for r in recs]
    raise ConfigError(f"unknown distribution {kind!r}")


def _load_points(path: Path, replace: bool) -> Empirical:
    """Point CSV: coordinate columns, plus an optional ``weight`` column."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty point file")
    header = [h.strip() for h in rows[0]]
    wcol = header.index("weight") if "weight" in header else None
    pts, ws = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            vals = [float(v) for v in row]
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
        if wcol is not None:
            ws.append(vals.pop(wcol))
        pts.append(vals)
    return Empirical(np.array(pts), np.array(ws) if ws else None, replace)


def build_schemes(cfg: RunConfig) -> tuple[WeightScheme, ...]:
    names = cfg.get("estimator", "schemes", ("annulus-size", "constant-one", "geometric"))
    out: list[WeightScheme] = []
    for name in names:
        if name == "annulus-size":
            out.append(AnnulusSize())
        elif name == "constant-one":
            out.append(ConstantOne())
        elif name == "geometric":
            gamma = cfg.get("estimator", "gamma")
            if gamma is None:
                raise ConfigError("[estimator] gamma is required for the geometric scheme")
            out.append(Geometric(gamma))
        elif name == "custom":
            out.append(Custom(cfg.require("estimator", "custom_weights")))
        else:
            raise ConfigError(f"unknown weight scheme {name!r}")
    if not out:
        raise ConfigError("[estimator] schemes is empty")
    return tuple(out)


def build_plan(cfg: RunConfig, seed: int) -> SplitPlan:
    return SplitPlan(cfg.get("mccv", "M", 100), cfg.get("mccv", "fraction", 0.5), seed)
