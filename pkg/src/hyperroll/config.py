"""Run configuration: parsing and manifold construction.

Configs are TOML (nested tables mirror the recursive warped-product
composition) or JSON with the same structure.  A manifold table has a
`kind` plus kind-specific fields; warped kinds nest `base` / `fiber`
tables.  Example:

    c = -1.0
    seed = 7
    base_point = [0.1, 0.05, -0.1]

    [manifold]
    kind = "exp_warp"

    [manifold.fiber]
    kind = "perturbed_flat"
    n = 2
    amplitude = 0.12
    seed = 3

    [sampling]
    loop_count = 40
    step = 0.005
"""

import json
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # python < 3.11
    import tomli as _toml

from . import manifolds as mf
from .holonomy import SamplingConfig


class ConfigError(ValueError):
    """Malformed run configuration."""


def load_config_file(path):
    text = open(path, "rb").read()
    if str(path).endswith(".json"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    try:
        return _toml.loads(text.decode("utf-8"))
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _require(table, key, kind):
    if key not in table:
        raise ConfigError(f"manifold kind '{kind}' needs field '{key}'")
    return table[key]


def build_warp(entry):
    if isinstance(entry, str):
        name, table = entry, {}
    else:
        table = dict(entry)
        name = table.pop("kind", None) or table.pop("name", None)
    warps = {
        "exp_minus": mf.ExpMinusWarp,
        "cosh": mf.CoshWarp,
        "sinh": mf.SinhWarp,
    }
    if name in warps:
        return warps[name]()
    if name == "cosh_dist":
        return mf.CoshDistWarp(float(table.get("curvature", -1.0)))
    raise ConfigError(f"unknown warp kind '{name}'")


def build_manifold(table):
    """Recursively construct a chart metric from a config table."""
    if not isinstance(table, dict):
        raise ConfigError("manifold entry must be a table")
    kind = table.get("kind")
    if kind is None:
        raise ConfigError("manifold table is missing 'kind'")

    if kind == "space_form":
        return mf.SpaceFormChart(
            int(_require(table, "n", kind)),
            float(_require(table, "curvature", kind)),
            half_width=table.get("half_width"),
            chart=table.get("chart"),
        )
    if kind == "flat":
        return mf.Flat(int(_require(table, "n", kind)),
                       half_width=float(table.get("half_width", 1.0)))
    if kind == "interval":
        return mf.Interval(float(_require(table, "a", kind)),
                           float(_require(table, "b", kind)))
    if kind == "perturbed_flat":
        return mf.PerturbedFlat(
            int(_require(table, "n", kind)),
            amplitude=float(table.get("amplitude", 0.1)),
            seed=int(table.get("seed", 0)),
            half_width=float(table.get("half_width", 1.0)),
        )
    if kind == "warped_product":
        return mf.WarpedProduct(
            build_manifold(_require(table, "base", kind)),
            build_manifold(_require(table, "fiber", kind)),
            build_warp(_require(table, "warp", kind)),
        )
    if kind == "exp_warp":
        fiber = (build_manifold(table["fiber"]) if "fiber" in table else None)
        s_range = tuple(table.get("s_range", (-0.8, 0.8)))
        return mf.exp_warp(fiber=fiber, s_range=s_range)
    if kind == "sinh_cosh_warp":
        fiber = (build_manifold(table["fiber"]) if "fiber" in table else None)
        return mf.sinh_cosh_warp(fiber1=fiber,
                      s_range=tuple(table.get("s_range", (0.4, 1.6))),
                      x2_half_width=float(table.get("x2_half_width", 0.8)))
    if kind == "polar_cosh_warp":
        fiber = (build_manifold(table["fiber"]) if "fiber" in table else None)
        return mf.polar_cosh_warp(k=int(table.get("k", 2)), fiber=fiber,
                            s_range=tuple(table.get("s_range", (0.35, 1.4))))
    if kind == "graph_cosh_warp":
        fiber = (build_manifold(table["fiber"]) if "fiber" in table else None)
        return mf.graph_cosh_warp(k=int(table.get("k", 2)), fiber=fiber,
                            half_width=float(table.get("half_width", 0.9)))
    raise ConfigError(f"unknown manifold kind '{kind}'")


@dataclass
class RunConfig:
    spec: object
    c: float
    base_point: np.ndarray
    sampling: SamplingConfig
    raw: dict = field(default_factory=dict)

    @property
    def manifold_kind(self):
        return self.raw.get("manifold", {}).get("kind", self.spec.name)


def parse_run_config(data, c_override=None, seed_override=None):
    if "manifold" not in data:
        raise ConfigError("config is missing the [manifold] table")
    spec = build_manifold(data["manifold"])
    c = float(c_override if c_override is not None else data.get("c", -1.0))
    if c == 0:
        raise ConfigError("curvature parameter c must be nonzero")
    base = np.asarray(data.get("base_point", spec.center()), dtype=float)
    if base.shape != (spec.n,):
        raise ConfigError(
            f"base_point has length {base.size}, manifold dimension is {spec.n}")
    if not spec.contains(base):
        raise ConfigError("base_point lies outside the chart domain")

    sampling_table = dict(data.get("sampling", {}))
    known = set(SamplingConfig.__dataclass_fields__)
    unknown = set(sampling_table) - known
    if unknown:
        raise ConfigError(f"unknown sampling fields: {sorted(unknown)}")
    if "eps_list" in sampling_table:
        sampling_table["eps_list"] = tuple(sampling_table["eps_list"])
    sampling = SamplingConfig(**sampling_table)
    if seed_override is not None:
        sampling.seed = int(seed_override)
    if sampling.rank_tol <= 0 or sampling.step <= 0:
        raise ConfigError("tolerances and steps must be positive")
    return RunConfig(spec, c, base, sampling, data)
