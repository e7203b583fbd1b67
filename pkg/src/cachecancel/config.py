"""Experiment configs: TOML schema, validation, and named presets.

A config file declares one experiment. Keys carry their unit in the name
(``tx_power_dbm``, ``csi_radius_m``); conversion to SI happens here, at
the boundary, so the rest of the package only ever sees watts and meters.
Grid entries for the CSI radius accept the literal tokens ``"inf"`` or
``"∞"`` (besides TOML's native ``inf``) so the complete-cancellation
regime is exact rather than a large number.
"""

import math
import sys
from dataclasses import dataclass, replace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .exceptions import ConfigError
from .model import NetworkParams, PacketLibrary, dbm_to_watts, zipf_popularity

__all__ = [
    "ExperimentSpec",
    "KINDS",
    "load_config",
    "parse_config",
    "preset",
]

KINDS = ("analytic_sweep", "mc_validate", "optimize", "fig2", "fig3")

# Disc radius (meters) whose area holds 100 base stations at the reference
# density; the reference network places 100 BSs and 2000 users in it.
_REFERENCE_RADIUS_M = 500.0


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully validated experiment description.

    ``r_b_grid`` and ``eta_grid`` drive the sweep kinds; ``library`` and
    ``cache_size`` drive the optimize kinds. Unused fields hold their
    defaults. ``csv_name``/``svg_name`` are file names, not paths; the
    command line decides the output directory.
    """

    kind: str
    params: NetworkParams
    library: PacketLibrary = None
    cache_size: int = 0
    r_b_grid: tuple = ()
    eta_grid: tuple = ()
    trials: int = 100_000
    seed: int = 0
    window_radius: float = None
    far_field_correction: bool = True
    subset_cap: int = 200_000
    max_iterations: int = 50_000
    csv_name: str = None
    svg_name: str = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of "
                              + ", ".join(KINDS))
        if self.kind in ("analytic_sweep", "mc_validate", "fig2"):
            if not self.r_b_grid or not self.eta_grid:
                raise ConfigError(f"kind {self.kind!r} needs non-empty "
                                  "csi_radius_m and cancellable_fraction grids")
        if self.kind in ("optimize", "fig3"):
            if self.library is None:
                raise ConfigError(f"kind {self.kind!r} needs a [library] table")
            if not 0 <= self.cache_size <= self.library.n:
                raise ConfigError("cache_size must lie in [0, library size]")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must fit in 64 bits")


def _token_float(value, key):
    """A float from TOML, with "inf" / "∞" string tokens allowed."""
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "∞", "infinity"):
            return math.inf
        raise ConfigError(f"{key}: bad value {value!r}")
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise ConfigError(f"{key}: expected a number, got {value!r}")


def _get(table, key, kind, default=None, required=False):
    if key in table:
        return table[key]
    if required:
        raise ConfigError(f"missing required key {key!r} for kind {kind!r}")
    return default


def _network_from_table(table, kind):
    try:
        return NetworkParams(
            lambda_b=_token_float(
                _get(table, "bs_density_per_m2", kind, required=True),
                "bs_density_per_m2"),
            lambda_u=_token_float(
                _get(table, "user_density_per_m2", kind, default=0.0),
                "user_density_per_m2"),
            tx_power=dbm_to_watts(_token_float(
                _get(table, "tx_power_dbm", kind, required=True),
                "tx_power_dbm")),
            noise_power=_token_float(
                _get(table, "noise_power_w", kind, default=0.0),
                "noise_power_w"),
            beta=_token_float(
                _get(table, "path_loss_exponent", kind, required=True),
                "path_loss_exponent"),
            bandwidth=_token_float(
                _get(table, "bandwidth_hz", kind, required=True),
                "bandwidth_hz"),
            slot=_token_float(
                _get(table, "slot_s", kind, required=True), "slot_s"),
            packet_size=_token_float(
                _get(table, "packet_size_bits", kind, required=True),
                "packet_size_bits"),
            r_b=_token_float(
                _get(table, "csi_radius_m", kind, default=0.0),
                "csi_radius_m"),
        )
    except ValueError as exc:
        raise ConfigError(f"[network]: {exc}") from exc


def _library_from_table(table):
    if table is None:
        return None
    if "probabilities" in table:
        try:
            return PacketLibrary.from_probabilities(table["probabilities"])
        except ValueError as exc:
            raise ConfigError(f"[library]: {exc}") from exc
    try:
        return zipf_popularity(int(table["packets"]),
                               float(table.get("zipf_exponent", 0.0)))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"[library]: {exc}") from exc


def parse_config(text):
    """Parse and validate a TOML config document given as a string."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc

    kind = doc.get("kind")
    if kind is None:
        raise ConfigError("top-level 'kind' is required")
    if kind in ("fig2", "fig3"):
        return _preset_with_overrides(kind, doc)

    network = doc.get("network")
    if not isinstance(network, dict):
        raise ConfigError("a [network] table is required")
    params = _network_from_table(network, kind)

    grid = doc.get("grid", {})
    r_b_grid = tuple(_token_float(v, "grid.csi_radius_m")
                     for v in grid.get("csi_radius_m", ()))
    eta_grid = tuple(_token_float(v, "grid.cancellable_fraction")
                     for v in grid.get("cancellable_fraction", ()))
    for v in r_b_grid:
        if v < 0:
            raise ConfigError("grid.csi_radius_m entries must be >= 0")
    for v in eta_grid:
        if not 0.0 <= v <= 1.0:
            raise ConfigError("grid.cancellable_fraction entries must lie "
                              "in [0, 1]")

    mc = doc.get("mc", {})
    window = mc.get("window_radius_m")
    opt = doc.get("optimize", {})
    output = doc.get("output", {})

    try:
        return ExperimentSpec(
            kind=kind,
            params=params,
            library=_library_from_table(doc.get("library")),
            cache_size=int(opt.get("cache_size", 0)),
            r_b_grid=r_b_grid,
            eta_grid=eta_grid,
            trials=int(mc.get("trials", 100_000)),
            seed=int(mc.get("seed", 0)),
            window_radius=None if window is None
            else _token_float(window, "mc.window_radius_m"),
            far_field_correction=bool(mc.get("far_field_correction", True)),
            subset_cap=int(opt.get("subset_cap", 200_000)),
            max_iterations=int(opt.get("max_iterations", 50_000)),
            csv_name=output.get("csv"),
            svg_name=output.get("svg"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _preset_with_overrides(kind, doc):
    """A fig2/fig3 config: the built-in preset plus any overrides given."""
    base = preset(kind)
    mc = doc.get("mc", {})
    grid = doc.get("grid", {})
    output = doc.get("output", {})
    updates = {}
    if "trials" in mc:
        updates["trials"] = int(mc["trials"])
    if "seed" in mc:
        updates["seed"] = int(mc["seed"])
    if "window_radius_m" in mc:
        updates["window_radius"] = _token_float(mc["window_radius_m"],
                                                "mc.window_radius_m")
    if "csi_radius_m" in grid:
        updates["r_b_grid"] = tuple(_token_float(v, "grid.csi_radius_m")
                                    for v in grid["csi_radius_m"])
    if "cancellable_fraction" in grid:
        updates["eta_grid"] = tuple(
            _token_float(v, "grid.cancellable_fraction")
            for v in grid["cancellable_fraction"])
    if "csv" in output:
        updates["csv_name"] = output["csv"]
    if "svg" in output:
        updates["svg_name"] = output["svg"]
    try:
        return replace(base, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path):
    """Read and validate a TOML config file."""
    try:
        with open(path, "rb") as handle:
            text = handle.read().decode("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def reference_network(r_b=0.0, noise_power=0.0):
    """The reference parameter set used by the built-in presets.

    100 BSs and 2000 users in a 500 m disc, 33 dBm transmitters, 20 MHz
    of bandwidth, half-second slots, 10 Mbit packets, path loss exponent
    4, interference limited. The resulting SINR threshold is exactly 1.
    """
    area = math.pi * _REFERENCE_RADIUS_M ** 2
    return NetworkParams(
        lambda_b=100.0 / area,
        lambda_u=2000.0 / area,
        tx_power=dbm_to_watts(33.0),
        noise_power=noise_power,
        beta=4.0,
        bandwidth=20e6,
        slot=0.5,
        packet_size=10e6,
        r_b=r_b,
    )


def preset(name, trials=None, seed=None):
    """A built-in experiment: ``fig2`` (sweep) or ``fig3`` (optimize).

    ``fig2`` sweeps the CSI radius over {0, 30, ..., 180, inf} meters for
    cancellable fractions 0.05 and 0.15, comparing analytics against
    simulation. ``fig3`` solves the optimal caching distribution for a
    100-packet Zipf(0.8) library with 3-packet caches.
    """
    if name == "fig2":
        return ExperimentSpec(
            kind="fig2",
            params=reference_network(),
            r_b_grid=(0.0, 30.0, 60.0, 90.0, 120.0, 150.0, 180.0, math.inf),
            eta_grid=(0.05, 0.15),
            trials=200_000 if trials is None else int(trials),
            seed=0 if seed is None else int(seed),
            csv_name="fig2.csv",
            svg_name="fig2.svg",
        )
    if name == "fig3":
        return ExperimentSpec(
            kind="fig3",
            params=reference_network(r_b=math.inf),
            library=zipf_popularity(100, 0.8),
            cache_size=3,
            trials=200_000 if trials is None else int(trials),
            seed=0 if seed is None else int(seed),
            csv_name="fig3.csv",
            svg_name="fig3.svg",
        )
    raise ConfigError(f"unknown preset {name!r}; expected fig2 or fig3")
