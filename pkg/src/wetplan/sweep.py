"""Parameter sweeps over ``e_th`` or the number of beacons, written as CSV."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .clustering import K_CHEBYSHEV, KMEANS_MEAN
from .config import ConfigError, load_scenario, parse_quantity, read_pairs, scenario_fields, scenario_from_pairs
from .core import default_scenario
from .power_alloc import ALLOCATORS
from .simulation import DEFAULT_SLOTS, DEFAULT_WARMUP, run_monte_carlo

CSV_COLUMNS = (
    "swept_value",
    "allocator",
    "deployer",
    "mean_sum_power_W",
    "outage_probability",
    "stderr_outage",
    "trials",
)
SWEPT = ("e_th", "num_beacons")
DEPLOYER_ALIASES = {"mean": KMEANS_MEAN, KMEANS_MEAN: KMEANS_MEAN, "chebyshev": K_CHEBYSHEV, K_CHEBYSHEV: K_CHEBYSHEV}


@dataclass
class SweepSpec:
    swept_parameter: str
    values: list
    trials: int = 200
    allocators: list = field(default_factory=lambda: ["lp", "approx"])
    deployers: list = field(default_factory=lambda: [KMEANS_MEAN, K_CHEBYSHEV])
    seed: int = 0
    slots: int = DEFAULT_SLOTS
    warmup: int = DEFAULT_WARMUP
    redraw_positions: bool = True

    def __post_init__(self):
        if self.swept_parameter not in SWEPT:
            raise ValueError(f"swept_parameter must be one of {SWEPT}, got {self.swept_parameter!r}")
        if not self.values:
            raise ValueError("values must be nonempty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be strictly increasing")
        if self.swept_parameter == "num_beacons":
            if any(v != int(v) or v < 1 for v in self.values):
                raise ValueError("num_beacons values must be positive integers")
            self.values = [int(v) for v in self.values]
        if self.trials < 1 or self.slots < 1:
            raise ValueError("trials and slots must be >= 1")
        bad = [a for a in self.allocators if a not in ALLOCATORS]
        if bad or not self.allocators:
            raise ValueError(f"allocators must be a nonempty subset of {ALLOCATORS}")
        try:
            self.deployers = [DEPLOYER_ALIASES[d] for d in self.deployers]
        except KeyError as exc:
            raise ValueError(f"unknown deployer {exc.args[0]!r}") from None
        if not self.deployers:
            raise ValueError("deployers must be nonempty")


def _split_list(text):
    return [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]


_SWEEP_KEYS = {"swept_parameter", "values", "trials", "allocators", "deployers", "seed", "slots", "warmup", "scenario", "redraw_positions"}


def load_sweep(path):
    """Parse a sweep file.  Returns ``(SweepSpec, base Scenario)``.

    Sweep keys sit next to optional scenario keys; ``scenario = other.cfg``
    loads the base scenario from a separate file instead.
    """
    path = Path(path)
    pairs = read_pairs(path)
    sweep = {k: (v, n) for k, v, n in pairs if k in _SWEEP_KEYS}
    rest = [(k, v, n) for k, v, n in pairs if k not in _SWEEP_KEYS]
    if "swept_parameter" not in sweep or "values" not in sweep:
        raise ConfigError("sweep file needs 'swept_parameter' and 'values'", path)

    kw = {}
    for key, (value, lineno) in sweep.items():
        try:
            if key == "values":
                dim = "energy" if sweep["swept_parameter"][0] == "e_th" else None
                items = _split_list(value)
                unit = ""
                # a trailing unit on the last item applies to all of them
                if items and " " in items[-1]:
                    items[-1], unit = items[-1].rsplit(" ", 1)
                kw["values"] = [parse_quantity(f"{v} {unit}".strip(), dim) for v in items]
            elif key in ("trials", "seed", "slots", "warmup"):
                kw[key] = int(value)
            elif key in ("allocators", "deployers"):
                kw[key] = _split_list(value)
            elif key == "swept_parameter":
                kw[key] = value
            elif key == "redraw_positions":
                if value.lower() not in ("true", "false", "yes", "no", "1", "0"):
                    raise ValueError(f"redraw_positions must be true or false, got {value!r}")
                kw[key] = value.lower() in ("true", "yes", "1")
        except ValueError as exc:
            raise ConfigError(str(exc), path, lineno) from None
    try:
        spec = SweepSpec(**kw)
    except ValueError as exc:
        raise ConfigError(f"invalid sweep: {exc}", path) from None

    if "scenario" in sweep:
        if rest:
            raise ConfigError("give scenario keys either inline or via 'scenario =', not both", path, rest[0][2])
        base = load_scenario(path.parent / sweep["scenario"][0])
    elif rest:
        base = scenario_from_pairs(rest, path)
    else:
        base = default_scenario(64, 15, spec.seed)
    return spec, base


def _scenario_for(base, parameter, value):
    if parameter == "e_th":
        return base.with_updates(e_th=float(value))
    return base.with_updates(num_beacons=int(value))


def run_sweep(spec: SweepSpec, base, workers: int = 1) -> list[dict]:
    rows = []
    for value in spec.values:
        try:
            scenario = _scenario_for(base, spec.swept_parameter, value)
        except ValueError as exc:
            raise ConfigError(f"swept value {value!r} is invalid: {exc}") from None
        for allocator in spec.allocators:
            for deployer in spec.deployers:
                rep = run_monte_carlo(
                    scenario, deployer=deployer, allocator=allocator, trials=spec.trials,
                    slots=spec.slots, seed=spec.seed, warmup=spec.warmup,
                    redraw_positions=spec.redraw_positions, workers=workers,
                )
                rows.append({
                    "swept_value": value,
                    "allocator": allocator,
                    "deployer": deployer,
                    "mean_sum_power_W": rep.mean_sum_power,
                    "outage_probability": rep.outage_probability,
                    "stderr_outage": rep.stderr_outage,
                    "trials": spec.trials,
                })
    return rows


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_csv(path_or_text) -> list[dict]:
    text = Path(path_or_text).read_text() if isinstance(path_or_text, Path) else path_or_text
    out = []
    for r in csv.DictReader(io.StringIO(text)):
        out.append({
            "swept_value": float(r["swept_value"]),
            "allocator": r["allocator"],
            "deployer": r["deployer"],
            "mean_sum_power_W": float(r["mean_sum_power_W"]),
            "outage_probability": float(r["outage_probability"]),
            "stderr_outage": float(r["stderr_outage"]),
            "trials": int(r["trials"]),
        })
    return out


def sidecar(spec: SweepSpec, base) -> str:
    return json.dumps(
        {"sweep": asdict(spec), "scenario": scenario_fields(base)},
        indent=2, sort_keys=True,
    ) + "\n"
