"""``wetplan`` command line: deploy, allocate, sweep, validate-config.

Exit codes: 0 success, 2 configuration/input error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .clustering import K_CHEBYSHEV, KMEANS_MEAN, Deployment, deploy_beacons, mean_centers
from .config import ConfigError, load_scenario
from .eh_channel import scenario_gains
from .power_alloc import allocate
from .sweep import load_sweep, rows_to_csv, run_sweep, sidecar

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("wetplan")

_DEPLOYERS = {"mean": [KMEANS_MEAN], "chebyshev": [K_CHEBYSHEV], "both": [KMEANS_MEAN, K_CHEBYSHEV]}
_ALLOCATORS = {"lp": ["lp"], "approx": ["approx"], "both": ["lp", "approx"]}


def _write(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_deploy(args) -> int:
    scenario = load_scenario(args.config)
    if args.num_beacons is not None:
        try:
            scenario = scenario.with_updates(num_beacons=args.num_beacons)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    seed = args.seed if args.seed is not None else 0
    deployments = {}
    for tag in _DEPLOYERS[args.deployer]:
        deployments[tag] = deploy_beacons(scenario, seed=seed, use_chebyshev=(tag == K_CHEBYSHEV))

    payload = {
        "devices": scenario.devices.tolist(),
        "deployments": {tag: d.to_dict() for tag, d in deployments.items()},
    }
    _write(json.dumps(payload, indent=2) + "\n", args.out)

    # per-cluster radius about the mean vs about the Chebyshev centre
    ref = next(iter(deployments.values()))
    means = mean_centers(scenario.devices, ref.assignment, scenario.num_beacons)
    cheb = deploy_beacons(scenario, seed=seed, use_chebyshev=True) if K_CHEBYSHEV not in deployments else deployments[K_CHEBYSHEV]
    report = sys.stderr if args.out in (None, "-") else sys.stdout
    print(f"{'cluster':>7} {'size':>5} {'r_mean_m':>10} {'r_cheb_m':>10}", file=report)
    for i in range(scenario.num_beacons):
        idx = ref.members(i)
        r_mean = float(np.linalg.norm(scenario.devices[idx] - means[i], axis=1).max()) if idx.size else 0.0
        print(f"{i:>7d} {idx.size:>5d} {r_mean:>10.4f} {cheb.cluster_radii[i]:>10.4f}", file=report)
    return EXIT_OK


def load_deployment_file(path, deployer=None) -> Deployment:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("deployment file not found", path)
    try:
        data = json.loads(path.read_text())
        if "deployments" not in data:
            return Deployment.from_dict(data)
        deps = data["deployments"]
        if deployer is None:
            tag = K_CHEBYSHEV if K_CHEBYSHEV in deps else next(iter(deps))
        else:
            tag = _DEPLOYERS[deployer][0]
        if tag not in deps:
            raise ConfigError(f"deployment {tag!r} not present (have {sorted(deps)})", path)
        return Deployment.from_dict(deps[tag])
    except (ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed deployment file: {exc}", path) from None


def load_batteries(path) -> np.ndarray:
    """CSV with a ``battery_J`` column, one row per device in scenario order."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("battery-state file not found", path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "battery_J" not in reader.fieldnames:
            raise ConfigError("battery-state file needs a 'battery_J' column", path)
        values = []
        for lineno, row in enumerate(reader, start=2):
            try:
                values.append(float(row["battery_J"]))
            except (TypeError, ValueError):
                raise ConfigError(f"bad battery value {row['battery_J']!r}", path, lineno) from None
    return np.array(values)


def cmd_allocate(args) -> int:
    scenario = load_scenario(args.config)
    deployment = load_deployment_file(args.deployment, None if args.deployer == "both" else args.deployer)
    batteries = load_batteries(args.batteries)
    if deployment.num_beacons != scenario.num_beacons:
        try:
            scenario = scenario.with_updates(num_beacons=deployment.num_beacons)
        except ValueError as exc:
            raise ConfigError(f"deployment does not fit scenario: {exc}") from None
    if len(deployment.assignment) != scenario.num_devices:
        raise ConfigError(
            f"deployment covers {len(deployment.assignment)} devices, scenario has {scenario.num_devices}"
        )
    if len(batteries) != scenario.num_devices:
        raise ConfigError(f"battery file has {len(batteries)} rows, scenario has {scenario.num_devices} devices")
    if np.any(batteries < 0) or np.any(batteries > scenario.e_max):
        raise ConfigError(f"battery levels must lie in [0, {scenario.e_max}] J")
    gains = scenario_gains(scenario, deployment)
    out = {}
    for kind in _ALLOCATORS[args.allocator]:
        out[kind] = allocate(kind, scenario, gains, deployment, batteries).to_dict()
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec, base = load_sweep(args.spec)
    if args.trials is not None:
        spec.trials = args.trials
    if args.seed is not None:
        spec.seed = args.seed
    if args.slots is not None:
        spec.slots = args.slots
    if args.allocator is not None:
        spec.allocators = _ALLOCATORS[args.allocator]
    if args.deployer is not None:
        spec.deployers = _DEPLOYERS[args.deployer]
    try:
        spec.__post_init__()
    except ValueError as exc:
        raise ConfigError(f"invalid sweep: {exc}") from None
    rows = run_sweep(spec, base, workers=args.threads)
    text = rows_to_csv(rows)
    _write(text, args.out)
    if args.out not in (None, "-"):
        Path(args.out).with_suffix(".json").write_text(sidecar(spec, base))
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.config is None and args.spec is None:
        raise ConfigError("nothing to validate: pass --config and/or --spec")
    if args.config is not None:
        s = load_scenario(args.config)
        print(f"{args.config}: ok ({s.num_devices} devices, {s.num_beacons} beacons, "
              f"area {s.area_width:g} x {s.area_height:g} m)")
    if args.spec is not None:
        spec, base = load_sweep(args.spec)
        print(f"{args.spec}: ok ({spec.swept_parameter} over {len(spec.values)} values, "
              f"{spec.trials} trials, {len(spec.allocators) * len(spec.deployers)} series)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wetplan", description="Power-beacon placement and power allocation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("deploy", help="cluster devices and place beacons")
    d.add_argument("--config", required=True)
    d.add_argument("--seed", type=int)
    d.add_argument("--num-beacons", type=int)
    d.add_argument("--deployer", choices=sorted(_DEPLOYERS), default="both")
    d.add_argument("--out")
    d.set_defaults(func=cmd_deploy)

    a = sub.add_parser("allocate", help="per-slot power allocation for given batteries")
    a.add_argument("--config", required=True)
    a.add_argument("--deployment", required=True)
    a.add_argument("--batteries", required=True)
    a.add_argument("--allocator", choices=sorted(_ALLOCATORS), default="both")
    a.add_argument("--deployer", choices=sorted(_DEPLOYERS), default="both",
                   help="which deployment to read from a multi-deployment file")
    a.add_argument("--out")
    a.set_defaults(func=cmd_allocate)

    s = sub.add_parser("sweep", help="Monte Carlo sweep over e_th or num_beacons")
    s.add_argument("spec", nargs="?")
    s.add_argument("--config", dest="spec_opt", help="sweep file (alternative to the positional)")
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--slots", type=int)
    s.add_argument("--allocator", choices=sorted(_ALLOCATORS))
    s.add_argument("--deployer", choices=sorted(_DEPLOYERS))
    s.add_argument("--threads", type=int, default=1, help="worker processes for trials")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate-config", help="parse and check a scenario and/or sweep file")
    v.add_argument("--config")
    v.add_argument("--spec")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "sweep":
        args.spec = args.spec or args.spec_opt
        if args.spec is None:
            parser.error("sweep needs a spec file")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"wetplan: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"wetplan: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
