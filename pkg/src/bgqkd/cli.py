"""Command-line front end.

Subcommands:
    scattering     simulate the 8x8 detection-probability matrices
    security       QBER / mutual information / key-rate reports
    selfheal-scan  detected-signal recovery versus distance behind an obstacle
    info           print derived distances and sampling figures for a config

Exit codes: 0 success, 2 configuration error, 3 numerical-guard violation
(band-limit or grid-boundary warnings under run.guard = strict).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .channel import (
    CountRates,
    ScatteringMatrix,
    heralded_input,
    scattering_matrix,
    simulate_counts,
)
from .config import RunConfig, load_config, load_preset, preset_names
from .errors import ConfigError
from .io import write_pgm
from .jones import ALL_LABELS, prepare_state
from .modes import ModeFamily, ModeSpec, nondiffracting_distance, shadow_length
from .propagation import ChannelSpec, propagate, transmit_to_station
from .security import PhotonStatistics, key_rate, mutual_information, security_report
from .selfheal import selfheal_scan

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _load(args) -> RunConfig:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("cli", "provide exactly one of --config or --preset")
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = load_preset(args.preset)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, seed=args.seed))
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_scenarios(cfg: RunConfig, threads: int) -> list[ScatteringMatrix]:
    def one(scenario):
        return scattering_matrix(scenario.channel, cfg.source, cfg.detection,
                                 cfg.grid, scenario=scenario.name)

    if threads > 1 and len(cfg.scenarios) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, cfg.scenarios))
    return [one(s) for s in cfg.scenarios]


def _guard_violations(matrices) -> list[str]:
    return [w for m in matrices for w in m.warnings]


def cmd_scattering(args) -> int:
    cfg = _load(args)
    if not cfg.scenarios:
        raise ConfigError("scenarios", "scattering needs at least one scenario")
    out = _out_dir(args)
    matrices = _run_scenarios(cfg, args.threads)
    fam = cfg.source.family.value.lower()
    for m in matrices:
        stem = f"{m.scenario}_{fam}"
        if "json" in cfg.run.outputs:
            _write_json(out / f"{stem}_matrix.json", m.to_json_dict())
        if "csv" in cfg.run.outputs:
            (out / f"{stem}_matrix.csv").write_text(m.to_csv())
            rn = m.row_normalized()
            lines = ["prepared\\measured," + ",".join(m.labels)]
            for i, row in enumerate(rn):
                lines.append(m.labels[i] + "," + ",".join(f"{v:.10g}" for v in row))
            (out / f"{stem}_matrix_normalized.csv").write_text("\n".join(lines) + "\n")
        print(f"{m.scenario} [{m.family}]: mean matched diagonal = "
              f"{m.matched_diagonal().mean():.4f}")
    if "pgm" in cfg.run.outputs:
        _write_intensity_snapshots(cfg, out)
    violations = _guard_violations(matrices)
    for w in violations:
        print(f"guard: {w}", file=sys.stderr)
    if violations and cfg.run.guard == "strict":
        return EXIT_GUARD
    return EXIT_OK


def _write_intensity_snapshots(cfg: RunConfig, out: Path) -> None:
    fam = cfg.source.family.value.lower()
    base = heralded_input(cfg.source, cfg.grid)
    ell = abs(cfg.source.ell) or 1
    for scenario in cfg.scenarios:
        stations = cfg.run.pgm_stations or (scenario.channel.length,)
        for label in ALL_LABELS:
            f0 = prepare_state(label, base, ell)
            for z in stations:
                z_stop = min(z, scenario.channel.length)
                obstacles = tuple(o for o in scenario.channel.obstacles
                                  if o.z <= z_stop)
                chan = ChannelSpec(length=z_stop, obstacles=obstacles,
                                   station_z=z_stop)
                f = transmit_to_station(f0, chan, check_band_limit=False)
                name = f"{scenario.name}_{fam}_{label}_z{z:.4f}.pgm"
                write_pgm(out / name, f.intensity(), bit_depth=16)


def cmd_security(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    reports = []
    guard_exit = False
    if cfg.security_direct:
        for entry in cfg.security_direct:
            i_ab = mutual_information(entry.qber, cfg.security.dimension)
            rate = key_rate(entry.qber, entry.delta, d=cfg.security.dimension,
                            f_ec=cfg.security.f_ec, q_mu=entry.q_mu,
                            variant=cfg.security.variant)
            reports.append({
                "scenario": entry.name,
                "family": entry.family,
                "dimension": cfg.security.dimension,
                "qber": entry.qber,
                "mutual_information_bits": i_ab,
                "delta": entry.delta,
                "key_rate": rate.to_json_dict(),
                "normalized_counts": None,
                "f_ec": cfg.security.f_ec,
                "mu": entry.mu,
                "q_mu": entry.q_mu,
                "notes": ["direct entry (no field simulation)"],
            })
    else:
        if not cfg.scenarios:
            raise ConfigError("scenarios", "security needs scenarios or direct entries")
        matrices = _run_scenarios(cfg, args.threads)
        reference = next(
            (m for s, m in zip(cfg.scenarios, matrices) if not s.channel.obstacles), None)
        for idx, m in enumerate(matrices):
            counts = simulate_counts(
                m, CountRates(pairs_per_second=cfg.run.events, integration_time=1.0),
                seed=cfg.run.seed + idx)
            kwargs = dict(reference=reference, counts=counts,
                          d=cfg.security.dimension, f_ec=cfg.security.f_ec,
                          variant=cfg.security.variant, scenario=m.scenario)
            if cfg.spdc.delta is not None:
                rep = security_report(m, delta=cfg.spdc.delta, q_mu=cfg.spdc.q_mu, **kwargs)
            else:
                stats = PhotonStatistics.poissonian(cfg.spdc.mu, cfg.spdc.q_mu)
                rep = security_report(m, stats=stats, **kwargs)
            reports.append(rep.to_json_dict())
            if "csv" in cfg.run.outputs:
                (out / f"{m.scenario}_{m.family.lower()}_counts.csv").write_text(counts.to_csv())
        if _guard_violations(matrices) and cfg.run.guard == "strict":
            guard_exit = True
    _write_json(out / "security_reports.json", reports)
    (out / "security_summary.txt").write_text(_summary_table(reports))
    print(_summary_table(reports))
    return EXIT_GUARD if guard_exit else EXIT_OK


def _summary_table(reports: list[dict]) -> str:
    families = sorted({r["family"] for r in reports})
    lines = []
    for fam in families:
        rows = [r for r in reports if r["family"] == fam]
        names = [r["scenario"] for r in rows]
        lines.append(f"family {fam}")
        lines.append("  " + "".join(f"{n:>16s}" for n in ["metric"] + names))
        def fmt(key, getter, digits=4):
            vals = []
            for r in rows:
                v = getter(r)
                vals.append("-" if v is None else f"{v:.{digits}f}")
            lines.append("  " + f"{key:>16s}" + "".join(f"{v:>16s}" for v in vals))
        fmt("QBER", lambda r: r["qber"])
        fmt("I_AB [bits]", lambda r: r["mutual_information_bits"])
        fmt("delta", lambda r: r["delta"], 6)
        fmt("R/Q_mu", lambda r: r["key_rate"]["per_signal"])
        fmt("R/Q_mu printed", lambda r: r["key_rate"]["per_signal_as_printed"])
        fmt("NC", lambda r: r["normalized_counts"])
        lines.append("")
    return "\n".join(lines)


def cmd_selfheal_scan(args) -> int:
    cfg = _load(args)
    if cfg.selfheal is None:
        raise ConfigError("selfheal", "selfheal-scan needs a selfheal section")
    out = _out_dir(args)
    sources = [cfg.source]
    if cfg.source.family is ModeFamily.BG:
        sources.append(ModeSpec(family=ModeFamily.LG, ell=cfg.source.ell,
                                w0=cfg.source.w0, wavelength=cfg.source.wavelength))
    lines = ["family,z,fidelity,transmitted_power,on_axis_intensity_ratio"]
    for src in sources:
        rows = selfheal_scan(src, cfg.selfheal.label, cfg.selfheal.obstacle,
                             list(cfg.selfheal.z_stations), cfg.grid, cfg.detection)
        for z, fid, power, axial in rows:
            lines.append(f"{src.family.value},{z:.6g},{fid:.8g},{power:.8g},{axial:.8g}")
    csv_path = out / "selfheal_scan.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    if "pgm" in cfg.run.outputs:
        _write_selfheal_snapshots(cfg, out)
    return EXIT_OK


def _write_selfheal_snapshots(cfg: RunConfig, out: Path) -> None:
    base = heralded_input(cfg.source, cfg.grid)
    ell = abs(cfg.source.ell) or 1
    f0 = prepare_state(cfg.selfheal.label, base, ell)
    obs = cfg.selfheal.obstacle
    for z in cfg.selfheal.z_stations:
        chan = ChannelSpec(length=z, obstacles=(obs,), station_z=obs.z)
        f = transmit_to_station(f0, chan, check_band_limit=False)
        if chan.decoding_distance > 0:
            f = propagate(f, chan.decoding_distance, check_band_limit=False)
        write_pgm(out / f"selfheal_{cfg.source.family.value.lower()}_z{z:.4f}.pgm",
                  f.intensity(), bit_depth=16)


def cmd_info(args) -> int:
    cfg = _load(args)
    src = cfg.source
    print(f"grid: n={cfg.grid.n}, extent={cfg.grid.extent * 1e3:.3f} mm, "
          f"spacing={cfg.grid.spacing * 1e6:.3f} um")
    print(f"source: {src.family.value}, ell={src.ell}, w0={src.w0 * 1e3:.4f} mm, "
          f"wavelength={src.wavelength * 1e9:.1f} nm, k_r={src.k_r:.1f} rad/m")
    if src.family is ModeFamily.BG and src.k_r > 0:
        z_max = nondiffracting_distance(src)
        print(f"z_max (non-diffracting range): {z_max:.4f} m")
    radii = sorted({o.radius for s in cfg.scenarios for o in s.channel.obstacles})
    if cfg.selfheal is not None:
        radii = sorted(set(radii) | {cfg.selfheal.obstacle.radius})
    for r in radii:
        if src.family is ModeFamily.BG and src.k_r > 0:
            z_min = shadow_length(r, src)
            print(f"obstacle R={r * 1e6:.0f} um: z_min={z_min:.4f} m, "
                  f"full reconstruction at {2 * z_min:.4f} m")
        else:
            print(f"obstacle R={r * 1e6:.0f} um: no shadow-length formula for LG (k_r=0)")
    for s in cfg.scenarios:
        print(f"scenario {s.name}: length={s.channel.length} m, "
              f"station_z={s.channel.station_z} m, L={s.channel.decoding_distance} m, "
              f"obstacles={[(o.radius, o.z) for o in s.channel.obstacles]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bgqkd",
        description="Self-healing structured-light QKD simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in [("scattering", cmd_scattering), ("security", cmd_security),
                     ("selfheal-scan", cmd_selfheal_scan), ("info", cmd_info)]:
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to a scenario YAML file")
        p.add_argument("--preset", help=f"built-in preset name ({', '.join(preset_names())})")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        p.add_argument("--out-dir", default="out", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="parallel scenarios")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error at {exc.path}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
