"""Command-line driver: configuration, pipelines and file output.

Exit codes: 0 success, 2 fixed point not converged, 3 missing input file,
4 a module-level verdict failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .newton import build_L0, certify, solve_fixed_point
from .pairs import PHI_DISK, PHI_EXT_DISK, PSI_DISK, PSI_EXT_DISK, FactorPair, golden_factor, residuals
from .quasiarc import arc_points, partition_dynamical, partition_model, square_root_domain
from .series import Disk, TaylorDisk
from .spectral import cone_bounds, cone_invariance_check, power_iteration, spectrum

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_MISSING_INPUT = 3
EXIT_VERDICT = 4

OUT_ENV = "SIEGEL_RENORM_OUT"
FIXPOINT_FILE = "fixpoint.json"


@dataclass(frozen=True)
class RunConfig:
    n1: int = 40
    n2: int = 50
    tol: float = 1e-10
    max_iters: int = 25
    seed: int = 0
    workers: int = 1
    level: int = 3
    depth: int = 5
    resolution: int = 257
    delta: float = 1e-6
    out: str = "out"
    dump_steps: bool = False
    phi_center: tuple[float, float] = (PHI_DISK.center.real, PHI_DISK.center.imag)
    phi_radius: float = PHI_DISK.radius
    psi_center: tuple[float, float] = (PSI_DISK.center.real, PSI_DISK.center.imag)
    psi_radius: float = PSI_DISK.radius
    phi_ext_center: tuple[float, float] = (PHI_EXT_DISK.center.real, PHI_EXT_DISK.center.imag)
    phi_ext_radius: float = PHI_EXT_DISK.radius
    psi_ext_radius: float = PSI_EXT_DISK.radius

    @property
    def phi_disk(self) -> Disk:
        return Disk(complex(*self.phi_center), self.phi_radius)

    @property
    def psi_disk(self) -> Disk:
        return Disk(complex(*self.psi_center), self.psi_radius)

    @classmethod
    def from_file(cls, path: Path) -> RunConfig:
        data = json.loads(path.read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key in ("phi_center", "psi_center", "phi_ext_center"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


# serialisation


def fmt(x: float) -> str:
    """Full 17-significant-digit decimal form."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(obj) -> str:
    """JSON text with every float written by ``fmt``; keys keep insertion order."""
    if isinstance(obj, dict):
        return "{" + ", ".join(json.dumps(str(k)) + ": " + dumps(v) for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag])
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def disk_to_dict(f: TaylorDisk) -> dict:
    c = f.domain.center
    return {"center": [c.real, c.imag], "radius": f.domain.radius, "coeffs": [[z.real, z.imag] for z in f.coeffs]}


def disk_from_dict(data: dict) -> TaylorDisk:
    coeffs = np.array([complex(re, im) for re, im in data["coeffs"]])
    return TaylorDisk(Disk(complex(*data["center"]), float(data["radius"])), coeffs)


def pair_to_dict(p: FactorPair) -> dict:
    return {"phi": disk_to_dict(p.phi), "psi": disk_to_dict(p.psi)}


def pair_from_dict(data: dict) -> FactorPair:
    return FactorPair(disk_from_dict(data["phi"]), disk_from_dict(data["psi"]))


def write_json(path: Path, obj) -> None:
    path.write_text(dumps(obj) + "\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


# commands


class MissingInput(Exception):
    pass


def _load_fixpoint(out: Path) -> FactorPair:
    path = out / FIXPOINT_FILE
    if not path.exists():
        raise MissingInput(f"{path} not found; run the fixpoint command first")
    return pair_from_dict(json.loads(path.read_text()))


def cmd_fixpoint(cfg: RunConfig, out: Path) -> int:
    start = FactorPair(golden_factor(cfg.phi_disk, cfg.n1), golden_factor(cfg.psi_disk, cfg.n2))
    res = solve_fixed_point(
        cfg.n1, cfg.n2, max_iters=cfg.max_iters, tol=cfg.tol, workers=cfg.workers, start=start, keep_history=cfg.dump_steps
    )
    if cfg.dump_steps:
        steps_dir = out / "steps"
        steps_dir.mkdir(exist_ok=True)
        for i, q in enumerate(res.history, 1):
            write_json(steps_dir / f"step_{i:03d}.json", pair_to_dict(q))
    r = residuals(res.pair)
    report = {
        "converged": res.converged,
        "iterations": res.iterations,
        "steps": res.steps,
        "lambda": res.lam,
        "residuals": {"r0": r.r0, "r2": r.r2, "rnorm": r.rnorm},
    }
    if not res.converged:
        report["status"] = "not converged"
        write_json(out / "fixpoint_diagnostic.json", report)
        print("not converged", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    write_json(out / FIXPOINT_FILE, pair_to_dict(res.pair))
    write_json(out / "fixpoint_report.json", report)
    print(f"lambda = {fmt(res.lam.real)} {'+' if res.lam.imag >= 0 else '-'} {fmt(abs(res.lam.imag))}i")
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    p = _load_fixpoint(out)
    L0 = build_L0(p, workers=cfg.workers)
    rep = spectrum(L0)
    write_csv(
        out / "spectrum.csv",
        ["index", "re", "im", "modulus"],
        ((i, float(z.real), float(z.imag), float(abs(z))) for i, z in enumerate(rep.eigenvalues)),
    )
    write_csv(out / "L0.csv", [f"c{j}" for j in range(L0.size)], (list(map(float, row)) for row in L0.matrix))
    unstable = [abs(z) for z in rep.unstable]
    power = math.sqrt(power_iteration(L0.matrix @ L0.matrix, seed=cfg.seed))
    summary = {
        "unstable": [complex(z) for z in rep.unstable],
        "pairing_defect": rep.pairing_defect,
        "max_stable_modulus": rep.max_stable_modulus,
        "power_iteration_modulus": power,
    }
    write_json(out / "spectrum_report.json", summary)
    ok = len(unstable) == 2 and abs(unstable[0] - unstable[1]) < 1e-6 and rep.pairing_defect < 1e-6 and rep.max_stable_modulus < 1
    return EXIT_OK if ok else EXIT_VERDICT


def cmd_certify(cfg: RunConfig, out: Path) -> int:
    p = _load_fixpoint(out)
    cert = certify(p, build_L0(p, workers=cfg.workers), cfg.delta, seed=cfg.seed)
    write_json(out / "certificate.json", cert.to_dict())
    return EXIT_OK if cert.verdict else EXIT_VERDICT


def cmd_cones(cfg: RunConfig, out: Path) -> int:
    p = _load_fixpoint(out)
    bounds = cone_bounds(p)
    inv = cone_invariance_check(p)
    write_json(out / "cones.json", {"bounds": bounds.to_dict(), "invariance": inv.to_dict()})
    return EXIT_OK if inv.ok else EXIT_VERDICT


def _partition_rows(part):
    for i, c in enumerate(part.cells):
        if c.boundary is not None:
            verts = [float(v) for z in c.boundary for v in (z.real, z.imag)]
        else:
            verts = [float(c.interval[0]), 0.0, float(c.interval[1]), 0.0]
        yield [part.level, str(c.word).replace(",", " "), c.tag, int(c.flagged), *verts]


def cmd_partition(cfg: RunConfig, out: Path) -> int:
    p = _load_fixpoint(out)
    dyn = partition_dynamical(p, cfg.level)
    model = partition_model(cfg.level)
    write_csv(out / f"partition_{cfg.level}.csv", ["level", "word", "tag", "flagged", "vertices"], _partition_rows(dyn))
    lines = []
    for c in dyn.cells:
        lines.append(
            dumps({"word": str(c.word), "tag": c.tag, "flagged": c.flagged, "skeleton": list(c.skeleton), "center": c.center})
        )
    (out / f"partition_{cfg.level}.jsonl").write_text("\n".join(lines) + "\n")
    ok = len(dyn.cells) == len(model.cells) and not any(c.flagged for c in dyn.cells)
    return EXIT_OK if ok else EXIT_VERDICT


def cmd_arc(cfg: RunConfig, out: Path) -> int:
    p = _load_fixpoint(out)
    pts = arc_points(p, cfg.depth, cfg.resolution)
    write_csv(out / f"arc_{cfg.depth}.csv", ["t", "re", "im"], ((t, float(z.real), float(z.imag)) for t, z in pts))
    return EXIT_OK


def cmd_twod(cfg: RunConfig, out: Path) -> int:
    from .renorm import rg
    from .twod import embed, pair_distance, rg_2d

    p = _load_fixpoint(out)
    s = embed(p)
    res = rg_2d(s, 2)
    one_d = rg(rg(p)[0])[0]
    fixed = pair_distance(res.pair, s)
    commute = pair_distance(res.pair, embed(one_d))
    write_json(out / "twod_A.json", res.pair.A.to_dict())
    write_json(out / "twod_B.json", res.pair.B.to_dict())
    write_json(
        out / "twod_report.json",
        {
            "level": 2,
            "ell": res.ell,
            "critical_shifts": [res.shift.c1, res.shift.c2],
            "ac_coefficients": [res.ac.a, res.ac.b, res.ac.c],
            "fixed_point_defect": fixed,
            "embedding_commutation_defect": commute,
        },
    )
    return EXIT_OK if fixed < 1e-7 and commute < 1e-8 else EXIT_VERDICT


def cmd_export_domains(cfg: RunConfig, out: Path) -> int:
    disks = {
        "phi": cfg.phi_disk,
        "psi": cfg.psi_disk,
        "phi_ext": Disk(complex(*cfg.phi_ext_center), cfg.phi_ext_radius),
        "psi_ext": Disk(cfg.psi_disk.center, cfg.psi_ext_radius),
    }
    write_json(out / "domains.json", {k: {"center": d.center, "radius": d.radius} for k, d in disks.items()})
    rows = []
    for name, d in disks.items():
        for z in square_root_domain(d.center, d.radius):
            rows.append([name, float(z.real), float(z.imag)])
    write_csv(out / "domains_sqrt.csv", ["domain", "re", "im"], rows)
    return EXIT_OK


COMMANDS = {
    "fixpoint": cmd_fixpoint,
    "spectrum": cmd_spectrum,
    "certify": cmd_certify,
    "cones": cmd_cones,
    "partition": cmd_partition,
    "arc": cmd_arc,
    "twod-check": cmd_twod,
    "export-domains": cmd_export_domains,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="siegel-renorm", description="Renormalization of golden-mean Siegel pairs.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path)
    parser.add_argument("--out")
    parser.add_argument("--n1", type=int)
    parser.add_argument("--n2", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--level", type=int)
    parser.add_argument("--depth", type=int)
    parser.add_argument("--max-iters", dest="max_iters", type=int)
    parser.add_argument("--dump-steps", dest="dump_steps", action="store_true", default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {k: v for k, v in vars(args).items() if k in {f.name for f in fields(RunConfig)} and v is not None}
    cfg = replace(cfg, **overrides)
    if os.environ.get(OUT_ENV):
        cfg = replace(cfg, out=os.environ[OUT_ENV])
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.config and not args.config.exists():
        print(f"config file {args.config} not found", file=sys.stderr)
        return EXIT_MISSING_INPUT
    cfg = resolve_config(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    # worker count and location do not change results, so they stay out of the record
    record = {k: v for k, v in asdict(cfg).items() if k not in ("workers", "out")}
    write_json(out / f"config_{args.command}.json", record)
    try:
        return COMMANDS[args.command](cfg, out)
    except MissingInput as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_MISSING_INPUT


if __name__ == "__main__":
    sys.exit(main())
