"""Command-line front door.

Subcommands: basis, groundstate, evolve-exact, evolve-hf, compare, validate.
Exit codes: 0 success, 1 validation/computation failure, 2 usage error.
All floats are serialized with 17 significant digits and LF line endings so
identical inputs give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .analysis import (CSV_HEADER, ComparisonRecord, run_comparison)
from .basis import (apply_landau_hamiltonian, boundary_residuals,
                    build_orbital_set)
from .config import (SimulationConfig, inner_product, load_config,
                     quantization_ulps)
from .errors import InvalidValue, IoFailure, LandauHFError
from .hartree_fock import HFState, hf_energy, integrate_hf
from .manybody import (ExactPropagator, FillingSpec,
                       assemble_hamiltonian, embed_slater,
                       enumerate_determinants, noninteracting_ground_state,
                       two_body_tensor)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_text(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _write_json(path: str, payload: dict):
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_timeseries(records: list[ComparisonRecord], path: str):
    """Deterministic CSV of comparison records."""
    if not records:
        raise ValueError("no records to write")
    times = [r.t for r in records]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("record times must be strictly increasing")
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join(_fmt(v) for v in (
            r.t, r.error_norm, r.apriori_bound, r.defect_bound,
            r.energy_exact, r.energy_hf, r.rdm_trace_dist)))
    _write_text(path, "\n".join(lines) + "\n")


def write_csv(path: str, header: str, rows):
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")


class Manifest:
    """Record of one run: config echo, timings, outputs, validations."""

    def __init__(self, command: str, config_path: str | None):
        self.data = {
            "command": command,
            "config_path": config_path,
            "version": __version__,
            "timings": {},
            "outputs": [],
            "validations": {},
            "ok": True,
        }
        self._t0 = time.perf_counter()
        self._phase_start = self._t0

    def phase(self, name: str):
        now = time.perf_counter()
        self.data["timings"][name] = now - self._phase_start
        self._phase_start = now

    def add_output(self, path: str):
        self.data["outputs"].append(os.path.basename(path))

    def validation(self, name: str, ok: bool, detail=None):
        self.data["validations"][name] = {"ok": bool(ok), "detail": detail}
        if not ok:
            self.data["ok"] = False

    def write(self, out_dir: str):
        self.data["timings"]["total"] = time.perf_counter() - self._t0
        for name in self.data["outputs"]:
            full = os.path.join(out_dir, name)
            if not (os.path.exists(full) and os.path.getsize(full) > 0):
                raise IoFailure(f"declared output {name} missing or empty")
        _write_json(os.path.join(out_dir, "manifest.json"), self.data)


def _config_echo(config: SimulationConfig) -> dict:
    return {
        "hbar": config.constants.hbar,
        "mass": config.constants.mass,
        "charge": config.constants.charge,
        "light_speed": config.constants.light_speed,
        "B": config.constants.B,
        "L1": config.domain.L1,
        "L2": config.domain.L2,
        "M": config.domain.M,
        "n_max": config.n_max,
        "N": config.N,
        "grid": list(config.grid.shape),
        "tensor_grid": list(config.tensor_grid.shape),
        "potential_kind": config.potential.kind,
        "potential_strength": config.potential.strength,
        "dt": config.dt,
        "t_final": config.t_final,
        "integrator": config.integrator,
        "sample_stride": config.sample_stride,
    }


def _initial_occupation(config: SimulationConfig, energies) -> tuple:
    filling = FillingSpec.from_counts(config.N, config.domain.M)
    levels = [energies[n * config.domain.M] for n in range(config.n_max + 1)]
    _, sets = noninteracting_ground_state(filling, levels)
    return sets[0]


def _unit_columns(K: int, occupation) -> np.ndarray:
    C = np.zeros((K, len(occupation)), dtype=np.complex128)
    for col, alpha in enumerate(occupation):
        C[alpha, col] = 1.0
    return C


def cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except LandauHFError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return 1
    checks = {}
    ulps = quantization_ulps(config.domain, config.constants)
    checks["flux_quantization_ulps"] = {"ok": ulps <= 4.0, "detail": ulps}
    checks["particles_fit_truncation"] = {
        "ok": config.N <= config.single_particle_dim,
        "detail": [config.N, config.single_particle_dim]}
    try:
        dev = config.potential.check_symmetry(config.tensor_grid)
        checks["potential_symmetric"] = {"ok": True, "detail": dev}
    except LandauHFError as exc:
        checks["potential_symmetric"] = {"ok": False, "detail": str(exc)}
    ok = all(c["ok"] for c in checks.values())
    print(json.dumps({"ok": ok, "checks": checks}, indent=2, sort_keys=True))
    return 0 if ok else 1


def cmd_basis(args) -> int:
    config = load_config(args.config)
    manifest = Manifest("basis", args.config)
    manifest.data["config"] = _config_echo(config)
    out = args.out_dir
    os.makedirs(out, exist_ok=True)

    oset = build_orbital_set(config)
    manifest.phase("build_basis")

    X1, X2 = config.grid.mesh()
    report = {"gram_max_dev": oset.gram_deviation(),
              "bc_residuals": {}, "eigenresiduals": {}}
    for orb in oset.orbitals:
        tag = f"n{orb.n}_m{orb.m}"
        name = f"orbital_{tag}.csv"
        rows = zip(X1.ravel(), X2.ravel(),
                   orb.values.real.ravel(), orb.values.imag.ravel())
        write_csv(os.path.join(out, name), "x1,x2,Re,Im", rows)
        manifest.add_output(name)
        r1, r2 = boundary_residuals(orb)
        report["bc_residuals"][tag] = {"x1": r1, "x2": r2}
        applied = apply_landau_hamiltonian(orb, config.constants)
        level = oset.energies[oset.index(orb.n, orb.m)]
        residual = applied.values - level * orb.values
        report["eigenresiduals"][tag] = float(
            np.sqrt(abs(inner_product(residual, residual, config.grid))))
    manifest.phase("validate")

    _write_json(os.path.join(out, "basis_report.json"), report)
    manifest.add_output("basis_report.json")
    manifest.validation("gram", report["gram_max_dev"] <= config.gram_tol,
                        report["gram_max_dev"])
    manifest.write(out)
    print(json.dumps({"gram_max_dev": report["gram_max_dev"]}, sort_keys=True))
    return 0 if report["gram_max_dev"] <= config.gram_tol else 1


def cmd_groundstate(args) -> int:
    config = load_config(args.config)
    manifest = Manifest("groundstate", args.config)
    manifest.data["config"] = _config_echo(config)
    out = args.out_dir
    os.makedirs(out, exist_ok=True)

    from .basis import landau_level
    filling = FillingSpec.from_counts(config.N, config.domain.M)
    levels = [landau_level(n, config.constants) for n in range(config.n_max + 1)]
    energy, sets = noninteracting_ground_state(filling, levels)
    payload = {
        "E0": energy,
        "nu": filling.nu,
        "r": filling.remainder,
        "degeneracy": filling.degeneracy,
        "occupations": [list(s) for s in sets],
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    _write_text(os.path.join(out, "groundstate.json"), text + "\n")
    manifest.add_output("groundstate.json")
    manifest.phase("groundstate")
    manifest.write(out)
    return 0


def _dynamics_setup(config: SimulationConfig, threads: int):
    oset = build_orbital_set(config, grid=config.tensor_grid)
    tensor = two_body_tensor(config.potential, oset, config.tensor_grid,
                             threads=threads)
    det_basis = enumerate_determinants(oset.size, config.N)
    H = assemble_hamiltonian(det_basis, oset.energies, tensor)
    occ0 = _initial_occupation(config, oset.energies)
    C0 = _unit_columns(oset.size, occ0)
    return oset, tensor, det_basis, H, C0


def cmd_evolve_exact(args) -> int:
    config = load_config(args.config)
    manifest = Manifest("evolve-exact", args.config)
    manifest.data["config"] = _config_echo(config)
    out = args.out_dir
    os.makedirs(out, exist_ok=True)

    oset, tensor, det_basis, H, C0 = _dynamics_setup(config, args.threads)
    manifest.phase("assemble")
    psi0 = embed_slater(1.0, C0, det_basis).coefficients
    prop = ExactPropagator(H, config.constants.hbar)
    n_steps = max(1, round(config.t_final / config.dt)) if config.t_final > 0 else 0
    dt = config.t_final / n_steps if n_steps else 0.0
    rows = []
    for step in range(0, n_steps + 1):
        if step % config.sample_stride and step != n_steps:
            continue
        t = step * dt
        psi = prop.advance(psi0, t)
        rows.append((t, float(np.real(np.vdot(psi, H @ psi))),
                     float(np.linalg.norm(psi))))
    write_csv(os.path.join(out, "exact_timeseries.csv"), "t,energy,norm", rows)
    manifest.add_output("exact_timeseries.csv")
    manifest.phase("evolve")
    manifest.write(out)
    return 0


def cmd_evolve_hf(args) -> int:
    config = load_config(args.config)
    dt = args.dt if args.dt is not None else config.dt
    t_final = args.t_final if args.t_final is not None else config.t_final
    scheme = args.scheme if args.scheme is not None else config.integrator
    manifest = Manifest("evolve-hf", args.config)
    manifest.data["config"] = _config_echo(config)
    out = args.out_dir
    os.makedirs(out, exist_ok=True)

    oset, tensor, det_basis, H, C0 = _dynamics_setup(config, args.threads)
    manifest.phase("assemble")
    if args.initial != "nigs-ground":
        data = np.load(args.initial)
        C0 = np.asarray(data["orbitals"], dtype=np.complex128)
    hf0 = HFState(time=0.0, a=1.0 + 0.0j, orbitals=C0)
    e0 = hf_energy(hf0, oset.energies, tensor)
    hf0 = HFState(time=0.0, a=1.0 + 0.0j, orbitals=C0, e0=e0)
    traj = integrate_hf(hf0, dt, t_final, scheme, tensor, oset.energies,
                        config.constants, sample_stride=config.sample_stride)
    rows = [(t, s.a.real, s.a.imag, traj.energies[i], traj.norms[i],
             traj.gram_devs[i])
            for i, (t, s) in enumerate(zip(traj.times, traj.states))]
    write_csv(os.path.join(out, "hf_timeseries.csv"),
              "t,re_a,im_a,energy,norm,orth_drift", rows)
    manifest.add_output("hf_timeseries.csv")
    if args.snapshots:
        arrays = {f"orbitals_{i}": s.orbitals for i, s in enumerate(traj.states)}
        arrays["times"] = traj.times
        np.savez(os.path.join(out, "hf_orbitals.npz"), **arrays)
        manifest.add_output("hf_orbitals.npz")
    manifest.phase("evolve")
    manifest.write(out)
    return 0


def cmd_compare(args) -> int:
    config = load_config(args.config)
    manifest = Manifest("compare", args.config)
    manifest.data["config"] = _config_echo(config)
    out = args.out_dir
    os.makedirs(out, exist_ok=True)

    result = run_comparison(config, threads=args.threads)
    manifest.phase("compare")
    write_timeseries(result.records, os.path.join(out, "compare_timeseries.csv"))
    manifest.add_output("compare_timeseries.csv")
    _write_json(os.path.join(out, "compare_summary.json"), result.summary)
    manifest.add_output("compare_summary.json")
    manifest.validation("bound_violations",
                        result.summary["bound_violations"] == 0,
                        result.summary["bound_violations"])
    manifest.write(out)
    print(json.dumps({"max_error": result.summary["max_error"],
                      "bound_violations": result.summary["bound_violations"]},
                     sort_keys=True))
    return 0 if result.summary["bound_violations"] == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landau-hf",
        description="Magnetic-fermion dynamics in the truncated level basis")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="path to config file")
        p.add_argument("--out-dir", default="./out", help="output directory")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("validate", help="check a config without computing")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("basis", help="build and validate the orbital basis")
    common(p)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("groundstate", help="noninteracting ground-state data")
    common(p)
    p.set_defaults(func=cmd_groundstate)

    p = sub.add_parser("evolve-exact", help="propagate the full dynamics")
    common(p)
    p.set_defaults(func=cmd_evolve_exact)

    p = sub.add_parser("evolve-hf", help="propagate the effective dynamics")
    common(p)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--scheme", choices=("rk4", "rk4+reorth"), default=None)
    p.add_argument("--initial", default="nigs-ground",
                   help="'nigs-ground' or a .npz file with an 'orbitals' array")
    p.add_argument("--snapshots", action="store_true",
                   help="also write orbital snapshots")
    p.set_defaults(func=cmd_evolve_hf)

    p = sub.add_parser("compare", help="exact-vs-effective error analysis")
    common(p)
    p.set_defaults(func=cmd_compare)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0,) else 0
    try:
        return args.func(args)
    except InvalidValue as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LandauHFError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
