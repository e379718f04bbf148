"""Command-line entry point: ``qresponse {fci,respond,spectrum,verify}``.

Exit codes: 0 success, 1 failed verification, 2 configuration or input
error, 3 numerical failure, 4 refusal on a degenerate ground state.

A ``--config`` file holds ``key = value`` lines (``#`` starts a comment);
keys are long option names with or without the leading dashes, and
command-line flags override them.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateGroundStateError,
    QResponseError,
    ResourceError,
)
from .fci import GroundState, ground_state, solve_all_sectors, solve_sector, spin_sectors
from .fock import Sector, sector_dimension
from .lehmann import (
    COMPONENTS,
    DEFAULT_DELTA,
    EigenLevels,
    cross_section,
    dipole_operators,
    exact_response,
    polarizability,
)
from .model import (
    HARTREE_TO_EV,
    OneBodyOperator,
    build_hubbard_dimer,
    load_fcidump,
    load_onebody_operator,
)
from .sampling import SamplingConfig, calc_resp_funcs, required_sectors, sampled_polarizability

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC, EXIT_DEGENERATE = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# configuration


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="key = value file with defaults for any option")
    p.add_argument("--hamiltonian", type=Path, help="FCIDUMP file")
    p.add_argument("--model", choices=["hubbard-dimer"], help="built-in model instead of a file")
    p.add_argument("--t", type=float, default=1.0, help="dimer hopping")
    p.add_argument("--u", type=float, default=4.0, help="dimer on-site repulsion")
    p.add_argument("--sector", type=str, help="force the ground-state sector, e.g. 6,6")
    p.add_argument("--k-eigen", type=int, default=100, help="eigenpairs kept per sector")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--units", choices=["ha", "ev"], default="ha",
                   help="unit of frequencies and broadening on input and output")
    p.add_argument("--out", type=Path, default=Path("qresponse-out"))
    p.add_argument("--inject-fault", choices=["jw-tail"], help=argparse.SUPPRESS)


def _add_grid(p):
    p.add_argument("--delta", type=float, default=None, help=f"broadening (default {DEFAULT_DELTA} Ha)")
    p.add_argument("--omega-min", type=float, default=0.0)
    p.add_argument("--omega-max", type=float, default=2.0)
    p.add_argument("--omega-step", type=float, default=0.01)
    p.add_argument("--n-meas", type=int, default=10_000, help="shots per channel")
    p.add_argument("--n-meas-override", action="append", default=[], metavar="FAMILY=N",
                   help="per-channel-family shot count (repeatable)")
    p.add_argument("--mode", choices=["exact", "eigenbasis", "circuit"], default="exact",
                   help="exact Lehmann sums, or sampling with eigenbasis / circuit probabilities")
    p.add_argument("--with-exact", action="store_true", help="also write the exact curve when sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qresponse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("fci", help="ground state and lowest eigenvalues")
    _add_common(p)
    p.set_defaults(k_eigen=1)
    p = sub.add_parser("respond", help="charge/spin response functions")
    _add_common(p)
    _add_grid(p)
    p = sub.add_parser("spectrum", help="photoabsorption cross section")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--dipoles", type=Path, help="one-body operator file with x, y, z labels")
    p.add_argument("--bond", type=float, default=1.4, help="dimer site separation (bohr) for its dipole")
    p = sub.add_parser("verify", help="run the built-in invariant suites")
    _add_common(p)
    p.add_argument("--quick", action="store_true", help="fewer randomized trials")
    return parser


def read_config_file(path: Path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    if not args.config.is_file():
        raise ConfigurationError(f"config file {args.config} not found")
    values = read_config_file(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        if key not in actions or key in ("config", "help"):
            raise ConfigurationError(f"unknown config key {key!r} for '{args.command}'")
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(act, argparse._AppendAction):
            defaults[key] = [v.strip() for v in raw.split(",") if v.strip()]
        else:
            try:
                val = act.type(raw) if act.type else raw
            except (TypeError, ValueError):
                raise ConfigurationError(f"config key {key}: cannot parse {raw!r}") from None
            if act.choices and val not in act.choices:
                raise ConfigurationError(f"config key {key}: {val!r} not in {list(act.choices)}")
            defaults[key] = val
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _to_ha(x, units):
    return x / HARTREE_TO_EV if units == "ev" else x


def _from_ha(x, units):
    return x * HARTREE_TO_EV if units == "ev" else x


def load_hamiltonian(args):
    if args.model and args.hamiltonian:
        raise ConfigurationError("give either --hamiltonian or --model, not both")
    if args.model == "hubbard-dimer":
        return build_hubbard_dimer(args.t, args.u)
    if args.hamiltonian is None:
        raise ConfigurationError("a Hamiltonian is required (--hamiltonian FILE or --model hubbard-dimer)")
    if not args.hamiltonian.is_file():
        raise ConfigurationError(f"Hamiltonian file {args.hamiltonian} not found")
    return load_fcidump(args.hamiltonian)


def _grid(args):
    if not args.omega_step > 0:
        raise ConfigurationError("--omega-step must be positive")
    if args.omega_max < args.omega_min:
        raise ConfigurationError("--omega-max is below --omega-min")
    n = int(np.floor((args.omega_max - args.omega_min) / args.omega_step + 1e-9)) + 1
    om = args.omega_min + args.omega_step * np.arange(n)
    delta = DEFAULT_DELTA if args.delta is None else _to_ha(args.delta, args.units)
    if not delta > 0:
        raise ConfigurationError("--delta must be positive")
    return _to_ha(om, args.units), delta


def _overrides(items):
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigurationError(f"bad --n-meas-override {item!r}, expected FAMILY=N")
        fam, n = item.split("=", 1)
        try:
            out[fam.strip()] = int(n)
        except ValueError:
            raise ConfigurationError(f"bad shot count in {item!r}") from None
    return out


def _ground(ham, args) -> GroundState:
    if args.sector:
        try:
            sec = Sector(*(int(x) for x in args.sector.split(",")))
        except (TypeError, ValueError):
            raise ConfigurationError(f"bad --sector {args.sector!r}, expected NA,NB") from None
        if sec.n_electrons != ham.n_electrons:
            raise ConfigurationError(f"sector {tuple(sec)} does not hold {ham.n_electrons} electrons")
        sol = solve_sector(ham, sec, min(2, sector_dimension(ham.n_orbs, sec)), seed=args.seed)
        gap = float(sol.energies[1] - sol.energies[0]) if sol.k_kept > 1 else np.inf
        return GroundState(sec, 0, float(sol.energies[0]), bool(gap < 1e-8), sol, gap)
    return ground_state(ham, seed=args.seed)


def _levels(ham, g, args):
    sols = solve_all_sectors(ham, required_sectors(g.sector, ham.n_orbs), args.k_eigen, seed=args.seed)
    return EigenLevels(sols)


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _label(p, c):
    return f"{p}{COMPONENTS[c]}"


def _write_response_csv(path, omegas, values, units):
    n = values.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega", "component_row", "component_col", "re_chi", "im_chi"])
        for i, om in enumerate(omegas):
            for p in range(n):
                for a in range(4):
                    for pp in range(n):
                        for b in range(4):
                            z = values[i, p, a, pp, b]
                            w.writerow([repr(float(_from_ha(om, units))), _label(p, a), _label(pp, b),
                                        repr(float(z.real)), repr(float(z.imag))])


# ---------------------------------------------------------------------------
# commands


def cmd_fci(args) -> int:
    ham = load_hamiltonian(args)
    g = _ground(ham, args)
    k = max(1, args.k_eigen)
    sol = solve_sector(ham, g.sector, min(k, sector_dimension(ham.n_orbs, g.sector)), seed=args.seed)
    report = {
        "n_orbitals": ham.n_orbs,
        "n_electrons": ham.n_electrons,
        "sector_dimensions": {f"{s.n_alpha},{s.n_beta}": sector_dimension(ham.n_orbs, s)
                              for s in spin_sectors(ham.n_orbs, ham.n_electrons)},
        "ground_sector": list(g.sector),
        "ground_energy_ha": g.energy,
        "ground_energy_ev": g.energy * HARTREE_TO_EV,
        "degenerate": g.degenerate,
        "gap_ha": g.gap if np.isfinite(g.gap) else None,
        "energies_ha": [float(e) for e in sol.energies],
        "energies_ev": [float(e) * HARTREE_TO_EV for e in sol.energies],
        "residuals": [float(r) for r in sol.residuals],
    }
    args.out.mkdir(parents=True, exist_ok=True)
    _write_json(args.out / "fci.json", report)
    e = _from_ha(g.energy, args.units)
    print(f"ground state sector {tuple(g.sector)}  E = {e:.10f} {args.units.upper()}"
          + ("  (degenerate)" if g.degenerate else ""))
    return EXIT_OK


def _sampling_config(args, omegas, delta):
    return SamplingConfig(n_meas=args.n_meas, seed=args.seed, mode=args.mode, delta=delta,
                          omegas=omegas, k_eigen=args.k_eigen, n_meas_overrides=_overrides(args.n_meas_override))


def cmd_respond(args) -> int:
    ham = load_hamiltonian(args)
    omegas, delta = _grid(args)
    g = _ground(ham, args)
    if g.degenerate:
        raise DegenerateGroundStateError(f"ground state in sector {tuple(g.sector)} is degenerate "
                                         f"(gap {g.gap:.3e} Ha); response refused")
    gs = g.solution.vector(0)
    levels = _levels(ham, g, args)
    args.out.mkdir(parents=True, exist_ok=True)
    meta = {"command": "respond", "mode": args.mode, "seed": args.seed, "delta_ha": delta,
            "units": args.units, "chi_units": "atomic", "k_eigen": args.k_eigen,
            "ground_sector": list(g.sector), "ground_energy_ha": g.energy,
            "sectors": [list(s) for s in levels.sectors], "n_bins": levels.n_bins}
    timings = {}
    t0 = time.perf_counter()
    if args.mode == "exact":
        grid = exact_response(gs, levels, g.energy, omegas, delta)
        _write_response_csv(args.out / "response.csv", omegas, grid.values, args.units)
    else:
        cfg = _sampling_config(args, omegas, delta)
        res = calc_resp_funcs(gs, levels, g.energy, cfg, with_errors=False)
        _write_response_csv(args.out / "response.csv", omegas, res.grid.values, args.units)
        meta.update({"n_meas": cfg.n_meas, "n_meas_overrides": dict(cfg.n_meas_overrides),
                     "channels": len(res.samples),
                     "sink_mass": {"|".join(map(str, k)): float(s.sink_count.sum() / s.n_meas)
                                   for k, s in res.samples.items()}})
        if args.with_exact:
            grid = exact_response(gs, levels, g.energy, omegas, delta)
            _write_response_csv(args.out / "response_exact.csv", omegas, grid.values, args.units)
    timings["respond_seconds"] = time.perf_counter() - t0
    _write_json(args.out / "response_meta.json", meta)
    _write_json(args.out / "timings.json", timings)
    print(f"wrote {args.out / 'response.csv'}")
    return EXIT_OK


def _dipoles(args, ham):
    if args.dipoles is not None:
        if not args.dipoles.is_file():
            raise ConfigurationError(f"dipole file {args.dipoles} not found")
        ops = load_onebody_operator(args.dipoles, ham.n_orbs)
        if not ops:
            raise ConfigurationError(f"no dipole data in {args.dipoles}")
        return dipole_operators(ops)
    if args.model == "hubbard-dimer":
        half = args.bond / 2
        return [OneBodyOperator("x", np.diag([-half, half])),
                OneBodyOperator("y", np.zeros((2, 2))),
                OneBodyOperator("z", np.zeros((2, 2)))]
    raise ConfigurationError("spectrum needs dipole integrals (--dipoles FILE)")


def cmd_spectrum(args) -> int:
    ham = load_hamiltonian(args)
    dip = _dipoles(args, ham)
    omegas, delta = _grid(args)
    g = _ground(ham, args)
    if g.degenerate:
        raise DegenerateGroundStateError(f"ground state in sector {tuple(g.sector)} is degenerate; "
                                         "spectrum refused")
    gs = g.solution.vector(0)
    levels = EigenLevels(solve_all_sectors(ham, [g.sector], args.k_eigen, seed=args.seed))
    t0 = time.perf_counter()
    sigma = cross_section(polarizability(dip, gs, levels, g.energy, omegas, delta), omegas)
    cols = [sigma]
    header = ["omega", "sigma_exact"]
    meta = {"command": "spectrum", "mode": args.mode, "seed": args.seed, "delta_ha": delta,
            "units": args.units, "sigma_units": "atomic", "ground_energy_ha": g.energy}
    if args.mode != "exact":
        cfg = _sampling_config(args, omegas, delta)
        sp = sampled_polarizability(dip, gs, levels, g.energy, cfg, with_errors=False)
        cols.append(sp.sigma)
        header.append("sigma_sampled")
        meta.update({"n_meas": cfg.n_meas, "channels": len(sp.samples),
                     "negative_sigma_points": sp.meta["negative_sigma_points"]})
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "spectrum.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, om in enumerate(omegas):
            w.writerow([repr(float(_from_ha(om, args.units)))] + [repr(float(c[i])) for c in cols])
    _write_json(args.out / "spectrum_meta.json", meta)
    _write_json(args.out / "timings.json", {"spectrum_seconds": time.perf_counter() - t0})
    print(f"wrote {args.out / 'spectrum.csv'}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import run_all

    results = run_all(quick=args.quick)
    report = {"passed": all(r.passed for r in results), "suites": [r.as_dict() for r in results]}
    args.out.mkdir(parents=True, exist_ok=True)
    _write_json(args.out / "verify.json", report)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<24} worst {r.worst:.3e}  tol {r.tolerance:.0e}")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


COMMANDS = {"fci": cmd_fci, "respond": cmd_respond, "spectrum": cmd_spectrum, "verify": cmd_verify}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        if args.inject_fault:
            from .qubitsim import inject_fault

            with inject_fault(args.inject_fault):
                return COMMANDS[args.command](args)
        return COMMANDS[args.command](args)
    except DegenerateGroundStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConvergenceError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QResponseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
