"""Command-line interface for the lattice-loss simulator.

Subcommands mirror the library modules: decay-analytic, kmc, kmc-stats,
evolve, effective-compare, bands, scatter, zeno-dim, validate.  Every run
writes a metadata header (parameters, seed, artifact version) with its data;
identical parameters and seed give byte-identical data sections.  Exit codes:
0 success, 1 numerical failure (diagnostic on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import output
from .bands import (
    bloch_vs_ring_oracle,
    build_bloch_matrix,
    compute_bands,
    enumerate_internal_states,
)
from .decay import hierarchy_oracle, mott_density
from .engine import (
    BlockDensityMatrix,
    ModelParams,
    SectorState,
    basis_state,
    evolve_pure_cascade,
    integrate_master,
    make_flat_state_I,
    make_flat_state_II,
    mott_state,
    run_mcwf,
    state_from_amplitudes,
)
from .kmc import ensemble_density, stationary_statistics
from .lattice import FockConfiguration, LatticeSpec, count_zeno_states
from .scattering import make_wave_packet, run_collision
from .zeno import build_effective_model, integrate_effective, verify_dissipator_spectrum


def parse_initial(text: str, spec: LatticeSpec, J: float = 1.0) -> SectorState:
    """Initial-state specifier: mott | flat-I:j | flat-II:j | file:PATH."""
    if text == "mott":
        return mott_state(spec)
    if text.startswith("flat-I:"):
        return make_flat_state_I(spec, int(text.split(":", 1)[1]), J=J)
    if text.startswith("flat-II:"):
        return make_flat_state_II(spec, int(text.split(":", 1)[1]), J=J)
    if text.startswith("file:"):
        with open(text.split(":", 1)[1]) as fh:
            triples = json.load(fh)
        pairs = [
            (FockConfiguration.from_bitstring(bits), complex(re, im))
            for bits, re, im in triples
        ]
        state = state_from_amplitudes(spec, pairs)
        return state.normalized()
    if set(text) <= {"0", "1"}:
        return basis_state(spec, FockConfiguration.from_bitstring(text))
    raise ValueError(f"cannot parse initial state {text!r}")


def _lattice(args) -> LatticeSpec:
    return LatticeSpec(args.sites, args.R, boundary=args.boundary)


def _grid(args) -> np.ndarray:
    return np.linspace(0.0, args.tmax, args.points)


def cmd_decay_analytic(args) -> int:
    t = _grid(args)
    analytic = mott_density(args.gamma, t)
    hier = hierarchy_oracle(args.gamma, t, truncation_order=20)
    rows = np.column_stack([t, analytic, hier.density])
    output.write_csv(
        args.out,
        {"subcommand": "decay-analytic", "gamma": args.gamma,
         "tmax": args.tmax, "points": args.points},
        ["t", "p_analytic", "p_hierarchy_k20"],
        rows,
    )
    return 0


def cmd_kmc(args) -> int:
    spec = _lattice(args)
    t = _grid(args)
    series = ensemble_density(
        spec, args.gamma, args.trajectories, t, seed=args.seed
    )
    rows = np.column_stack([series.times, series.p_mean, series.p_stderr])
    output.write_csv(
        args.out,
        {"subcommand": "kmc", "sites": spec.n_sites, "R": spec.critical_distance,
         "boundary": spec.boundary, "gamma": args.gamma,
         "trajectories": args.trajectories, "seed": args.seed, "tmax": args.tmax},
        ["t", "p_mean", "p_stderr"],
        rows,
    )
    return 0


def cmd_kmc_stats(args) -> int:
    spec = _lattice(args)
    stats = stationary_statistics(spec, args.gamma, args.trajectories, seed=args.seed)
    output.write_json(
        args.out,
        {"subcommand": "kmc-stats", "sites": spec.n_sites,
         "R": spec.critical_distance, "boundary": spec.boundary,
         "gamma": args.gamma, "trajectories": args.trajectories, "seed": args.seed},
        {
            "species_fractions": stats.species_fractions,
            "species_counts": stats.species_counts,
            "size_distribution": {str(k): v for k, v in stats.size_distribution.items()},
            "mean_stationary_density": stats.mean_density,
            "density_stderr": stats.density_stderr,
        },
    )
    return 0


def cmd_evolve(args) -> int:
    spec = _lattice(args)
    t = _grid(args)
    params = ModelParams(spec, gamma=args.gamma, J=args.J, V=args.V)
    psi0 = parse_initial(args.initial, spec, J=args.J)
    if args.method == "exact":
        res = evolve_pure_cascade(params, psi0, t)
        series = res.series
    elif args.method == "mcwf":
        series = run_mcwf(
            params, psi0, t, n_trajectories=args.trajectories, seed=args.seed
        )
    else:  # exact-dense: reference path through the block density matrix
        res = integrate_master(params, BlockDensityMatrix.from_pure(psi0), t)
        series = res.series
    N = spec.n_sites
    rows = np.column_stack([series.times, series.site_density, series.total_density])
    output.write_csv(
        args.out,
        {"subcommand": "evolve", "sites": N, "R": spec.critical_distance,
         "boundary": spec.boundary, "gamma": args.gamma, "J": args.J, "V": args.V,
         "initial": args.initial, "method": args.method, "seed": args.seed,
         "trajectories": args.trajectories},
        ["t"] + [f"n_{j}" for j in range(N)] + ["p"],
        rows,
    )
    return 0


def cmd_effective_compare(args) -> int:
    spec = _lattice(args)
    t = _grid(args)
    params = ModelParams(spec, gamma=args.gamma, J=args.J)
    psi0 = parse_initial(args.initial, spec, J=args.J)
    full = evolve_pure_cascade(params, psi0, t).series
    model = build_effective_model(params, psi0.sector.boson_count)
    eff = integrate_effective(model, psi0, t)
    diff = np.max(np.abs(full.site_density - eff.site_density), axis=1)
    N = spec.n_sites
    rows = np.column_stack(
        [t, full.site_density, eff.site_density,
         full.total_density, eff.total_density, diff]
    )
    cols = (
        ["t"]
        + [f"n_{j}_full" for j in range(N)]
        + [f"n_{j}_eff" for j in range(N)]
        + ["p_full", "p_eff", "max_site_diff"]
    )
    output.write_csv(
        args.out,
        {"subcommand": "effective-compare", "sites": N,
         "R": spec.critical_distance, "gamma": args.gamma, "J": args.J,
         "initial": args.initial, "tmax": args.tmax},
        cols,
        rows,
    )
    print(f"max |full - effective| site density: {diff.max():.6g}")
    return 0


KIND_MAP = {"I": "type_one", "II": "type_two", "auto": "auto"}


def cmd_bands(args) -> int:
    basis = enumerate_internal_states(args.R, args.bosons, kind=KIND_MAP[args.kind])
    bloch = build_bloch_matrix(basis, J=args.J, V=args.V)
    bs = compute_bands(bloch, q_points=args.qpoints)
    output.write_json(
        args.out,
        {"subcommand": "bands", "bosons": args.bosons, "R": args.R,
         "kind": args.kind, "J": args.J, "V": args.V, "qpoints": args.qpoints},
        {
            "q_grid": list(bs.q_grid),
            "bands": [list(bs.bands[:, b]) for b in range(bs.bands.shape[1])],
            "flat_flags": [bool(f) for f in bs.flat_flags],
            "flatness": list(bs.flatness),
            "crossings": [[q, int(b1), int(b2)] for q, (b1, b2) in bs.crossings],
            "basis_states": [list(s) for s in basis.states],
        },
    )
    return 0


def cmd_scatter(args) -> int:
    spec = _lattice(args)
    t = _grid(args)
    packet = make_wave_packet(spec, args.packet_center, args.q0, args.sigma)
    complex_sites = [int(x) for x in args.complex_pos.split(",") if x != ""]
    rep = run_collision(
        spec, packet, complex_sites, gamma=args.gamma, t_grid=t,
        method=args.method, J=args.J,
    )
    N = spec.n_sites
    rows = np.column_stack(
        [rep.series.times, rep.series.site_density, rep.series.total_density]
    )
    output.write_csv(
        args.out,
        {"subcommand": "scatter", "sites": N, "R": spec.critical_distance,
         "boundary": spec.boundary, "gamma": args.gamma, "q0": args.q0,
         "sigma": args.sigma, "packet_center": args.packet_center,
         "complex_pos": args.complex_pos, "method": args.method,
         "reflected_weight": rep.reflected_weight,
         "transmitted_weight": rep.transmitted_weight,
         "incoming_momentum": rep.incoming_momentum,
         "outgoing_momentum": rep.outgoing_momentum,
         "complex_centroid_drift": rep.complex_centroid_drift},
        ["t"] + [f"n_{j}" for j in range(N)] + ["p"],
        rows,
    )
    print(
        f"reflected {rep.reflected_weight:.4f}  transmitted "
        f"{rep.transmitted_weight:.4f}  q_in {rep.incoming_momentum:+.4f}  "
        f"q_out {rep.outgoing_momentum:+.4f}  target drift "
        f"{rep.complex_centroid_drift:.4f}"
    )
    return 0


def cmd_zeno_dim(args) -> int:
    print(count_zeno_states(_lattice(args)))
    return 0


def cmd_validate(args) -> int:
    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
        if not ok:
            failures += 1

    # dissipator spectral structure
    params = ModelParams(LatticeSpec(10, 3), gamma=5.0, J=1.0)
    cases = verify_dissipator_spectrum(params, 3, max_cases=30)
    worst = max(c.residual for c in cases)
    defect = max(max(c.proportionality_defect, c.transfer_norm) for c in cases)
    check("dissipator-spectrum", worst < 1e-12 and defect < 1e-12,
          f"max residual {worst:.2e}")

    # Bloch construction against direct ring diagonalization
    for m, R, n in ((2, 3, 12), (2, 4, 12), (4, 4, 14)):
        kind = "type_one" if m <= R else "type_two"
        if (m, R) == (4, 4):
            kind = "type_two"
        basis = enumerate_internal_states(R, m, kind=kind)
        rep = bloch_vs_ring_oracle(basis, n)
        check(f"bloch-vs-ring m={m} R={R} N={n}", rep.max_residual < 1e-9,
              f"residual {rep.max_residual:.2e}")

    # unraveling equivalence on a small instance
    spec = LatticeSpec(6, 2)
    params = ModelParams(spec, gamma=4.0, J=1.0)
    t = np.linspace(0, 1.0, 5)
    mc = run_mcwf(params, mott_state(spec), t, n_trajectories=300, seed=7)
    exact = integrate_master(params, BlockDensityMatrix.from_pure(mott_state(spec)), t)
    dev = np.abs(mc.site_density - exact.series.site_density)
    ok = bool(np.all(dev <= 4 * np.maximum(mc.site_stderr, 1e-12) + 1e-9))
    check("unraveling-equivalence", ok, f"max deviation {dev.max():.3e}")

    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zenolattice",
        description="Hard-core lattice bosons with distance-selective pair loss",
    )
    parser.add_argument("--config", help="flat key=value file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def lattice_flags(p, sites_default=None):
        p.add_argument("--sites", type=int, required=sites_default is None,
                       default=sites_default)
        p.add_argument("--R", type=int, required=True)
        p.add_argument("--boundary", choices=["periodic", "open"],
                       default="periodic")

    p = sub.add_parser("decay-analytic", help="closed-form decay plus hierarchy oracle")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decay_analytic)

    p = sub.add_parser("kmc", help="stochastic loss-stage ensemble density")
    lattice_flags(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--trajectories", type=int, required=True)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kmc)

    p = sub.add_parser("kmc-stats", help="stationary-state species census")
    lattice_flags(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--trajectories", type=int, required=True)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kmc_stats)

    p = sub.add_parser("evolve", help="exact or trajectory quantum evolution")
    lattice_flags(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--V", type=float, default=0.0)
    p.add_argument("--initial", required=True,
                   help="mott | flat-I:j | flat-II:j | file:PATH | bitstring")
    p.add_argument("--method", choices=["exact", "exact-dense", "mcwf"],
                   default="exact")
    p.add_argument("--trajectories", type=int, default=500)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("effective-compare",
                       help="projected dynamics against the full engine")
    lattice_flags(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--initial", required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_effective_compare)

    p = sub.add_parser("bands", help="single-complex dispersion relations")
    p.add_argument("--bosons", type=int, required=True)
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--kind", choices=["I", "II", "auto"], default="auto")
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--V", type=float, default=0.0)
    p.add_argument("--qpoints", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("scatter", help="wave packet against an immobile complex")
    lattice_flags(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--q0", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--packet-center", type=float, required=True)
    p.add_argument("--complex-pos", required=True,
                   help="comma-separated complex sites, e.g. 16,17")
    p.add_argument("--method", choices=["full", "zeno"], default="full")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, default=71)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("zeno-dim", help="dimension of the pair-free subspace")
    lattice_flags(p)
    p.set_defaults(func=cmd_zeno_dim)

    p = sub.add_parser("validate", help="run the oracle suite")
    p.set_defaults(func=cmd_validate)

    return parser


def _apply_config(parser, argv):
    """Load defaults from a flat key=value file; explicit flags still win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    if not rest:
        return rest
    command = rest[0]
    for action in parser._subparsers._group_actions[0].choices[command]._actions:
        if action.dest in values:
            raw = values[action.dest]
            action.default = action.type(raw) if action.type else raw
            action.required = False
    return rest


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
    except (OSError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
