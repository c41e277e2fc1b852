"""Acceptance suite: one test per acceptance criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Three criteria contain clauses that the implemented physics provably
cannot satisfy as stated (documented in detail in the repository notes and in
the failure messages below); they are asserted literally and fail honestly:

* effective-equation fidelity: the effective/full deviation converges at
  second order in 1/gamma (measured ratio ~0.26 per doubling), not first
  order, so "halves within 30%" cannot hold;
* localized-state decay timescale: the localized states decay through
  several channels (initial rates 2 Gamma and 8 Gamma) with strong
  subsequent slowing, so no single fitted rate lies within 50% of Gamma;
* scattering reflected weight under the full master equation: the
  adjacent-pair target itself decays at 4 Gamma = 0.08 J, so over the
  collision window only ~73% of the weight ends up reflected (the
  Zeno-projected run reflects > 0.999 and passes every other clause).
"""

import itertools
import math

import numpy as np
import pytest

from zenolattice.bands import (
    bloch_vs_ring_oracle,
    build_bloch_matrix,
    compute_bands,
    enumerate_internal_states,
    interaction_deformation,
    scan_flat_bands,
    scan_type_two_families,
)
from zenolattice.decay import mott_density
from zenolattice.engine import (
    BlockDensityMatrix,
    ModelParams,
    basis_state,
    evolve_pure_cascade,
    integrate_master,
    make_flat_state_I,
    make_flat_state_II,
    mott_state,
    run_mcwf,
)
from zenolattice.kmc import ensemble_density, stationary_statistics
from zenolattice.lattice import FockConfiguration, LatticeSpec, count_zeno_states
from zenolattice.scattering import make_wave_packet, run_collision
from zenolattice.zeno import (
    build_effective_model,
    effective_rate,
    integrate_effective,
    verify_dissipator_spectrum,
)

SEED = 20260810


def report(name, clauses):
    """Print one line per criterion and fail on any violated clause."""
    bad = [c for c, ok in clauses if not ok]
    status = "PASS" if not bad else "FAIL"
    print(f"ACCEPT {name}: {status}" + (f"  [{'; '.join(bad)}]" if bad else ""))
    assert not bad, f"{name}: violated clauses: {bad}"


def _window_centroid(site_density, n, anchor, support_len):
    offs = (np.arange(n) - anchor + (n - support_len) // 2) % n - (
        n - support_len
    ) // 2
    w = site_density / site_density.sum(axis=1)[:, None]
    return (w * offs[None, :]).sum(axis=1)


def test_c01_analytic_decay_law():
    spec = LatticeSpec(200, 3)
    t = np.linspace(0.0, 10.0, 21)
    series = ensemble_density(spec, 1.0, 10_000, t, seed=SEED)
    expect = mott_density(1.0, t)
    dev = np.abs(series.p_mean - expect)
    ok_curve = bool(np.all(dev <= 3 * np.maximum(series.p_stderr, 1e-12) + 1e-12))
    stat = series.p_mean[-1]
    ok_stat = abs(stat - math.exp(-2)) <= 3 * series.p_stderr[-1]
    report("c01 analytic-decay-law", [
        (f"p(t) within 3 sigma of closed form (max dev {dev.max():.2e})", ok_curve),
        (f"stationary {stat:.5f} vs e^-2 within 3 sigma", ok_stat),
    ])


def test_c02_r_independence():
    t = np.linspace(0.0, 10.0, 21)
    expect = mott_density(1.0, t)
    clauses = []
    for r in (2, 5):
        spec = LatticeSpec(200, r)
        series = ensemble_density(spec, 1.0, 10_000, t, seed=SEED + r)
        dev = np.abs(series.p_mean - expect)
        ok = bool(np.all(dev <= 3 * np.maximum(series.p_stderr, 1e-12) + 1e-12))
        clauses.append((f"R={r} matches the R-free law (max dev {dev.max():.2e})", ok))
    report("c02 r-independence", clauses)


def test_c03_zeno_dimension_oracle():
    def independent_count(n, r):
        # subset arithmetic, no shared code with the pair-mask implementation
        count = 0
        for m in range(n + 1):
            for sites in itertools.combinations(range(n), m):
                if all((b - a) % n != r and (a - b) % n != r
                       for a in sites for b in sites if a != b):
                    count += 1
        return count

    c63 = count_zeno_states(LatticeSpec(6, 3))
    c62 = count_zeno_states(LatticeSpec(6, 2))
    report("c03 zeno-dimension-oracle", [
        (f"count(6,3)={c63} == 27", c63 == 27),
        (f"count(6,2)={c62} == 16", c62 == 16),
        ("independent enumeration agrees (6,3)", independent_count(6, 3) == c63),
        ("independent enumeration agrees (6,2)", independent_count(6, 2) == c62),
    ])


def test_c04_dispersion_closed_forms():
    clauses = []

    b23 = enumerate_internal_states(3, 2, kind="type_one")
    bs23 = compute_bands(build_bloch_matrix(b23, J=1.0), 256)
    dev23 = max(
        np.max(np.abs(bs23.bands[k] - np.sort([2 * math.cos(q / 2),
                                               -2 * math.cos(q / 2)])))
        for k, q in enumerate(bs23.q_grid)
    )
    clauses.append((f"m=2 R=3 bands +-2Jcos(q/2), dev {dev23:.1e}", dev23 < 1e-10))
    clauses.append(("m=2 R=3 crossing at q=pi",
                    any(abs(q - math.pi) < 1e-12 for q, _ in bs23.crossings)))

    b24 = enumerate_internal_states(4, 2, kind="type_one")
    bs24 = compute_bands(build_bloch_matrix(b24, J=1.0), 256)
    c = 2 * math.sqrt(2)
    dev24 = max(
        np.max(np.abs(bs24.bands[k] - np.sort([c * math.cos(q / 2), 0.0,
                                               -c * math.cos(q / 2)])))
        for k, q in enumerate(bs24.q_grid)
    )
    clauses.append((f"m=2 R=4 bands, dev {dev24:.1e}", dev24 < 1e-10))
    clauses.append((f"m=2 R=4 flat band, flatness {bs24.flatness[1]:.1e}",
                    bool(bs24.flat_flags[1]) and bs24.flatness[1] < 1e-8))

    b44 = enumerate_internal_states(4, 4, kind="type_two")
    bs44 = compute_bands(build_bloch_matrix(b44, J=1.0), 256)
    dev44 = 0.0
    for k, q in enumerate(bs44.q_grid):
        inner = math.sqrt(5 + 4 * math.cos(q))
        expect = np.sort([0.0, math.sqrt(3 + inner), -math.sqrt(3 + inner),
                          math.sqrt(3 - inner), -math.sqrt(3 - inner)])
        dev44 = max(dev44, float(np.max(np.abs(bs44.bands[k] - expect))))
    clauses.append((f"m=4 R=4 type II closed form, dev {dev44:.1e}", dev44 < 1e-10))
    report("c04 dispersion-closed-forms", clauses)


def test_c05_flat_band_rules():
    clauses = []
    rows = scan_flat_bands([(2, R, "type_one") for R in range(2, 9)])
    ok_parity = all(row.has_flat == (row.R % 2 == 0) for row in rows)
    clauses.append(("m=2: flat iff R even (R<=8)", ok_parity))

    ratio_rows = scan_flat_bands(
        [(m, R, "type_one") for m in (2, 3, 4) for R in range(m, 9) if R % m == 0]
    )
    clauses.append(
        ("flat for all R/m integer, m in {2,3,4}",
         all(r.has_flat for r in ratio_rows))
    )

    fam = scan_type_two_families(4, 5)
    big = max(fam, key=lambda r: r.n_internal_states)
    clauses.append(
        (f"m=5 R=4 type II flat band present ({big.n_internal_states}-state family)",
         big.has_flat),
    )
    report("c05 flat-band-rules", clauses)


def test_c06_interaction_effects():
    clauses = []
    rep3 = interaction_deformation(
        enumerate_internal_states(3, 2, kind="type_one"), J=1.0, V=1.0
    )
    (q, _pair, gap), = rep3.crossing_gaps
    clauses.append((f"m=2 R=3 V=J gap at pi = {gap:.12f} (exactly V)",
                    abs(q - math.pi) < 1e-12 and abs(gap - 1.0) < 1e-10))

    rep4 = interaction_deformation(
        enumerate_internal_states(4, 2, kind="type_one"), J=1.0, V=1.0
    )
    ((_b, flatness),) = rep4.flat_deformations
    clauses.append((f"m=2 R=4 flat band deforms by {flatness:.2e} > 1e-3",
                    flatness > 1e-3))

    b44 = enumerate_internal_states(4, 4, kind="type_two")
    vmax = 0.0
    for V in (0.5, 1.0, 2.0):
        rep = interaction_deformation(b44, J=1.0, V=V, q_points=128)
        vmax = max(vmax, float(np.max(np.abs(rep.deformed.bands
                                             - rep.reference.bands))))
    clauses.append((f"m=4 R=4 type II V-independent (max shift {vmax:.1e})",
                    vmax < 1e-12))
    report("c06 interaction-effects", clauses)


def test_c07_bloch_vs_ring_oracle():
    clauses = []
    for m, R, kind, n in (
        (2, 3, "type_one", 12),
        (2, 4, "type_one", 12),
        # the 10-site extent of the m=4 complex wraps onto itself on a
        # 12-ring (its stretched state aliases with period 3), violating the
        # oracle precondition; 14 is the smallest compatible ring
        (4, 4, "type_two", 14),
    ):
        basis = enumerate_internal_states(R, m, kind=kind)
        rep = bloch_vs_ring_oracle(basis, n)
        clauses.append(
            (f"m={m} R={R} N={n}: residual {rep.max_residual:.1e}",
             rep.max_residual < 1e-9)
        )
    report("c07 bloch-vs-ring-oracle", clauses)


def test_c08_effective_equation_fidelity():
    spec = LatticeSpec(10, 3)
    t = np.linspace(0.0, 5.0, 26)
    psi = basis_state(spec, FockConfiguration.from_sites(10, [0, 1]))
    devs = {}
    for gamma in (50.0, 100.0, 200.0):
        params = ModelParams(spec, gamma=gamma, J=1.0)
        full = evolve_pure_cascade(params, psi, t)
        eff = integrate_effective(build_effective_model(params, 2), psi, t)
        devs[gamma] = float(np.max(np.abs(full.series.site_density
                                          - eff.site_density)))
    r1 = devs[100.0] / devs[50.0]
    r2 = devs[200.0] / devs[100.0]
    report("c08 effective-equation-fidelity", [
        (f"max site deviation at gamma=100J: {devs[100.0]:.2e} < 0.05",
         devs[100.0] < 0.05),
        (f"deviation halves within 30% on doubling (measured ratios "
         f"{r1:.3f}, {r2:.3f}; actual convergence is second order in 1/gamma)",
         0.35 <= r1 <= 0.65 and 0.35 <= r2 <= 0.65),
    ])


def test_c09_dissipator_spectrum():
    clauses = []
    for n, m in ((10, 3), (12, 4)):
        params = ModelParams(LatticeSpec(n, 3), gamma=3.0, J=1.0)
        cases = verify_dissipator_spectrum(params, m, max_cases=40)
        singles = [c for c in cases if c.n_pairs == 1]
        doubles = [c for c in cases if c.n_pairs == 2]
        worst = max(
            max(c.residual, c.proportionality_defect, c.transfer_norm)
            for c in cases
        )
        clauses.append(
            (f"N={n}: {len(singles)} single-pair at -gamma/2, "
             f"{len(doubles)} shared-double at -gamma, worst {worst:.1e}",
             bool(singles) and bool(doubles) and worst < 1e-12)
        )
    report("c09 dissipator-spectrum", clauses)


def test_c10_localized_state_immobility():
    clauses = []
    gamma, J = 100.0, 1.0
    rate_ref = 2 * J**2 / gamma  # 0.02 J
    t = np.linspace(0.0, 75.0, 151)

    spec1 = LatticeSpec(10, 4)
    psi1 = make_flat_state_I(spec1, anchor=0, residual_tol=1e-12)
    clauses.append(("F_I is an exact H_Z eigenstate (residual < 1e-12 J)", True))
    res1 = evolve_pure_cascade(ModelParams(spec1, gamma=gamma, J=J), psi1, t)
    cent1 = _window_centroid(res1.series.site_density, 10, 0, 4)
    drift1 = float(np.max(np.abs(cent1 - cent1[0])))
    rate1 = -float(np.polyfit(t, np.log(res1.series.total_density), 1)[0])
    clauses.append((f"F_I centroid drift {drift1:.2e} < 0.1", drift1 < 0.1))
    clauses.append(
        (f"F_I fitted density rate {rate1 / rate_ref:.3f} Gamma within 50% of "
         "Gamma (multi-channel decay starts at 2 Gamma then slows)",
         0.5 * rate_ref <= rate1 <= 1.5 * rate_ref)
    )

    spec2 = LatticeSpec(12, 4)
    psi2 = make_flat_state_II(spec2, anchor=0, residual_tol=1e-12)
    clauses.append(("F_II is an exact H_Z eigenstate (residual < 1e-12 J)", True))
    res2 = evolve_pure_cascade(ModelParams(spec2, gamma=gamma, J=J), psi2, t)
    cent2 = _window_centroid(res2.series.site_density, 12, 0, 10)
    drift2 = float(np.max(np.abs(cent2 - cent2[0])))
    rate2 = -float(np.polyfit(t, np.log(res2.series.total_density), 1)[0])
    clauses.append((f"F_II centroid drift {drift2:.2e} < 0.1", drift2 < 0.1))
    clauses.append(
        (f"F_II fitted density rate {rate2 / rate_ref:.3f} Gamma within 50% "
         "of Gamma (sixteen active channels give a fast initial stage)",
         0.5 * rate_ref <= rate2 <= 1.5 * rate_ref)
    )
    report("c10 localized-state-immobility", clauses)


def test_c11_scattering_elasticity():
    spec = LatticeSpec(24, 2, boundary="open")
    packet = make_wave_packet(spec, 6.0, math.pi / 2, 2.0)
    t = np.linspace(0.0, 7.0, 36)
    full = run_collision(spec, packet, [16, 17], gamma=100.0, t_grid=t,
                         method="full")
    zeno = run_collision(spec, packet, [16, 17], gamma=100.0, t_grid=t,
                         method="zeno")
    elastic = abs(abs(full.outgoing_momentum) - abs(full.incoming_momentum)) / abs(
        full.incoming_momentum
    )
    report("c11 scattering-elasticity", [
        (f"full-equation reflected weight {full.reflected_weight:.3f} > 0.9 "
         f"(target itself decays at 4 Gamma; projected run reflects "
         f"{zeno.reflected_weight:.6f})",
         full.reflected_weight > 0.9),
        (f"|q_out|/|q_in| off by {elastic:.3%} (< 5%)", elastic < 0.05),
        (f"target displacement {full.complex_centroid_drift:.3f} < 0.1",
         full.complex_centroid_drift < 0.1),
    ])


def test_c12_unraveling_equivalence():
    spec = LatticeSpec(8, 3)
    params = ModelParams(spec, gamma=10.0, J=1.0)
    t = np.linspace(0.0, 0.6, 7)
    mc = run_mcwf(params, mott_state(spec), t, n_trajectories=2000, seed=SEED)
    exact = integrate_master(
        params, BlockDensityMatrix.from_pure(mott_state(spec)), t
    )
    dev = np.abs(mc.site_density - exact.series.site_density)
    tol = 3 * np.maximum(mc.site_stderr, 1e-12) + 1e-9
    worst = float((dev / tol).max())
    report("c12 unraveling-equivalence", [
        (f"all site densities within 3 stderr (worst ratio {worst:.2f})",
         bool(np.all(dev <= tol))),
    ])


def test_c13_stationary_species_statistics():
    spec = LatticeSpec(200, 3)
    stats = stationary_statistics(spec, 1.0, 10_000, seed=SEED)
    f = stats.species_fractions
    ordered = f["free"] > f["type_one"] > f["type_two"] > 0
    # regression baseline frozen from this implementation's first run
    sizes = stats.size_distribution
    baseline_ok = (
        abs(f["free"] - 0.712) < 0.01
        and abs(f["type_one"] - 0.264) < 0.01
        and abs(f["type_two"] - 0.024) < 0.005
        and abs(sizes[1] - f["free"]) < 1e-12
        and abs(sizes[2] - 0.239) < 0.01
        and sizes[2] > sizes.get(3, 0.0)
    )
    report("c13 stationary-species-statistics", [
        (f"ordering free {f['free']:.3f} > type I {f['type_one']:.3f} > "
         f"type II {f['type_two']:.3f}", ordered),
        ("size distribution matches frozen baseline", baseline_ok),
    ])
