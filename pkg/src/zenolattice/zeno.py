"""Effective dynamics inside the Zeno subspace.

For loss much faster than hopping the dynamics projected onto the pair-free
subspace is governed by the projected Hamiltonian Q0 H Q0 together with
second-order jump operators built from the two- and three-site annihilation
strings

    A_j = s-(j+R+1) s-(j)   + s-(j+R-1) s-(j)
        + s-(j+R)   s-(j+1) + s-(j+R)   s-(j-1)
    B_j = s-(j-R) s-(j-1) s-(j+R) + s-(j-R) s-(j+1) s-(j+R)

as  L_(j,1) = sqrt(2 Gamma) (A_j - s+(j-R) B_j - s+(j+2R) B_(j+R))  and
    L_(j,2) = sqrt(Gamma) B_j,   Gamma = 2 J^2 / gamma,

projected onto the Zeno basis on both sides.  The operators are implemented
literally, with periodic index arithmetic; the full engine is the arbiter of
their accuracy (see the validation tests).

Also implemented: the diagonal projectors onto no-pair, single-pair and
shared-double-pair configurations, and the spectral check that coherences
between the Zeno subspace and those classes decay at gamma/2 and gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .decay import ATOL, RTOL
from .engine import (
    HilbertSector,
    ModelParams,
    ObservableSeries,
    SectorState,
    build_hamiltonian,
    get_sector,
)
from .lattice import LatticeSpec, is_zeno_state


def effective_rate(params: ModelParams) -> float:
    """Gamma = 2 J^2 / gamma."""
    if params.gamma <= 0:
        raise ValueError("effective rate requires gamma > 0")
    return 2.0 * params.J**2 / params.gamma


# ------------------------------------------------------------- Zeno sub-bases


@dataclass(frozen=True)
class ZenoSectorBasis:
    """Zeno configurations of one number sector, as positions in the full basis."""

    sector: HilbertSector
    indices: np.ndarray  # positions of Zeno configurations in the full sector
    codes: tuple

    @property
    def dim(self) -> int:
        return len(self.codes)

    def occupations(self) -> np.ndarray:
        N = self.sector.spec.n_sites
        out = np.zeros((self.dim, N))
        for i, code in enumerate(self.codes):
            for j in range(N):
                if code >> (N - 1 - j) & 1:
                    out[i, j] = 1.0
        return out


def zeno_sector_basis(spec: LatticeSpec, boson_count: int) -> ZenoSectorBasis:
    sector = get_sector(spec, boson_count)
    idx = [
        i for i, cfg in enumerate(sector.configurations()) if is_zeno_state(cfg, spec)
    ]
    codes = tuple(sector.codes[i] for i in idx)
    return ZenoSectorBasis(sector, np.array(idx, dtype=np.intp), codes)


def projected_hamiltonian(params: ModelParams, basis: ZenoSectorBasis) -> sp.csr_matrix:
    """Q0 H Q0 restricted to the Zeno configurations of one sector."""
    H = build_hamiltonian(params, basis.sector).tocsr()
    return H[basis.indices, :][:, basis.indices].tocsr()


# ----------------------------------------------------- annihilation strings


def _apply_string(spec: LatticeSpec, code: int, removes, adds):
    """Apply annihilators then creators (hard-core); None when annihilated."""
    N = spec.n_sites
    for s in removes:
        bit = 1 << (N - 1 - s % N)
        if not code & bit:
            return None
        code ^= bit
    for s in adds:
        bit = 1 << (N - 1 - s % N)
        if code & bit:
            return None
        code |= bit
    return code


def _string_matrix(
    spec: LatticeSpec,
    src: ZenoSectorBasis,
    dst: ZenoSectorBasis,
    terms,
) -> sp.csr_matrix:
    """Zeno-projected sum of weighted annihilation/creation strings.

    ``terms`` is a list of (weight, removes, adds).  Rows and columns are the
    destination and source Zeno bases, so the projection onto the Zeno
    subspace on both sides is built in.
    """
    dst_index = {c: i for i, c in enumerate(dst.codes)}
    rows, cols, vals = [], [], []
    for i, code in enumerate(src.codes):
        for w, removes, adds in terms:
            out = _apply_string(spec, code, removes, adds)
            if out is None:
                continue
            k = dst_index.get(out)
            if k is None:
                continue  # projected away: destination outside the Zeno basis
            rows.append(k)
            cols.append(i)
            vals.append(w)
    return sp.csr_matrix((vals, (rows, cols)), shape=(dst.dim, src.dim))


def _a_terms(j: int, R: int):
    return [
        (1.0, (j + R + 1, j), ()),
        (1.0, (j + R - 1, j), ()),
        (1.0, (j + R, j + 1), ()),
        (1.0, (j + R, j - 1), ()),
    ]


def _b_terms(j: int, R: int, weight: float = 1.0, add=()):
    return [
        (weight, (j - R, j - 1, j + R), add),
        (weight, (j - R, j + 1, j + R), add),
    ]


# ------------------------------------------------------------ effective model


@dataclass
class EffectiveModel:
    """Projected Hamiltonian and second-order jump operators, per sector."""

    params: ModelParams
    gamma_eff: float
    bases: dict           # m -> ZenoSectorBasis
    h_z: dict             # m -> csr on the Zeno basis
    jump_ops: list        # (m_from, m_to, csr) with m_to in {m-2, m-3}

    def sector_of(self, m: int) -> ZenoSectorBasis:
        return self.bases[m]


def _reachable_sectors(top: int) -> list[int]:
    seen, frontier = {top}, [top]
    while frontier:
        m = frontier.pop()
        for d in (2, 3):
            k = m - d
            if k >= 0 and k not in seen:
                seen.add(k)
                frontier.append(k)
    return sorted(seen, reverse=True)


def build_effective_model(params: ModelParams, boson_count: int) -> EffectiveModel:
    """Construct H_Z and the projected jump operators down from one sector."""
    spec = params.spec
    if not spec.periodic:
        raise ValueError(
            "effective operators use periodic index arithmetic only"
        )
    rate = effective_rate(params)
    sectors = _reachable_sectors(boson_count)
    bases = {m: zeno_sector_basis(spec, m) for m in sectors}
    h_z = {m: projected_hamiltonian(params, bases[m]) for m in sectors}

    R = spec.critical_distance
    c1 = math.sqrt(2.0 * rate)
    c2 = math.sqrt(rate)
    ops = []
    for m in sectors:
        src = bases[m]
        if m >= 2 and m - 2 in bases:
            dst = bases[m - 2]
            for j in range(spec.n_sites):
                terms = list(_a_terms(j, R))
                terms += _b_terms(j, R, weight=-1.0, add=(j - R,))
                terms += _b_terms(j + R, R, weight=-1.0, add=(j + 2 * R,))
                mat = _string_matrix(spec, src, dst, terms) * c1
                if mat.nnz:
                    ops.append((m, m - 2, mat))
        if m >= 3 and m - 3 in bases:
            dst = bases[m - 3]
            for j in range(spec.n_sites):
                mat = _string_matrix(spec, src, dst, _b_terms(j, R)) * c2
                if mat.nnz:
                    ops.append((m, m - 3, mat))
    return EffectiveModel(
        params=params, gamma_eff=rate, bases=bases, h_z=h_z, jump_ops=ops
    )


def project_state(model: EffectiveModel, state: SectorState, tol: float = 1e-9):
    """Restrict a sector state to the Zeno basis; reject leaked weight."""
    m = state.sector.boson_count
    basis = model.bases[m]
    amps = state.amplitudes[basis.indices]
    leak = 1.0 - float(np.vdot(amps, amps).real) / max(state.norm**2, 1e-300)
    if leak > tol:
        raise ValueError(f"state has weight {leak:.2e} outside the Zeno subspace")
    return m, amps


def integrate_effective(
    model: EffectiveModel,
    initial,
    t_grid,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> ObservableSeries:
    """Lindblad integration with H_Z and the projected jump operators.

    ``initial`` is either a SectorState supported on the Zeno basis or a
    dict {m: density block on the Zeno basis}.
    """
    spec = model.params.spec
    t_grid = np.asarray(t_grid, dtype=float)
    if isinstance(initial, SectorState):
        m0, amps = project_state(model, initial)
        blocks0 = {m0: np.outer(amps, amps.conj())}
    else:
        blocks0 = {m: np.asarray(b, dtype=complex) for m, b in initial.items()}

    sectors = sorted(model.bases, reverse=True)
    dims = {m: model.bases[m].dim for m in sectors}
    # non-Hermitian damping sum per sector, and feed lists per target
    damp = {m: sp.csr_matrix((dims[m], dims[m])) for m in sectors}
    feeds = {m: [] for m in sectors}
    for m_from, m_to, L in model.jump_ops:
        damp[m_from] = damp[m_from] + (L.conj().T @ L)
        feeds[m_to].append((m_from, L))

    offsets, n = {}, 0
    for m in sectors:
        offsets[m] = n
        n += dims[m] ** 2

    def unpack(y):
        return {
            m: y[offsets[m] : offsets[m] + dims[m] ** 2].reshape(dims[m], dims[m])
            for m in sectors
        }

    def rhs(_t, y):
        mu = unpack(y)
        out = np.zeros_like(y)
        dmu = unpack(out)
        for m in sectors:
            r = mu[m]
            h = model.h_z[m]
            acc = (h @ r - r @ h) * (-1j)
            dm = damp[m]
            if dm.nnz:
                acc -= 0.5 * (dm @ r + r @ dm)
            for m_from, L in feeds[m]:
                acc += L @ mu[m_from] @ L.conj().T
            dmu[m] += acc
        return out

    y0 = np.zeros(n, dtype=np.complex128)
    start = unpack(y0)
    for m, b in blocks0.items():
        start[m] += b

    sol = solve_ivp(
        rhs, (t_grid[0], t_grid[-1]), y0, t_eval=t_grid, method="RK45",
        rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise RuntimeError(f"effective integration failed: {sol.message}")

    occs = {m: model.bases[m].occupations() for m in sectors}
    T = len(t_grid)
    site = np.zeros((T, spec.n_sites))
    for k in range(T):
        mu = unpack(sol.y[:, k])
        for m in sectors:
            site[k] += np.diag(mu[m]).real @ occs[m]
    total = site.sum(axis=1) / spec.n_sites
    return ObservableSeries(t_grid, site, total)


# ------------------------------------------------- dissipator spectral checks


def pair_structure(spec: LatticeSpec, code: int):
    """Occupied loss pairs of a configuration, by operator index."""
    N = spec.n_sites
    occupied = []
    for j, (a, b) in enumerate(spec.pair_sites()):
        mask = (1 << (N - 1 - a)) | (1 << (N - 1 - b))
        if code & mask == mask:
            occupied.append(j)
    return occupied


def q_projector_diagonals(spec: LatticeSpec, sector: HilbertSector):
    """Diagonals of the no-pair, one-pair and shared-double-pair projectors."""
    N = spec.n_sites
    q0 = np.zeros(sector.dim)
    q1 = np.zeros(sector.dim)
    q2 = np.zeros(sector.dim)
    R = spec.critical_distance
    for i, code in enumerate(sector.codes):
        pairs = pair_structure(spec, code)
        if not pairs:
            q0[i] = 1.0
        elif len(pairs) == 1:
            q1[i] = 1.0
        elif len(pairs) == 2:
            a, b = pairs
            # shared central boson: operator indices differ by R on the ring
            if (b - a) % N == R or (a - b) % N == R:
                q2[i] = 1.0
    return q0, q1, q2


@dataclass(frozen=True)
class CoherenceDecayCase:
    zeno_code: int
    excited_code: int
    n_pairs: int
    expected: float
    measured: float
    proportionality_defect: float
    transfer_norm: float

    @property
    def residual(self) -> float:
        return abs(self.measured - self.expected)


def verify_dissipator_spectrum(
    params: ModelParams,
    boson_count: int,
    max_cases: int = 40,
    n_zeno_samples: int = 3,
) -> list[CoherenceDecayCase]:
    """Decay eigenvalues of coherences |s><p| under the bare dissipator.

    s runs over Zeno configurations, p over configurations with exactly one
    loss pair (expected eigenvalue -gamma/2) or a shared double pair
    (expected -gamma).  The dissipator is applied through the actual jump
    matrices; the report carries the measured rate, the defect of strict
    proportionality within the coherence block, and the norm of the
    population-transfer part (zero whenever L|s> = 0).
    """
    from .engine import build_jump_operators

    spec = params.spec
    sector = get_sector(spec, boson_count)
    ops = build_jump_operators(params, sector)
    if not ops:
        return []
    dsum = sum((L.conj().T @ L for L in ops), sp.csr_matrix((sector.dim, sector.dim)))
    zeno = [i for i, c in enumerate(sector.configurations()) if is_zeno_state(c, spec)]
    cases = []
    for s_idx in zeno[:n_zeno_samples]:
        for i, code in enumerate(sector.codes):
            pairs = pair_structure(spec, code)
            if len(pairs) == 1:
                expected = -params.gamma / 2.0
            elif len(pairs) == 2 and spec.critical_distance in (
                (pairs[1] - pairs[0]) % spec.n_sites,
                (pairs[0] - pairs[1]) % spec.n_sites,
            ):
                expected = -params.gamma
            else:
                continue
            X = sp.csr_matrix(
                ([1.0], ([s_idx], [i])), shape=(sector.dim, sector.dim)
            )
            block = (-0.5 * (dsum @ X + X @ dsum)).tocsr()
            measured = block[s_idx, i]
            defect = sp.linalg.norm(block - measured * X)
            transfer = math.sqrt(
                sum(sp.linalg.norm(L @ X @ L.conj().T) ** 2 for L in ops)
            )
            cases.append(
                CoherenceDecayCase(
                    zeno_code=sector.codes[s_idx],
                    excited_code=code,
                    n_pairs=len(pairs),
                    expected=expected,
                    measured=float(measured.real),
                    proportionality_defect=float(defect),
                    transfer_norm=float(transfer),
                )
            )
            if len(cases) >= max_cases:
                return cases
    return cases
