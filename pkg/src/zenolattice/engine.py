"""Exact open-system dynamics on small lattices.

The Hamiltonian conserves boson number and every loss event removes one
critical pair, so the density matrix is evolved block-by-block on the direct
sum of number sectors m, m-2, m-4, ...  Three solvers share the same
operator construction:

* ``integrate_master``  - dense Runge-Kutta integration of the full Lindblad
  generator on the block representation (ground truth, O(dim^2) state).
* ``evolve_pure_cascade`` - for a pure top-sector initial state the no-jump
  part keeps that block pure, so the identical master equation is integrated
  with a state vector on top and fed density blocks below (exact, much
  cheaper; cross-checked against ``integrate_master`` in the test suite).
* ``run_mcwf``          - quantum-jump unraveling with exact jump-time
  location via eigendecomposed segment propagators.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.linalg import eig as dense_eig
from scipy.optimize import brentq

from .decay import ATOL, RTOL
from .lattice import FockConfiguration, LatticeSpec, is_zeno_state

MASTER_DIM_CAP = 5000
MCWF_AMP_CAP = 200_000
EIG_PROPAGATOR_CAP = 1500


class DimensionCapError(ValueError):
    """Requested evolution exceeds the configured state-size cap."""


@dataclass(frozen=True)
class ModelParams:
    """Couplings: hopping J (energy unit), loss rate gamma, interaction V."""

    spec: LatticeSpec
    gamma: float
    J: float = 1.0
    V: float = 0.0

    def __post_init__(self):
        if self.J <= 0:
            raise ValueError("J must be positive (it sets the energy unit)")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")


class HilbertSector:
    """Fixed-boson-number Fock basis, ordered lexicographically.

    Configurations are stored as integers with site 0 in the most
    significant bit, so ascending integer order equals ascending bitstring
    order and all modules agree on basis indices.
    """

    def __init__(self, spec: LatticeSpec, boson_count: int):
        if not 0 <= boson_count <= spec.n_sites:
            raise ValueError(f"boson_count {boson_count} out of range")
        self.spec = spec
        self.boson_count = boson_count
        N = spec.n_sites
        codes = sorted(
            sum(1 << (N - 1 - s) for s in sites)
            for sites in itertools.combinations(range(N), boson_count)
        )
        self.codes = codes
        self.index = {c: i for i, c in enumerate(codes)}
        self.dim = len(codes)

    def site_bit(self, site: int) -> int:
        return 1 << (self.spec.n_sites - 1 - site)

    def occupations(self) -> np.ndarray:
        """0/1 matrix of shape (dim, n_sites)."""
        N = self.spec.n_sites
        out = np.zeros((self.dim, N), dtype=np.float64)
        for i, code in enumerate(self.codes):
            for j in range(N):
                if code >> (N - 1 - j) & 1:
                    out[i, j] = 1.0
        return out

    def configurations(self) -> list[FockConfiguration]:
        N = self.spec.n_sites
        return [
            FockConfiguration(tuple((c >> (N - 1 - j)) & 1 for j in range(N)))
            for c in self.codes
        ]

    def index_of(self, config: FockConfiguration) -> int:
        N = self.spec.n_sites
        code = sum(b << (N - 1 - j) for j, b in enumerate(config.bits))
        return self.index[code]


@lru_cache(maxsize=None)
def get_sector(spec: LatticeSpec, boson_count: int) -> HilbertSector:
    return HilbertSector(spec, boson_count)


@lru_cache(maxsize=None)
def _occupations(spec: LatticeSpec, boson_count: int) -> np.ndarray:
    return get_sector(spec, boson_count).occupations()


def _bonds(spec: LatticeSpec) -> list[tuple[int, int]]:
    """Directed nearest-neighbour bonds addressed by the hopping sum."""
    N = spec.n_sites
    if spec.periodic:
        return [(j, (j + 1) % N) for j in range(N)]
    return [(j, j + 1) for j in range(N - 1)]


def build_hamiltonian(params: ModelParams, sector: HilbertSector) -> sp.csr_matrix:
    """Hopping plus optional nearest-neighbour interaction, one number sector."""
    spec = params.spec
    rows, cols, vals = [], [], []
    bonds = _bonds(spec)
    for i, code in enumerate(sector.codes):
        diag = 0.0
        for a, b in bonds:
            ba, bb = sector.site_bit(a), sector.site_bit(b)
            occ_a, occ_b = code & ba, code & bb
            if occ_a and occ_b:
                diag += params.V
            elif occ_a or occ_b:
                target = code ^ ba ^ bb
                rows.append(sector.index[target])
                cols.append(i)
                vals.append(params.J)
        if diag:
            rows.append(i)
            cols.append(i)
            vals.append(diag)
    return sp.csr_matrix(
        (vals, (rows, cols)), shape=(sector.dim, sector.dim), dtype=np.float64
    )


def _jump_maps(params: ModelParams, sector: HilbertSector):
    """Index maps for every loss operator out of this sector.

    Returns a list over operator index j of (upper_indices, lower_indices)
    arrays: basis state upper[k] maps to lower[k] with amplitude sqrt(gamma).
    Empty when fewer than two bosons are present.
    """
    spec = params.spec
    if sector.boson_count < 2:
        return []
    lower = get_sector(spec, sector.boson_count - 2)
    maps = []
    for a, b in spec.pair_sites():
        mask = sector.site_bit(a) | sector.site_bit(b)
        ups, downs = [], []
        for i, code in enumerate(sector.codes):
            if code & mask == mask:
                ups.append(i)
                downs.append(lower.index[code ^ mask])
        maps.append((np.array(ups, dtype=np.intp), np.array(downs, dtype=np.intp)))
    return maps


def build_jump_operators(
    params: ModelParams, sector: HilbertSector
) -> list[sp.csr_matrix]:
    """Sparse loss operators mapping sector m to sector m-2."""
    spec = params.spec
    if sector.boson_count < 2:
        return []
    lower = get_sector(spec, sector.boson_count - 2)
    amp = math.sqrt(params.gamma)
    ops = []
    for ups, downs in _jump_maps(params, sector):
        data = np.full(len(ups), amp)
        ops.append(
            sp.csr_matrix(
                (data, (downs, ups)), shape=(lower.dim, sector.dim), dtype=np.float64
            )
        )
    return ops


def pair_count_diagonal(params: ModelParams, sector: HilbertSector) -> np.ndarray:
    """Diagonal of sum_j L_j^dag L_j: gamma times the number of critical pairs."""
    d = np.zeros(sector.dim)
    for ups, _downs in _jump_maps(params, sector):
        d[ups] += params.gamma
    return d


# --------------------------------------------------------------------- states


@dataclass
class SectorState:
    """Pure state supported on a single number sector."""

    sector: HilbertSector
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.sector.dim,):
            raise ValueError("amplitude vector does not match sector dimension")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "SectorState":
        return SectorState(self.sector, self.amplitudes / self.norm)

    def site_density(self) -> np.ndarray:
        occ = _occupations(self.sector.spec, self.sector.boson_count)
        return (np.abs(self.amplitudes) ** 2) @ occ


def basis_state(spec: LatticeSpec, config: FockConfiguration) -> SectorState:
    sector = get_sector(spec, config.boson_count)
    amps = np.zeros(sector.dim, dtype=np.complex128)
    amps[sector.index_of(config)] = 1.0
    return SectorState(sector, amps)


def mott_state(spec: LatticeSpec) -> SectorState:
    return basis_state(spec, FockConfiguration.mott(spec.n_sites))


def state_from_amplitudes(spec: LatticeSpec, pairs) -> SectorState:
    """Build a sector state from (configuration, amplitude) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no amplitudes given")
    counts = {c.boson_count for c, _ in pairs}
    if len(counts) != 1:
        raise ValueError("amplitudes span several number sectors")
    sector = get_sector(spec, counts.pop())
    amps = np.zeros(sector.dim, dtype=np.complex128)
    for config, a in pairs:
        amps[sector.index_of(config)] += a
    return SectorState(sector, amps)


class BlockDensityMatrix:
    """Density matrix block-diagonal over number sectors.

    Coherences between different sectors are identically zero in this
    representation; they cannot develop from sector-diagonal initial states
    because every generator term preserves the block structure.
    """

    HERMITICITY_TOL = 1e-10

    def __init__(self, spec: LatticeSpec, blocks: dict):
        self.spec = spec
        self.blocks = {}
        for m, mat in blocks.items():
            mat = np.asarray(mat, dtype=np.complex128)
            dim = get_sector(spec, m).dim
            if mat.shape != (dim, dim):
                raise ValueError(f"block {m} has shape {mat.shape}, expected {dim}")
            if np.max(np.abs(mat - mat.conj().T)) > self.HERMITICITY_TOL:
                raise ValueError(f"block {m} is not Hermitian")
            self.blocks[m] = mat

    @classmethod
    def from_pure(cls, state: SectorState) -> "BlockDensityMatrix":
        amps = state.amplitudes
        return cls(
            state.sector.spec, {state.sector.boson_count: np.outer(amps, amps.conj())}
        )

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks.values()))

    def site_density(self) -> np.ndarray:
        out = np.zeros(self.spec.n_sites)
        for m, mat in self.blocks.items():
            out += np.diag(mat).real @ _occupations(self.spec, m)
        return out

    def max_hermiticity_defect(self) -> float:
        return max(
            float(np.max(np.abs(b - b.conj().T))) for b in self.blocks.values()
        )

    def min_eigenvalue(self) -> float:
        return min(
            float(np.linalg.eigvalsh((b + b.conj().T) / 2).min())
            for b in self.blocks.values()
        )


@dataclass(frozen=True)
class ObservableSeries:
    """Densities on a time grid; stderr columns present for ensemble output."""

    times: np.ndarray
    site_density: np.ndarray
    total_density: np.ndarray
    site_stderr: np.ndarray | None = None
    total_stderr: np.ndarray | None = None


@dataclass(frozen=True)
class MasterResult:
    series: ObservableSeries
    final: BlockDensityMatrix
    snapshots: list | None = None


def _cascade_sectors(top: int) -> list[int]:
    return list(range(top, -1, -2))


def integrate_master(
    params: ModelParams,
    rho0: BlockDensityMatrix,
    t_grid,
    rtol: float = RTOL,
    atol: float = ATOL,
    store_snapshots: bool = False,
    dim_cap: int = MASTER_DIM_CAP,
) -> MasterResult:
    """Integrate the Lindblad equation on the block representation."""
    spec = params.spec
    t_grid = np.asarray(t_grid, dtype=float)
    sectors = sorted(
        {k for m in rho0.blocks for k in _cascade_sectors(m)}, reverse=True
    )
    dims = {m: get_sector(spec, m).dim for m in sectors}
    if sum(dims.values()) > dim_cap:
        raise DimensionCapError(
            f"direct-sum dimension {sum(dims.values())} exceeds cap {dim_cap}"
        )
    H = {m: build_hamiltonian(params, get_sector(spec, m)) for m in sectors}
    decay = {m: pair_count_diagonal(params, get_sector(spec, m)) for m in sectors}
    maps = {m: _jump_maps(params, get_sector(spec, m)) for m in sectors}

    offsets, n = {}, 0
    for m in sectors:
        offsets[m] = n
        n += dims[m] ** 2

    def unpack(y):
        return {
            m: y[offsets[m] : offsets[m] + dims[m] ** 2].reshape(dims[m], dims[m])
            for m in sectors
        }

    gamma = params.gamma

    def rhs(_t, y):
        rho = unpack(y)
        out = np.zeros_like(y)
        drho = unpack(out)
        for m in sectors:
            r = rho[m]
            h = H[m]
            acc = (h @ r - r @ h) * (-1j)
            d = decay[m]
            acc -= 0.5 * (d[:, None] + d[None, :]) * r
            if m + 2 in rho:
                upper = rho[m + 2]
                for ups, downs in maps[m + 2]:
                    acc[np.ix_(downs, downs)] += gamma * upper[np.ix_(ups, ups)]
            drho[m] += acc
        return out

    y0 = np.zeros(n, dtype=np.complex128)
    blocks0 = unpack(y0)
    for m, mat in rho0.blocks.items():
        blocks0[m] += mat

    sol = solve_ivp(
        rhs, (t_grid[0], t_grid[-1]), y0, t_eval=t_grid, method="RK45",
        rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise RuntimeError(f"master-equation integration failed: {sol.message}")

    T = len(t_grid)
    site = np.zeros((T, spec.n_sites))
    snaps = [] if store_snapshots else None
    for k in range(T):
        blocks = {m: b.copy() for m, b in unpack(sol.y[:, k]).items()}
        bdm = BlockDensityMatrix(spec, blocks)
        site[k] = bdm.site_density()
        if store_snapshots:
            snaps.append(bdm)
    total = site.sum(axis=1) / spec.n_sites
    final = BlockDensityMatrix(spec, {m: b.copy() for m, b in unpack(sol.y[:, -1]).items()})
    return MasterResult(
        series=ObservableSeries(t_grid, site, total), final=final, snapshots=snaps
    )


def evolve_pure_cascade(
    params: ModelParams,
    psi0: SectorState,
    t_grid,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> MasterResult:
    """Exact master-equation solution for a pure top-sector initial state.

    Between jumps the top block stays a (decaying) pure state, so it is
    carried as a vector; each lower sector is a fed density block.  This is
    the same Lindblad dynamics as ``integrate_master``, exploiting purity.
    """
    spec = params.spec
    t_grid = np.asarray(t_grid, dtype=float)
    top = psi0.sector.boson_count
    sectors = _cascade_sectors(top)
    lower = sectors[1:]
    dims = {m: get_sector(spec, m).dim for m in sectors}
    H = {m: build_hamiltonian(params, get_sector(spec, m)) for m in sectors}
    decay = {m: pair_count_diagonal(params, get_sector(spec, m)) for m in sectors}
    maps = {m: _jump_maps(params, get_sector(spec, m)) for m in sectors}
    gamma = params.gamma

    offsets, n = {top: 0}, dims[top]
    for m in lower:
        offsets[m] = n
        n += dims[m] ** 2

    def unpack(y):
        out = {top: y[: dims[top]]}
        for m in lower:
            out[m] = y[offsets[m] : offsets[m] + dims[m] ** 2].reshape(
                dims[m], dims[m]
            )
        return out

    def rhs(_t, y):
        parts = unpack(y)
        out = np.zeros_like(y)
        dparts = unpack(out)
        psi = parts[top]
        dparts[top] += -1j * (H[top] @ psi) - 0.5 * decay[top] * psi
        for m in lower:
            r = parts[m]
            acc = (H[m] @ r - r @ H[m]) * (-1j)
            acc -= 0.5 * (decay[m][:, None] + decay[m][None, :]) * r
            if m + 2 == top:
                for ups, downs in maps[top]:
                    w = psi[ups]
                    acc[np.ix_(downs, downs)] += gamma * np.outer(w, w.conj())
            else:
                upper = parts[m + 2]
                for ups, downs in maps[m + 2]:
                    acc[np.ix_(downs, downs)] += gamma * upper[np.ix_(ups, ups)]
            dparts[m] += acc
        return out

    y0 = np.zeros(n, dtype=np.complex128)
    y0[: dims[top]] = psi0.amplitudes

    sol = solve_ivp(
        rhs, (t_grid[0], t_grid[-1]), y0, t_eval=t_grid, method="RK45",
        rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise RuntimeError(f"cascade integration failed: {sol.message}")

    T = len(t_grid)
    site = np.zeros((T, spec.n_sites))
    occ_top = _occupations(spec, top)
    for k in range(T):
        parts = unpack(sol.y[:, k])
        site[k] = (np.abs(parts[top]) ** 2) @ occ_top
        for m in lower:
            site[k] += np.diag(parts[m]).real @ _occupations(spec, m)
    total = site.sum(axis=1) / spec.n_sites

    parts = unpack(sol.y[:, -1])
    blocks = {top: np.outer(parts[top], parts[top].conj())}
    for m in lower:
        blocks[m] = (parts[m] + parts[m].conj().T) / 2
    final = BlockDensityMatrix(spec, blocks)
    return MasterResult(series=ObservableSeries(t_grid, site, total), final=final)


# ----------------------------------------------------------------------- MCWF


class _SectorPropagator:
    """Non-Hermitian no-jump propagator exp((-iH - D/2) dt) for one sector.

    Uses a dense eigendecomposition when the sector is small enough (arbitrary
    dt at machine precision), otherwise falls back to adaptive integration.
    """

    def __init__(self, params: ModelParams, sector: HilbertSector):
        H = build_hamiltonian(params, sector)
        d = pair_count_diagonal(params, sector)
        self.generator = (-1j) * H.toarray() - 0.5 * np.diag(d)
        self.dim = sector.dim
        self.exact = False
        if sector.dim <= EIG_PROPAGATOR_CAP:
            lam, V = dense_eig(self.generator)
            try:
                Vinv = np.linalg.inv(V)
            except np.linalg.LinAlgError:
                Vinv = None
            if Vinv is not None:
                residual = np.max(
                    np.abs(self.generator - (V * lam) @ Vinv)
                )
                scale = max(1.0, np.max(np.abs(self.generator)))
                if residual < 1e-9 * scale:
                    self.lam, self.V, self.Vinv = lam, V, Vinv
                    self.exact = True
        self._sparse = sp.csr_matrix(self.generator)

    def apply(self, psi: np.ndarray, dt: float) -> np.ndarray:
        if dt == 0.0:
            return psi.copy()
        if self.exact:
            return self.V @ (np.exp(self.lam * dt) * (self.Vinv @ psi))
        sol = solve_ivp(
            lambda _t, y: self._sparse @ y,
            (0.0, dt),
            psi,
            method="RK45",
            rtol=1e-10,
            atol=1e-12,
        )
        if not sol.success:
            raise RuntimeError("no-jump propagation failed")
        return sol.y[:, -1]


def run_mcwf(
    params: ModelParams,
    psi0: SectorState,
    t_grid,
    n_trajectories: int,
    seed: int,
    amp_cap: int = MCWF_AMP_CAP,
) -> ObservableSeries:
    """Quantum-jump unraveling; ensemble means converge to integrate_master.

    Jump times are located exactly: the squared norm of the no-jump state is
    monotone decreasing, so the crossing of the pre-drawn threshold is
    bracketed on the output grid and polished with a root find on the
    eigendecomposed propagator.
    """
    spec = params.spec
    t_grid = np.asarray(t_grid, dtype=float)
    if psi0.sector.dim > amp_cap:
        raise DimensionCapError(
            f"sector dimension {psi0.sector.dim} exceeds cap {amp_cap}"
        )
    top = psi0.sector.boson_count
    sectors = _cascade_sectors(top)
    props = {m: _SectorPropagator(params, get_sector(spec, m)) for m in sectors}
    maps = {m: _jump_maps(params, get_sector(spec, m)) for m in sectors}
    occs = {m: _occupations(spec, m) for m in sectors}
    gamma = params.gamma

    T, N = len(t_grid), spec.n_sites
    acc = np.zeros((T, N))
    acc2 = np.zeros((T, N))

    seeds = np.random.SeedSequence(seed).spawn(n_trajectories)
    for ss in seeds:
        rng = np.random.default_rng(ss)
        m = top
        psi = psi0.amplitudes.copy()
        psi /= np.linalg.norm(psi)
        t = t_grid[0]
        threshold = rng.random()
        dens = np.zeros((T, N))
        k0 = 0
        if t_grid[0] == t:
            dens[0] = (np.abs(psi) ** 2) @ occs[m]
            k0 = 1
        for k in range(k0, T):
            t_target = t_grid[k]
            while True:
                trial = props[m].apply(psi, t_target - t)
                n2 = float(np.vdot(trial, trial).real)
                if n2 > threshold or not maps[m]:
                    psi = trial
                    t = t_target
                    break
                # jump inside (t, t_target]: polish the crossing time
                def excess(dt):
                    ph = props[m].apply(psi, dt)
                    return float(np.vdot(ph, ph).real) - threshold
                dt_star = brentq(
                    excess, 0.0, t_target - t, xtol=1e-12, rtol=1e-10
                )
                at_jump = props[m].apply(psi, dt_star)
                weights = np.array(
                    [
                        gamma * float(np.sum(np.abs(at_jump[ups]) ** 2))
                        for ups, _downs in maps[m]
                    ]
                )
                total = weights.sum()
                if total <= 0:
                    psi = at_jump
                    t = t_target
                    break
                j = int(rng.choice(len(weights), p=weights / total))
                ups, downs = maps[m][j]
                lower_dim = get_sector(spec, m - 2).dim
                new = np.zeros(lower_dim, dtype=np.complex128)
                new[downs] = at_jump[ups]
                m -= 2
                psi = new / np.linalg.norm(new)
                t = t + dt_star
                threshold = rng.random()
            norm2 = float(np.vdot(psi, psi).real)
            dens[k] = ((np.abs(psi) ** 2) @ occs[m]) / norm2
        acc += dens
        acc2 += dens**2

    mean = acc / n_trajectories
    if n_trajectories > 1:
        var = (acc2 - n_trajectories * mean**2) / (n_trajectories - 1)
        site_err = np.sqrt(np.maximum(var, 0) / n_trajectories)
    else:
        site_err = np.zeros_like(mean)
    total = mean.sum(axis=1) / N
    # sites are correlated, so the error on the average density is bounded by
    # the average site error; report that conservative figure
    total_err = site_err.sum(axis=1) / N
    return ObservableSeries(
        t_grid, mean, total, site_stderr=site_err, total_stderr=total_err
    )


# ------------------------------------------------------------ flat-band states


def _zeno_apply_h(params: ModelParams, state: SectorState) -> np.ndarray:
    """Apply the Zeno-projected Hamiltonian Q0 H Q0 to a sector state."""
    sector = state.sector
    H = build_hamiltonian(params, sector)
    mask = np.array(
        [is_zeno_state(c, params.spec) for c in sector.configurations()]
    )
    amps = state.amplitudes * mask
    out = H @ amps
    out[~mask] = 0.0
    return out


def make_flat_state_I(
    spec: LatticeSpec,
    anchor: int,
    J: float = 1.0,
    residual_tol: float = 1e-10,
) -> SectorState:
    """Compact two-boson flat-band eigenstate for even critical distance.

    Alternating superposition of the nested pair configurations
    {anchor+i, anchor+R-1-i}; for R=4 this is
    (-|anchor, anchor+3> + |anchor+1, anchor+2>)/sqrt(2).  The construction
    is verified against Q0 H Q0 before being returned.
    """
    R = spec.critical_distance
    if R % 2 != 0:
        raise ValueError("two-boson flat bands require even critical distance")
    pairs = []
    for i in range(R // 2):
        sites = [(anchor + i) % spec.n_sites, (anchor + R - 1 - i) % spec.n_sites]
        amp = (-1.0) ** (i + 1) / math.sqrt(R // 2)
        pairs.append((FockConfiguration.from_sites(spec.n_sites, sites), amp))
    state = state_from_amplitudes(spec, pairs)
    params = ModelParams(spec, gamma=0.0, J=J)
    residual = np.linalg.norm(_zeno_apply_h(params, state))
    if residual > residual_tol * J:
        raise ValueError(
            f"flat-state residual ||H_Z psi|| = {residual:.3e} exceeds tolerance; "
            "lattice too small or incompatible"
        )
    return state


def make_flat_state_II(
    spec: LatticeSpec,
    anchor: int,
    J: float = 1.0,
    residual_tol: float = 1e-10,
) -> SectorState:
    """Four-boson localized flat-band state for R=4.

    Normalized superposition of the stretched and the doubly-kinked internal
    configurations, verified as a null vector of Q0 H Q0.
    """
    if spec.critical_distance != 4:
        raise ValueError("the four-boson localized state is defined for R = 4")
    if spec.n_sites < anchor + 10 and not spec.periodic:
        raise ValueError("lattice too short for the 10-site support")
    s = 1.0 / math.sqrt(2.0)
    comp1 = [(anchor + k) % spec.n_sites for k in (0, 3, 6, 9)]
    comp2 = [(anchor + k) % spec.n_sites for k in (1, 3, 6, 8)]
    state = state_from_amplitudes(
        spec,
        [
            (FockConfiguration.from_sites(spec.n_sites, comp1), -s),
            (FockConfiguration.from_sites(spec.n_sites, comp2), s),
        ],
    )
    params = ModelParams(spec, gamma=0.0, J=J)
    residual = np.linalg.norm(_zeno_apply_h(params, state))
    if residual > residual_tol * J:
        raise ValueError(
            f"flat-state residual ||H_Z psi|| = {residual:.3e} exceeds tolerance"
        )
    return state
