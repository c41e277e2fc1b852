"""Spectra of single bound complexes: internal states, Bloch matrices, bands.

A complex is labelled by the position of its leftmost boson (the anchor) and
an internal state (the offset pattern of the other bosons).  Hops that move
the leftmost boson shift the anchor and pick up a Bloch phase; interior hops
do not.  With hops enumerated on the infinite lattice, the Hamiltonian
restricted to one complex becomes an M x M matrix over the internal states at
each quasi-momentum q; its eigenvalues are the dispersion bands, in units of
the hopping J.

The convention: a hop from internal state beta to alpha with anchor shift s
contributes J * exp(-i s q) to entry (alpha, beta).  This reproduces the
two-boson R=4 matrix [[0, 1+e^-iq, 0], [1+e^iq, 0, 1+e^-iq], [0, 1+e^iq, 0]]
and is pinned down by the ring oracle below.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeSpec, is_zeno_state

FLATNESS_TOL = 1e-8
CROSSING_TOL = 1e-8
MAX_INTERNAL_STATES = 10_000


class DivergingClosureError(ValueError):
    """The hop closure of the seed keeps growing: not a bound complex."""


@dataclass(frozen=True)
class InternalBasis:
    """Internal states (offset tuples anchored at 0) and their hop graph."""

    R: int
    m: int
    states: tuple
    hops: tuple  # (src_state, dst_state, anchor_shift)

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def max_extent(self) -> int:
        return max(s[-1] for s in self.states)

    def adjacent_pair_counts(self) -> np.ndarray:
        return np.array(
            [sum(1 for a, b in zip(s, s[1:]) if b - a == 1) for s in self.states],
            dtype=float,
        )


def _offsets_valid(offsets: tuple, R: int) -> bool:
    return all(b - a != R for a, b in itertools.combinations(offsets, 2))


def _hop_targets(offsets: tuple, R: int):
    """Legal single hops: (new offsets re-anchored, anchor shift)."""
    occ = set(offsets)
    for s in offsets:
        for step in (-1, 1):
            t = s + step
            if t in occ:
                continue
            moved = sorted(occ - {s} | {t})
            if not _offsets_valid(tuple(moved), R):
                continue
            shift = moved[0]
            yield tuple(o - shift for o in moved), shift


def enumerate_internal_states(
    R: int,
    m: int,
    kind: str = "auto",
    seed_offsets=None,
    max_states: int = MAX_INTERNAL_STATES,
) -> InternalBasis:
    """Breadth-first hop closure of a seed complex, quotiented by translation.

    ``kind`` selects the default seed: ``type_one`` starts from the densest
    packing (a contiguous block, extent m-1 < R), ``type_two`` from the
    maximally stretched chain with spacings R-1.  The closure never changes
    class: extent R is unreachable because the endpoints would form a
    critical pair.
    """
    if m < 1 or R < 1:
        raise ValueError("m and R must be positive")
    if seed_offsets is not None:
        seed = tuple(sorted(seed_offsets))
        if seed[0] != 0:
            seed = tuple(o - seed[0] for o in seed)
    elif m == 1:
        seed = (0,)
    elif kind == "type_one" or (kind == "auto" and m <= R):
        if m > R:
            raise ValueError(f"no type I complex with {m} bosons fits below R={R}")
        seed = tuple(range(m))
    elif kind == "type_two" or kind == "auto":
        seed = tuple(i * (R - 1) for i in range(m))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if not _offsets_valid(seed, R):
        raise ValueError(f"seed {seed} violates the pair constraint at R={R}")

    extent_bound = m * R + R  # a bound complex can never stretch this far
    states = {seed: 0}
    order = [seed]
    hops = []
    frontier = [seed]
    while frontier:
        nxt = []
        for src in frontier:
            for target, shift in _hop_targets(src, R):
                if target[-1] > extent_bound:
                    raise DivergingClosureError(
                        f"closure from seed {seed} reached extent {target[-1]}; "
                        "the seed does not describe a bound complex"
                    )
                if target not in states:
                    if len(states) >= max_states:
                        raise DivergingClosureError(
                            f"closure exceeded {max_states} internal states"
                        )
                    states[target] = len(states)
                    order.append(target)
                    nxt.append(target)
                hops.append((states[src], states[target], shift))
        frontier = nxt

    basis = InternalBasis(R=R, m=m, states=tuple(order), hops=tuple(hops))
    if kind in ("type_one", "type_two") and m >= 2:
        want_low = kind == "type_one"
        for s in basis.states:
            if (s[-1] < R) != want_low:
                raise ValueError(
                    f"closure of seed {seed} left the requested class {kind}"
                )
    return basis


@dataclass(frozen=True)
class BlochMatrix:
    """q-dependent internal-state Hamiltonian, Hermitian at every q."""

    basis: InternalBasis
    J: float
    V: float
    diagonal: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def at(self, q: float) -> np.ndarray:
        M = np.zeros((self.dimension, self.dimension), dtype=complex)
        for src, dst, shift in self.basis.hops:
            M[dst, src] += self.J * np.exp(-1j * shift * q)
        M[np.diag_indices(self.dimension)] += self.diagonal
        return M


def build_bloch_matrix(basis: InternalBasis, J: float = 1.0, V: float = 0.0) -> BlochMatrix:
    diag = V * basis.adjacent_pair_counts()
    return BlochMatrix(basis=basis, J=J, V=V, diagonal=diag)


@dataclass(frozen=True)
class BandStructure:
    """Eigenvalue bands on a q grid.

    ``bands[k, b]`` is sorted ascending at each q.  ``tracked[k, b]`` follows
    band b from its q=0 position by eigenvector overlap, so a crossing is
    reported as a crossing rather than an avoided one.  ``flatness[b]`` is
    the largest distance of the spectrum from the horizontal line through
    ``bands[0, b]``: exactly zero for a flat band even when dispersive bands
    cross it.  ``crossings`` lists (q, (lower, upper)) degeneracies of
    adjacent sorted bands on the grid.
    """

    q_grid: np.ndarray
    bands: np.ndarray
    tracked: np.ndarray
    flatness: np.ndarray
    flat_flags: np.ndarray
    crossings: tuple

    @property
    def has_flat_band(self) -> bool:
        return bool(self.flat_flags.any())

    @property
    def flat_band_energies(self) -> np.ndarray:
        return self.bands[0][self.flat_flags]


def _assignment(overlap: np.ndarray) -> np.ndarray:
    """Column permutation maximizing the total overlap (Hungarian method)."""
    from scipy.optimize import linear_sum_assignment

    _rows, cols = linear_sum_assignment(-overlap)
    return cols


def compute_bands(bloch: BlochMatrix, q_points: int = 256) -> BandStructure:
    """Diagonalize on a uniform q grid; track, flag flat bands, find crossings."""
    if q_points < 2:
        raise ValueError("need at least two q points")
    qs = 2.0 * np.pi * np.arange(q_points) / q_points
    M = bloch.dimension
    scale = max(abs(bloch.J), 1e-300)
    bands = np.zeros((q_points, M))
    tracked = np.zeros((q_points, M))
    prev_vecs = None
    order = np.arange(M)
    for k, q in enumerate(qs):
        H = bloch.at(q)
        if np.max(np.abs(H - H.conj().T)) > 1e-12 * scale:
            raise AssertionError("Bloch matrix lost hermiticity")
        vals, vecs = np.linalg.eigh(H)
        bands[k] = vals
        if prev_vecs is None:
            tracked[k] = vals
        else:
            overlap = np.abs(prev_vecs.conj().T @ vecs)
            perm = _assignment(overlap)
            vals, vecs = vals[perm], vecs[:, perm]
            tracked[k] = vals
        prev_vecs = vecs
    # flatness: largest distance of the spectrum from the horizontal line
    # through this band's q=0 energy.  Zero exactly for a flat band, and
    # immune to the identity loss tracking suffers at exact degeneracies on
    # the grid (a flat band that other bands cross is still detected).
    flatness = np.array(
        [np.abs(bands - e0).min(axis=1).max() for e0 in bands[0]]
    )
    flat_flags = flatness < FLATNESS_TOL * scale
    crossings = []
    for b in range(M - 1):
        gap = bands[:, b + 1] - bands[:, b]
        for k in np.nonzero(gap < CROSSING_TOL * scale)[0]:
            crossings.append((float(qs[k]), (b, b + 1)))
    return BandStructure(
        q_grid=qs,
        bands=bands,
        tracked=tracked,
        flatness=flatness,
        flat_flags=flat_flags,
        crossings=tuple(crossings),
    )


@dataclass(frozen=True)
class FlatScanRow:
    m: int
    R: int
    kind: str
    n_internal_states: int
    has_flat: bool


def scan_flat_bands(cases, J: float = 1.0, q_points: int = 128) -> list:
    """Run enumerate -> Bloch -> bands for (m, R, kind) cases."""
    rows = []
    for m, R, kind in cases:
        basis = enumerate_internal_states(R, m, kind=kind)
        bs = compute_bands(build_bloch_matrix(basis, J=J), q_points=q_points)
        rows.append(
            FlatScanRow(
                m=m,
                R=R,
                kind=kind,
                n_internal_states=basis.dimension,
                has_flat=bs.has_flat_band,
            )
        )
    return rows


def scan_type_two_families(R: int, m: int, J: float = 1.0, q_points: int = 128):
    """All hop-closure families of bound m-boson complexes wider than R.

    Complexes of a given size need not form a single family: for five bosons
    with R=4 the stretched chain belongs to a dispersive eight-state family,
    while separate frozen families (all bands flat) carry the localized
    states.  Returns one FlatScanRow per family, seed order deterministic.
    """
    patterns = []
    for gaps in itertools.product(range(1, R), repeat=m - 1):
        offs = [0]
        for g in gaps:
            offs.append(offs[-1] + g)
        offs = tuple(offs)
        if offs[-1] > R and _offsets_valid(offs, R):
            patterns.append(offs)
    seen = set()
    rows = []
    for p in sorted(patterns):
        if p in seen:
            continue
        basis = enumerate_internal_states(R, m, seed_offsets=p)
        seen.update(basis.states)
        bs = compute_bands(build_bloch_matrix(basis, J=J), q_points=q_points)
        rows.append(
            FlatScanRow(
                m=m,
                R=R,
                kind=f"type_two[{','.join(map(str, p))}]",
                n_internal_states=basis.dimension,
                has_flat=bs.has_flat_band,
            )
        )
    return rows


@dataclass(frozen=True)
class DeformationReport:
    reference: BandStructure
    deformed: BandStructure
    crossing_gaps: tuple   # (q, former pair, gap with V)
    flat_deformations: tuple  # (band index, flatness with V)


def interaction_deformation(
    basis: InternalBasis, J: float, V: float, q_points: int = 256
) -> DeformationReport:
    """Band structures without and with the nearest-neighbour term."""
    bs0 = compute_bands(build_bloch_matrix(basis, J=J, V=0.0), q_points)
    bsV = compute_bands(build_bloch_matrix(basis, J=J, V=V), q_points)
    gaps = []
    for q, (b, _b2) in bs0.crossings:
        k = int(np.argmin(np.abs(bs0.q_grid - q)))
        gaps.append((q, (b, b + 1), float(bsV.bands[k, b + 1] - bsV.bands[k, b])))
    flats = [
        (b, float(bsV.flatness[b])) for b in np.nonzero(bs0.flat_flags)[0]
    ]
    return DeformationReport(
        reference=bs0, deformed=bsV, crossing_gaps=tuple(gaps),
        flat_deformations=tuple(flats),
    )


# ------------------------------------------------------------------ ring oracle


def _ring_sector(basis: InternalBasis, n_sites: int):
    """All ring translates of the internal states, with validity checks."""
    R = basis.R
    need = basis.max_extent + R + 1
    if n_sites < need:
        raise ValueError(
            f"ring of {n_sites} sites is incompatible with extent "
            f"{basis.max_extent}: need at least {need} to avoid wrap aliasing"
        )
    configs = {}
    for alpha, offsets in enumerate(basis.states):
        for anchor in range(n_sites):
            sites = frozenset((anchor + o) % n_sites for o in offsets)
            if sites in configs:
                raise ValueError("ring translates alias; enlarge the ring")
            configs[sites] = (anchor, alpha)
    return configs


def _ring_hamiltonian(basis: InternalBasis, n_sites: int, J: float, V: float):
    """Projected Hamiltonian on the ring single-complex sector.

    Built directly from Zeno-allowed hops on ring configurations, with no
    Bloch phase bookkeeping; serves as the independent reference for the
    Bloch construction.  Returns (H, labels) where labels[i] = (anchor,
    internal state index).
    """
    spec = LatticeSpec(n_sites, basis.R)
    configs = _ring_sector(basis, n_sites)
    index = {sites: i for i, sites in enumerate(configs)}
    labels = {index[sites]: lab for sites, lab in configs.items()}
    dim = len(index)
    H = np.zeros((dim, dim))
    pairs = spec.pair_sites()

    def zeno_ok(sites):
        return not any(a in sites and b in sites for a, b in pairs)

    for sites, i in index.items():
        for s in sites:
            for step in (-1, 1):
                t = (s + step) % n_sites
                if t in sites:
                    continue
                target = frozenset(sites - {s} | {t})
                if not zeno_ok(target):
                    continue
                if target not in index:
                    raise ValueError("ring sector is not closed under projected hops")
                H[index[target], i] += J
        count = sum(1 for s in sites if (s + 1) % n_sites in sites)
        H[i, i] += V * count
    return H, labels


@dataclass(frozen=True)
class RingOracleReport:
    n_sites: int
    ring_dim: int
    max_residual: float
    ring_spectrum: np.ndarray
    bloch_spectrum: np.ndarray


def bloch_vs_ring_oracle(
    basis: InternalBasis, n_sites: int, J: float = 1.0, V: float = 0.0
) -> RingOracleReport:
    """Compare Bloch bands at q_K = 2 pi K / N with direct ring diagonalization."""
    H, _labels = _ring_hamiltonian(basis, n_sites, J, V)
    ring_spectrum = np.sort(np.linalg.eigvalsh(H))
    bloch = build_bloch_matrix(basis, J=J, V=V)
    vals = []
    for K in range(n_sites):
        vals.extend(np.linalg.eigvalsh(bloch.at(2.0 * np.pi * K / n_sites)))
    bloch_spectrum = np.sort(np.asarray(vals))
    if len(bloch_spectrum) != len(ring_spectrum):
        raise ValueError(
            f"dimension mismatch: ring {len(ring_spectrum)} vs "
            f"Bloch {len(bloch_spectrum)}"
        )
    residual = float(np.max(np.abs(ring_spectrum - bloch_spectrum)))
    return RingOracleReport(
        n_sites=n_sites,
        ring_dim=len(ring_spectrum),
        max_residual=residual,
        ring_spectrum=ring_spectrum,
        bloch_spectrum=bloch_spectrum,
    )


def find_compact_flat_state(
    basis: InternalBasis,
    band_energy: float = 0.0,
    n_sites: int | None = None,
    tol: float = 1e-9,
    max_window: int | None = None,
):
    """Search for a compactly supported ring eigenstate at a flat-band energy.

    Tries anchor windows of growing width w and returns (w, components) where
    components maps (anchor, internal state) to amplitude.  Raises when no
    compact state exists up to ``max_window``.
    """
    R = basis.R
    if n_sites is None:
        n_sites = max(3 * (basis.max_extent + R + 1), 4 * R)
    if max_window is None:
        max_window = R
    H, labels = _ring_hamiltonian(basis, n_sites, 1.0, 0.0)
    A = H - band_energy * np.eye(H.shape[0])
    for w in range(1, max_window + 1):
        cols = [i for i, (anchor, _alpha) in labels.items() if anchor < w]
        sub = A[:, cols]
        _u, s, vt = np.linalg.svd(sub)
        if s[-1] < tol:
            vec = vt[-1]
            comps = {
                labels[c]: vec[k] for k, c in enumerate(cols) if abs(vec[k]) > 1e-10
            }
            return w, comps
    raise ValueError(f"no compact eigenstate found up to window {max_window}")
