"""Configuration space for hard-core bosons with a critical pair distance.

Occupation patterns are bit sequences over ``N`` sites (at most one boson
per site).  Two occupied sites separated by the critical distance ``R``
form an unstable pair; stable ("Zeno") configurations contain no such
pair.  This module enumerates and classifies those configurations and the
bound complexes they contain.  Everything here is pure and immutable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

PERIODIC = "periodic"
OPEN = "open"

#: brute-force enumeration is limited to 2**24 configurations by default
ENUMERATION_CAP = 24


class EnumerationCapError(ValueError):
    """Raised when a brute-force enumeration would exceed the site cap."""


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice geometry: ``n_sites`` sites, critical distance, boundary rule.

    With periodic boundary all site arithmetic is modulo ``n_sites`` and the
    critical distance must satisfy ``1 <= R < N``.  With open boundary any
    ``R >= 1`` is allowed; pairs simply do not exist once ``R >= N``.
    """

    n_sites: int
    critical_distance: int
    boundary: str = PERIODIC

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be positive, got {self.n_sites}")
        if self.critical_distance < 1:
            raise ValueError(
                f"critical_distance must be positive, got {self.critical_distance}"
            )
        if self.boundary not in (PERIODIC, OPEN):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.boundary == PERIODIC and self.critical_distance >= self.n_sites:
            raise ValueError(
                "periodic boundary requires critical_distance < n_sites "
                f"(got R={self.critical_distance}, N={self.n_sites})"
            )

    @property
    def periodic(self) -> bool:
        return self.boundary == PERIODIC

    def pair_sites(self) -> list[tuple[int, int]]:
        """Site pairs ``(j, j+R)`` addressed by the loss operators.

        One entry per operator index j.  On a ring with ``N == 2R`` the same
        unordered pair appears twice (as seen from both of its members),
        which doubles its loss rate; callers must not deduplicate.
        """
        N, R = self.n_sites, self.critical_distance
        if self.periodic:
            return [(j, (j + R) % N) for j in range(N)]
        return [(j, j + R) for j in range(N - R)]


@dataclass(frozen=True, order=True)
class FockConfiguration:
    """Hard-core occupation pattern: a fixed-length 0/1 sequence.

    Ordering is lexicographic on the bit sequence with site 0 most
    significant, so sorting configurations agrees with sorting bitstrings.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("occupations must be 0 or 1")

    @classmethod
    def from_sites(cls, n_sites: int, sites) -> "FockConfiguration":
        bits = [0] * n_sites
        for s in sites:
            bits[s] = 1
        return cls(tuple(bits))

    @classmethod
    def from_bitstring(cls, s: str) -> "FockConfiguration":
        return cls(tuple(int(c) for c in s))

    @classmethod
    def mott(cls, n_sites: int) -> "FockConfiguration":
        """Unit filling: every site occupied."""
        return cls((1,) * n_sites)

    @classmethod
    def vacuum(cls, n_sites: int) -> "FockConfiguration":
        return cls((0,) * n_sites)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def n_sites(self) -> int:
        return len(self.bits)

    @property
    def boson_count(self) -> int:
        return sum(self.bits)

    @property
    def occupied_sites(self) -> tuple[int, ...]:
        return tuple(j for j, b in enumerate(self.bits) if b)

    @property
    def bitstring(self) -> str:
        return "".join(str(b) for b in self.bits)


class ComplexKind(Enum):
    FREE = "free"
    TYPE_ONE = "type_one"
    TYPE_TWO = "type_two"


@dataclass(frozen=True)
class ComplexSpecies:
    """A maximal cluster of mutually bound bosons.

    ``offsets`` are site offsets relative to the leftmost boson of the
    cluster (``offsets[0] == 0``); ``anchor`` is that boson's lattice site.
    ``extent`` is the rightmost offset.  Single bosons are free; clusters
    are type I when ``extent < R`` and type II when ``extent > R``.
    """

    kind: ComplexKind
    offsets: tuple[int, ...]
    boson_count: int
    extent: int
    anchor: int


def is_zeno_state(config: FockConfiguration, spec: LatticeSpec) -> bool:
    """True iff no loss-operator pair ``(j, j+R)`` is doubly occupied."""
    if len(config) != spec.n_sites:
        raise ValueError(
            f"configuration has {len(config)} sites, lattice has {spec.n_sites}"
        )
    bits = config.bits
    return not any(bits[a] and bits[b] for a, b in spec.pair_sites())


def _check_cap(spec: LatticeSpec, cap: int):
    if spec.n_sites > cap:
        raise EnumerationCapError(
            f"enumeration over 2^{spec.n_sites} configurations exceeds the "
            f"cap of 2^{cap}; raise `cap` explicitly if you mean it"
        )


def count_zeno_states(spec: LatticeSpec, cap: int = ENUMERATION_CAP) -> int:
    """Number of configurations with no critical pair (rank of the Zeno projector).

    Brute force over all 2^N patterns, vectorized over bit masks.
    """
    _check_cap(spec, cap)
    N = spec.n_sites
    codes = np.arange(1 << N, dtype=np.uint32 if N <= 31 else np.uint64)
    good = np.ones(codes.shape, dtype=bool)
    for a, b in set(spec.pair_sites()):
        mask = (1 << (N - 1 - a)) | (1 << (N - 1 - b))
        good &= (codes & mask) != mask
    return int(np.count_nonzero(good))


def enumerate_zeno_basis(
    spec: LatticeSpec, boson_count: int, cap: int = ENUMERATION_CAP
) -> list[FockConfiguration]:
    """All Zeno configurations with the given boson count, lexicographic order."""
    _check_cap(spec, cap)
    if boson_count < 0 or boson_count > spec.n_sites:
        raise ValueError(f"boson_count {boson_count} out of range")
    out = []
    for sites in itertools.combinations(range(spec.n_sites), boson_count):
        cfg = FockConfiguration.from_sites(spec.n_sites, sites)
        if is_zeno_state(cfg, spec):
            out.append(cfg)
    out.sort()
    return out


def zeno_mask(spec: LatticeSpec, configs) -> np.ndarray:
    """Boolean diagonal of the Zeno projector over an ordered basis."""
    return np.array([is_zeno_state(c, spec) for c in configs], dtype=bool)


def _cluster_sites(occupied: list[int], spec: LatticeSpec) -> list[list[int]]:
    """Partition occupied sites into clusters of consecutively bound bosons.

    Consecutive bosons closer than R are bound (neither can cross the
    forbidden distance to escape); separation >= R breaks the chain.  On a
    ring the gap sequence includes the wrap-around gap, and a cluster may
    wrap; if every gap is < R the whole ring is one cluster, anchored after
    the largest gap.
    """
    R = spec.critical_distance
    n = len(occupied)
    if n == 1:
        return [occupied]
    gaps = [occupied[i + 1] - occupied[i] for i in range(n - 1)]
    if spec.periodic:
        gaps.append(spec.n_sites - occupied[-1] + occupied[0])
        breaks = [i for i, g in enumerate(gaps) if g >= R]
        if not breaks:
            # fully bound ring: break at the widest gap for a canonical anchor
            breaks = [max(range(n), key=lambda i: gaps[i])]
        clusters = []
        for k, brk in enumerate(breaks):
            start = (brk + 1) % n
            stop = breaks[(k + 1) % len(breaks)]
            sites = []
            i = start
            while True:
                sites.append(occupied[i])
                if i == stop:
                    break
                i = (i + 1) % n
            clusters.append(sites)
        return clusters
    clusters = [[occupied[0]]]
    for site, gap in zip(occupied[1:], gaps):
        if gap >= R:
            clusters.append([site])
        else:
            clusters[-1].append(site)
    return clusters


def classify_complexes(
    config: FockConfiguration, spec: LatticeSpec
) -> list[ComplexSpecies]:
    """Partition a Zeno configuration into free bosons and bound complexes."""
    if not is_zeno_state(config, spec):
        raise ValueError("configuration is not in the Zeno subspace")
    occupied = list(config.occupied_sites)
    if not occupied:
        return []
    species = []
    for sites in _cluster_sites(occupied, spec):
        anchor = sites[0]
        offsets = tuple((s - anchor) % spec.n_sites if spec.periodic else s - anchor
                        for s in sites)
        m = len(offsets)
        extent = offsets[-1]
        if m == 1:
            kind = ComplexKind.FREE
        elif extent < spec.critical_distance:
            kind = ComplexKind.TYPE_ONE
        else:
            kind = ComplexKind.TYPE_TWO
        species.append(
            ComplexSpecies(
                kind=kind, offsets=offsets, boson_count=m, extent=extent, anchor=anchor
            )
        )
    return species
