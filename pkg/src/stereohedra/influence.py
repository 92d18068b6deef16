"""Facet-count bounds from pruned regions.

If ``T'`` (placement ``rho``) and ``T1`` (placement ``rho'``) are tiles of the
same type with ``T'`` in the extended region of the prototile, then the
isometry ``mu = rho o rho'^-1`` maps ``T1`` onto ``T'``.  Any Voronoi neighbour
of a base point in the prototile is the image under such a ``mu`` (restricted
to the group), so counting the distinct ``mu`` that belong to the group bounds
the number of facets.

The set of pairs is symmetric, hence ``rho o rho'^-1`` and ``rho' o rho^-1``
range over the same set of isometries; both orders are generated anyway.

Isometries are packed into int64 codes for speed: the signed permutation
matrix in base 3 followed by the translation (times 8, offset by 128) in
base 256.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import SCALE, TILE_TYPES, QuarterGroup, coset_lookup
from .geometry import Isometry
from .pruning import Region

_POW3 = 3 ** np.arange(8, -1, -1, dtype=np.int64)
_OFF = 128


def encode(L: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Codes for arrays of linear parts (..., 3, 3) and scaled translations (..., 3)."""
    lc = ((L.reshape(L.shape[:-2] + (9,)) + 1) * _POW3).sum(axis=-1)
    tt = T + _OFF
    if (tt < 0).any() or (tt > 255).any():
        raise OverflowError("translation outside the encodable range")
    tc = (tt[..., 0] << 16) | (tt[..., 1] << 8) | tt[..., 2]
    return (lc << 24) | tc


def decode(code: int) -> Isometry:
    code = int(code)
    lc, tc = code >> 24, code & 0xFFFFFF
    L = []
    for p in _POW3:
        L.append(lc // int(p) - 1)
        lc %= int(p)
    t = [((tc >> 16) & 0xFF) - _OFF, ((tc >> 8) & 0xFF) - _OFF, (tc & 0xFF) - _OFF]
    return Isometry.from_scaled_key(tuple(L) + tuple(t), SCALE)


def encode_isometry(g: Isometry) -> int:
    k = g.scaled_key(SCALE)
    return int(encode(np.array(k[:9]).reshape(1, 3, 3), np.array([k[9:]]))[0])


IDENTITY_CODE = encode_isometry(Isometry.identity())


def _reduced(codes: np.ndarray) -> np.ndarray:
    """Codes with the translation taken modulo Z^3."""
    tc = codes & 0xFFFFFF
    parts = [((tc >> s) & 0xFF) - _OFF for s in (16, 8, 0)]
    red = [(p % SCALE) + _OFF for p in parts]
    return (codes >> 24 << 24) | (red[0] << 16) | (red[1] << 8) | red[2]


def _coset_table() -> tuple[np.ndarray, np.ndarray]:
    keys, vals = [], []
    for k, c in coset_lookup().items():
        keys.append(int(encode(np.array(k[:9]).reshape(1, 3, 3), np.array([k[9:]]))[0]))
        vals.append(c)
    order = np.argsort(keys)
    return np.array(keys)[order], np.array(vals)[order]


_COSET_KEYS, _COSET_VALS = None, None


def cosets_of(codes: np.ndarray) -> np.ndarray:
    """Coset index (1..8) of each encoded isometry; 0 if not in N(Q)."""
    global _COSET_KEYS, _COSET_VALS
    if _COSET_KEYS is None:
        _COSET_KEYS, _COSET_VALS = _coset_table()
    red = _reduced(np.asarray(codes, dtype=np.int64))
    pos = np.searchsorted(_COSET_KEYS, red)
    pos = np.clip(pos, 0, len(_COSET_KEYS) - 1)
    hit = _COSET_KEYS[pos] == red
    return np.where(hit, _COSET_VALS[pos], 0)


def _pair_codes(L: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Codes of ``rho_a o rho_b^-1`` for all ordered pairs (a, b)."""
    Lm = np.einsum("aij,bkj->abik", L, L)  # L_a L_b^T
    Tm = T[:, None, :] - np.einsum("abik,bk->abi", Lm, T)
    return np.unique(encode(Lm, Tm))


def candidate_codes(region: Region) -> np.ndarray:
    pop = region.population
    out = []
    for t in TILE_TYPES:
        idx = np.nonzero(region.alive & (pop.types == t))[0]
        if len(idx):
            out.append(_pair_codes(pop.L[idx], pop.T[idx]))
    if not out:
        return np.zeros(0, dtype=np.int64)
    codes = np.unique(np.concatenate(out))
    return codes[codes != IDENTITY_CODE]


def neighbor_candidates(region: Region) -> set[Isometry]:
    """All ``rho o rho'^-1`` (both orders) over same-type survivors, identity removed."""
    return {decode(c) for c in candidate_codes(region)}


@dataclass(frozen=True)
class NeighborSet:
    group: QuarterGroup
    prototile: str
    codes: np.ndarray

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, g: Isometry) -> bool:
        c = encode_isometry(g)
        i = np.searchsorted(self.codes, c)
        return bool(i < len(self.codes) and self.codes[i] == c)

    def members(self) -> list[Isometry]:
        return [decode(c) for c in self.codes]


def neighbor_set(G: QuarterGroup, region: Region) -> NeighborSet:
    codes = candidate_codes(region)
    cos = cosets_of(codes)
    if (cos == 0).any():
        raise RuntimeError("a composed placement fell outside N(Q)")
    keep = np.isin(cos, np.array(G.cosets))
    return NeighborSet(G, region.prototile, np.sort(codes[keep]))


def count_bound(G: QuarterGroup, tile_type: str, region: Region) -> int:
    if region.prototile != tile_type:
        raise ValueError("region was built for a different prototile")
    return len(neighbor_set(G, region))
