"""Interleaving products of block group elements and samplers for their convolution measures.

Three (G, K) families are supported: complex unitary matrices with two-sided
real-orthogonal diagonal cosets, complex unitary matrices up to diagonal
unitary conjugation, and exact permutations with diagonal-copy cosets.  The
finite-size product of g and h is the double coset (or conjugacy class) of
g.J.h, where J swaps each copy's active block into its tail; samplers draw
from the one-middle-draw and three-draw convolution measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockmat import (
    BlockMatrix,
    BlockSpec,
    PermutationWord,
    build_JN,
    embed,
    embed_k,
)
from .haar import _as_generator, haar_orthogonal, haar_unitary, uniform_permutation

__all__ = [
    "FAMILY_KINDS",
    "GroupFamily",
    "CosetTarget",
    "circ_infinite",
    "circ_colligation",
    "circ_N",
    "sample_tau_tilde",
    "sample_tau_full",
]

FAMILY_KINDS = ("unitary_orthogonal", "unitary_conjugation", "symmetric")


@dataclass(frozen=True)
class GroupFamily:
    """Which (group, subgroup) pair is under study, plus the block partition."""

    kind: str
    spec: BlockSpec

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; expected one of {FAMILY_KINDS}")
        if self.kind == "unitary_conjugation" and self.spec.m != 1:
            raise ValueError("the conjugation family needs m=1")

    def with_n_tail(self, n_tail: int) -> "GroupFamily":
        return GroupFamily(self.kind, BlockSpec(self.spec.alpha, self.spec.k, n_tail, self.spec.m))


@dataclass(frozen=True)
class CosetTarget:
    """K.r.K (or the K-conjugacy class of r for the conjugation family)."""

    representative: BlockMatrix
    family: GroupFamily


def _split(g: BlockMatrix, alpha: int):
    a = g.entries[:alpha, :alpha]
    b = g.entries[:alpha, alpha:]
    c = g.entries[alpha:, :alpha]
    d = g.entries[alpha:, alpha:]
    return a, b, c, d


def _infer_alpha(g: BlockMatrix, h: BlockMatrix, alpha):
    if alpha is not None:
        return int(alpha)
    for side in (g, h):
        if side.spec is not None:
            return side.spec.alpha
    raise ValueError("alpha not given and neither input carries a spec")


def _maybe_exact(entries: np.ndarray, spec=None) -> BlockMatrix:
    # recover the word when entries form an exact 0-1 permutation matrix
    n = entries.shape[0]
    cols = np.argmax(entries.real, axis=0)
    word = cols + 1
    if sorted(word) == list(range(1, n + 1)):
        perm = PermutationWord(word)
        if np.abs(entries - perm.matrix()).max() == 0.0:
            return BlockMatrix(entries, spec, perm)
    return BlockMatrix(entries, spec)


def circ_infinite(g: BlockMatrix, h: BlockMatrix, alpha: int | None = None) -> BlockMatrix:
    """Size-stable product of corner groups: (alpha+k1) x (alpha+k2) -> alpha+k1+k2.

    With g = [[a, b], [c, d]] and h = [[p, q], [r, t]] split at the corner,
    the result is [[ap, b, aq], [cp, d, cq], [r, 0, t]].  Unitary inputs give
    a unitary output.  The two active sizes may differ.
    """
    alpha = _infer_alpha(g, h, alpha)
    a, b, c, d = _split(g, alpha)
    p, q, r, t = _split(h, alpha)
    k1 = g.dim - alpha
    k2 = h.dim - alpha
    out = np.zeros((alpha + k1 + k2, alpha + k1 + k2), dtype=complex)
    s0, s1, s2 = slice(0, alpha), slice(alpha, alpha + k1), slice(alpha + k1, alpha + k1 + k2)
    out[s0, s0] = a @ p
    out[s0, s1] = b
    out[s0, s2] = a @ q
    out[s1, s0] = c @ p
    out[s1, s1] = d
    out[s1, s2] = c @ q
    out[s2, s0] = r
    out[s2, s2] = t
    if g.exact_permutation is not None and h.exact_permutation is not None:
        return _maybe_exact(out)
    return BlockMatrix(out)


def circ_colligation(g: BlockMatrix, h: BlockMatrix, alpha: int | None = None) -> BlockMatrix:
    """Same representative formula as circ_infinite; the ambient equivalence is
    conjugacy by the corner-fixing subgroup rather than two-sided cosets."""
    return circ_infinite(g, h, alpha)


def circ_N(g: BlockMatrix, h: BlockMatrix, family: GroupFamily) -> CosetTarget:
    """Finite-size coset product: the class of embed(g) . J . embed(h).

    g and h live on the window (corner + active blocks); the representative is
    full-dimensional.  For the conjugation family the representative is
    embed(g) . J . embed(h) . J instead, so it stays in the same conjugacy
    picture (J is an involution).
    """
    spec = family.spec
    J = build_JN(spec)  # raises when n_tail < k
    rep = embed(g, spec) @ J @ embed(h, spec)
    if family.kind == "unitary_conjugation":
        rep = rep @ J
    if family.kind == "symmetric" and rep.exact_permutation is None:
        raise ValueError("symmetric family requires exact permutation inputs")
    return CosetTarget(rep, family)


def _draw_k(family: GroupFamily, gen: np.random.Generator) -> BlockMatrix:
    w = family.spec.copy_size
    if family.kind == "symmetric":
        return embed_k(uniform_permutation(w, gen), family.spec)
    if family.kind == "unitary_conjugation":
        return embed_k(haar_unitary(w, gen), family.spec)
    return embed_k(haar_orthogonal(w, gen), family.spec)


def _conj_transpose(x: BlockMatrix) -> BlockMatrix:
    if x.exact_permutation is not None:
        return x.inverse()
    return BlockMatrix(x.entries.conj().T, x.spec)


def _check_embedded(name: str, g: BlockMatrix, family: GroupFamily) -> None:
    if g.dim != family.spec.dim:
        raise ValueError(f"{name} must be embedded at full dimension {family.spec.dim}, got {g.dim}")
    if family.kind == "symmetric" and g.exact_permutation is None:
        raise ValueError(f"{name} must be an exact permutation for the symmetric family")


def sample_tau_tilde(g: BlockMatrix, h: BlockMatrix, family: GroupFamily, rng) -> BlockMatrix:
    """One draw from the single-middle-draw convolution measure.

    Returns g . X . h with X a fresh subgroup draw; for the conjugation family
    the sample is g . X . h . X^-1.
    """
    _check_embedded("g", g, family)
    _check_embedded("h", h, family)
    gen = _as_generator(rng)
    X = _draw_k(family, gen)
    out = g @ X @ h
    if family.kind == "unitary_conjugation":
        out = out @ _conj_transpose(X)
    return out


def sample_tau_full(g: BlockMatrix, h: BlockMatrix, family: GroupFamily, rng) -> BlockMatrix:
    """One draw from the fully smoothed convolution measure.

    k1.g.k2.h.k3 with three independent subgroup draws; for the conjugation
    family, z.(g.X.h.X^-1).z^-1 with independent X and z.
    """
    _check_embedded("g", g, family)
    _check_embedded("h", h, family)
    gen = _as_generator(rng)
    if family.kind == "unitary_conjugation":
        X = _draw_k(family, gen)
        z = _draw_k(family, gen)
        core = g @ X @ h @ _conj_transpose(X)
        return z @ core @ _conj_transpose(z)
    k1 = _draw_k(family, gen)
    k2 = _draw_k(family, gen)
    k3 = _draw_k(family, gen)
    return k1 @ g @ k2 @ h @ k3
