"""Exact convolution structure constants for the symmetric family.

For windows small enough to enumerate, the product measure of two coset
measures is computed exactly: every middle draw u is enumerated, the products
g.diag(u).h are sorted into cosets by the exact membership test, and the atom
probabilities come out as exact rationals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .blockmat import BlockMatrix, PermutationWord, embed
from .cosets import CosetTarget, GroupFamily, circ_N
from .geometry import sym_membership

__all__ = [
    "ENUMERATION_BUDGET",
    "ExactDistribution",
    "exact_convolution",
    "concentration_exact",
]

ENUMERATION_BUDGET = 5040  # largest (k + n_tail)! we agree to enumerate


@dataclass(frozen=True)
class ExactDistribution:
    """Atoms of a convolution of two coset measures, with exact probabilities."""

    atoms: tuple  # of (PermutationWord representative, Fraction probability)
    family: GroupFamily

    def total(self) -> Fraction:
        return sum((p for _, p in self.atoms), Fraction(0))

    def prob_of_coset(self, rep) -> Fraction:
        """Probability of the atom whose coset contains rep (0 if none does)."""
        target_word = rep.exact_permutation if isinstance(rep, BlockMatrix) else rep
        for atom_rep, p in self.atoms:
            if sym_membership(target_word, CosetTarget(
                    BlockMatrix.from_permutation(atom_rep, self.family.spec), self.family)):
                return p
        return Fraction(0)

    def max_atom(self):
        """(representative, probability) of the most likely atom."""
        return max(self.atoms, key=lambda a: a[1])

    def to_json_dict(self) -> dict:
        return {
            "family": self.family.kind,
            "alpha": self.family.spec.alpha,
            "k": self.family.spec.k,
            "n_tail": self.family.spec.n_tail,
            "m": self.family.spec.m,
            "atoms": [
                {"representative": list(rep.images), "prob": f"{p.numerator}/{p.denominator}"}
                for rep, p in self.atoms
            ],
        }


def _as_word(x) -> PermutationWord:
    if isinstance(x, BlockMatrix):
        if x.exact_permutation is None:
            raise ValueError("expected an exact permutation matrix")
        return x.exact_permutation
    if isinstance(x, PermutationWord):
        return x
    raise TypeError(f"expected PermutationWord or BlockMatrix, got {type(x).__name__}")


def _check_budget(spec, budget):
    w = spec.copy_size
    if math.factorial(w) > budget:
        raise ValueError(
            f"enumeration budget exceeded: (k + n_tail)! = {w}! = {math.factorial(w)} "
            f"> {budget}; shrink k + n_tail or raise the budget")


def _diag_word(spec, u: PermutationWord) -> PermutationWord:
    im = list(range(1, spec.dim + 1))
    w = spec.copy_size
    for c in range(spec.m):
        base = spec.alpha + c * w
        for j, t in enumerate(u.images):
            im[base + j] = base + t
    return PermutationWord(im)


def exact_convolution(g, h, family: GroupFamily, budget: int = ENUMERATION_BUDGET) -> ExactDistribution:
    """Exact distribution of the coset of g.diag(u).h over uniform u.

    g and h are full-degree permutations.  Classification assigns each product
    to the first previously discovered representative whose coset contains it,
    so the atom list is deterministic (enumeration is in lexicographic u
    order) and needs no canonical coset form.
    """
    if family.kind != "symmetric":
        raise ValueError(f"exact convolution needs the symmetric family, got {family.kind!r}")
    spec = family.spec
    _check_budget(spec, budget)
    gw, hw = _as_word(g), _as_word(h)
    if gw.degree != spec.dim or hw.degree != spec.dim:
        raise ValueError(f"g and h must have degree {spec.dim}")
    w = spec.copy_size

    reps: list[PermutationWord] = []
    targets: list[CosetTarget] = []
    counts: list[int] = []
    total = 0
    for images in itertools.permutations(range(1, w + 1)):
        u = PermutationWord(images)
        x = gw * _diag_word(spec, u) * hw
        total += 1
        for i, tgt in enumerate(targets):
            if sym_membership(x, tgt):
                counts[i] += 1
                break
        else:
            reps.append(x)
            targets.append(CosetTarget(BlockMatrix.from_permutation(x, spec), family))
            counts.append(1)
    atoms = tuple((rep, Fraction(cnt, total)) for rep, cnt in zip(reps, counts))
    return ExactDistribution(atoms, family)


def concentration_exact(g, h, family: GroupFamily, N_list,
                        budget: int = ENUMERATION_BUDGET) -> list[tuple[int, Fraction]]:
    """Exact probability that a uniform middle draw lands in the coset of the
    product representative, at each requested tail size.

    g and h are window permutations (degree alpha + m*k), re-embedded for
    every N.
    """
    gw, hw = _as_word(g), _as_word(h)
    base = family.spec
    if gw.degree != base.window or hw.degree != base.window:
        raise ValueError(f"g and h must be window permutations of degree {base.window}")
    out = []
    for N in N_list:
        fam_N = family.with_n_tail(int(N))
        spec_N = fam_N.spec
        gN = BlockMatrix.from_permutation(gw, None)
        hN = BlockMatrix.from_permutation(hw, None)
        target = circ_N(gN, hN, fam_N)
        dist = exact_convolution(
            embed(gN, spec_N), embed(hN, spec_N), fam_N, budget=budget)
        out.append((int(N), dist.prob_of_coset(target.representative)))
    return out
