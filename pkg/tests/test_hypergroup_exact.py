from fractions import Fraction

import pytest

from cosetlab.blockmat import BlockMatrix, BlockSpec, PermutationWord, embed
from cosetlab.cosets import GroupFamily, circ_N
from cosetlab.geometry import sym_membership
from cosetlab.haar import RandomStream, uniform_permutation
from cosetlab.hypergroup_exact import (
    ENUMERATION_BUDGET,
    concentration_exact,
    exact_convolution,
)

SWAP = PermutationWord([2, 1])


def _family(alpha=1, k=1, N=3, m=1):
    return GroupFamily("symmetric", BlockSpec(alpha, k, N, m))


def _embedded(word, spec):
    return embed(BlockMatrix.from_permutation(word), spec)


class TestExactConvolution:
    def test_identity_inputs_concentrate_on_subgroup(self):
        fam = _family(N=2)
        e = PermutationWord.identity(fam.spec.dim)
        dist = exact_convolution(e, e, fam)
        assert len(dist.atoms) == 1
        rep, p = dist.atoms[0]
        assert p == Fraction(1)
        assert rep == e

    def test_swap_fixture_quarters(self):
        fam = _family(N=3)
        g = _embedded(SWAP, fam.spec)
        dist = exact_convolution(g, g, fam)
        assert dist.prob_of_coset(PermutationWord([3, 2, 1, 4, 5])) == Fraction(3, 4)
        assert dist.prob_of_coset(PermutationWord.identity(5)) == Fraction(1, 4)
        rep, p = dist.max_atom()
        assert p == Fraction(3, 4)
        assert sym_membership(rep, circ_N(
            BlockMatrix.from_permutation(SWAP), BlockMatrix.from_permutation(SWAP), fam))

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_hit_probability_closed_form(self, N):
        # the product coset carries all mass except the draws that fold the
        # pair back into the subgroup: exactly 1/(k+N) of them
        fam = _family(N=N)
        out = concentration_exact(SWAP, SWAP, fam, [N])
        assert out == [(N, Fraction(N, N + 1))]

    def test_concentration_exact_multiple_tails(self):
        fam = _family(N=2)
        out = concentration_exact(SWAP, SWAP, fam, [2, 3, 4])
        assert [p for _, p in out] == [Fraction(2, 3), Fraction(3, 4), Fraction(4, 5)]

    def test_budget_guard(self):
        fam = _family(N=7)  # 8! products
        e = PermutationWord.identity(fam.spec.dim)
        with pytest.raises(ValueError, match="budget"):
            exact_convolution(e, e, fam)
        with pytest.raises(ValueError, match="budget"):
            exact_convolution(
                PermutationWord.identity(5), PermutationWord.identity(5),
                _family(N=3), budget=10)
        assert ENUMERATION_BUDGET == 5040

    def test_wrong_family_rejected(self):
        fam = GroupFamily("unitary_orthogonal", BlockSpec(1, 1, 2, 1))
        with pytest.raises(ValueError):
            exact_convolution(PermutationWord.identity(4), PermutationWord.identity(4), fam)

    @pytest.mark.parametrize("alpha,k,N,m,seed", [
        (1, 1, 2, 1, 0), (0, 1, 3, 1, 1), (2, 1, 2, 1, 2), (1, 2, 2, 1, 3), (1, 1, 2, 2, 4),
    ])
    def test_probabilities_sum_to_one(self, alpha, k, N, m, seed):
        fam = GroupFamily("symmetric", BlockSpec(alpha, k, N, m))
        gen = RandomStream(100 + seed, 0).generator()
        g = uniform_permutation(fam.spec.dim, gen)
        h = uniform_permutation(fam.spec.dim, gen)
        dist = exact_convolution(g, h, fam)
        assert dist.total() == Fraction(1)

    def test_unique_maximal_atom(self):
        # convolutions of coset measures have a unique heaviest coset once the
        # copy size reaches 4; sweep every window pair
        import itertools

        fam = _family(N=3)
        for gi in itertools.permutations([1, 2]):
            for hi in itertools.permutations([1, 2]):
                g = _embedded(PermutationWord(gi), fam.spec)
                h = _embedded(PermutationWord(hi), fam.spec)
                probs = sorted((p for _, p in exact_convolution(g, h, fam).atoms),
                               reverse=True)
                if len(probs) > 1:
                    assert probs[0] > probs[1]

    def test_unique_maximal_atom_two_copies(self):
        import itertools

        fam = _family(N=3, m=2)
        ties = 0
        for gi in itertools.permutations([1, 2, 3]):
            for hi in itertools.permutations([1, 2, 3]):
                g = _embedded(PermutationWord(gi), fam.spec)
                h = _embedded(PermutationWord(hi), fam.spec)
                probs = sorted((p for _, p in exact_convolution(g, h, fam).atoms),
                               reverse=True)
                if len(probs) > 1 and probs[0] == probs[1]:
                    ties += 1
        assert ties == 0

    @pytest.mark.parametrize("seed", range(4))
    def test_inversion_symmetry(self, seed):
        # u -> u^-1 is a measure-preserving bijection carrying the atoms of
        # (g, h) onto the atoms of (h^-1, g^-1)
        fam = _family(N=2)
        gen = RandomStream(300 + seed, 0).generator()
        g = uniform_permutation(fam.spec.dim, gen)
        h = uniform_permutation(fam.spec.dim, gen)
        fwd = exact_convolution(g, h, fam)
        bwd = exact_convolution(h.inverse(), g.inverse(), fam)
        for rep, p in fwd.atoms:
            assert bwd.prob_of_coset(rep.inverse()) == p

    def test_monte_carlo_cross_check(self):
        from cosetlab.cosets import sample_tau_tilde

        fam = _family(alpha=0, k=1, N=2, m=2)
        spec = fam.spec
        gen = RandomStream(400, 0).generator()
        gw = uniform_permutation(spec.window, gen)
        hw = uniform_permutation(spec.window, gen)
        g = BlockMatrix.from_permutation(gw)
        h = BlockMatrix.from_permutation(hw)
        target = circ_N(g, h, fam)
        dist = exact_convolution(_embedded(gw, spec), _embedded(hw, spec), fam)
        p_exact = float(dist.prob_of_coset(target.representative))
        n = 300
        ge, he = _embedded(gw, spec), _embedded(hw, spec)
        hits = sum(
            sym_membership(sample_tau_tilde(ge, he, fam, RandomStream(401, i)), target)
            for i in range(n))
        se = (p_exact * (1 - p_exact) / n) ** 0.5
        assert abs(hits / n - p_exact) <= max(3 * se, 0.02)

    def test_json_shape(self):
        fam = _family(N=3)
        g = _embedded(SWAP, fam.spec)
        d = exact_convolution(g, g, fam).to_json_dict()
        assert d["family"] == "symmetric"
        assert (d["alpha"], d["k"], d["n_tail"], d["m"]) == (1, 1, 3, 1)
        probs = {a["prob"] for a in d["atoms"]}
        assert probs == {"1/4", "3/4"}
        for a in d["atoms"]:
            assert sorted(a["representative"]) == [1, 2, 3, 4, 5]
