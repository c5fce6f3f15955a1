"""Subset distributions: generators, union transform, chain decomposition."""

import math
from math import comb

import numpy as np
import pytest

from uclab.entropy_core import binary_entropy, union_prob
from uclab.errors import DomainError
from uclab.subset_dist import (
    bit_chain,
    check_theorem1,
    dist_entropy,
    gated_product,
    make_distribution,
    marginal,
    marginals,
    product_bernoulli,
    random_marginal_bounded,
    subset_kl,
    two_point,
    union_distribution,
)

# 4 * H(0.1), 30-digit evaluation
H_PROD_4_01 = 1.875982374357124885
# H(0.1) and H(0.19)
H_01 = 0.46899559358928122125
H_019 = 0.70147145988389742401


def _entropy_oracle(masses):
    return -math.fsum(m * math.log2(m) for m in masses if m > 0)


class TestMakeDistribution:
    def test_point_mass_empty(self):
        d = make_distribution(2, [(0, 1.0)])
        assert dist_entropy(d) == 0.0
        assert d.support_size == 1

    def test_bernoulli_bit(self):
        d = make_distribution(1, [(1, 0.3), (0, 0.7)])
        assert marginal(d, 1) == pytest.approx(0.3, abs=1e-15)

    def test_duplicates_merge(self):
        d = make_distribution(3, [(5, 0.3), (5, 0.2), (0, 0.5)])
        assert d.support_size == 2
        assert d.mass_of(5) == pytest.approx(0.5, abs=1e-15)

    def test_mask_out_of_range(self):
        with pytest.raises(DomainError):
            make_distribution(2, [(4, 1.0)])

    def test_negative_mass_beyond_slack(self):
        with pytest.raises(DomainError):
            make_distribution(2, [(0, -0.5), (1, 1.5)])

    def test_zero_total(self):
        with pytest.raises(DomainError):
            make_distribution(2, [(0, 0.0), (1, 0.0)])

    def test_residual_recorded(self):
        d = make_distribution(2, [(0, 2.0), (1, 2.0)])
        assert d.residual == pytest.approx(3.0)
        assert float(np.sum(d.masses)) == pytest.approx(1.0, abs=1e-12)


class TestProductBernoulli:
    def test_entropy_closed_form(self):
        d = product_bernoulli(4, 0.1)
        assert dist_entropy(d) == pytest.approx(H_PROD_4_01, abs=1e-9)

    def test_gate_zero_is_point_mass(self):
        d = product_bernoulli(5, 0.0)
        assert d.support_size == 1
        assert d.mass_of(0) == 1.0

    def test_uniform_cube(self):
        d = product_bernoulli(3, 0.5)
        assert d.support_size == 8
        assert dist_entropy(d) == pytest.approx(3.0, abs=1e-12)

    def test_marginals(self):
        d = product_bernoulli(5, 0.2)
        for i in range(1, 6):
            assert marginal(d, i) == pytest.approx(0.2, abs=1e-12)


class TestTwoPoint:
    def test_entropy(self):
        assert dist_entropy(two_point(5, 0.1)) == pytest.approx(H_01, abs=1e-9)

    def test_degenerate(self):
        d = two_point(5, 0.0)
        assert d.support_size == 1
        assert dist_entropy(d) == 0.0

    def test_union_entropy(self):
        u = union_distribution(two_point(5, 0.1))
        assert dist_entropy(u) == pytest.approx(H_019, abs=1e-9)

    def test_union_is_two_point_of_union_prob(self):
        u = union_distribution(two_point(6, 0.3))
        v = two_point(6, union_prob(0.3, 0.3))
        for mask in (0, 63):
            assert u.mass_of(mask) == pytest.approx(v.mass_of(mask), abs=1e-12)


class TestGatedProduct:
    def test_entropy_closed_form(self):
        for n, p, q in [(2, 0.1, 0.99), (6, 0.01, 0.99), (8, 0.3, 0.6)]:
            d = gated_product(n, p, q)
            expected = binary_entropy(p) + p * binary_entropy(q) * (n - 1)
            assert dist_entropy(d) == pytest.approx(expected, abs=1e-9)

    def test_closed_gate(self):
        d = gated_product(4, 0.0, 0.99)
        assert d.support_size == 1
        assert d.mass_of(0) == 1.0

    def test_tail_marginal(self):
        d = gated_product(4, 0.2, 0.7)
        # direct summation oracle for Pr[i in A], i >= 2
        direct = math.fsum(m for mask, m in d.items() if (mask >> 2) & 1)
        assert direct == pytest.approx(0.2 * 0.7, abs=1e-12)
        assert marginal(d, 3) == pytest.approx(direct, abs=1e-15)
        assert marginal(d, 1) == pytest.approx(0.2, abs=1e-12)

    def test_union_entropy_exact_enumeration_oracle(self):
        # independent oracle: P(U = S) enumerated by |S \ {1}| directly
        for n, p, q in [(2, 0.01, 0.99), (6, 0.01, 0.99), (6, 0.1, 0.99)]:
            r = 2 * q - q * q
            probs = [(1 - p) ** 2]
            for k in range(n):
                mass = (
                    2 * p * (1 - p) * q**k * (1 - q) ** (n - 1 - k)
                    + p * p * r**k * (1 - r) ** (n - 1 - k)
                )
                probs.extend([mass] * comb(n - 1, k))
            oracle = _entropy_oracle(probs)
            computed = dist_entropy(union_distribution(gated_product(n, p, q)))
            assert computed == pytest.approx(oracle, abs=1e-12)

    def test_union_entropy_exceeds_documented_closed_form(self):
        # the often-quoted closed form conditions on both gate bits and is a
        # strict lower bound; the exact value sits measurably above it
        n, p, q = 6, 0.01, 0.99
        computed = dist_entropy(union_distribution(gated_product(n, p, q)))
        closed = (
            binary_entropy(2 * p - p * p)
            + 2 * p * (1 - p) * binary_entropy(q) * (n - 1)
            + p * p * binary_entropy(2 * q - q * q) * (n - 1)
        )
        assert computed - closed > 1e-7
        assert computed - closed < 1e-4


class TestUnionDistribution:
    def test_point_mass_idempotent(self):
        d = make_distribution(4, [(0b1010, 1.0)])
        u = union_distribution(d)
        assert u.support_size == 1
        assert u.mass_of(0b1010) == 1.0

    def test_product_law(self):
        for n, p in [(4, 0.1), (8, 0.01), (6, 0.5)]:
            u = union_distribution(product_bernoulli(n, p), path="dense")
            v = product_bernoulli(n, union_prob(p, p))
            worst = max(
                abs(u.mass_of(mask) - v.mass_of(mask)) for mask in range(1 << n)
            )
            assert worst <= 1e-12

    def test_dense_sparse_agreement_randomized(self):
        rng = np.random.default_rng(42)
        for _ in range(60):
            n = int(rng.integers(2, 15))
            support = int(rng.integers(1, min(201, 1 << n)))
            masks = rng.choice(1 << n, size=support, replace=False)
            w = rng.exponential(1.0, support)
            d = make_distribution(n, zip(masks.tolist(), w.tolist()))
            a = union_distribution(d, path="dense")
            b = union_distribution(d, path="sparse")
            keys = set(a.masks.tolist()) | set(b.masks.tolist())
            worst = max(abs(a.mass_of(k) - b.mass_of(k)) for k in keys)
            assert worst <= 1e-12

    def test_auto_path_densifies_when_pairs_dominate(self):
        rng = np.random.default_rng(50)
        n = 6
        masks = rng.choice(1 << n, size=40, replace=False)  # 40^2 > 2^6 * 6
        w = rng.exponential(1.0, 40)
        d = make_distribution(n, zip(masks.tolist(), w.tolist()))
        assert union_distribution(d).representation == "dense"
        small = make_distribution(14, [(1, 0.5), (2, 0.5)])
        assert union_distribution(small).representation == "sparse"
        dense_in = product_bernoulli(4, 0.3)
        assert union_distribution(dense_in).representation == "dense"

    def test_union_marginal_identity_randomized(self):
        # the union bit fires unless both copies miss: 1 - (1 - m)^2
        rng = np.random.default_rng(43)
        for _ in range(40):
            n = int(rng.integers(2, 10))
            support = int(rng.integers(1, 1 << n))
            masks = rng.choice(1 << n, size=support, replace=False)
            w = rng.exponential(1.0, support)
            d = make_distribution(n, zip(masks.tolist(), w.tolist()))
            u = union_distribution(d)
            for i in range(1, n + 1):
                m = marginal(d, i)
                assert marginal(u, i) == pytest.approx(
                    2 * m - m * m, abs=1e-12
                )


class TestBitChain:
    def test_product_all_bits_independent(self):
        p = 0.07
        chain = bit_chain(product_bernoulli(5, p))
        for h, inst in zip(chain.h_bits, chain.instances):
            assert h == pytest.approx(binary_entropy(p), abs=1e-12)
            assert np.allclose(np.asarray(inst.probs), p, atol=1e-12)

    def test_two_point_first_bit_decides(self):
        chain = bit_chain(two_point(6, 0.2))
        assert chain.h_bits[0] == pytest.approx(binary_entropy(0.2), abs=1e-12)
        for h in chain.h_bits[1:]:
            assert h == pytest.approx(0.0, abs=1e-15)

    def test_gated_product_bits(self):
        n, p, q = 7, 0.04, 0.99
        chain = bit_chain(gated_product(n, p, q))
        assert chain.h_bits[0] == pytest.approx(binary_entropy(p), abs=1e-12)
        for h in chain.h_bits[1:]:
            assert h == pytest.approx(p * binary_entropy(q), abs=1e-9)

    def test_chain_rule_randomized(self):
        rng = np.random.default_rng(44)
        for _ in range(60):
            n = int(rng.integers(1, 13))
            support = int(rng.integers(1, min(80, 1 << n) + 1))
            masks = rng.choice(1 << n, size=support, replace=False)
            w = rng.exponential(1.0, support)
            d = make_distribution(n, zip(masks.tolist(), w.tolist()))
            chain = bit_chain(d)
            assert chain.total == pytest.approx(dist_entropy(d), abs=1e-9)

    def test_chain_rule_dense(self):
        d = product_bernoulli(8, 0.13)
        chain = bit_chain(d)
        assert chain.total == pytest.approx(dist_entropy(d), abs=1e-9)


class TestCheckTheorem1:
    def test_point_mass_passes_vacuously(self):
        report = check_theorem1(make_distribution(3, [(0, 1.0)]))
        assert report.passed
        assert report.summary["hypothesis_ok"]
        assert report.summary["h_a"] == 0.0
        assert report.summary["h_union"] == 0.0

    def test_product_global_ratio(self):
        report = check_theorem1(product_bernoulli(6, 0.01))
        assert report.passed
        assert report.status == "ok"
        expected = binary_entropy(union_prob(0.01, 0.01)) / binary_entropy(0.01)
        assert report.summary["global_ratio"] == pytest.approx(
            expected, abs=1e-9
        )
        assert report.summary["global_ratio"] == pytest.approx(1.7437, abs=1e-3)

    def test_two_point_global_ratio(self):
        report = check_theorem1(two_point(8, 0.01))
        assert report.passed
        assert report.summary["global_ratio"] == pytest.approx(1.7437, abs=1e-3)

    def test_hypothesis_violation_flagged(self):
        report = check_theorem1(product_bernoulli(4, 0.5))
        assert not report.summary["hypothesis_ok"]
        assert report.status == "hypothesis-violation"

    def test_data_processing_holds_even_without_hypothesis(self):
        # per-bit outer >= inner needs no marginal bound at all
        rng = np.random.default_rng(45)
        for _ in range(40):
            n = int(rng.integers(2, 8))
            support = int(rng.integers(2, 1 << n))
            masks = rng.choice(1 << n, size=support, replace=False)
            w = rng.exponential(1.0, support)
            d = make_distribution(n, zip(masks.tolist(), w.tolist()))
            report = check_theorem1(d)
            assert report.checks[0].margin >= -1e-9


class TestRandomMarginalBounded:
    def test_marginals_bounded(self):
        for seed in range(30):
            d = random_marginal_bounded(8, 24, mu=0.01, seed=seed)
            assert max(marginals(d)) <= 0.01 + 1e-12

    def test_deterministic(self):
        a = random_marginal_bounded(6, 16, seed=5)
        b = random_marginal_bounded(6, 16, seed=5)
        assert np.array_equal(a.masks, b.masks)
        assert np.array_equal(a.masses, b.masses)


class TestChainInstanceWiring:
    def test_bit_chain_instances_pass_verification(self):
        # the per-bit instances extracted here satisfy the instance-level
        # inequalities whenever the marginals satisfy the mean bound
        from uclab.lemma_engine import verify_instance

        rng = np.random.default_rng(46)
        for _ in range(60):
            n = int(rng.integers(2, 10))
            d = random_marginal_bounded(
                n, 16, mu=0.01, seed=int(rng.integers(2**63))
            )
            for inst in bit_chain(d).instances:
                report = verify_instance(inst)
                assert report.hypothesis_ok
                assert report.passed


class TestSubsetKL:
    def test_self_is_zero(self):
        d = product_bernoulli(4, 0.2)
        assert subset_kl(d, d) == pytest.approx(0.0, abs=1e-12)

    def test_escape_is_infinite(self):
        p = make_distribution(2, [(3, 1.0)])
        q = make_distribution(2, [(1, 0.5), (2, 0.5)])
        assert subset_kl(p, q) == math.inf

    def test_mismatched_ground_sets(self):
        from uclab.errors import UsageError

        with pytest.raises(UsageError):
            subset_kl(make_distribution(2, [(0, 1.0)]), make_distribution(3, [(0, 1.0)]))
