"""Probability distributions over subsets of a ground set [n].

A subset is an n-bit mask (element i occupies bit i-1).  Distributions keep
a sparse support (sorted masks with positive masses) plus a representation
tag; dense full-table storage is available for n <= 24 and powers the
O(2^n n) union transform.  The law of A union B for iid draws A, B is
computed either densely -- subset-cumulative transform, pointwise square,
inverse transform -- or sparsely by accumulating pairwise unions; the two
paths agree to floating-point noise.

The per-bit chain decomposition reveals bits in element order: for each i it
groups the support by the realized prefix (bits below i), producing history
weights q_c and conditional bit biases p_c, i.e. exactly the weighted
bit-law instances consumed by lemma_engine.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels as kernels
from .entropy_core import DEFAULT_MU, DEFAULT_THRESHOLD, as_prob
from .errors import CapabilityError, DomainError, UsageError
from .lemma_engine import DEFAULT_RATIO, LemmaInstance, verify_instance
from .reports import STATUS_HYPOTHESIS, VerificationReport

MAX_N = 62
DENSE_MAX_N = 24
MASS_SLACK = 1e-12
_SPARSE_PAIR_CAP = 40_000_000


class SubsetDistribution:
    """Immutable distribution over n-bit masks with sparse or dense tag."""

    def __init__(self, n, masks, masses, representation, residual=0.0):
        self.n = int(n)
        self.masks = masks
        self.masses = masses
        self.representation = representation
        self.residual = float(residual)
        masks.flags.writeable = False
        masses.flags.writeable = False

    @property
    def support_size(self):
        return int(self.masks.shape[0])

    @cached_property
    def dense_table(self):
        if self.n > DENSE_MAX_N:
            raise CapabilityError(f"dense table requires n <= {DENSE_MAX_N}")
        table = np.zeros(1 << self.n, dtype=np.float64)
        table[self.masks] = self.masses
        return table

    def items(self):
        return zip(self.masks.tolist(), self.masses.tolist())

    def mass_of(self, mask):
        idx = int(np.searchsorted(self.masks, mask))
        if idx < self.support_size and int(self.masks[idx]) == int(mask):
            return float(self.masses[idx])
        return 0.0


def make_distribution(n, pairs, representation="sparse"):
    """Validated, renormalized distribution; duplicate masks are merged."""
    n = int(n)
    if not 1 <= n <= MAX_N:
        raise DomainError(f"ground-set size must lie in [1, {MAX_N}], got {n}")
    if representation not in ("sparse", "dense"):
        raise UsageError(f"unknown representation {representation!r}")
    if representation == "dense" and n > DENSE_MAX_N:
        raise CapabilityError(f"dense representation requires n <= {DENSE_MAX_N}")
    masks = []
    weights = []
    limit = 1 << n
    for mask, w in pairs:
        m = int(mask)
        if not 0 <= m < limit:
            raise DomainError(f"mask {m} out of range for n={n}")
        w = float(w)
        if math.isnan(w) or math.isinf(w) or w < -MASS_SLACK:
            raise DomainError(f"mass must be nonnegative and finite, got {w!r}")
        masks.append(m)
        weights.append(max(w, 0.0))
    if not masks:
        raise DomainError("distribution needs at least one entry")
    mask_arr = np.array(masks, dtype=np.int64)
    weight_arr = np.array(weights, dtype=np.float64)
    uniq, inverse = np.unique(mask_arr, return_inverse=True)
    acc = np.zeros(uniq.shape[0], dtype=np.float64)
    np.add.at(acc, inverse, weight_arr)
    total = float(acc.sum())
    if total <= 0.0:
        raise DomainError("total mass must be positive")
    acc /= total
    keep = acc > 0.0
    return SubsetDistribution(
        n, uniq[keep], acc[keep], representation, residual=total - 1.0
    )


def _popcounts(n):
    pc = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        pc = np.concatenate([pc, pc + 1])
    return pc


def product_bernoulli(n, p):
    """Each element included independently with probability p (dense)."""
    if n > DENSE_MAX_N:
        raise CapabilityError(f"product distribution requires n <= {DENSE_MAX_N}")
    p = as_prob(p, "p")
    pc = _popcounts(n)
    table = np.power(p, pc) * np.power(1.0 - p, n - pc)
    return make_distribution(
        n, zip(range(1 << n), table.tolist()), representation="dense"
    )


def two_point(n, p):
    """Full set [n] with probability p, empty set otherwise (sparse)."""
    p = as_prob(p, "p")
    full = (1 << n) - 1
    return make_distribution(n, [(0, 1.0 - p), (full, p)])


def gated_product(n, p, q):
    """Bit 1 fires with probability p; only then bits 2..n are iid q (dense).

    With the gate closed the set is empty, so the entropy splits as
    H(p) + p H(q) (n-1).
    """
    if n < 2:
        raise DomainError("gated distribution needs n >= 2")
    if n > DENSE_MAX_N:
        raise CapabilityError(f"gated distribution requires n <= {DENSE_MAX_N}")
    p, q = as_prob(p, "p"), as_prob(q, "q")
    pc = _popcounts(n - 1)
    tail = np.power(q, pc) * np.power(1.0 - q, (n - 1) - pc)
    pairs = [(0, 1.0 - p)]
    for sub in range(1 << (n - 1)):
        pairs.append((1 | (sub << 1), p * float(tail[sub])))
    return make_distribution(n, pairs, representation="dense")


def union_distribution(d, path="auto"):
    """Law of A union B for A, B iid from d.

    The dense path runs the lattice transform in O(2^n n); the sparse path
    accumulates the m^2 pairwise unions.  ``auto`` densifies when the input
    is dense or when m^2 exceeds the transform cost.
    """
    m = d.support_size
    if path == "auto":
        dense_ok = d.n <= DENSE_MAX_N
        path = (
            "dense"
            if dense_ok
            and (d.representation == "dense" or m * m > (1 << d.n) * d.n)
            else "sparse"
        )
    if path == "dense":
        out = kernels.subset_union_square(d.dense_table, d.n)
        np.clip(out, 0.0, None, out=out)  # inverse transform rounding dust
        support = np.nonzero(out)[0]
        return make_distribution(
            d.n, zip(support.tolist(), out[support].tolist()),
            representation="dense",
        )
    if path != "sparse":
        raise UsageError(f"unknown union path {path!r}")
    if m * m > _SPARSE_PAIR_CAP:
        raise CapabilityError(
            f"sparse union needs support^2 <= {_SPARSE_PAIR_CAP}; use the dense path"
        )
    ors = np.bitwise_or.outer(d.masks, d.masks).ravel()
    w = np.outer(d.masses, d.masses).ravel()
    uniq, inverse = np.unique(ors, return_inverse=True)
    acc = np.zeros(uniq.shape[0], dtype=np.float64)
    np.add.at(acc, inverse, w)
    return make_distribution(d.n, zip(uniq.tolist(), acc.tolist()))


def marginal(d, i):
    """Pr[i in A] for 1-based element i."""
    if not 1 <= i <= d.n:
        raise DomainError(f"element index must lie in [1, {d.n}], got {i}")
    hit = (d.masks >> (i - 1)) & 1 == 1
    return float(d.masses[hit].sum())


def marginals(d):
    return [marginal(d, i) for i in range(1, d.n + 1)]


def dist_entropy(d):
    """Shannon entropy of the subset distribution, in bits."""
    return float(kernels.entropy_sum(d.masses))


def subset_kl(p, q):
    """D(p || q) over masks, +inf when p's support escapes q's."""
    if p.n != q.n:
        raise UsageError("distributions must share the same ground set")
    idx = np.searchsorted(q.masks, p.masks)
    idx_clipped = np.minimum(idx, q.support_size - 1)
    matched = q.masks[idx_clipped] == p.masks
    if not bool(matched.all()):
        return math.inf
    qm = q.masses[idx_clipped]
    pm = p.masses
    return float((pm * (np.log2(pm) - np.log2(qm))).sum())


@dataclass(frozen=True)
class BitChainDecomposition:
    """Per-bit conditional entropies and their history instances.

    ``h_bits[i-1]`` is H(A_i | A_{<i}) and ``instances[i-1]`` carries the
    realized-prefix weights and conditional biases for bit i.  The h_bits
    sum to the distribution entropy (chain rule).
    """

    n: int
    h_bits: tuple
    instances: tuple

    @property
    def total(self):
        return math.fsum(self.h_bits)


def bit_chain(d, mu=DEFAULT_MU, threshold=DEFAULT_THRESHOLD):
    """Chain-rule decomposition of d by revealing bits in element order."""
    h_bits = []
    instances = []
    dense = d.representation == "dense" and d.n <= DENSE_MAX_N
    table = d.dense_table if dense else None
    for i in range(1, d.n + 1):
        if dense:
            view = table.reshape(1 << (d.n - i), 2, 1 << (i - 1))
            sums = view.sum(axis=0)  # [bit value, prefix]
            qc_all = sums[0] + sums[1]
            keep = qc_all > 0.0
            qc = qc_all[keep]
            pc = sums[1][keep] / qc
        else:
            prefix = d.masks & ((1 << (i - 1)) - 1)
            bit = (d.masks >> (i - 1)) & 1
            uniq, inverse = np.unique(prefix, return_inverse=True)
            qc = np.zeros(uniq.shape[0], dtype=np.float64)
            np.add.at(qc, inverse, d.masses)
            ones = np.zeros(uniq.shape[0], dtype=np.float64)
            hot = bit == 1
            np.add.at(ones, inverse[hot], d.masses[hot])
            pc = ones / qc
        inst = LemmaInstance.from_pairs(
            zip(qc.tolist(), np.clip(pc, 0.0, 1.0).tolist()),
            mu=mu,
            threshold=threshold,
        )
        instances.append(inst)
        h_bits.append(
            float(np.asarray(inst.weights) @ kernels.binary_entropy_many(
                np.asarray(inst.probs)
            ))
        )
    return BitChainDecomposition(d.n, tuple(h_bits), tuple(instances))


def check_theorem1(d, ratio=DEFAULT_RATIO, mu=DEFAULT_MU):
    """End-to-end union-entropy check: global bound plus per-bit chains.

    For each bit the outer conditional entropy (union law conditioned on
    its own prefix) must dominate the inner one (conditioned on both source
    prefixes), which in turn must dominate ratio times the source bit
    entropy.  Marginals above mu make the run a hypothesis violation, not a
    failure.
    """
    margs = marginals(d)
    hypothesis_ok = all(m <= mu + 1e-12 for m in margs)
    chain_a = bit_chain(d, mu=mu)
    union = union_distribution(d)
    chain_u = bit_chain(union, mu=mu)
    per_bit = []
    worst_outer = (math.inf, None)
    worst_inner = (math.inf, None)
    for i in range(d.n):
        lhs_outer = chain_u.h_bits[i]
        lhs_inner = verify_instance(chain_a.instances[i], ratio).lhs_total
        rhs = ratio * chain_a.h_bits[i]
        per_bit.append(
            {
                "bit": i + 1,
                "lhs_outer": lhs_outer,
                "lhs_inner": lhs_inner,
                "rhs": rhs,
            }
        )
        if lhs_outer - lhs_inner < worst_outer[0]:
            worst_outer = (lhs_outer - lhs_inner, i + 1)
        if lhs_inner - rhs < worst_inner[0]:
            worst_inner = (lhs_inner - rhs, i + 1)
    h_a = dist_entropy(d)
    h_u = dist_entropy(union)
    report = VerificationReport(title="union entropy lower bound")
    report.add_check(
        "per-bit: outer conditioning dominates inner",
        worst_outer[0] if d.n else 0.0,
        0.0,
        1e-9,
        witness={"bit": worst_outer[1]},
    )
    report.add_check(
        "per-bit: inner dominates scaled source bit entropy",
        worst_inner[0] if d.n else 0.0,
        0.0,
        1e-9,
        witness={"bit": worst_inner[1]},
    )
    report.add_check("global union entropy bound", h_u, ratio * h_a, 1e-9)
    report.summary = {
        "ratio": ratio,
        "mu": mu,
        "hypothesis_ok": hypothesis_ok,
        "h_a": h_a,
        "h_union": h_u,
        "max_marginal": max(margs),
        "per_bit": per_bit,
    }
    if h_a > 0.0:
        report.summary["global_ratio"] = h_u / h_a
    if not hypothesis_ok:
        report.status = STATUS_HYPOTHESIS
    report.finalize_status()
    return report


def random_marginal_bounded(n, max_support, mu=DEFAULT_MU, seed=0):
    """Seeded sparse distribution with every marginal at most mu.

    Draws a random support with normalized exponential weights, then scales
    all nonempty-mask mass down (conditioning the empty set up) until the
    largest marginal reaches mu.
    """
    if not 1 <= n <= DENSE_MAX_N:
        raise DomainError(f"generator supports 1 <= n <= {DENSE_MAX_N}")
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, max_support + 1))
    m = min(m, 1 << n)
    masks = rng.choice(1 << n, size=m, replace=False)
    w = rng.exponential(1.0, m)
    w /= w.sum()
    if 0 not in masks:
        masks = np.concatenate([[0], masks])
        w = np.concatenate([[0.0], w])
    order = np.argsort(masks)
    masks, w = masks[order], w[order]
    nonempty = masks != 0
    worst = 0.0
    for i in range(1, n + 1):
        hit = (masks >> (i - 1)) & 1 == 1
        worst = max(worst, float(w[hit].sum()))
    if worst > mu:
        scale = mu / worst
        w = np.where(nonempty, w * scale, w)
        w[masks == 0] = 1.0 - float(w[nonempty].sum())
    return make_distribution(n, zip(masks.tolist(), w.tolist()))
