"""Divergence-augmented union quantities and the gap search harness.

The gap functional is H(A union B) + D(A union B || A) - H(A).  For the
uniform distribution over a union-closed family the first two terms add up
to log2 |F| exactly, so the gap is zero; for arbitrary distributions with
all marginals below one half the gap's sign is an open matter, and a
negative value found by the search harness is a legitimate finding (it is
reported with a full witness, not treated as an error).  An infinite gap
certifies that the union's support escapes the source support; such states
are recorded but never selected as best.

Also houses the parity construction showing that conditional entropy can
collapse under a generic two-argument function even when the unconditional
entropies match, so no purely generic argument can replace the union.
"""

import math
from dataclasses import dataclass

import numpy as np

from .entropy_core import JointDistribution, conditional_entropy, entropy
from .errors import DomainError, UsageError
from .families import is_union_closed, uniform_distribution
from .reports import VerificationReport
from .subset_dist import (
    dist_entropy,
    make_distribution,
    marginals,
    subset_kl,
    union_distribution,
)

MARGINAL_CAP = 0.5 - 1e-6
SEARCH_MAX_N = 12
SEARCH_MAX_SUPPORT = 512


@dataclass(frozen=True)
class GapReport:
    """Components of H(A union B) + D(A union B || A) - H(A)."""

    h_union: float
    kl: float
    h_a: float
    gap: float
    marginal_max: float
    hypothesis_ok: bool

    def to_payload(self):
        return {
            "h_union": self.h_union,
            "kl": self.kl,
            "h_a": self.h_a,
            "gap": self.gap,
            "marginal_max": self.marginal_max,
            "hypothesis_ok": self.hypothesis_ok,
        }


def conjecture1_gap(d):
    """Gap report for one subset distribution."""
    union = union_distribution(d)
    kl = subset_kl(union, d)
    h_union = dist_entropy(union)
    h_a = dist_entropy(d)
    gap = h_union + kl - h_a if math.isfinite(kl) else math.inf
    marginal_max = max(marginals(d))
    return GapReport(
        h_union=h_union,
        kl=kl,
        h_a=h_a,
        gap=gap,
        marginal_max=marginal_max,
        hypothesis_ok=marginal_max < 0.5 and h_a > 0.0,
    )


def kl_identity_check(family):
    """For union-closed F: D + H(A union B) must equal log2 |F| exactly."""
    closed, witness = is_union_closed(family)
    if not closed:
        raise UsageError(
            f"family is not union-closed: union of {witness[0]} and "
            f"{witness[1]} is missing"
        )
    d = uniform_distribution(family)
    union = union_distribution(d)
    kl = subset_kl(union, d)
    h_union = dist_entropy(union)
    target = math.log2(family.size)
    report = VerificationReport(title="uniform-family divergence identity")
    residual = abs(kl + h_union - target)
    report.add_check("D + H(union) matches log2 |F|", -residual, 0.0, 1e-9)
    report.summary = {
        "family_size": family.size,
        "kl": kl,
        "h_union": h_union,
        "log2_size": target,
        "residual": residual,
    }
    report.finalize_status()
    return report


def _chain_masks(n, size, rng):
    """A random chain of nested masks; chains are trivially union-closed."""
    order = rng.permutation(n)
    masks = [0]
    mask = 0
    for el in order:
        mask |= 1 << int(el)
        masks.append(mask)
    rng.shuffle(masks)
    return sorted(masks[: max(2, min(size, n + 1))])


def _project_marginals(masks, weights):
    """Scale nonempty-mask mass down onto the empty set until marginals fit."""
    worst = 0.0
    arr = np.asarray(masks, dtype=np.int64)
    nbits = int(arr.max()).bit_length()
    for i in range(nbits):
        hit = (arr >> i) & 1 == 1
        worst = max(worst, float(weights[hit].sum()))
    if worst <= MARGINAL_CAP:
        return masks, weights
    scale = MARGINAL_CAP / worst
    weights = weights.copy()
    nonempty = arr != 0
    weights[nonempty] *= scale
    if 0 in masks:
        weights[masks.index(0)] += 1.0 - weights.sum()
        return masks, weights
    return [0] + list(masks), np.concatenate([[1.0 - weights.sum()], weights])


def search_conjecture1(n, support_size, seed, iters, restarts=8):
    """Annealed minimization of the gap over marginal-capped distributions.

    Moves transfer mass between support masks or mutate the support; states
    whose union support escapes (infinite gap) and states with zero entropy
    are rejected.  Returns (best GapReport, best distribution, run info).
    """
    if n > SEARCH_MAX_N:
        raise DomainError(f"search is limited to n <= {SEARCH_MAX_N}")
    if support_size > SEARCH_MAX_SUPPORT:
        raise DomainError(f"support size is limited to {SEARCH_MAX_SUPPORT}")
    if support_size < 2:
        raise DomainError("search needs support for at least two masks")
    children = np.random.SeedSequence(seed).spawn(restarts)
    best = None  # (gap, restart, GapReport, distribution)
    escapes = 0
    first_escape = None
    t0, t1 = 0.2, 1e-6
    cool = (t1 / t0) ** (1.0 / max(1, iters - 1))

    def evaluate(masks, weights):
        try:
            d = make_distribution(n, zip(masks, weights.tolist()))
        except DomainError:
            return None, None
        if d.support_size < 2:
            return None, None  # point mass: no entropy hypothesis
        return conjecture1_gap(d), d

    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        masks = _chain_masks(n, support_size, rng)
        weights = rng.exponential(1.0, len(masks))
        weights /= weights.sum()
        masks, weights = _project_marginals(masks, weights)
        state_gap, state_d = evaluate(masks, weights)
        if state_gap is None or not math.isfinite(state_gap.gap):
            masks = [0, (1 << n) - 1]
            weights = np.array([0.75, 0.25])
            state_gap, state_d = evaluate(masks, weights)
        if best is None or state_gap.gap < best[0]:
            best = (state_gap.gap, r, state_gap, state_d)
        temp = t0
        for _ in range(iters):
            cand_masks = list(masks)
            cand_weights = weights.copy()
            move = rng.random()
            if move < 0.7:
                i = int(rng.integers(len(cand_masks)))
                j = int(rng.integers(len(cand_masks)))
                delta = rng.uniform(0.0, cand_weights[i])
                cand_weights[i] -= delta
                cand_weights[j] += delta
            elif move < 0.85 and len(cand_masks) < support_size:
                newcomer = int(rng.integers(1 << n))
                if newcomer not in cand_masks:
                    donor = int(rng.integers(len(cand_masks)))
                    eps = cand_weights[donor] * rng.uniform(0.1, 0.5)
                    cand_weights[donor] -= eps
                    cand_masks.append(newcomer)
                    cand_weights = np.concatenate([cand_weights, [eps]])
            elif len(cand_masks) > 2:
                victim = int(rng.integers(len(cand_masks)))
                heir = (victim + 1) % len(cand_masks)
                cand_weights[heir] += cand_weights[victim]
                del cand_masks[victim]
                cand_weights = np.delete(cand_weights, victim)
            cand_masks, cand_weights = _project_marginals(
                cand_masks, cand_weights
            )
            cand_gap, cand_d = evaluate(cand_masks, cand_weights)
            if cand_gap is None:
                continue
            if not math.isfinite(cand_gap.gap):
                escapes += 1
                if first_escape is None:
                    first_escape = cand_d
                continue
            delta = cand_gap.gap - state_gap.gap
            if delta < 0.0 or rng.random() < math.exp(-delta / temp):
                masks, weights = cand_masks, cand_weights
                state_gap, state_d = cand_gap, cand_d
                if state_gap.gap < best[0]:
                    best = (state_gap.gap, r, state_gap, state_d)
            temp *= cool
    info = {
        "escapes": escapes,
        "first_escape": first_escape,
        "restarts": restarts,
        "iters": iters,
    }
    return best[2], best[3], info


def parity_counterexample():
    """Generic two-argument functions can destroy conditional entropy.

    X and C are uniform on {0,1,2,3} with X supported on the even values
    when C is even and on the odd values otherwise; g(x, x') keeps only the
    parities.  Then H(g(X,X')) = H(X) = 2 while H(X|C) = 1 and
    H(g(X,X') | C,C') = 0.
    """
    pairs = [
        (x, c, 0.125)
        for x in range(4)
        for c in range(4)
        if (x & 1) == (c & 1)
    ]
    joint_xc = JointDistribution.from_table(pairs)
    h_x = entropy(joint_xc.marginal_x())
    h_x_given_c = conditional_entropy(joint_xc)
    table = {}
    for x, c, m in pairs:
        for x2, c2, m2 in pairs:
            key = ((x & 1, x2 & 1), (c, c2))
            table[key] = table.get(key, 0.0) + m * m2
    joint_pair = JointDistribution.from_table(
        (x_lab, y_lab, mass) for (x_lab, y_lab), mass in table.items()
    )
    h_f = entropy(joint_pair.marginal_x())
    h_f_given_cc = conditional_entropy(joint_pair)
    return {
        "h_f_pair": h_f,
        "h_x": h_x,
        "h_x_given_c": h_x_given_c,
        "h_f_given_histories": h_f_given_cc,
    }
