"""Scalar entropy kernels and generic finite-distribution measures.

All logarithms are base 2 and all entropies are reported in bits.  The
convention 0 log 0 = 0 applies throughout.  Probabilities are validated with
a small construction slack (values within 1e-12 of [0, 1] are clamped); the
entropy kernels switch to ``log1p`` formulations near the endpoints so that
H(p) and H(1-p) agree to full precision.

Distinguished constants: ``DEFAULT_MU`` is the per-element marginal bound
0.01 under which the union-entropy inequalities are verified, and
``DEFAULT_THRESHOLD`` is the 0.1 split point between low- and high-bias
histories.  ``FIXED_POINT`` is p* = (3 - sqrt(5))/2, the probability at
which H(2p - p^2) = H(p).
"""

import math
from dataclasses import dataclass, field

from .errors import DomainError, UsageError

_LN2 = math.log(2.0)

PROB_SLACK = 1e-12
MASS_TOLERANCE = 1e-9

DEFAULT_MU = 0.01
DEFAULT_THRESHOLD = 0.1
FIXED_POINT = (3.0 - math.sqrt(5.0)) / 2.0

INF = math.inf


def as_prob(value, name="probability"):
    """Validate a probability, clamping values within PROB_SLACK of [0, 1]."""
    v = float(value)
    if math.isnan(v) or v < -PROB_SLACK or v > 1.0 + PROB_SLACK:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return min(max(v, 0.0), 1.0)


def binary_entropy(p):
    """Entropy of a Bernoulli(p) bit: -p log2 p - (1-p) log2(1-p)."""
    p = as_prob(p, "p")
    if p == 0.0 or p == 1.0:
        return 0.0
    # log2(1-p) via log1p(-p) avoids rounding 1-p; for p > 1/2 the same
    # trick applies to log2(p) since p-1 is exact there (Sterbenz).
    lp = math.log1p(p - 1.0) / _LN2 if p > 0.5 else math.log2(p)
    lq = math.log1p(-p) / _LN2
    return -(p * lp + (1.0 - p) * lq)


def union_prob(p, p2):
    """Probability that at least one of two independent bits fires.

    Equals p + p2 - p*p2 = 1 - (1-p)(1-p2).  Evaluated as a + b*(1-a) with
    a = max, b = min, which is exact at both endpoints (union with a sure
    bit is sure, union with a null bit is the other bit) and commutative by
    construction.
    """
    p = as_prob(p, "p")
    p2 = as_prob(p2, "p2")
    a, b = (p, p2) if p >= p2 else (p2, p)
    return a + b * (1.0 - a)


def _validate_weights(pairs, kind):
    labels = []
    masses = []
    seen = set()
    for label, mass in pairs:
        m = float(mass)
        if math.isnan(m) or math.isinf(m):
            raise DomainError(f"{kind} mass must be finite, got {mass!r}")
        if m < -PROB_SLACK:
            raise DomainError(f"{kind} mass must be nonnegative, got {mass!r}")
        if label in seen:
            raise UsageError(f"duplicate {kind} label {label!r}")
        seen.add(label)
        labels.append(label)
        masses.append(max(m, 0.0))
    total = math.fsum(masses)
    if total <= 0.0:
        raise DomainError(f"total {kind} mass must be positive")
    return labels, [m / total for m in masses], total - 1.0


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability distribution over an explicit finite label space.

    Masses are renormalized on construction; the pre-normalization residual
    (total - 1) is recorded.  Labels must be distinct hashable values.
    """

    labels: tuple
    masses: tuple
    residual: float = field(default=0.0, compare=False)

    @classmethod
    def from_pairs(cls, pairs):
        labels, masses, residual = _validate_weights(pairs, "distribution")
        return cls(tuple(labels), tuple(masses), residual)

    @classmethod
    def uniform(cls, labels):
        labels = tuple(labels)
        return cls.from_pairs((lab, 1.0) for lab in labels)

    def items(self):
        return zip(self.labels, self.masses)

    def mass_of(self, label):
        try:
            return self.masses[self.labels.index(label)]
        except ValueError:
            return 0.0


def entropy(d):
    """Shannon entropy of a FiniteDistribution, in bits."""
    return -math.fsum(m * math.log2(m) for m in d.masses if m > 0.0)


def kl_divergence(p, q):
    """D(p || q) = sum p log2(p/q) in bits; +inf when support escapes q.

    Escape means a label carried by q with zero mass still receives p-mass.
    A p-label absent from q's label space altogether is a usage error
    (mismatched spaces), unless it has zero mass.
    """
    q_mass = dict(q.items())
    total = 0.0
    for label, mass in p.items():
        if mass <= 0.0:
            continue
        if label not in q_mass:
            raise UsageError(f"label {label!r} missing from the second label space")
        qm = q_mass[label]
        if qm <= 0.0:
            return INF
        total += mass * (math.log2(mass) - math.log2(qm))
    return total


@dataclass(frozen=True)
class JointDistribution:
    """Distribution over pairs (x, y) of labels from two finite spaces."""

    x_labels: tuple
    y_labels: tuple
    masses: tuple  # aligned with pairs(), one mass per (x, y) entry
    pairs: tuple   # tuple of (x, y) label pairs
    residual: float = field(default=0.0, compare=False)

    @classmethod
    def from_table(cls, table):
        """Build from an iterable of (x_label, y_label, mass) entries."""
        entries = [((x, y), m) for x, y, m in table]
        keys, masses, residual = _validate_weights(entries, "joint")
        xs = tuple(dict.fromkeys(x for x, _ in keys))
        ys = tuple(dict.fromkeys(y for _, y in keys))
        return cls(xs, ys, tuple(masses), tuple(keys), residual)

    def items(self):
        return zip(self.pairs, self.masses)

    def marginal_y(self):
        acc = {}
        for (_, y), m in self.items():
            acc[y] = acc.get(y, 0.0) + m
        return FiniteDistribution.from_pairs(acc.items())

    def marginal_x(self):
        acc = {}
        for (x, _), m in self.items():
            acc[x] = acc.get(x, 0.0) + m
        return FiniteDistribution.from_pairs(acc.items())

    def joint_entropy(self):
        return -math.fsum(m * math.log2(m) for m in self.masses if m > 0.0)


def conditional_entropy(j):
    """H(X | Y) = sum_y Pr[y] H(X | Y=y), in bits."""
    groups = {}
    for (x, y), m in j.items():
        if m > 0.0:
            groups.setdefault(y, []).append(m)
    total = 0.0
    for y, masses in groups.items():
        py = math.fsum(masses)
        total += py * -math.fsum(
            (m / py) * math.log2(m / py) for m in masses
        )
    return total


def map_condition(j, f):
    """Joint of (X, f(Y)): collapse y-labels through f, summing masses."""
    acc = {}
    for (x, y), m in j.items():
        key = (x, f(y))
        acc[key] = acc.get(key, 0.0) + m
    return JointDistribution.from_table(
        (x, y, m) for (x, y), m in acc.items()
    )
