"""Bitset set-family combinatorics: closure under union, frequencies,
exhaustive and random enumeration.

Families are sorted arrays of distinct n-bit masks.  Exhaustive enumeration
of all union-closed families is feasible for n <= 4 and is implemented by
two independent strategies (membership DFS with closure pruning, and a
brute filter over all 2^(2^n) candidate families) so their counts can be
cross-checked.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, DomainError, UsageError
from .subset_dist import make_distribution

FAMILY_MAX_N = 24
ENUMERATION_MAX_N = 4
RANDOM_MAX_N = 20
_PAIR_CAP = 40_000_000


@dataclass(frozen=True, eq=False)
class SetFamily:
    """Finite family of distinct subsets of [n], sorted ascending by mask."""

    n: int
    members: np.ndarray

    @classmethod
    def from_masks(cls, n, masks):
        n = int(n)
        if not 1 <= n <= FAMILY_MAX_N:
            raise DomainError(f"ground-set size must lie in [1, {FAMILY_MAX_N}]")
        arr = np.unique(np.asarray(list(masks), dtype=np.int64))
        if arr.size == 0:
            raise DomainError("family must contain at least one set")
        if arr[0] < 0 or arr[-1] >= (1 << n):
            raise DomainError(f"family contains masks out of range for n={n}")
        arr.flags.writeable = False
        return cls(n, arr)

    @property
    def size(self):
        return int(self.members.shape[0])

    def __contains__(self, mask):
        idx = int(np.searchsorted(self.members, mask))
        return idx < self.size and int(self.members[idx]) == int(mask)


def is_union_closed(family):
    """(closed, witness): witness is the first pair whose union escapes."""
    members = family.members
    table = np.zeros(1 << family.n, dtype=bool)
    table[members] = True
    for i in range(family.size):
        unions = members[i] | members[i:]
        missing = np.nonzero(~table[unions])[0]
        if missing.size:
            j = i + int(missing[0])
            return False, (int(members[i]), int(members[j]))
    return True, None


def union_closure(generators):
    """Smallest union-closed family containing the generators.

    Worklist over members with a membership table: every popped mask is
    unioned against the current member list; fresh results join the list.
    """
    n = generators.n
    table = np.zeros(1 << n, dtype=bool)
    members = []
    for g in generators.members.tolist():
        if not table[g]:
            table[g] = True
            members.append(g)
    i = 0
    while i < len(members):
        snapshot = np.fromiter(members, dtype=np.int64, count=len(members))
        unions = np.unique(members[i] | snapshot)
        fresh = unions[~table[unions]]
        if fresh.size:
            table[fresh] = True
            members.extend(fresh.tolist())
        i += 1
    return SetFamily.from_masks(n, members)


def family_self_union(family):
    """The family {A | B : A, B in F}; equals F iff F is union-closed."""
    m = family.size
    if m * m > _PAIR_CAP:
        raise CapabilityError("family too large for the pairwise union table")
    ors = np.bitwise_or.outer(family.members, family.members)
    return SetFamily.from_masks(family.n, np.unique(ors))


@dataclass(frozen=True)
class FrequencyProfile:
    """Element occurrence counts across the family."""

    counts: tuple
    fractions: tuple
    argmax: int  # smallest 1-based element attaining max_fraction
    max_fraction: float


def frequency_profile(family):
    counts = [
        int((((family.members >> (i - 1)) & 1) == 1).sum())
        for i in range(1, family.n + 1)
    ]
    fractions = [c / family.size for c in counts]
    best = max(fractions)
    return FrequencyProfile(
        counts=tuple(counts),
        fractions=tuple(fractions),
        argmax=fractions.index(best) + 1,
        max_fraction=best,
    )


def _enumerate_dfs(n):
    """All union-closed families: decide masks high-to-low, pruning by
    closure (a pair's union is never smaller than either member, so it has
    always been decided already)."""
    out = []
    members = []

    def descend(mask, code):
        if mask < 0:
            if members:
                out.append(tuple(sorted(members)))
            return
        descend(mask - 1, code)
        for t in members:
            if not (code >> (mask | t)) & 1:
                break
        else:
            members.append(mask)
            descend(mask - 1, code | (1 << mask))
            members.pop()

    descend((1 << n) - 1, 0)
    return out


def _enumerate_filter(n):
    """Oracle enumeration: test every nonempty candidate family directly."""
    out = []
    size = 1 << n
    for code in range(1, 1 << size):
        members = [m for m in range(size) if (code >> m) & 1]
        if all(
            (code >> (a | b)) & 1
            for k, a in enumerate(members)
            for b in members[k:]
        ):
            out.append(tuple(members))
    return out


def enumerate_union_closed(n, strategy="dfs"):
    """Yield every union-closed family on [n] (n <= 4) exactly once.

    Canonical order: ascending by (family size, member list).  The two
    strategies enumerate independently and must agree.
    """
    if n > ENUMERATION_MAX_N:
        raise CapabilityError(
            f"exhaustive enumeration is limited to n <= {ENUMERATION_MAX_N}; "
            "use random_union_closed for larger ground sets"
        )
    if strategy == "dfs":
        families = _enumerate_dfs(n)
    elif strategy == "filter":
        families = _enumerate_filter(n)
    else:
        raise UsageError(f"unknown enumeration strategy {strategy!r}")
    for members in sorted(families, key=lambda f: (len(f), f)):
        yield SetFamily.from_masks(n, members)


def random_union_closed(n, k, seed):
    """Closure of k uniformly random nonempty generator masks."""
    if n > RANDOM_MAX_N:
        raise DomainError(f"random families are limited to n <= {RANDOM_MAX_N}")
    if k < 1:
        raise DomainError("need at least one generator")
    rng = np.random.default_rng(seed)
    gens = rng.integers(1, 1 << n, size=k, dtype=np.int64)
    return union_closure(SetFamily.from_masks(n, gens))


def uniform_distribution(family):
    """Uniform subset distribution over the family's members."""
    return make_distribution(
        family.n, ((int(m), 1.0) for m in family.members)
    )


def _filter_band(args):
    """Frequency sweep over one band of candidate family codes.

    A candidate code's bit m says whether mask m is a member.  Returns the
    number of union-closed families in the band together with the smallest
    max-frequency seen (the {empty} family, code 1, carries no elements and
    is skipped for the frequency part).
    """
    n, start, stop = args
    size = 1 << n
    closed_count = 0
    best = 2.0
    worst_members = None
    for code in range(start, stop):
        members = [m for m in range(size) if (code >> m) & 1]
        ok = True
        for k, a in enumerate(members):
            for b in members[k:]:
                if not (code >> (a | b)) & 1:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        closed_count += 1
        if code == 1:
            continue
        top = max(
            sum((m >> i) & 1 for m in members) for i in range(n)
        )
        frac = top / len(members)
        if frac < best:
            best = frac
            worst_members = tuple(members)
    return closed_count, best, worst_members


def frankl_sweep(n, jobs=1):
    """Exhaustive frequency check over all union-closed families on [n].

    Counts via both enumeration strategies (they must agree), sweeps the
    max element frequency over every family other than {empty set}, and
    returns a dict with the counts, the minimum max-frequency, and the
    worst family.  The filter side shards into fixed code bands, so the
    result is identical for any worker count.
    """
    if n > ENUMERATION_MAX_N:
        raise CapabilityError(
            f"exhaustive sweep is limited to n <= {ENUMERATION_MAX_N}"
        )
    top = 1 << (1 << n)
    band = 4096
    bands = [(n, s, min(s + band, top)) for s in range(1, top, band)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            partials = list(pool.map(_filter_band, bands))
    else:
        partials = [_filter_band(args) for args in bands]
    filter_count = 0
    best = 2.0
    worst_members = None
    for count, value, members in partials:
        filter_count += count
        if value < best:
            best = value
            worst_members = members
    dfs_count = len(_enumerate_dfs(n))
    return {
        "count_dfs": dfs_count,
        "count_filter": filter_count,
        "counts_agree": dfs_count == filter_count,
        "min_max_fraction": best,
        "worst_family": SetFamily.from_masks(n, worst_members)
        if worst_members
        else None,
    }
