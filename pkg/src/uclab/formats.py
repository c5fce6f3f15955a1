"""Text formats for distributions, families, instances, and grid CSV.

Shared set syntax: comma-separated 1-based element indices ("1,3,4"), the
literal "-" for the empty set, "#" starts a comment.  Distribution files
require a leading "n=<int>" header; family files may omit it, in which case
the ground-set size is inferred from the largest index seen.
"""

from .errors import FormatError
from .families import SetFamily
from .lemma_engine import LemmaInstance
from .subset_dist import make_distribution


def format_mask(mask):
    if mask == 0:
        return "-"
    return ",".join(str(i + 1) for i in range(mask.bit_length()) if (mask >> i) & 1)


def parse_mask(token, n=None, line=None):
    if token == "-":
        return 0
    mask = 0
    for part in token.split(","):
        try:
            idx = int(part)
        except ValueError:
            raise FormatError(f"bad element index {part!r}", line) from None
        if idx < 1:
            raise FormatError(f"element indices are 1-based, got {idx}", line)
        if n is not None and idx > n:
            raise FormatError(f"element {idx} exceeds ground-set size {n}", line)
        mask |= 1 << (idx - 1)
    return mask


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield lineno, body


def parse_distribution(text):
    """Parse the distribution format: 'n=<int>' header, then '<set> <mass>'."""
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty distribution file")
    lineno, header = lines[0]
    if not header.replace(" ", "").startswith("n="):
        raise FormatError("first line must be an n=<int> header", lineno)
    try:
        n = int(header.split("=", 1)[1].strip())
    except ValueError:
        raise FormatError(f"bad ground-set size in header {header!r}", lineno) from None
    pairs = []
    for lineno, body in lines[1:]:
        parts = body.split()
        if len(parts) != 2:
            raise FormatError("expected '<set> <mass>'", lineno)
        mask = parse_mask(parts[0], n, lineno)
        try:
            mass = float(parts[1])
        except ValueError:
            raise FormatError(f"bad mass {parts[1]!r}", lineno) from None
        pairs.append((mask, mass))
    if not pairs:
        raise FormatError("distribution file has no entries")
    return make_distribution(n, pairs)


def format_distribution(d):
    lines = [f"n={d.n}"]
    for mask, mass in d.items():
        lines.append(f"{format_mask(mask)} {mass!r}")
    return "\n".join(lines) + "\n"


def parse_family(text):
    """Parse the family format: optional 'n=' header, one set per line."""
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty family file")
    n = None
    start = 0
    first_body = lines[0][1].replace(" ", "")
    if first_body.startswith("n="):
        try:
            n = int(first_body.split("=", 1)[1])
        except ValueError:
            raise FormatError(
                f"bad ground-set size in header {lines[0][1]!r}", lines[0][0]
            ) from None
        start = 1
    masks = []
    for lineno, body in lines[start:]:
        if len(body.split()) != 1:
            raise FormatError("expected a single set per line", lineno)
        masks.append(parse_mask(body, n, lineno))
    if not masks:
        raise FormatError("family file has no sets")
    if n is None:
        n = max(1, max(m.bit_length() for m in masks))
    return SetFamily.from_masks(n, masks)


def format_family(family):
    lines = [f"n={family.n}"]
    lines.extend(format_mask(int(m)) for m in family.members)
    return "\n".join(lines) + "\n"


def parse_instance(text, mu=None, threshold=None):
    """Parse the instance format: one 'q p' pair per line."""
    pairs = []
    for lineno, body in _content_lines(text):
        parts = body.split()
        if len(parts) != 2:
            raise FormatError("expected '<weight> <bias>'", lineno)
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise FormatError(f"bad number in {body!r}", lineno) from None
    if not pairs:
        raise FormatError("instance file has no entries")
    kwargs = {}
    if mu is not None:
        kwargs["mu"] = mu
    if threshold is not None:
        kwargs["threshold"] = threshold
    return LemmaInstance.from_pairs(pairs, **kwargs)


def format_instance(inst):
    return "".join(f"{q!r} {p!r}\n" for q, p in inst.pairs())


def format_grid_csv(rows):
    """CSV with header p,p_prime,f; '.' decimals and LF endings."""
    lines = ["p,p_prime,f"]
    lines.extend(f"{p!r},{q!r},{v!r}" for p, q, v in rows)
    return "\n".join(lines) + "\n"
