"""Separation and reduction conditions on polarities, with pruning.

A polarity is separating when no two objects share a feature row and no two
features share an object column (s1, s2).  It is reduced when every object is
uniquely minimal among the objects lacking some feature (r1) and every
feature is uniquely maximal among the features some object lacks (r2).  Both
checks report human-readable witnesses.

``prune`` repairs violations by the classic clarification + reduction moves:
merge duplicate rows/columns, then repeatedly delete any feature whose column
is the intersection of the strictly greater columns and any object whose row
is the intersection of the strictly smaller rows.  Each deletion is exactly
an r2/r1 failure witness, so the loop terminates precisely when the context
is RS (or a sort would empty out, which is an error).
"""

from __future__ import annotations

from dataclasses import dataclass

from .context import FormalContext
from .errors import DegenerateResultError


@dataclass(frozen=True)
class RsReport:
    s1_violations: tuple[tuple[str, str], ...]
    s2_violations: tuple[tuple[str, str], ...]
    r1_violations: tuple[str, ...]
    r2_violations: tuple[str, ...]

    @property
    def is_rs(self) -> bool:
        return not (self.s1_violations or self.s2_violations
                    or self.r1_violations or self.r2_violations)

    def lines(self) -> tuple[str, ...]:
        out = []
        for a, b in self.s1_violations:
            out.append(f"s1 violation: {a}, {b}")
        for x, y in self.s2_violations:
            out.append(f"s2 violation: {x}, {y}")
        for a in self.r1_violations:
            out.append(f"r1 violation: {a}")
        for x in self.r2_violations:
            out.append(f"r2 violation: {x}")
        return tuple(out)

    def summary(self) -> str:
        return "; ".join(self.lines()) if self.lines() else "no violations"


def check_separating(ctx: FormalContext):
    """Pairs of objects with identical rows and features with identical columns."""
    s1 = []
    for a in range(ctx.n_objects):
        for b in range(a + 1, ctx.n_objects):
            if ctx.row_masks[a] == ctx.row_masks[b]:
                s1.append((ctx.objects[a], ctx.objects[b]))
    s2 = []
    for x in range(ctx.n_features):
        for y in range(x + 1, ctx.n_features):
            if ctx.col_masks[x] == ctx.col_masks[y]:
                s2.append((ctx.features[x], ctx.features[y]))
    return tuple(s1), tuple(s2)


def check_reduced(ctx: FormalContext):
    """Objects failing r1 and features failing r2, in context order.

    Object a passes r1 when some feature x makes a minimal among the objects
    lacking x; feature x passes r2 when some object a makes x maximal among
    the features a lacks.  Minimality/maximality is with respect to the
    specialization preorders, strict in the order-theoretic sense.
    """
    full_objects = (1 << ctx.n_objects) - 1
    full_features = (1 << ctx.n_features) - 1

    r1 = []
    for a in range(ctx.n_objects):
        strictly_below = ctx._obj_lower[a] & ~ctx._obj_upper[a]
        witnessed = False
        for x in range(ctx.n_features):
            lacking = full_objects & ~ctx.col_masks[x]
            if lacking >> a & 1 and lacking & strictly_below == 0:
                witnessed = True
                break
        if not witnessed:
            r1.append(ctx.objects[a])

    r2 = []
    for x in range(ctx.n_features):
        strictly_above = ctx._feat_upper[x] & ~ctx._feat_lower[x]
        witnessed = False
        for a in range(ctx.n_objects):
            lacked = full_features & ~ctx.row_masks[a]
            if lacked >> x & 1 and lacked & strictly_above == 0:
                witnessed = True
                break
        if not witnessed:
            r2.append(ctx.features[x])

    return tuple(r1), tuple(r2)


def is_rs(ctx: FormalContext) -> RsReport:
    s1, s2 = check_separating(ctx)
    r1, r2 = check_reduced(ctx)
    return RsReport(s1, s2, r1, r2)


def _merge_duplicates(names, masks):
    """Collapse equal masks, keeping the lexicographically least name at the
    position of the group's first occurrence.  Returns None when nothing to do."""
    first_at: dict[int, int] = {}
    best_name: dict[int, str] = {}
    changed = False
    for i, mask in enumerate(masks):
        if mask in first_at:
            changed = True
            if names[i] < best_name[mask]:
                best_name[mask] = names[i]
        else:
            first_at[mask] = i
            best_name[mask] = names[i]
    if not changed:
        return None
    out_names, out_masks = [], []
    for mask, i in sorted(first_at.items(), key=lambda kv: kv[1]):
        out_names.append(best_name[mask])
        out_masks.append(mask)
    return out_names, out_masks


def _transpose(masks, width):
    cols = [0] * width
    for r, mask in enumerate(masks):
        while mask:
            low = mask & -mask
            cols[low.bit_length() - 1] |= 1 << r
            mask ^= low
    return cols


def _first_reducible(masks, full):
    """Index whose mask equals the intersection of the strictly larger masks.

    The empty intersection is ``full``, so an all-ones row or column is
    itself reducible.
    """
    n = len(masks)
    for i in range(n):
        inter = full
        for j in range(n):
            if j != i and masks[i] & ~masks[j] == 0 and masks[i] != masks[j]:
                inter &= masks[j]
        if inter == masks[i]:
            return i
    return None


def prune(ctx: FormalContext) -> FormalContext:
    """Clarify and reduce a context until it is RS.

    Raises DegenerateResultError when the repairs would empty a sort, which
    happens exactly for contexts whose concept lattice has a single element.
    """
    objects = list(ctx.objects)
    features = list(ctx.features)
    rows = list(ctx.row_masks)
    changed_any = False

    while True:
        work = FormalContext.from_row_masks(objects, features, rows)
        if is_rs(work).is_rs:
            return ctx if not changed_any else work

        merged = _merge_duplicates(objects, rows)
        if merged is not None:
            objects, rows = merged
            changed_any = True
            continue

        cols = _transpose(rows, len(features))
        merged = _merge_duplicates(features, cols)
        if merged is not None:
            features, cols = merged
            rows = _transpose(cols, len(objects))
            changed_any = True
            continue

        x = _first_reducible(cols, (1 << len(objects)) - 1)
        if x is not None:
            if len(features) == 1:
                raise DegenerateResultError(
                    "pruning would remove the last feature")
            del features[x]
            del cols[x]
            rows = _transpose(cols, len(objects))
            changed_any = True
            continue

        a = _first_reducible(rows, (1 << len(features)) - 1)
        if a is not None:
            if len(objects) == 1:
                raise DegenerateResultError(
                    "pruning would remove the last object")
            del objects[a]
            del rows[a]
            changed_any = True
            continue

        return work  # unreachable: a violation always enables some rule
