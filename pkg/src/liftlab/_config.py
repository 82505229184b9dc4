"""Guard limits and tunables, overridable through the environment.

Every guard below can be raised or lowered by exporting
``LIFTLAB_GUARD_<NAME>=<int>``; for instance

    LIFTLAB_GUARD_SUBSET_POINTS=18 liftlab dist --construction lp-direct ...

The guards exist to refuse enumerations that would silently take hours, not
to enforce correctness; any value the guard admits is computed exactly.
"""

from __future__ import annotations

import os

# Largest support size for which lp_direct enumerates subsets (2^n sets).
GUARD_SUBSET_POINTS = 15

# Largest carrier size for which dhk_spanning_tree enumerates spanning trees
# of the complete bipartite graph on two carrier copies (n^(2n-2) trees).
GUARD_TREE_CARRIER = 4

# Budget for the grid oracle: enumeration is refused when
# (1/delta + 1) ** (number of points) exceeds this count.  The default equals
# 17**6, i.e. carriers of combined size 6 at delta = 1/16.
GUARD_GRID_BUDGET = 17**6

# Deepest k tried when certifying a Generally-lifting value with witnesses at
# epsilon = value - 2^-k.
WITNESS_DEPTH = 8

# Simplex pivots performed under the fast (Dantzig) rule before switching to
# Bland's rule, which guarantees termination.
PIVOT_FAST_LIMIT = 2000


def guard(name: str) -> int:
    """Return the guard value ``name``, honouring LIFTLAB_GUARD_<name>."""
    default = globals()[f"GUARD_{name}"]
    raw = os.environ.get(f"LIFTLAB_GUARD_{name}")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        return default


def witness_depth() -> int:
    raw = os.environ.get("LIFTLAB_WITNESS_DEPTH")
    if raw is not None:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return WITNESS_DEPTH
