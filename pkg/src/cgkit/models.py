"""Full independence models over small universes.

A model is the set of all separations (x, y, z) a graph encodes, with x, y,
z disjoint subsets of a universe and x, y nonempty.  Triples are stored as
packed int64 bitmasks (x | y<<16 | z<<32 over sorted universe positions),
canonicalized so the x side holds the lexicographically least node.  Since
x and y are disjoint, comparing lowest set bits implements that ordering.

Enumeration walks conditioning sets in the outer loop: per z it computes
pairwise connectivity once (separation of node sets decomposes into pairs)
and then sweeps all x/y assignments of the free nodes vectorized.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .determinism import DeterminationTable, determined_set
from .errors import GuardError
from .graph import VARIABLE, ChainGraph
from .separation import AMP, LWF, amp_connectivity, lwf_connectivity

# full enumeration is exponential; refuse universes past this size
MAX_MODEL_NODES = 12

_X, _Y, _OUT = 0, 1, 2
_digit_cache: dict = {}


def _digits(f: int) -> np.ndarray:
    """All length-f base-3 vectors, one row per x/y/out assignment."""
    if f not in _digit_cache:
        if f == 0:
            _digit_cache[f] = np.zeros((1, 0), np.int8)
        else:
            r = np.arange(3**f)
            _digit_cache[f] = np.stack([(r // 3**t) % 3 for t in range(f)], axis=1).astype(np.int8)
    return _digit_cache[f]


def triple_count(n: int) -> int:
    """Number of canonical disjoint triples over an n-node universe."""
    return (4**n - 2 * 3**n + 2**n) // 2


def _split_names(field: str):
    """Split a comma-separated name list, respecting parentheses."""
    if field == "-":
        return ()
    parts, depth, start = [], 0, 0
    for i, c in enumerate(field):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif c == "," and depth == 0:
            parts.append(field[start:i])
            start = i + 1
    parts.append(field[start:])
    return tuple(parts)


class IndependenceModel:
    """An immutable set of canonical separation triples over a universe."""

    __slots__ = ("universe", "packed", "_pos")

    def __init__(self, universe: Iterable[str], packed=()):
        self.universe = tuple(sorted(universe))
        if len(self.universe) > 16:
            raise GuardError("models support at most 16 universe nodes")
        self._pos = {v: i for i, v in enumerate(self.universe)}
        arr = np.asarray(list(packed) if not isinstance(packed, np.ndarray) else packed, dtype=np.int64)
        self.packed = np.unique(arr)

    def _mask(self, names) -> int:
        m = 0
        for v in names:
            if v not in self._pos:
                raise ValueError(f"node {v} not in model universe")
            m |= 1 << self._pos[v]
        return m

    def _pack(self, x, y, z) -> int:
        xm, ym, zm = self._mask(x), self._mask(y), self._mask(z)
        if xm == 0 or ym == 0 or (xm & ym) or (zm & (xm | ym)):
            raise ValueError("triple parts must be disjoint with nonempty x and y")
        if (xm & -xm) > (ym & -ym):
            xm, ym = ym, xm
        return xm | ym << 16 | zm << 32

    def _names(self, mask: int):
        return tuple(v for i, v in enumerate(self.universe) if mask >> i & 1)

    def _unpack(self, value: int):
        v = int(value)
        return self._names(v & 0xFFFF), self._names(v >> 16 & 0xFFFF), self._names(v >> 32 & 0xFFFF)

    def has(self, x, y, z=()) -> bool:
        v = self._pack(x, y, z)
        i = np.searchsorted(self.packed, v)
        return bool(i < len(self.packed) and self.packed[i] == v)

    def triples(self):
        for v in self.packed:
            yield self._unpack(v)

    def __len__(self):
        return len(self.packed)

    def __eq__(self, other):
        return (
            isinstance(other, IndependenceModel)
            and self.universe == other.universe
            and np.array_equal(self.packed, other.packed)
        )

    def __hash__(self):
        return hash((self.universe, self.packed.tobytes()))

    def __repr__(self):
        return f"IndependenceModel(universe={self.universe!r}, triples={len(self)})"

    def dumps(self) -> str:
        head = ",".join(self.universe) if self.universe else "-"
        lines = [f"# universe {head}"]
        for x, y, z in self.triples():
            lines.append(f"{','.join(x)} | {','.join(y)} | {','.join(z) if z else '-'}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "IndependenceModel":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# universe"):
            raise ValueError("model dump must start with a '# universe' line")
        universe = _split_names(lines[0][len("# universe"):].strip())
        m = cls(universe)
        packed = []
        for ln in lines[1:]:
            if ln.startswith("#"):
                continue
            fields = [f.strip() for f in ln.split("|")]
            if len(fields) != 3:
                raise ValueError(f"malformed model line: {ln!r}")
            packed.append(m._pack(*(_split_names(f) for f in fields)))
        return cls(universe, packed)


def enumerate_model(
    g: ChainGraph,
    table: DeterminationTable | None,
    semantics: str,
    universe: Iterable[str] | None = None,
    *,
    condition_on: Iterable[str] = (),
) -> IndependenceModel:
    """Evaluate every disjoint triple over the universe.

    condition_on names graph nodes outside the universe that join every
    conditioning set; the result is then directly the model projected by
    conditioning on them.
    """
    order = sorted(set(universe)) if universe is not None else sorted(g.nodes)
    unknown = [v for v in order if v not in g.nodes]
    if unknown:
        raise ValueError(f"universe nodes not in graph: {', '.join(unknown)}")
    n = len(order)
    if n > MAX_MODEL_NODES:
        raise GuardError(
            f"universe of {n} nodes means {triple_count(n)} triples; "
            f"guard allows {MAX_MODEL_NODES} nodes"
        )
    cond = frozenset(condition_on)
    if cond & set(order):
        raise ValueError("condition_on must be disjoint from the universe")
    if cond - set(g.nodes):
        raise ValueError("condition_on nodes must be in the graph")
    table = table if table is not None else DeterminationTable()
    if semantics == AMP:
        connectivity = amp_connectivity
    elif semantics == LWF:
        connectivity = lwf_connectivity
    else:
        raise ValueError(f"unknown semantics {semantics!r}")

    chunks = []
    for zmask in range(1 << n):
        z = frozenset(order[i] for i in range(n) if zmask >> i & 1) | cond
        dz = determined_set(table, z)
        rows = connectivity(g, dz, order)
        free = [i for i in range(n) if not zmask >> i & 1]
        dig = _digits(len(free))
        m = len(dig)
        xm = np.zeros(m, np.int64)
        ym = np.zeros(m, np.int64)
        acc = np.zeros(m, np.int64)
        for t, p in enumerate(free):
            isx = dig[:, t] == _X
            xm |= isx.astype(np.int64) << p
            ym |= (dig[:, t] == _Y).astype(np.int64) << p
            if rows[p]:
                acc |= np.where(isx, np.int64(rows[p]), np.int64(0))
        keep = (xm != 0) & (ym != 0) & ((xm & -xm) < (ym & -ym)) & ((acc & ym) == 0)
        if keep.any():
            chunks.append(xm[keep] | ym[keep] << 16 | np.int64(zmask) << 32)

    packed = np.concatenate(chunks) if chunks else np.empty(0, np.int64)
    return IndependenceModel(order, packed)


def project_model(m: IndependenceModel, l=(), s=()) -> IndependenceModel:
    """Marginalize l out and condition on s.

    Keeps (x, y, z) over the shrunken universe iff (x, y, z∪s) was present.
    """
    l, s = frozenset(l), frozenset(s)
    if l & s:
        raise ValueError("marginal and conditioning sets overlap")
    stray = (l | s) - set(m.universe)
    if stray:
        raise ValueError(f"not in model universe: {', '.join(sorted(stray))}")
    lmask, smask = m._mask(l), m._mask(s)
    keep_pos = [i for i, v in enumerate(m.universe) if not (lmask | smask) >> i & 1]

    x = m.packed & 0xFFFF
    y = m.packed >> 16 & 0xFFFF
    z = m.packed >> 32 & 0xFFFF
    drop = np.int64(lmask | smask)
    ok = ((x & drop) == 0) & ((y & drop) == 0) & ((z & lmask) == 0) & ((z & smask) == smask)
    x, y, z = x[ok], y[ok], z[ok]
    nx = np.zeros(len(x), np.int64)
    ny = np.zeros(len(x), np.int64)
    nz = np.zeros(len(x), np.int64)
    for t, p in enumerate(keep_pos):
        nx |= (x >> p & 1) << t
        ny |= (y >> p & 1) << t
        nz |= (z >> p & 1) << t
    return IndependenceModel((m.universe[i] for i in keep_pos), nx | ny << 16 | nz << 32)


def model_diff(m1: IndependenceModel, m2: IndependenceModel):
    """Triples only in m1 and only in m2, decoded for reporting."""
    if m1.universe != m2.universe:
        raise ValueError("models have different universes")
    only1 = np.setdiff1d(m1.packed, m2.packed)
    only2 = np.setdiff1d(m2.packed, m1.packed)
    return [m1._unpack(v) for v in only1], [m2._unpack(v) for v in only2]


def random_cg(n: int, edge_density: float, seed: int) -> ChainGraph:
    """Sample a valid chain graph on n variable nodes, deterministic per seed.

    Nodes get a random order and a random split into consecutive blocks;
    undirected edges land within blocks and directed edges run from earlier
    to later blocks, each with the given density, so no semidirected cycle
    can form.
    """
    if n < 1:
        raise ValueError("need at least one node")
    if not 0.0 <= edge_density <= 1.0:
        raise ValueError("edge_density must be in [0, 1]")
    rng = np.random.default_rng(seed)
    names = [chr(65 + i) for i in range(n)] if n <= 26 else [f"N{i:03d}" for i in range(n)]
    order = [str(v) for v in rng.permutation(names)]
    blocks: list = []
    for v in order:
        if not blocks or rng.random() < 0.5:
            blocks.append([v])
        else:
            blocks[-1].append(v)
    directed, undirected = set(), set()
    for bi, block in enumerate(blocks):
        for i in range(len(block)):
            for j in range(i + 1, len(block)):
                if rng.random() < edge_density:
                    undirected.add((block[i], block[j]))
        for later in blocks[bi + 1 :]:
            for a in block:
                for b in later:
                    if rng.random() < edge_density:
                        directed.add((a, b))
    return ChainGraph({v: VARIABLE for v in names}, directed, undirected)
