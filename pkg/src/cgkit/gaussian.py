"""Linear-Gaussian parameterization and numeric Markov checking.

A chain graph is read as a system of linear equations: each connectivity
component K is a linear function of its parents plus a correlated error,
K = beta·pa(K) + err with err ~ N(0, lambda).  Structural zeros live in
beta (missing directed edges) and in inverse(lambda) (missing undirected
edges), so systems are sampled on exactly those two patterns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericError
from .graph import ChainGraph, component_topological_order, parents
from .models import IndependenceModel

CI_TOLERANCE = 1e-7
ORACLE_TOLERANCE = 1e-10
FAITHFUL_CUTOFF = 1e-3


@dataclass(frozen=True, eq=False)
class ComponentBlock:
    members: tuple  # sorted component nodes, rows of beta and lam
    parents: tuple  # sorted parent nodes, columns of beta
    beta: np.ndarray  # |members| x |parents| coefficients
    lam: np.ndarray  # |members| x |members| SPD error covariance


@dataclass(frozen=True, eq=False)
class GaussianSystem:
    nodes: tuple  # concatenated block members, the covariance index order
    blocks: tuple


def _signed_uniform(rng, lo: float, hi: float) -> float:
    mag = rng.uniform(lo, hi)
    return mag if rng.random() < 0.5 else -mag


def sample_system(g: ChainGraph, seed: int) -> GaussianSystem:
    """Draw random coefficients on the graph's edge patterns.

    Undirected structure enters through the error precision: entries in
    [-0.9,-0.1]∪[0.1,0.9] on present edges, diagonal lifted to row
    absolute sum + 1 so the precision (hence lambda) is SPD.  Directed
    edges get coefficients in [-1,-0.1]∪[0.1,1].  Deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    blocks = []
    order = []
    for comp in component_topological_order(g):
        members = sorted(comp)
        pa = sorted(parents(g, comp))
        k = len(members)
        if k == 1:
            lam = np.array([[rng.uniform(0.5, 2.0)]])
        else:
            prec = np.zeros((k, k))
            idx = {v: i for i, v in enumerate(members)}
            for a, b in sorted(e for e in g.undirected if e[0] in comp):
                w = _signed_uniform(rng, 0.1, 0.9)
                prec[idx[a], idx[b]] = prec[idx[b], idx[a]] = w
            np.fill_diagonal(prec, np.abs(prec).sum(axis=1) + 1.0)
            lam = np.linalg.inv(prec)
        beta = np.zeros((k, len(pa)))
        col = {v: j for j, v in enumerate(pa)}
        for i, a in enumerate(members):
            for p in sorted(g.dir_parents[a]):
                beta[i, col[p]] = _signed_uniform(rng, 0.1, 1.0)
        blocks.append(ComponentBlock(tuple(members), tuple(pa), beta, lam))
        order.extend(members)
    return GaussianSystem(tuple(order), tuple(blocks))


def joint_covariance(sys: GaussianSystem, g: ChainGraph) -> np.ndarray:
    """Exact covariance over sys.nodes by component recursion.

    Each block contributes cov(K, earlier) = beta·cov(pa, earlier) and
    var(K) = beta·cov(pa,pa)·betaᵀ + lambda.  The result must factor; a
    failed Cholesky signals a conditioning problem.
    """
    if set(sys.nodes) != set(g.nodes):
        raise NumericError("system does not cover the graph's nodes")
    pos: dict = {}
    sigma = np.zeros((0, 0))
    for blk in sys.blocks:
        q = sigma.shape[0]
        k = len(blk.members)
        pidx = [pos[p] for p in blk.parents]
        cov_kq = blk.beta @ sigma[np.ix_(pidx, range(q))] if pidx else np.zeros((k, q))
        var_k = blk.beta @ sigma[np.ix_(pidx, pidx)] @ blk.beta.T + blk.lam if pidx else blk.lam
        top = np.hstack([sigma, cov_kq.T])
        bottom = np.hstack([cov_kq, var_k])
        sigma = np.vstack([top, bottom])
        for i, v in enumerate(blk.members):
            pos[v] = q + i
    if tuple(sorted(pos, key=pos.get)) != sys.nodes:
        raise NumericError("system blocks do not cover the graph nodes in order")
    try:
        np.linalg.cholesky((sigma + sigma.T) / 2.0)
    except np.linalg.LinAlgError:
        raise NumericError("joint covariance is not positive definite")
    return sigma


def joint_covariance_oracle(sys: GaussianSystem, g: ChainGraph) -> np.ndarray:
    """Whole-system check: stack all blocks and solve (I-B)⁻¹ Λ (I-B)⁻ᵀ."""
    n = len(sys.nodes)
    pos = {v: i for i, v in enumerate(sys.nodes)}
    big_b = np.zeros((n, n))
    big_l = np.zeros((n, n))
    for blk in sys.blocks:
        rows = [pos[v] for v in blk.members]
        big_l[np.ix_(rows, rows)] = blk.lam
        if blk.parents:
            big_b[np.ix_(rows, [pos[p] for p in blk.parents])] = blk.beta
    inv = np.linalg.inv(np.eye(n) - big_b)
    return inv @ big_l @ inv.T


def partial_correlation(sigma: np.ndarray, a: int, b: int, z=()) -> float:
    """Partial correlation of indices a, b given index set z."""
    if a == b or a in z or b in z:
        raise ValueError("indices must be distinct and outside z")
    idx = [a, b] + sorted(z)
    try:
        p = np.linalg.inv(sigma[np.ix_(idx, idx)])
    except np.linalg.LinAlgError:
        raise NumericError("singular covariance submatrix")
    return float(-p[0, 1] / np.sqrt(p[0, 0] * p[1, 1]))


@dataclass
class MarkovReport:
    entries: list = field(default_factory=list)  # (triple, a, b, pcor, ok)
    n_separations: int = 0
    n_checks: int = 0
    dependent_above: int = 0
    dependent_total: int = 0

    @property
    def violations(self):
        return [e for e in self.entries if not e[4]]

    @property
    def faithful_fraction(self) -> Optional[float]:
        if not self.dependent_total:
            return None
        return self.dependent_above / self.dependent_total

    def render(self, include_passes: bool = True) -> str:
        out = []
        for triple, a, b, pcor, ok in self.entries:
            if include_passes or not ok:
                out.append(f"{triple}\t{a}\t{b}\t{pcor:.6e}\t{'pass' if ok else 'FAIL'}")
        frac = self.faithful_fraction
        out.append(
            f"# separations {self.n_separations}; checks {self.n_checks}; "
            f"violations {len(self.violations)}; "
            + (
                f"dependent pairs above {FAITHFUL_CUTOFF:g}: "
                f"{self.dependent_above}/{self.dependent_total} ({frac:.3f})"
                if frac is not None
                else "no dependent pairs"
            )
        )
        return "\n".join(out) + "\n"


def markov_check(g: ChainGraph, sys: GaussianSystem, model: IndependenceModel) -> MarkovReport:
    """Check every separation in the model against the sampled covariance.

    The model should be the full separation model of g over its nodes.
    Every separated (x, y, z) decomposes into member pairs; each pair's
    partial correlation must vanish at tolerance.  As a faithfulness
    indicator the report also counts how many non-separated pairs show a
    clearly nonzero partial correlation.
    """
    if set(model.universe) != set(sys.nodes):
        raise ValueError("model universe must match the system's nodes")
    sigma = joint_covariance(sys, g)
    pos = {v: i for i, v in enumerate(sys.nodes)}
    report = MarkovReport()
    cache: dict = {}

    def pcor(a: str, b: str, z: tuple) -> float:
        key = (a, b, z) if a <= b else (b, a, z)
        if key not in cache:
            cache[key] = partial_correlation(sigma, pos[key[0]], pos[key[1]], [pos[c] for c in z])
        return cache[key]

    for x, y, z in model.triples():
        report.n_separations += 1
        label = f"{','.join(x)} | {','.join(y)} | {','.join(z) if z else '-'}"
        for a in x:
            for b in y:
                r = pcor(a, b, z)
                report.entries.append((label, a, b, r, abs(r) <= CI_TOLERANCE))
                report.n_checks += 1

    names = list(model.universe)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            rest = [c for c in names if c != a and c != b]
            for zmask in range(1 << len(rest)):
                z = tuple(c for t, c in enumerate(rest) if zmask >> t & 1)
                if not model.has((a,), (b,), z):
                    report.dependent_total += 1
                    if abs(pcor(a, b, z)) > FAITHFUL_CUTOFF:
                        report.dependent_above += 1
    return report
