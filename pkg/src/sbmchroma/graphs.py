"""Random-graph samplers and deterministic constructors.

Every sampler is a pure function of (parameters, seed): draws come from a
PCG64 stream and per-pair Bernoulli decisions are consumed in lexicographic
pair order (u, v) with u < v, so identical inputs give identical graphs on
any platform.
"""

from __future__ import annotations

import json
from typing import Optional, Sequence

import numpy as np

from .model import BlockVector, ModelError, ModelInstance, ProbMatrix
from .seeds import rng_from_seed

__all__ = [
    "SbmGraph",
    "BlowUpSpec",
    "sample_sbm",
    "blow_up",
    "percolate",
    "blow_up_as_model",
    "chung_lu_model",
    "sample_chung_lu",
    "union_graphs",
]


class SbmGraph:
    """Labelled simple graph: contiguous blocks, sorted edge list, provenance.

    Immutable after construction; adjacency bitsets are built lazily and
    cached for the colouring/independence kernels.
    """

    __slots__ = ("n", "k", "block_of", "edges", "provenance", "_adj_bits",
                 "_neighbors")

    def __init__(self, n: int, block_of: Sequence[int], edges,
                 provenance: Optional[dict] = None, k: Optional[int] = None):
        block_arr = np.asarray(block_of, dtype=np.int64)
        if block_arr.shape != (n,):
            raise ModelError("block_of must assign a block to every vertex")
        if n > 0:
            if block_arr.min(initial=0) < 0:
                raise ModelError("negative block index")
            if np.any(np.diff(block_arr) < 0):
                raise ModelError("blocks must occupy contiguous vertex ranges")
        self.n = int(n)
        self.k = int(k) if k is not None else (int(block_arr.max()) + 1 if n else 0)
        if n > 0 and block_arr.max() >= self.k:
            raise ModelError("block index out of range")
        block_arr.setflags(write=False)
        self.block_of = block_arr

        edge_set = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ModelError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ModelError(f"edge ({u},{v}) out of range")
            edge_set.add((u, v) if u < v else (v, u))
        arr = np.array(sorted(edge_set), dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        self.edges = arr
        self.provenance = dict(provenance or {})
        self._adj_bits = None
        self._neighbors = None

    # --- derived views -----------------------------------------------------

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    def block_sizes(self) -> np.ndarray:
        return np.bincount(self.block_of, minlength=self.k)

    def size_vector(self) -> BlockVector:
        return BlockVector(self.block_sizes(), integer=True)

    def adjacency_bits(self) -> list[int]:
        """Per-vertex neighbour bitsets (python ints)."""
        if self._adj_bits is None:
            bits = [0] * self.n
            for u, v in self.edges:
                bits[u] |= 1 << int(v)
                bits[v] |= 1 << int(u)
            self._adj_bits = bits
        return self._adj_bits

    def neighbors(self) -> list[np.ndarray]:
        if self._neighbors is None:
            lists: list[list[int]] = [[] for _ in range(self.n)]
            for u, v in self.edges:
                lists[int(u)].append(int(v))
                lists[int(v)].append(int(u))
            self._neighbors = [np.array(sorted(l), dtype=np.int64) for l in lists]
        return self._neighbors

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        return bool((self.adjacency_bits()[u] >> v) & 1)

    def b_vector(self, vertices) -> np.ndarray:
        """Per-block counts of a vertex subset."""
        out = np.zeros(self.k, dtype=np.int64)
        for v in vertices:
            out[self.block_of[v]] += 1
        return out

    def edge_count_within(self, vertices) -> int:
        vset = set(int(v) for v in vertices)
        return sum(1 for u, v in self.edges if int(u) in vset and int(v) in vset)

    def subgraph(self, vertices) -> tuple["SbmGraph", list[int]]:
        """Induced subgraph on `vertices` (kept in index order) plus the map
        from new indices back to the original ones."""
        keep = sorted(set(int(v) for v in vertices))
        index = {v: i for i, v in enumerate(keep)}
        edges = [(index[int(u)], index[int(v)]) for u, v in self.edges
                 if int(u) in index and int(v) in index]
        sub = SbmGraph(len(keep), [self.block_of[v] for v in keep], edges,
                       provenance={"kind": "induced", "parent": self.provenance},
                       k=self.k)
        return sub, keep

    # --- JSON graph files ---------------------------------------------------

    def to_json_dict(self) -> dict:
        prov = dict(self.provenance)
        prov.setdefault("k", self.k)
        return {
            "n": self.n,
            "blocks": [int(b) for b in self.block_of],
            "edges": [[int(u), int(v)] for u, v in self.edges],
            "provenance": prov,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SbmGraph":
        try:
            n = int(data["n"])
            blocks = data["blocks"]
            edges = data["edges"]
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed graph JSON: {exc}") from exc
        prov = data.get("provenance", {})
        return cls(n, blocks, edges, provenance=prov, k=prov.get("k"))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SbmGraph":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))

    def __repr__(self):
        return f"SbmGraph(n={self.n}, m={self.m}, k={self.k})"


class BlowUpSpec:
    """Template graph H on [k] plus integer multiplicities per vertex."""

    __slots__ = ("h_adjacency", "sizes", "k")

    def __init__(self, h_adjacency, sizes: BlockVector):
        adj = np.asarray(h_adjacency, dtype=np.int64)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ModelError("H adjacency must be square")
        if not np.array_equal(adj, adj.T):
            raise ModelError("H adjacency must be symmetric")
        if np.any(np.diag(adj) != 0):
            raise ModelError("H must have no self-loops")
        if not np.all((adj == 0) | (adj == 1)):
            raise ModelError("H adjacency entries must be 0/1")
        if not sizes.is_integer:
            raise ModelError("blow-up sizes must be integer")
        if sizes.k != adj.shape[0]:
            raise ModelError("sizes dimension must match H")
        adj.setflags(write=False)
        self.h_adjacency = adj
        self.sizes = sizes
        self.k = adj.shape[0]

    @classmethod
    def from_edges(cls, k: int, h_edges, sizes) -> "BlowUpSpec":
        adj = np.zeros((k, k), dtype=np.int64)
        for i, j in h_edges:
            if i == j:
                raise ModelError("H must have no self-loops")
            adj[int(i), int(j)] = adj[int(j), int(i)] = 1
        return cls(adj, BlockVector(sizes, integer=True))


def _block_of_from_sizes(sizes: np.ndarray) -> np.ndarray:
    return np.repeat(np.arange(sizes.size), sizes.astype(np.int64))


def sample_sbm(m: ModelInstance, seed: int) -> SbmGraph:
    """One draw from the block model: pair {u,v} appears independently with
    probability p[block(u), block(v)]."""
    sizes = m.sizes.values.astype(np.int64)
    n = int(sizes.sum())
    block_of = _block_of_from_sizes(sizes)
    rng = rng_from_seed(seed)
    p = m.probs.entries
    edges = []
    for u in range(n - 1):
        row_p = p[block_of[u], block_of[u + 1:]]
        draws = rng.random(n - u - 1)
        for off in np.nonzero(draws < row_p)[0]:
            edges.append((u, u + 1 + int(off)))
    prov = {"kind": "sbm", "seed": int(seed), "k": m.k,
            "sizes": [int(s) for s in sizes]}
    return SbmGraph(n, block_of, edges, provenance=prov, k=m.k)


def blow_up(spec: BlowUpSpec) -> SbmGraph:
    """Deterministic blow-up: block i is a clique of size n_i; blocks i, j
    are completely joined iff ij is an edge of H."""
    sizes = spec.sizes.values.astype(np.int64)
    n = int(sizes.sum())
    block_of = _block_of_from_sizes(sizes)
    starts = np.concatenate(([0], np.cumsum(sizes)))
    edges = []
    for i in range(spec.k):
        vs = range(starts[i], starts[i + 1])
        edges.extend((u, v) for u in vs for v in vs if u < v)
        for j in range(i + 1, spec.k):
            if spec.h_adjacency[i, j]:
                edges.extend((u, v) for u in vs
                             for v in range(starts[j], starts[j + 1]))
    prov = {"kind": "blowup", "k": spec.k, "sizes": [int(s) for s in sizes],
            "h_edges": [[int(i), int(j)] for i in range(spec.k)
                        for j in range(i + 1, spec.k) if spec.h_adjacency[i, j]]}
    return SbmGraph(n, block_of, edges, provenance=prov, k=spec.k)


def percolate(g: SbmGraph, p: float, seed: int) -> SbmGraph:
    """Keep each edge independently with probability p; vertices and blocks
    are unchanged."""
    if not 0.0 < p < 1.0:
        raise ModelError("percolation probability must lie in (0, 1)")
    rng = rng_from_seed(seed)
    draws = rng.random(g.m)
    kept = g.edges[draws < p]
    prov = {"kind": "percolate", "p": float(p), "seed": int(seed),
            "parent": g.provenance, "k": g.k}
    return SbmGraph(g.n, g.block_of, kept, provenance=prov, k=g.k)


def blow_up_as_model(spec: BlowUpSpec, p: float) -> ModelInstance:
    """Block model with P = p (I + A_H); sampling it is distribution-identical
    to percolating the blow-up with retention probability p."""
    if not 0.0 < p < 1.0:
        raise ModelError("percolation probability must lie in (0, 1)")
    pm = p * (np.eye(spec.k) + spec.h_adjacency.astype(np.float64))
    return ModelInstance(spec.sizes, ProbMatrix(pm))


def _bucket_index(values: np.ndarray, buckets: int) -> np.ndarray:
    """1-based cell of each value for cells (0, 1/k], ..., ((k-1)/k, 1];
    0 is assigned to cell 1."""
    idx = np.ceil(values * buckets).astype(np.int64)
    return np.clip(idx, 1, buckets)


def chung_lu_model(u: Sequence[float], p: float, kind: str,
                   buckets: int) -> tuple[ModelInstance, ModelInstance]:
    """Bucketed block-model sandwich (lower, upper) for the exact pairwise
    probabilities p*u_a*u_b ('times') or p*(u_a+u_b) ('plus')."""
    uv = np.asarray(u, dtype=np.float64)
    if uv.ndim != 1 or uv.size == 0:
        raise ModelError("u must be a nonempty vector")
    if np.any(uv < 0.0) or np.any(uv > 1.0):
        raise ModelError("u components must lie in [0, 1]")
    if buckets < 1:
        raise ModelError("buckets must be >= 1")
    kk = buckets
    if kind == "times":
        if not 0.0 < p < 1.0:
            raise ModelError("times kind needs p in (0, 1)")
        ij = np.arange(1, kk + 1, dtype=np.float64)
        lower = p * np.outer(ij - 1, ij - 1) / kk ** 2
        upper = p * np.outer(ij, ij) / kk ** 2
    elif kind == "plus":
        if not 0.0 < p < 0.5:
            raise ModelError("plus kind needs p in (0, 1/2): the top bucket "
                             "pair probability p*(i+j)/k reaches 2p")
        ij = np.arange(1, kk + 1, dtype=np.float64)
        lower = p * ((ij - 1)[:, None] + (ij - 1)[None, :]) / kk
        upper = p * (ij[:, None] + ij[None, :]) / kk
    else:
        raise ModelError(f"unknown Chung-Lu kind {kind!r}")
    counts = np.bincount(_bucket_index(uv, kk) - 1, minlength=kk)
    sizes = BlockVector(counts, integer=True)
    return (ModelInstance(sizes, ProbMatrix(lower)),
            ModelInstance(sizes, ProbMatrix(upper)))


def sample_chung_lu(u: Sequence[float], p: float, kind: str,
                    seed: int) -> SbmGraph:
    """Exact (unbucketed) sampler: pair {a,b} appears with p*u_a*u_b or
    p*(u_a+u_b).  Every vertex is its own block in the provenance."""
    uv = np.asarray(u, dtype=np.float64)
    if uv.ndim != 1 or uv.size == 0:
        raise ModelError("u must be a nonempty vector")
    if np.any(uv < 0.0) or np.any(uv > 1.0):
        raise ModelError("u components must lie in [0, 1]")
    n = uv.size
    if kind == "times":
        if not 0.0 < p < 1.0:
            raise ModelError("times kind needs p in (0, 1)")
    elif kind == "plus":
        top = p * (np.sort(uv)[-2:].sum()) if n >= 2 else 0.0
        if p <= 0.0 or top >= 1.0:
            raise ModelError("plus kind pairwise probability reaches "
                             f"{top:.3f} >= 1")
    else:
        raise ModelError(f"unknown Chung-Lu kind {kind!r}")
    rng = rng_from_seed(seed)
    edges = []
    for a in range(n - 1):
        if kind == "times":
            probs = p * uv[a] * uv[a + 1:]
        else:
            probs = p * (uv[a] + uv[a + 1:])
        draws = rng.random(n - a - 1)
        for off in np.nonzero(draws < probs)[0]:
            edges.append((a, a + 1 + int(off)))
    prov = {"kind": f"chunglu-{kind}", "p": float(p), "seed": int(seed),
            "u": [float(v) for v in uv], "k": n}
    return SbmGraph(n, np.arange(n), edges, provenance=prov, k=n)


def union_graphs(g1: SbmGraph, g2: SbmGraph) -> SbmGraph:
    """Edge union of two graphs on the same vertex and block structure."""
    if g1.n != g2.n or g1.k != g2.k or not np.array_equal(g1.block_of, g2.block_of):
        raise ModelError("union requires identical vertex and block structure")
    edges = np.vstack([g1.edges, g2.edges]) if g1.m + g2.m else []
    prov = {"kind": "union", "parents": [g1.provenance, g2.provenance],
            "k": g1.k}
    return SbmGraph(g1.n, g1.block_of, edges, provenance=prov, k=g1.k)


def union_model(m1: ModelInstance, m2: ModelInstance) -> ModelInstance:
    """Block model of the union of independent draws: 1-p = (1-p1)(1-p2),
    equivalently Q = Q1 + Q2."""
    if m1.k != m2.k or not np.array_equal(m1.sizes.values, m2.sizes.values):
        raise ModelError("union requires identical block sizes")
    p = 1.0 - (1.0 - m1.probs.entries) * (1.0 - m2.probs.entries)
    return ModelInstance(m1.sizes, ProbMatrix(p))
