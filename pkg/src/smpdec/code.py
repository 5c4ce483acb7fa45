"""Labeled regular Tanner graphs from the (dv, dc, q) ensemble.

Graphs are sampled with the configuration model: VN sockets are matched
to CN sockets by a uniform random permutation and every edge carries an
independent uniform nonzero label. Parallel edges are removed by random
edge swaps; this deviates from the pure permutation ensemble (which
permits them) because parallel edges degrade finite-length performance
without affecting the asymptotic analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TextIO

import numpy as np

from .galois import FieldSpec

_REPAIR_ROUNDS = 200
_SAMPLE_ATTEMPTS = 50


@dataclass(eq=False)
class CodeGraph:
    """A labeled regular Tanner graph.

    Edges are stored in VN-major order: edge e = v * dv + slot connects
    VN v through its slot-th socket, so ``edge_vn`` is fixed by (n, dv).
    Instances are treated as immutable after construction.

    Attributes
    ----------
    n, m_checks : int
        Number of variable and check nodes.
    dv, dc : int
        Variable and check node degrees.
    field : FieldSpec
        The label alphabet GF(q).
    edge_vn, edge_cn : np.ndarray
        Endpoint indices per edge.
    edge_label : np.ndarray
        Nonzero labels per edge.
    """

    n: int
    m_checks: int
    dv: int
    dc: int
    field: FieldSpec
    edge_vn: np.ndarray = field(repr=False)
    edge_cn: np.ndarray = field(repr=False)
    edge_label: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = self.n * self.dv
        if e != self.m_checks * self.dc:
            raise ValueError("socket counts disagree: n*dv != m_checks*dc")
        if self.edge_vn.shape != (e,) or self.edge_cn.shape != (e,) \
                or self.edge_label.shape != (e,):
            raise ValueError("edge arrays must have length n*dv")
        if not np.array_equal(self.edge_vn, np.repeat(np.arange(self.n), self.dv)):
            raise ValueError("edges must be in VN-major order")
        if not np.all(np.bincount(self.edge_cn, minlength=self.m_checks) == self.dc):
            raise ValueError("every CN must have degree dc")
        if np.any(self.edge_label < 1) or np.any(self.edge_label >= self.field.q):
            raise ValueError("labels must be nonzero field elements")

    @property
    def design_rate(self) -> float:
        return 1.0 - self.dv / self.dc

    @cached_property
    def vn_adjacency(self) -> list[np.ndarray]:
        """Edge indices per VN, in socket order."""
        return [np.arange(v * self.dv, (v + 1) * self.dv) for v in range(self.n)]

    @cached_property
    def cn_adjacency(self) -> list[np.ndarray]:
        """Edge indices per CN, in the order given by ``cn_edge_perm``."""
        perm = self.cn_edge_perm
        return [perm[c * self.dc:(c + 1) * self.dc] for c in range(self.m_checks)]

    @cached_property
    def cn_edge_perm(self) -> np.ndarray:
        """Edge permutation that groups edges by CN (dc consecutive each)."""
        return np.argsort(self.edge_cn, kind="stable")


def sample_code(n: int, dv: int, dc: int, field: FieldSpec, seed: int) -> CodeGraph:
    """Sample a graph from the (dv, dc, q) ensemble, repaired to be simple.

    Parameters
    ----------
    n : int
        Codeword length (number of VNs); n * dv must be divisible by dc.
    dv, dc : int
        Degrees, with dv >= 2 and dc > dv.
    field : FieldSpec
        Label alphabet.
    seed : int
        Sampling is deterministic given the seed.

    Returns
    -------
    CodeGraph

    Raises
    ------
    ValueError
        On degree or divisibility violations, or if parallel-edge repair
        fails for every resampling attempt.
    """
    if dv < 2:
        raise ValueError("variable node degree must be at least 2")
    if dc <= dv:
        raise ValueError("check node degree must exceed variable node degree")
    if (n * dv) % dc != 0:
        raise ValueError(f"n*dv = {n * dv} is not divisible by dc = {dc}")
    m_checks = n * dv // dc
    n_edges = n * dv

    for attempt in range(_SAMPLE_ATTEMPTS):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=[int(seed), attempt]))
        edge_cn = rng.permutation(n_edges) // dc
        if _repair_parallel_edges(edge_cn, n, dv, rng):
            labels = rng.integers(1, field.q, size=n_edges, dtype=np.int32)
            return CodeGraph(n=n, m_checks=m_checks, dv=dv, dc=dc, field=field,
                             edge_vn=np.repeat(np.arange(n), dv),
                             edge_cn=edge_cn, edge_label=labels)
    raise ValueError(f"parallel-edge repair failed after {_SAMPLE_ATTEMPTS} attempts")


def _repair_parallel_edges(edge_cn: np.ndarray, n: int, dv: int,
                           rng: np.random.Generator) -> bool:
    """Swap CN endpoints of duplicated edges until the graph is simple.

    Swapping endpoints between two edges preserves all CN degrees. Returns
    False if conflicts persist after the round budget.
    """
    n_edges = edge_cn.size
    for _ in range(_REPAIR_ROUNDS):
        rows = np.sort(edge_cn.reshape(n, dv), axis=1)
        dup_rows = np.nonzero((np.diff(rows, axis=1) == 0).any(axis=1))[0]
        if dup_rows.size == 0:
            return True
        partners = rng.integers(0, n_edges, size=dup_rows.size)
        for v, f in zip(dup_rows.tolist(), partners.tolist()):
            base = v * dv
            row = edge_cn[base:base + dv].tolist()
            seen = set()
            for slot, c in enumerate(row):
                if c in seen:
                    break
                seen.add(c)
            e = base + slot
            edge_cn[e], edge_cn[f] = edge_cn[f], edge_cn[e]
    return False


def save_code(code: CodeGraph, sink: TextIO) -> None:
    """Write a graph in the labeled-alist text format.

    Header line ``n m_checks dv dc q``, then one line per VN listing
    ``cn_index:label`` pairs with 1-based CN indices.
    """
    sink.write(f"{code.n} {code.m_checks} {code.dv} {code.dc} {code.field.q}\n")
    cn = code.edge_cn
    labels = code.edge_label
    for v in range(code.n):
        base = v * code.dv
        pairs = " ".join(f"{cn[e] + 1}:{labels[e]}"
                         for e in range(base, base + code.dv))
        sink.write(pairs + "\n")


def load_code(source: TextIO, field: FieldSpec) -> CodeGraph:
    """Read a graph in the labeled-alist text format.

    Leading lines starting with ``#`` are skipped, so files may carry
    provenance comments ahead of the header.

    Raises
    ------
    ValueError
        On malformed input or any degree/label violation.
    """
    line = source.readline()
    while line.startswith("#"):
        line = source.readline()
    header = line.split()
    if len(header) != 5:
        raise ValueError("header must be 'n m_checks dv dc q'")
    try:
        n, m_checks, dv, dc, q = (int(tok) for tok in header)
    except ValueError as exc:
        raise ValueError(f"malformed header: {exc}") from None
    if q != field.q:
        raise ValueError(f"file is over GF({q}), expected GF({field.q})")
    if n * dv != m_checks * dc:
        raise ValueError("header violates n*dv = m_checks*dc")

    edge_cn = np.empty(n * dv, dtype=np.int64)
    edge_label = np.empty(n * dv, dtype=np.int32)
    for v in range(n):
        tokens = source.readline().split()
        if len(tokens) != dv:
            raise ValueError(f"VN {v} has {len(tokens)} edges, expected {dv}")
        for slot, tok in enumerate(tokens):
            try:
                cn_str, label_str = tok.split(":")
                cn, label = int(cn_str), int(label_str)
            except ValueError:
                raise ValueError(f"malformed edge token {tok!r} at VN {v}") from None
            if not 1 <= cn <= m_checks:
                raise ValueError(f"CN index {cn} out of range at VN {v}")
            if not 1 <= label < q:
                raise ValueError(f"label {label} out of range at VN {v}")
            edge_cn[v * dv + slot] = cn - 1
            edge_label[v * dv + slot] = label
    return CodeGraph(n=n, m_checks=m_checks, dv=dv, dc=dc, field=field,
                     edge_vn=np.repeat(np.arange(n), dv),
                     edge_cn=edge_cn, edge_label=edge_label)
