"""Parsing and summarization of labeled networks.

Input is either a pair of text files (edge list + node labels) or a single
JSON document.  Node identifiers are arbitrary strings mapped to dense
indices in first-appearance order (labels file first, then edges), which
makes every downstream structure deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "NetworkError",
    "ParseError",
    "LabeledNetwork",
    "CountsTable",
    "GroupSummary",
    "parse_network",
    "parse_network_json",
    "group_counts",
    "group_summary",
    "write_edge_file",
    "write_label_file",
]


class NetworkError(ValueError):
    """Structurally invalid network (empty, unlabeled endpoint, ...)."""


class ParseError(NetworkError):
    """Malformed input line; carries the source line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class LabeledNetwork:
    """Directed multigraph with integer edge multiplicities and node labels.

    Edges are stored as parallel arrays over distinct (source, target)
    pairs; the `edges` property exposes the same data as a dict.
    """

    n: int
    c: int
    edge_src: np.ndarray  # distinct directed edges, one entry per pair
    edge_dst: np.ndarray
    edge_mult: np.ndarray  # multiplicity per pair
    labels: np.ndarray  # node index -> group index
    group_names: list
    node_names: list
    directed: bool

    @property
    def m(self) -> int:
        """Total directed edge count (with multiplicity)."""
        return int(self.edge_mult.sum())

    @property
    def edges(self) -> dict:
        """(source, target) -> multiplicity view of the edge arrays."""
        cached = self.__dict__.get("_edges_dict")
        if cached is None:
            pairs = map(tuple, np.column_stack([self.edge_src, self.edge_dst]).tolist())
            cached = dict(zip(pairs, self.edge_mult.tolist()))
            object.__setattr__(self, "_edges_dict", cached)
        return cached

    def validate(self) -> None:
        src, dst, w = self.edge_src, self.edge_dst, self.edge_mult
        if not (src.shape == dst.shape == w.shape):
            raise NetworkError("edge arrays disagree on length")
        if src.size == 0:
            return
        if src.min() < 0 or dst.min() < 0 or src.max() >= self.n or dst.max() >= self.n:
            raise NetworkError("edge endpoint out of range")
        if not np.issubdtype(w.dtype, np.integer) or np.any(w < 0):
            raise NetworkError("edge multiplicity must be a non-negative integer")
        key = src * self.n + dst
        if np.unique(key).size != key.size:
            raise NetworkError("duplicate (source, target) pair in edge arrays")
        if not self.directed:
            rkey = dst * self.n + src
            order, rorder = np.argsort(key), np.argsort(rkey)
            if (not np.array_equal(key[order], rkey[rorder])
                    or not np.array_equal(w[order], w[rorder])):
                raise NetworkError("undirected network has asymmetric multiplicity")


@dataclass(frozen=True)
class CountsTable:
    """Per-node out-edge counts split by target group."""

    rows: np.ndarray  # (n, c) integer matrix, rows[i][s] = edges i -> group s
    group_of: np.ndarray  # node -> group index
    by_group: list  # group -> array of node indices

    @property
    def c(self) -> int:
        return self.rows.shape[1]

    def group_rows(self, r: int) -> np.ndarray:
        return self.rows[self.by_group[r]]


@dataclass(frozen=True)
class GroupSummary:
    """Node fractions, in-degree mass per group, and total edge count."""

    p: np.ndarray
    K: np.ndarray
    m: int


def _iter_records(stream: Iterable[str]):
    for lineno, raw in enumerate(stream, start=1):
        if "#" in raw:
            raw = raw.split("#", 1)[0]
        fields = raw.split()
        if fields:
            yield lineno, fields


def _parse_labels(labels_stream, drop_labels):
    order = []  # node names in first appearance order
    label_of = {}
    for lineno, fields in _iter_records(labels_stream):
        if len(fields) != 2:
            raise ParseError(f"expected 'node group', got {len(fields)} fields", lineno)
        node, group = fields
        if node in label_of:
            if label_of[node] != group:
                raise ParseError(f"conflicting label for node '{node}': "
                                 f"'{label_of[node]}' vs '{group}'", lineno)
            continue
        label_of[node] = group
        order.append(node)
    kept = [v for v in order if label_of[v] not in drop_labels]
    return kept, label_of


def _parse_edges(edges_stream):
    """Edge lines as parallel lists (line numbers, sources, targets)."""
    linenos, us, vs = [], [], []
    for lineno, fields in _iter_records(edges_stream):
        if len(fields) != 2:
            raise ParseError(f"expected 'source target', got {len(fields)} fields", lineno)
        linenos.append(lineno)
        us.append(fields[0])
        vs.append(fields[1])
    return linenos, us, vs


_DROPPED = -1  # endpoint carries a dropped label; edge is discarded


def _assemble(edge_lists, kept_nodes, label_of, drop_labels, directed, keep_self_loops):
    index = {v: i for i, v in enumerate(kept_nodes)}
    group_names = []
    group_index = {}
    labels = np.empty(len(kept_nodes), dtype=np.intp)
    for v in kept_nodes:
        g = label_of[v]
        if g not in group_index:
            group_index[g] = len(group_names)
            group_names.append(g)
        labels[index[v]] = group_index[g]

    if not kept_nodes:
        raise NetworkError("network is empty after label filtering")
    n = len(kept_nodes)
    linenos, us, vs = edge_lists
    # one combined name -> dense-index (or dropped marker) map, so each
    # endpoint costs a single dict lookup; everything after is vectorized
    code_of = {v: (_DROPPED if g in drop_labels else index[v])
               for v, g in label_of.items()}
    ii = jj = mult = np.empty(0, dtype=np.int64)
    if us:
        try:
            i_arr = np.array([code_of[u] for u in us], dtype=np.int64)
            j_arr = np.array([code_of[v] for v in vs], dtype=np.int64)
        except KeyError:
            for lineno, u, v in zip(linenos, us, vs):
                for name in (u, v):
                    if name not in code_of:
                        raise ParseError(f"edge endpoint '{name}' has no label", lineno)
            raise  # unreachable: the scan above re-finds the missing name
        keep = (i_arr != _DROPPED) & (j_arr != _DROPPED)
        if not keep_self_loops:
            keep &= i_arr != j_arr
        i_arr = i_arr[keep]
        j_arr = j_arr[keep]
        key = i_arr * n + j_arr
        if not directed:
            # both orientations; self-loops land twice, giving them weight 2
            key = np.concatenate([key, j_arr * n + i_arr])
        uniq, mult = np.unique(key, return_counts=True)
        ii, jj = np.divmod(uniq, n)
        mult = mult.astype(np.int64)
    net = LabeledNetwork(
        n=n,
        c=len(group_names),
        edge_src=ii,
        edge_dst=jj,
        edge_mult=mult,
        labels=labels,
        group_names=group_names,
        node_names=list(kept_nodes),
        directed=directed,
    )
    net.validate()
    return net


def parse_network(edges_stream, labels_stream, *, directed=False,
                  drop_labels=frozenset(), keep_self_loops=True) -> LabeledNetwork:
    """Build a LabeledNetwork from an edge-list stream and a label stream.

    Undirected input is expanded to reciprocated directed pairs.  Nodes whose
    group name is in drop_labels are removed along with incident edges.
    Repeated edge lines accumulate multiplicity.
    """
    drop = frozenset(drop_labels)
    kept, label_of = _parse_labels(labels_stream, drop)
    return _assemble(_parse_edges(edges_stream), kept, label_of, drop,
                     directed, keep_self_loops)


def parse_network_json(stream, *, drop_labels=frozenset(), keep_self_loops=True) -> LabeledNetwork:
    """Parse the combined JSON form:
    {"directed": bool, "edges": [[s, t], ...], "labels": {node: group}}.
    """
    doc = json.load(stream) if hasattr(stream, "read") else json.loads(stream)
    try:
        directed = bool(doc["directed"])
        raw_edges = doc["edges"]
        raw_labels = doc["labels"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing or malformed JSON field: {exc}") from exc
    drop = frozenset(drop_labels)
    label_of = {str(k): str(v) for k, v in raw_labels.items()}
    kept = [v for v in label_of if label_of[v] not in drop]
    linenos, us, vs = [], [], []
    for idx, pair in enumerate(raw_edges):
        if len(pair) != 2:
            raise ParseError(f"edge {idx} is not a pair")
        linenos.append(idx)
        us.append(str(pair[0]))
        vs.append(str(pair[1]))
    return _assemble((linenos, us, vs), kept, label_of, drop, directed, keep_self_loops)


def group_counts(net: LabeledNetwork) -> CountsTable:
    """Count each node's out-edges by target group."""
    rows = np.zeros((net.n, net.c), dtype=np.int64)
    if net.edge_src.size:
        np.add.at(rows, (net.edge_src, net.labels[net.edge_dst]), net.edge_mult)
    by_group = [np.flatnonzero(net.labels == r) for r in range(net.c)]
    return CountsTable(rows=rows, group_of=net.labels, by_group=by_group)


def group_summary(net: LabeledNetwork, *, exclude_zero_degree=False) -> GroupSummary:
    """Group fractions p_r, in-degree mass K_r, and total edge count m.

    p_r counts all labeled nodes by default; exclude_zero_degree drops
    nodes with no out-edges from the fractions.
    """
    m = net.m
    if m == 0:
        raise NetworkError("network has no edges")
    w = net.edge_mult
    K = np.bincount(net.labels[net.edge_dst], weights=w, minlength=net.c).astype(np.int64)
    out_deg = np.bincount(net.edge_src, weights=w, minlength=net.n)
    if exclude_zero_degree:
        active = out_deg > 0
        counts = np.bincount(net.labels[active], minlength=net.c)
    else:
        counts = np.bincount(net.labels, minlength=net.c)
    p = counts / counts.sum()
    return GroupSummary(p=p, K=K, m=int(m))


def write_edge_file(net: LabeledNetwork, fh) -> None:
    """Serialize edges, one line per unit of multiplicity.

    Undirected networks emit each reciprocated pair once.
    """
    order = np.lexsort((net.edge_dst, net.edge_src))
    names = net.node_names
    for k in order.tolist():
        i, j, w = int(net.edge_src[k]), int(net.edge_dst[k]), int(net.edge_mult[k])
        if not net.directed:
            if j < i:
                continue
            if i == j:
                w //= 2
        line = f"{names[i]}\t{names[j]}\n"
        fh.write(line * w)


def write_label_file(net: LabeledNetwork, fh) -> None:
    for i, name in enumerate(net.node_names):
        fh.write(f"{name}\t{net.group_names[net.labels[i]]}\n")
