"""Random per-bit cache placement and its analytic subfile-size calculus.

Every bit of every file carries a label: the set of users and the set of
edge nodes that cached it.  Labels are sampled independently per bit with
inclusion probabilities ``mu_r`` (users) and ``mu_t`` (edge nodes), so each
cell (the bits of one file sharing one label) is a Bernoulli draw whose
expected fraction is the closed product form returned by
:func:`fractional_size`.  Cache-size budgets therefore hold in expectation
rather than per realization.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .model import (
    GroupIndex,
    NetworkConfig,
    binom,
    config_from_dict,
    config_to_dict,
    validate_config,
)

# Labels are packed into uint32 masks: low num_ues bits for users, the next
# num_ens bits for edge nodes.
_MAX_PACKED_NODES = 30

REPLAY_FORMAT = "fogndt-placement/1"


def fractional_size(m: int, n: int, cfg: NetworkConfig) -> float:
    """Expected fraction of a file cached at a fixed set of m users and n edge nodes."""
    if not 0 <= m <= cfg.num_ues:
        raise ValueError(f"m outside [0, {cfg.num_ues}]: {m}")
    if not 0 <= n <= cfg.num_ens:
        raise ValueError(f"n outside [0, {cfg.num_ens}]: {n}")
    return (
        cfg.mu_r ** m
        * (1.0 - cfg.mu_r) ** (cfg.num_ues - m)
        * cfg.mu_t ** n
        * (1.0 - cfg.mu_t) ** (cfg.num_ens - n)
    )


def pack_label(ue_set: Iterable[int], en_set: Iterable[int], cfg: NetworkConfig) -> int:
    """Pack 1-based user and edge-node id sets into one integer mask."""
    mask = 0
    for q in ue_set:
        if not 1 <= q <= cfg.num_ues:
            raise ValueError(f"user id outside [1, {cfg.num_ues}]: {q}")
        mask |= 1 << (q - 1)
    for p in en_set:
        if not 1 <= p <= cfg.num_ens:
            raise ValueError(f"edge-node id outside [1, {cfg.num_ens}]: {p}")
        mask |= 1 << (cfg.num_ues + p - 1)
    return mask


def unpack_label(label: int, cfg: NetworkConfig) -> tuple[tuple[int, ...], tuple[int, ...]]:
    ues = tuple(q for q in range(1, cfg.num_ues + 1) if label >> (q - 1) & 1)
    ens = tuple(p for p in range(1, cfg.num_ens + 1) if label >> (cfg.num_ues + p - 1) & 1)
    return ues, ens


@dataclass(frozen=True)
class PlacementRealization:
    """Per-bit cache labels plus the file contents they apply to.

    ``bit_labels[f, b]`` is the packed label of bit ``b`` of file ``f + 1``
    and ``file_bits[f, b]`` the bit value itself.  Instances are immutable;
    cell index tables are computed lazily and cached.
    """

    cfg: NetworkConfig
    file_size_bits: int
    seed: int | None
    bit_labels: np.ndarray
    file_bits: np.ndarray

    @cached_property
    def _cells(self) -> tuple[dict[int, np.ndarray], ...]:
        out = []
        for f in range(self.cfg.num_files):
            labels = self.bit_labels[f]
            order = np.argsort(labels, kind="stable")
            sorted_labels = labels[order]
            cuts = np.flatnonzero(np.diff(sorted_labels)) + 1
            chunks = np.split(order, cuts)
            out.append({int(labels[chunk[0]]): chunk for chunk in chunks})
        return tuple(out)

    def cell_indices(self, file_id: int, ue_set, en_set) -> np.ndarray:
        """Ascending bit positions of one cell; empty when nothing landed there."""
        if not 1 <= file_id <= self.cfg.num_files:
            raise ValueError(f"unknown file id: {file_id}")
        label = pack_label(ue_set, en_set, self.cfg)
        return self._cells[file_id - 1].get(label, _EMPTY_INDICES)

    def cell_bits(self, file_id: int, ue_set, en_set) -> np.ndarray:
        idx = self.cell_indices(file_id, ue_set, en_set)
        return self.file_bits[file_id - 1][idx]


_EMPTY_INDICES = np.empty(0, dtype=np.int64)


def sample_placement(cfg: NetworkConfig, file_size_bits: int, seed: int) -> PlacementRealization:
    """Draw one placement realization, deterministic in (cfg, file_size_bits, seed).

    File contents and labels come from two independent streams spawned from
    the seed, so a realization replayed from its serialized cell layout can
    regenerate identical file contents without re-drawing labels.
    """
    validate_config(cfg)
    if file_size_bits < 1:
        raise ValueError(f"file_size_bits must be at least 1: {file_size_bits}")
    if cfg.num_ues + cfg.num_ens > _MAX_PACKED_NODES:
        raise ValueError(
            f"at most {_MAX_PACKED_NODES} nodes supported, got {cfg.num_ues + cfg.num_ens}"
        )
    content_ss, label_ss = np.random.SeedSequence(seed).spawn(2)
    file_bits = np.random.default_rng(content_ss).integers(
        0, 2, size=(cfg.num_files, file_size_bits), dtype=np.uint8
    )
    label_rng = np.random.default_rng(label_ss)
    ue_weights = (np.uint32(1) << np.arange(cfg.num_ues, dtype=np.uint32))
    en_weights = (np.uint32(1) << np.arange(cfg.num_ens, dtype=np.uint32)) << np.uint32(cfg.num_ues)
    labels = np.empty((cfg.num_files, file_size_bits), dtype=np.uint32)
    for f in range(cfg.num_files):
        ue_draw = label_rng.random((file_size_bits, cfg.num_ues)) < cfg.mu_r
        en_draw = label_rng.random((file_size_bits, cfg.num_ens)) < cfg.mu_t
        labels[f] = ue_draw.astype(np.uint32) @ ue_weights + en_draw.astype(np.uint32) @ en_weights
    return PlacementRealization(cfg, file_size_bits, seed, labels, file_bits)


@dataclass(frozen=True)
class SubfilePartition:
    """All nonempty cells of one file, keyed by (user set, edge-node set)."""

    file_id: int
    cells: dict[tuple[tuple[int, ...], tuple[int, ...]], np.ndarray]


def partition_file(p: PlacementRealization, file_id: int) -> SubfilePartition:
    """Group the bits of one file by identical cache label."""
    if not 1 <= file_id <= p.cfg.num_files:
        raise ValueError(f"unknown file id: {file_id}")
    cells = {
        unpack_label(label, p.cfg): idx for label, idx in p._cells[file_id - 1].items()
    }
    return SubfilePartition(file_id, cells)


def empirical_fractions(p: PlacementRealization) -> dict[GroupIndex, float]:
    """Average realized cell fraction per (m, n), one entry per possible size pair.

    The (m, n) total over files is divided by the number of cells of that
    shape, so each entry estimates the single-cell fraction and converges to
    :func:`fractional_size` as the file size grows.
    """
    cfg = p.cfg
    nr, nt = cfg.num_ues, cfg.num_ens
    totals = np.zeros((nr + 1, nt + 1))
    ue_mask = (1 << nr) - 1
    for f in range(cfg.num_files):
        for label, idx in p._cells[f].items():
            m = (label & ue_mask).bit_count()
            n = (label >> nr).bit_count()
            totals[m, n] += idx.size
    base = cfg.num_files * p.file_size_bits
    return {
        GroupIndex(m, n): totals[m, n] / (base * binom(nr, m) * binom(nt, n))
        for m in range(nr + 1)
        for n in range(nt + 1)
    }


def _index_ranges(idx: np.ndarray) -> list[list[int]]:
    """Compress ascending indices into half-open [start, end) runs."""
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) != 1) + 1
    ranges = []
    for chunk in np.split(idx, breaks):
        ranges.append([int(chunk[0]), int(chunk[-1]) + 1])
    return ranges


def placement_to_replay(p: PlacementRealization) -> dict:
    """JSON-ready replay form: cells as label -> count plus bit ranges.

    When the realization was seeded, file contents are regenerated from the
    seed on load; hand-built realizations (seed None) embed the raw contents.
    """
    files = []
    for f in range(p.cfg.num_files):
        cells = []
        for label in sorted(p._cells[f]):
            idx = p._cells[f][label]
            ues, ens = unpack_label(label, p.cfg)
            cells.append(
                {
                    "ues": list(ues),
                    "ens": list(ens),
                    "count": int(idx.size),
                    "ranges": _index_ranges(idx),
                }
            )
        files.append({"file": f + 1, "cells": cells})
    doc = {
        "format": REPLAY_FORMAT,
        "seed": p.seed,
        "config": config_to_dict(p.cfg),
        "file_size_bits": p.file_size_bits,
        "files": files,
    }
    if p.seed is None:
        doc["file_bits_hex"] = [
            np.packbits(p.file_bits[f]).tobytes().hex() for f in range(p.cfg.num_files)
        ]
    return doc


def placement_from_replay(doc: dict) -> PlacementRealization:
    """Rebuild a realization from :func:`placement_to_replay` output."""
    if doc.get("format") != REPLAY_FORMAT:
        raise ValueError(f"unsupported replay format: {doc.get('format')!r}")
    cfg = validate_config(config_from_dict(doc["config"]))
    file_size_bits = doc["file_size_bits"]
    seed = doc["seed"]
    labels = np.zeros((cfg.num_files, file_size_bits), dtype=np.uint32)
    for entry in doc["files"]:
        f = entry["file"] - 1
        covered = 0
        for cell in entry["cells"]:
            label = pack_label(cell["ues"], cell["ens"], cfg)
            for start, end in cell["ranges"]:
                labels[f, start:end] = label
                covered += end - start
        if covered != file_size_bits:
            raise ValueError(f"cells of file {entry['file']} cover {covered} of {file_size_bits} bits")
    if seed is not None:
        content_ss, _ = np.random.SeedSequence(seed).spawn(2)
        file_bits = np.random.default_rng(content_ss).integers(
            0, 2, size=(cfg.num_files, file_size_bits), dtype=np.uint8
        )
    else:
        file_bits = np.empty((cfg.num_files, file_size_bits), dtype=np.uint8)
        for f, blob in enumerate(doc["file_bits_hex"]):
            raw = np.frombuffer(bytes.fromhex(blob), dtype=np.uint8)
            file_bits[f] = np.unpackbits(raw, count=file_size_bits)
    return PlacementRealization(cfg, file_size_bits, seed, labels, file_bits)
