"""Pluggable per-user degrees-of-freedom provider for the access channel.

A provider maps (m, j, cfg) to the achievable per-user DoF when every group
of j edge nodes cooperatively serves every group of m+1 users.  The default
is built only from safe anchors: the single-node cooperation closed form,
the 1/2 floor when there are at least as many edge nodes as users, and full
DoF at full cooperation in that same regime.  It is therefore a conservative
lower bound; exact values from richer analyses can be registered instead.
"""
from __future__ import annotations

import json
from typing import Callable, Sequence

from .model import NetworkConfig

DofProvider = Callable[[int, int, NetworkConfig], float]


class DofContractError(ValueError):
    """A provider returned a value outside (0, 1] or decreasing in j."""


def per_user_dof_default(m: int, j: int, cfg: NetworkConfig) -> float:
    """Largest anchored lower bound on the per-user DoF at cooperation level j."""
    nt, nr = cfg.num_ens, cfg.num_ues
    if not 0 <= m <= nr - 1:
        raise ValueError(f"m outside [0, {nr - 1}]: {m}")
    if not 1 <= j <= nt:
        raise ValueError(f"j outside [1, {nt}]: {j}")
    d = nt / (nt + (nr - m - 1) / (m + 1))
    if nt >= nr:
        if j == nt:
            return 1.0
        d = max(d, 0.5)
    return d


_DEFAULT_CHECK_SHAPES = ((2, 2), (2, 5), (3, 3), (4, 3), (5, 2), (6, 6))


def check_contract(provider: DofProvider, configs: Sequence[NetworkConfig] | None = None) -> None:
    """Sample the provider over a grid; raise DofContractError on any violation."""
    if configs is None:
        configs = [
            NetworkConfig(nt, nr, max(nr, 2), 0.5, 0.5, 1.0) for nt, nr in _DEFAULT_CHECK_SHAPES
        ]
    for cfg in configs:
        for m in range(cfg.num_ues):
            previous = None
            for j in range(1, cfg.num_ens + 1):
                d = provider(m, j, cfg)
                where = f"(m={m}, j={j}, n_t={cfg.num_ens}, n_r={cfg.num_ues})"
                if not 0.0 < d <= 1.0:
                    raise DofContractError(f"dof {d} outside (0, 1] at {where}")
                if previous is not None and d < previous:
                    raise DofContractError(
                        f"dof decreases from {previous} to {d} in j at {where}"
                    )
                previous = d


_active_provider: DofProvider = per_user_dof_default


def register_provider(provider: DofProvider, configs: Sequence[NetworkConfig] | None = None) -> DofProvider:
    """Contract-check a provider, make it the active one, and return it."""
    check_contract(provider, configs)
    global _active_provider
    _active_provider = provider
    return provider


def reset_provider() -> None:
    global _active_provider
    _active_provider = per_user_dof_default


def active_provider() -> DofProvider:
    return _active_provider


def resolve_provider(provider: DofProvider | None) -> DofProvider:
    return provider if provider is not None else _active_provider


def table_provider_from_json(path, fallback: DofProvider = per_user_dof_default) -> DofProvider:
    """Build a provider from a JSON table of {m, j, n_t, n_r, d} entries.

    Pairs missing from the table fall back to ``fallback``, so partial tables
    (for one network shape, say) stay usable everywhere else.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    table: dict[tuple[int, int, int, int], float] = {}
    for entry in doc["entries"]:
        key = (entry["m"], entry["j"], entry["n_t"], entry["n_r"])
        table[key] = float(entry["d"])

    def provider(m: int, j: int, cfg: NetworkConfig) -> float:
        value = table.get((m, j, cfg.num_ens, cfg.num_ues))
        if value is None:
            return fallback(m, j, cfg)
        return value

    return provider
