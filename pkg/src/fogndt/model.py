"""Shared problem-instance types, validation, and combinatorial helpers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple


class ConfigError(ValueError):
    """A configuration field is outside its allowed range."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class NetworkConfig:
    """One cache-aided network instance.

    ``num_ens`` edge nodes and ``num_ues`` users each hold a local cache sized
    as a fraction (``mu_t``, ``mu_r``) of the ``num_files``-file library.
    ``fronthaul_r`` is the power scaling (equivalently the multiplexing gain)
    of the shared wireless fronthaul relative to the access link.
    """

    num_ens: int
    num_ues: int
    num_files: int
    mu_t: float
    mu_r: float
    fronthaul_r: float


def validate_config(cfg: NetworkConfig) -> NetworkConfig:
    """Return ``cfg`` unchanged if every field is legal, else raise ConfigError."""
    for name in ("num_ens", "num_ues", "num_files"):
        value = getattr(cfg, name)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(name, f"{name} must be an integer, got {value!r}")
    if cfg.num_ens < 2:
        raise ConfigError("num_ens", f"num_ens below minimum: {cfg.num_ens} < 2")
    if cfg.num_ues < 2:
        raise ConfigError("num_ues", f"num_ues below minimum: {cfg.num_ues} < 2")
    if cfg.num_files < cfg.num_ues:
        raise ConfigError(
            "num_files",
            f"num_files below num_ues: {cfg.num_files} < {cfg.num_ues}",
        )
    if not 0.0 <= cfg.mu_t <= 1.0:
        raise ConfigError("mu_t", f"mu_t outside [0, 1]: {cfg.mu_t}")
    if not 0.0 <= cfg.mu_r <= 1.0:
        raise ConfigError("mu_r", f"mu_r outside [0, 1]: {cfg.mu_r}")
    if not cfg.fronthaul_r > 0.0:
        raise ConfigError("fronthaul_r", f"fronthaul_r must be positive: {cfg.fronthaul_r}")
    return cfg


def config_to_dict(cfg: NetworkConfig) -> dict:
    return {
        "num_ens": cfg.num_ens,
        "num_ues": cfg.num_ues,
        "num_files": cfg.num_files,
        "mu_t": cfg.mu_t,
        "mu_r": cfg.mu_r,
        "fronthaul_r": cfg.fronthaul_r,
    }


def config_from_dict(doc: dict) -> NetworkConfig:
    try:
        return NetworkConfig(
            num_ens=doc["num_ens"],
            num_ues=doc["num_ues"],
            num_files=doc["num_files"],
            mu_t=doc["mu_t"],
            mu_r=doc["mu_r"],
            fronthaul_r=doc["fronthaul_r"],
        )
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), f"missing configuration key: {exc.args[0]}") from None


def binom(a: int, b: int) -> int:
    """Exact binomial coefficient, 0 whenever b < 0 or b > a."""
    if a < 0:
        raise ValueError(f"binom requires a >= 0, got {a}")
    if b < 0 or b > a:
        return 0
    return math.comb(a, b)


class GroupIndex(NamedTuple):
    """A delivery group: subfiles cached at exactly m users and n edge nodes."""

    m: int
    n: int


def validate_group(group: GroupIndex, cfg: NetworkConfig) -> GroupIndex:
    m, n = group
    if not 0 <= m <= cfg.num_ues - 1:
        raise ValueError(f"group m outside [0, {cfg.num_ues - 1}]: {m}")
    if not 0 <= n <= cfg.num_ens:
        raise ValueError(f"group n outside [0, {cfg.num_ens}]: {n}")
    return group


def delivery_groups(cfg: NetworkConfig) -> Iterator[GroupIndex]:
    """All delivery groups in ascending (m, n) order."""
    for m in range(cfg.num_ues):
        for n in range(cfg.num_ens + 1):
            yield GroupIndex(m, n)


@dataclass(frozen=True)
class DemandVector:
    """One requested file id per user, duplicates permitted."""

    demands: tuple[int, ...]

    @staticmethod
    def distinct(cfg: NetworkConfig) -> "DemandVector":
        """Worst-case demand: user q requests file q."""
        return DemandVector(tuple(range(1, cfg.num_ues + 1)))

    def validated(self, cfg: NetworkConfig) -> "DemandVector":
        if len(self.demands) != cfg.num_ues:
            raise ValueError(
                f"demand length {len(self.demands)} does not match num_ues {cfg.num_ues}"
            )
        for q, d in enumerate(self.demands, start=1):
            if not isinstance(d, int) or isinstance(d, bool) or not 1 <= d <= cfg.num_files:
                raise ValueError(f"demand of user {q} outside [1, {cfg.num_files}]: {d!r}")
        return self


class GroupNdt(NamedTuple):
    tau_f: float
    tau_a: float
    chosen_i: int


@dataclass(frozen=True)
class NdtBreakdown:
    """Per-group fronthaul/access delivery-time pairs plus fixed-order totals."""

    per_group: dict[GroupIndex, GroupNdt]
    total_f: float
    total_a: float
    total: float

    @staticmethod
    def from_terms(terms: Iterable[tuple[GroupIndex, float, float, int]]) -> "NdtBreakdown":
        """Reduce (group, tau_f, tau_a, chosen_i) terms in the order given.

        The accumulation order is part of the contract: totals must be
        bit-reproducible against any other consumer of the same term stream.
        """
        per_group: dict[GroupIndex, GroupNdt] = {}
        total_f = 0.0
        total_a = 0.0
        for group, tau_f, tau_a, chosen_i in terms:
            per_group[group] = GroupNdt(tau_f, tau_a, chosen_i)
            total_f += tau_f
            total_a += tau_a
        return NdtBreakdown(per_group, total_f, total_a, total_f + total_a)
