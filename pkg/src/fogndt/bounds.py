"""Closed-form delivery-time calculus: upper and lower bounds, gap, limits."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .dof import DofProvider, resolve_provider
from .model import NetworkConfig, binom, config_to_dict, validate_config
from .scheduler import iter_group_terms

CSV_HEADER = "n_t,n_r,mu_t,mu_r,r,tau_upper,tau_lower,gap,l1,l2,limit_inf_r"


@dataclass(frozen=True)
class BoundsReport:
    cfg: NetworkConfig
    tau_upper: float
    tau_lower: float
    gap: float
    argmax_l1: int
    argmax_l2: int
    limit_inf_r: float

    def to_dict(self) -> dict:
        return {
            "config": config_to_dict(self.cfg),
            "tau_upper": self.tau_upper,
            "tau_lower": self.tau_lower,
            "gap": self.gap,
            "argmax_l1": self.argmax_l1,
            "argmax_l2": self.argmax_l2,
            "limit_inf_r": self.limit_inf_r,
        }

    def to_csv_row(self) -> str:
        cfg = self.cfg
        fields = [
            cfg.num_ens,
            cfg.num_ues,
            cfg.mu_t,
            cfg.mu_r,
            cfg.fronthaul_r,
            self.tau_upper,
            self.tau_lower,
            self.gap,
            self.argmax_l1,
            self.argmax_l2,
            self.limit_inf_r,
        ]
        return ",".join(repr(v) if isinstance(v, float) else str(v) for v in fields)


def ndt_upper(cfg: NetworkConfig, dof: DofProvider | None = None) -> float:
    """Achievable delivery time: best cooperation choice summed over all groups."""
    total_f = 0.0
    total_a = 0.0
    for _group, _f, _i, tau_f, tau_a, _d in iter_group_terms(cfg, dof):
        total_f += tau_f
        total_a += tau_a
    return total_f + total_a


def ndt_lower(cfg: NetworkConfig) -> tuple[float, int, int]:
    """Converse bound with the maximizing user-subset sizes; ties to smaller l."""
    validate_config(cfg)
    nt, nr, r = cfg.num_ens, cfg.num_ues, cfg.fronthaul_r
    mu_t, mu_r = cfg.mu_t, cfg.mu_r
    best_f = -math.inf
    best_l1 = 0
    for l in range(1, nr + 1):
        value = l * (1.0 - mu_t) ** nt * (1.0 - mu_r) ** l / r
        if value > best_f:
            best_f, best_l1 = value, l
    best_a = -math.inf
    best_l2 = 0
    for l in range(1, nr + 1):
        value = l * (1.0 - mu_r) ** l / min(l, nt)
        if value > best_a:
            best_a, best_l2 = value, l
    return best_f + best_a, best_l1, best_l2


def gap(cfg: NetworkConfig, dof: DofProvider | None = None) -> float:
    """Upper over lower bound; 1 when both vanish, +inf when only the lower does."""
    upper = ndt_upper(cfg, dof)
    lower, _, _ = ndt_lower(cfg)
    if lower > 0.0:
        return upper / lower
    return 1.0 if upper == 0.0 else math.inf


def ndt_upper_limit_infinite_r(cfg: NetworkConfig, dof: DofProvider | None = None) -> float:
    """Access-only delivery time left when the fronthaul cost vanishes."""
    validate_config(cfg)
    dp = resolve_provider(dof)
    nr, nt = cfg.num_ues, cfg.num_ens
    mu_r = cfg.mu_r
    total = 0.0
    for m in range(nr):
        total += binom(nr - 1, m) * mu_r ** m * (1.0 - mu_r) ** (nr - m) / dp(m, nt, cfg)
    return total


def bounds_report(cfg: NetworkConfig, dof: DofProvider | None = None) -> BoundsReport:
    validate_config(cfg)
    upper = ndt_upper(cfg, dof)
    lower, l1, l2 = ndt_lower(cfg)
    if lower > 0.0:
        ratio = upper / lower
    else:
        ratio = 1.0 if upper == 0.0 else math.inf
    return BoundsReport(
        cfg=cfg,
        tau_upper=upper,
        tau_lower=lower,
        gap=ratio,
        argmax_l1=l1,
        argmax_l2=l2,
        limit_inf_r=ndt_upper_limit_infinite_r(cfg, dof),
    )
