"""Shared test helpers: straight-line reference arithmetic, config generators."""
from __future__ import annotations

import math
import random

from fogndt.model import NetworkConfig


def make_cfg(nt=2, nr=2, nfiles=None, mu_t=0.5, mu_r=0.5, r=1.0) -> NetworkConfig:
    return NetworkConfig(nt, nr, nfiles if nfiles is not None else nr, mu_t, mu_r, r)


def reference_dof_3x3(m: int, j: int) -> float:
    """Anchored per-user DoF for the 3x3 network, written out independently."""
    d = 3 / (3 + (3 - m - 1) / (m + 1))
    if j == 3:
        return 1.0
    return max(d, 0.5)


def reference_3x3_group_pairs(mu_t: float, mu_r: float, r: float):
    """Per-group (tau_f, tau_a) for the 3x3 network, straight-line arithmetic.

    Groups cached at zero or one edge node use the specialized closed forms;
    the remaining groups use the general expression.  The minimizing i is
    re-derived here with the same smallest-i tie rule.
    """
    out = {}
    for m in range(3):
        f0 = mu_r ** m * (1 - mu_r) ** (3 - m) * mu_t ** 0 * (1 - mu_t) ** 3
        tau_f = math.comb(3, m + 1) * f0 / r
        tau_a = math.comb(2, m) * f0 / reference_dof_3x3(m, 3)
        out[(m, 0)] = (tau_f, tau_a)
        for n in (1, 2, 3):
            f = mu_r ** m * (1 - mu_r) ** (3 - m) * mu_t ** n * (1 - mu_t) ** (3 - n)
            best = None
            for i in range(0, 3 - n + 1):
                if n == 1:
                    tf = 3 * math.comb(3, m + 1) * i * f / (2 * r)
                    ta = 3 * math.comb(2, m) * f / reference_dof_3x3(m, 1 + i)
                else:
                    tf = math.comb(3, m + 1) * math.comb(3, n) * min(1.0, i / (n + 1)) * f / r
                    ta = math.comb(2, m) * math.comb(3, n) * f / reference_dof_3x3(m, n + i)
                if best is None or tf + ta < best[0]:
                    best = (tf + ta, tf, ta)
            out[(m, n)] = (best[1], best[2])
    return out


def random_config(rng: random.Random) -> NetworkConfig:
    nt = rng.randint(2, 6)
    nr = rng.randint(2, 6)
    return NetworkConfig(
        num_ens=nt,
        num_ues=nr,
        num_files=nr,
        mu_t=rng.random(),
        mu_r=rng.random(),
        fronthaul_r=10.0 ** rng.uniform(-2.0, 3.0),
    )
