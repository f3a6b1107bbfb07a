"""Seeded builders for random distributions, functions, and models."""

import numpy as np

from glab.exact import DenseDistribution, enumerate_gibbs
from glab.model import (
    IsingModel,
    complete_edges,
    cycle_edges,
    path_edges,
    star_edges,
)

FAMILIES = ("path", "cycle", "star", "complete")


def family_edges(family: str, n: int):
    if family == "path":
        return path_edges(n)
    if family == "cycle":
        return cycle_edges(n)
    if family == "star":
        return star_edges(n)
    if family == "complete":
        return complete_edges(n)
    raise ValueError(family)


def random_dist(n: int, seed: int, zero_frac: float = 0.0) -> DenseDistribution:
    """Exp-normal weight table; optionally knock out some entries."""
    gen = np.random.default_rng(seed)
    w = np.exp(gen.normal(0.0, 1.5, size=1 << n))
    if zero_frac > 0.0:
        kill = gen.random(w.size) < zero_frac
        if kill.sum() >= w.size - 1:
            kill[:2] = False
        w[kill] = 0.0
    return DenseDistribution(n, w / w.sum())


def random_positive_f(n: int, seed: int) -> np.ndarray:
    gen = np.random.default_rng(seed)
    return np.exp(gen.normal(0.0, 1.0, size=1 << n))


def random_model(n: int, seed: int, beta_range=(0.25, 3.0), lam_range=(0.25, 4.0)) -> IsingModel:
    gen = np.random.default_rng(seed)
    allowed = [f for f in FAMILIES if n >= 3 or f in ("path", "complete")]
    family = allowed[int(gen.integers(len(allowed)))]
    edges = family_edges(family, n) if n >= 2 else []
    beta = float(np.exp(gen.uniform(np.log(beta_range[0]), np.log(beta_range[1]))))
    lam = tuple(np.exp(gen.uniform(np.log(lam_range[0]), np.log(lam_range[1]), size=n)))
    return IsingModel(n=n, edges=edges, beta=beta, lam=lam)


def random_gibbs(n: int, seed: int) -> DenseDistribution:
    return enumerate_gibbs(random_model(n, seed))


def interior_model(family: str, n: int, seed: int, delta: float = 0.5) -> IsingModel:
    """Ising model with beta inside the delta-interior of uniqueness."""
    from glab.model import delta_interior

    edges = family_edges(family, n)
    deg = max(3, max_degree_of(edges, n))
    lo, hi = delta_interior(deg, delta)
    gen = np.random.default_rng(seed)
    beta = float(gen.uniform(lo, hi))
    lam = tuple(np.exp(gen.uniform(np.log(0.5), np.log(2.0), size=n)))
    return IsingModel(n=n, edges=edges, beta=beta, lam=lam)


def max_degree_of(edges, n: int) -> int:
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return max(deg) if deg else 0
