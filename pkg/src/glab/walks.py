"""Down-up walks on the level sets of a homogeneous set distribution.

A distribution mu over size-k subsets (faces) of a ground set induces
level sets X(j) = all size-j subsets of support faces, a down walk
D(k->j) that deletes elements uniformly, and an up walk U(j->k) that
regrows a face proportionally to mu.  Pushing mu down gives the level
distributions mu_(j); averaging a test function up gives its level
versions f^(j), which coincide with the density of (mu f) against mu at
every level.

Entropy and divergence contract at rate kappa along the walk; the checks
here verify that contraction, its data-processing monotonicity, and the
identity expressing uniform-block entropy averages as differences of
level entropies of the homogenized distribution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .capacity import CapacityError
from .exact import DenseDistribution, FunctionLike, as_values, entropy_functional
from .factorization import CheckReport, kappa, ubf_average
from .spectral import HomogenizedDistribution, homogenize

LEVEL_FACE_BUDGET = 10**6


def mask_bits(mask: int) -> Tuple[int, ...]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def _face_sort_key(mask: int) -> Tuple[int, ...]:
    return mask_bits(mask)


@dataclass(frozen=True)
class Levels:
    """Level sets of the downward closure of a homogeneous support."""

    ground: int
    k: int
    faces: Tuple[Tuple[int, ...], ...]       # faces[j] = masks of X(j), lexicographic
    top_prob: np.ndarray                     # aligned with faces[k]

    def index(self, j: int) -> Dict[int, int]:
        return {mask: i for i, mask in enumerate(self.faces[j])}

    def face_count(self, j: int) -> int:
        return len(self.faces[j])


def build_levels(ground: int, k: int, faces: Sequence[int], probs: Sequence[float]) -> Levels:
    """Level sets of the downward closure of the given support faces."""
    probs = np.asarray(probs, dtype=np.float64)
    faces = [int(m) for m in faces]
    if probs.shape != (len(faces),):
        raise ValueError("faces and probs must align")
    if np.any(probs < 0) or abs(float(np.sum(probs)) - 1.0) > 1e-9:
        raise ValueError("probs must be a probability vector")
    if len(set(faces)) != len(faces):
        raise ValueError("faces must be distinct")
    for m in faces:
        if m < 0 or m >> ground:
            raise ValueError(f"face {m:#x} outside ground set of size {ground}")
        if len(mask_bits(m)) != k:
            raise ValueError(f"face {m:#x} does not have {k} elements")
    support = [(m, p) for m, p in zip(faces, probs) if p > 0]
    if not support:
        raise ValueError("support must be nonempty")

    level_sets: List[set] = [set() for _ in range(k + 1)]
    for m, _ in support:
        bits = mask_bits(m)
        for j in range(k + 1):
            for comb in itertools.combinations(bits, j):
                sub = 0
                for b in comb:
                    sub |= 1 << b
                level_sets[j].add(sub)
        if sum(len(s) for s in level_sets) > LEVEL_FACE_BUDGET:
            raise CapacityError("level sets exceed the face budget")

    ordered = tuple(tuple(sorted(s, key=_face_sort_key)) for s in level_sets)
    top_order = ordered[k]
    top_index = {m: i for i, m in enumerate(top_order)}
    top_prob = np.zeros(len(top_order))
    for m, p in support:
        top_prob[top_index[m]] = p
    top_prob /= float(np.sum(top_prob))
    return Levels(ground=ground, k=k, faces=ordered, top_prob=top_prob)


def levels_from_homogenized(hom: HomogenizedDistribution) -> Levels:
    masks = [int(m) for m in hom.face_masks()]
    probs = hom.face_probs()
    return build_levels(hom.ground_size, hom.base_n, masks, probs)


def uniform_slice_levels(n: int, k: int) -> Levels:
    """Uniform distribution over all size-k subsets of [n]."""
    faces = []
    for comb in itertools.combinations(range(n), k):
        m = 0
        for b in comb:
            m |= 1 << b
        faces.append(m)
    probs = np.full(len(faces), 1.0 / len(faces))
    return build_levels(n, k, faces, probs)


def down_matrix(levels: Levels, frm: int, to: int) -> np.ndarray:
    """Row-stochastic matrix deleting frm-to elements uniformly."""
    if not 0 <= to <= frm <= levels.k:
        raise ValueError(f"need 0 <= to <= frm <= k, got {to}, {frm}")
    rows = levels.faces[frm]
    col_index = levels.index(to)
    out = np.zeros((len(rows), len(levels.faces[to])))
    w = 1.0 / math.comb(frm, to)
    for i, mask in enumerate(rows):
        for comb in itertools.combinations(mask_bits(mask), to):
            sub = 0
            for b in comb:
                sub |= 1 << b
            out[i, col_index[sub]] += w
    return out


def level_distribution(levels: Levels, j: int) -> np.ndarray:
    """Down-walk image of the top distribution at level j."""
    if not 0 <= j <= levels.k:
        raise ValueError(f"level must lie in [0, k], got {j}")
    d = down_matrix(levels, levels.k, j)
    return levels.top_prob @ d


def push_down(levels: Levels, top: np.ndarray, j: int) -> np.ndarray:
    """Down-walk image at level j of any distribution on the top faces."""
    top = np.asarray(top, dtype=np.float64)
    if top.shape != (levels.face_count(levels.k),):
        raise ValueError("top vector must align with the top faces")
    d = down_matrix(levels, levels.k, j)
    return top @ d


def up_matrix(levels: Levels, j: int) -> np.ndarray:
    """Row-stochastic matrix regrowing a level-j face to a top face."""
    if not 0 <= j <= levels.k:
        raise ValueError(f"level must lie in [0, k], got {j}")
    rows = levels.faces[j]
    row_index = {m: i for i, m in enumerate(rows)}
    out = np.zeros((len(rows), levels.face_count(levels.k)))
    for gi, gmask in enumerate(levels.faces[levels.k]):
        p = levels.top_prob[gi]
        if p <= 0:
            continue
        for comb in itertools.combinations(mask_bits(gmask), j):
            sub = 0
            for b in comb:
                sub |= 1 << b
            out[row_index[sub], gi] += p
    sums = out.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        raise ValueError("every level face must extend to a support face")
    return out / sums


def lift_level_function(levels: Levels, f_top: np.ndarray, j: int) -> np.ndarray:
    """f^(j) = up-walk average of the top function."""
    f_top = np.asarray(f_top, dtype=np.float64)
    if f_top.shape != (levels.face_count(levels.k),):
        raise ValueError("top function must align with the top faces")
    return up_matrix(levels, j) @ f_top


def vector_entropy(p: np.ndarray, f: np.ndarray) -> float:
    """Ent[f] for a plain probability vector."""
    p = np.asarray(p, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("f must be nonnegative")
    mean_f = float(np.sum(p * f))
    if mean_f <= 0:
        return 0.0
    flogf = np.where(f > 0, f * np.log(np.where(f > 0, f, 1.0)), 0.0)
    return max(0.0, float(np.sum(p * flogf)) - mean_f * math.log(mean_f))


def vector_kl(nu: np.ndarray, mu: np.ndarray) -> float:
    nu = np.asarray(nu, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    on = nu > 0
    if np.any(mu[on] <= 0):
        raise ValueError("KL divergence needs support(nu) within support(mu)")
    return max(0.0, float(np.sum(nu[on] * (np.log(nu[on]) - np.log(mu[on])))))


def entropy_contraction_check(
    levels: Levels,
    nu_top: np.ndarray,
    j: int,
    alpha: float,
    instance: str = "",
    name: str = "down-walk-divergence-contraction",
) -> CheckReport:
    """KL at level j <= (1 - kappa(j, k, 1/alpha)) * KL at the top.

    alpha is the log-concavity parameter of the generating polynomial of
    the top distribution; the caller is responsible for it being valid.
    """
    nu_top = np.asarray(nu_top, dtype=np.float64)
    if abs(float(np.sum(nu_top)) - 1.0) > 1e-9 or np.any(nu_top < 0):
        raise ValueError("nu_top must be a probability vector")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    factor = 1.0 - kappa(j, levels.k, 1.0 / alpha)
    kl_top = vector_kl(nu_top, levels.top_prob)
    kl_j = vector_kl(push_down(levels, nu_top, j), level_distribution(levels, j))
    return CheckReport.le(name, instance, kl_j, factor * kl_top, factor)


def local_entropy_decay_check(
    levels: Levels,
    f_top: np.ndarray,
    j: int,
    contraction: float,
    instance: str = "",
    name: str = "down-walk-entropy-decay",
) -> CheckReport:
    """Ent at level j of f^(j) <= (1 - contraction) * Ent at the top."""
    if not 0.0 <= contraction <= 1.0:
        raise ValueError("contraction must lie in [0, 1]")
    factor = 1.0 - contraction
    ent_top = vector_entropy(levels.top_prob, np.asarray(f_top, dtype=np.float64))
    ent_j = vector_entropy(level_distribution(levels, j), lift_level_function(levels, f_top, j))
    return CheckReport.le(name, instance, ent_j, factor * ent_top, factor)


def kl_by_level(levels: Levels, nu_top: np.ndarray) -> List[float]:
    """KL divergence after pushing both measures down to each level, top first."""
    out = []
    for j in range(levels.k, -1, -1):
        out.append(vector_kl(push_down(levels, nu_top, j), level_distribution(levels, j)))
    return out


def walk_density_pair(levels: Levels, f_top: np.ndarray, j: int) -> Tuple[np.ndarray, np.ndarray]:
    """(f^(j), density of the f-reweighted level law) for identity tests.

    For E[f] = 1 the up-walk average of f equals d(nu_(j))/d(mu_(j)) for
    nu = mu f.
    """
    f_top = np.asarray(f_top, dtype=np.float64)
    nu_top = levels.top_prob * f_top
    total = float(np.sum(nu_top))
    if total <= 0:
        raise ValueError("f must have positive mean on the support")
    nu_top = nu_top / total
    mu_j = level_distribution(levels, j)
    nu_j = push_down(levels, nu_top, j)
    with np.errstate(invalid="ignore", divide="ignore"):
        dens = np.where(mu_j > 0, nu_j / np.where(mu_j > 0, mu_j, 1.0), 0.0)
    f_j = lift_level_function(levels, f_top / total, j)
    return f_j, dens


def ubf_ed_identity(dist: DenseDistribution, f: FunctionLike, j: int) -> Tuple[float, float]:
    """(uniform-block average at size j, level-entropy difference).

    The average over size-j blocks of the expected conditional entropy of
    f equals the drop in entropy of the homogenized lift of f between the
    top level and level n-j.
    """
    n = dist.n
    if not 1 <= j <= n:
        raise ValueError(f"block size must lie in [1, n], got {j}")
    vals = as_values(f, n)
    lhs = ubf_average(dist, j, f)

    hom = homogenize(dist)
    levels = levels_from_homogenized(hom)
    base_mask = (1 << n) - 1
    f_top = np.asarray(
        [vals[mask & base_mask] for mask in levels.faces[levels.k]], dtype=np.float64
    )
    ent_top = vector_entropy(levels.top_prob, f_top)
    ent_low = vector_entropy(
        level_distribution(levels, n - j), lift_level_function(levels, f_top, n - j)
    )
    return lhs, ent_top - ent_low


def ubf_ed_identity_check(
    dist: DenseDistribution, f: FunctionLike, j: int, instance: str = "",
    name: str = "block-average-vs-level-entropy-difference",
) -> CheckReport:
    lhs, rhs = ubf_ed_identity(dist, f, j)
    return CheckReport.eq(name, instance, lhs, rhs)
