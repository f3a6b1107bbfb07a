"""Block factorizations of the entropy functional and their constants.

Three ways of spreading Ent[f] over conditioned sub-instances:

  uniform blocks   average over all size-l subsets S of the expected
                   entropy of f under the conditional given the spins
                   outside S;
  magnetized blocks  a binomially weighted sum over subsets R of the
                   all-plus probability and conditional entropy of the
                   uniformly magnetized distribution;
  hypergeometric mixtures  the uniform-block average of the k-copy lift,
                   rewritten as a mixture of magnetized and partially
                   conditioned base instances weighted by a multivariate
                   hypergeometric law.

The module also carries the contraction factor kappa used by the
down-up-walk entropy decay bounds (in both of its published forms, which
disagree; see kappa and kappa_binomial), and the CheckReport record that
every verification routine in the package emits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .capacity import CapacityError, check_site_count
from .exact import (
    DenseDistribution,
    FieldAssignment,
    FunctionLike,
    Pinning,
    as_values,
    condition,
    entropy_functional,
    magnetize,
    magnetized_partition,
    popcount_table,
)
from .transform import k_transform, lift_function

DEFAULT_REL_SLACK = 1e-9
DEFAULT_ABS_SLACK = 1e-12


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a single inequality or identity check."""

    name: str
    instance: str
    lhs: float
    rhs: float
    constant: float
    passed: bool
    witness: Optional[str] = None
    rel_slack: float = DEFAULT_REL_SLACK
    abs_slack: float = DEFAULT_ABS_SLACK

    @classmethod
    def le(
        cls,
        name: str,
        instance: str,
        lhs: float,
        rhs: float,
        constant: float = 1.0,
        witness: Optional[str] = None,
        rel_slack: float = DEFAULT_REL_SLACK,
        abs_slack: float = DEFAULT_ABS_SLACK,
    ) -> "CheckReport":
        """lhs <= rhs up to relative and absolute slack."""
        passed = lhs <= rhs * (1.0 + rel_slack) + abs_slack
        return cls(name, instance, float(lhs), float(rhs), float(constant), bool(passed),
                   witness, rel_slack, abs_slack)

    @classmethod
    def eq(
        cls,
        name: str,
        instance: str,
        lhs: float,
        rhs: float,
        constant: float = 1.0,
        witness: Optional[str] = None,
        rel_slack: float = DEFAULT_REL_SLACK,
        abs_slack: float = DEFAULT_ABS_SLACK,
    ) -> "CheckReport":
        """|lhs - rhs| small relative to the larger magnitude."""
        scale = max(abs(lhs), abs(rhs))
        passed = abs(lhs - rhs) <= rel_slack * scale + abs_slack
        return cls(name, instance, float(lhs), float(rhs), float(constant), bool(passed),
                   witness, rel_slack, abs_slack)

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "instance": self.instance,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.constant,
            "pass": self.passed,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def kappa(j: int, k: int, c: float) -> float:
    """Entropy contraction factor of the k-to-j down-up walk.

    kappa(j, k, c) = (k+1-j-c)^(c-ceil(c)) * prod_{i<ceil(c)} (k-j-i) / (k+1)^c
    for real c >= 1 and integers 0 <= j <= k - ceil(c).
    """
    if c < 1:
        raise ValueError(f"c must be at least 1, got {c}")
    if not (isinstance(j, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise ValueError("j and k must be integers")
    cc = math.ceil(c)
    if not 0 <= j <= k - cc:
        raise ValueError(f"need 0 <= j <= k - ceil(c); got j={j}, k={k}, c={c}")
    frac_base = k + 1 - j - c
    log_val = (c - cc) * math.log(frac_base) if frac_base != 1.0 else 0.0
    for i in range(cc):
        log_val += math.log(k - j - i)
    log_val -= c * math.log(k + 1)
    return math.exp(log_val)


def kappa_binomial(j: int, k: int, c: int) -> float:
    """Binomial-ratio variant C(k-j, c)/C(k, c) of the contraction factor.

    Published alongside kappa for integer c but not equal to it: kappa has
    denominator (k+1)^c, which makes it strictly smaller whenever c >= 1.
    Both values are reported by the walk suites; the contraction checks
    themselves always use kappa.
    """
    if c < 1 or int(c) != c:
        raise ValueError(f"c must be a positive integer, got {c}")
    c = int(c)
    if not 0 <= j <= k - c:
        raise ValueError(f"need 0 <= j <= k - c; got j={j}, k={k}, c={c}")
    return float(Fraction(math.comb(k - j, c), math.comb(k, c)))


def mbf_constant(theta: float, eta: float) -> float:
    """(e/theta)^(eta+3), the magnetized-block constant of the boosting chain."""
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0,1), got {theta}")
    return (math.e / theta) ** (eta + 3.0)


def ubf_chain_constant(theta: float, eta: float) -> float:
    """(e/theta)^(eta+2), the uniform-block constant of the lifted instance."""
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0,1), got {theta}")
    return (math.e / theta) ** (eta + 2.0)


def ubf_kappa_constant(n: int, ell: int, eta: float) -> float:
    """1/kappa(n-ell, n, eta+1), the uniform-block constant from contraction."""
    return 1.0 / kappa(n - ell, n, eta + 1.0)


# ---------------------------------------------------------------------------
# multivariate hypergeometric law over bucket intersections


@dataclass(frozen=True)
class HyperGeoSpec:
    """|S cap C_v| for a uniform size-ell subset S of n buckets of k copies."""

    n: int
    k: int
    ell: int

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("need at least one bucket and one copy")
        if not 0 <= self.ell <= self.n * self.k:
            raise ValueError(f"ell must lie in [0, nk], got {self.ell}")


def hypergeo_support(spec: HyperGeoSpec) -> Iterator[Tuple[int, ...]]:
    """All count vectors a with sum ell and 0 <= a_v <= k, lexicographic."""

    def rec(prefix: List[int], remaining: int, buckets_left: int):
        if buckets_left == 0:
            if remaining == 0:
                yield tuple(prefix)
            return
        lo = max(0, remaining - spec.k * (buckets_left - 1))
        hi = min(spec.k, remaining)
        for a in range(lo, hi + 1):
            yield from rec(prefix + [a], remaining - a, buckets_left - 1)

    yield from rec([], spec.ell, spec.n)


def hypergeo_pmf(spec: HyperGeoSpec, counts: Sequence[int]) -> float:
    """Exact pmf value prod_v C(k, a_v) / C(nk, ell); zero off support."""
    a = list(counts)
    if len(a) != spec.n:
        raise ValueError(f"need {spec.n} counts, got {len(a)}")
    if any(int(x) != x for x in a):
        raise ValueError("counts must be integers")
    a = [int(x) for x in a]
    if any(x < 0 for x in a):
        raise ValueError("counts must be nonnegative")
    if sum(a) != spec.ell or any(x > spec.k for x in a):
        return 0.0
    num = 1
    for x in a:
        num *= math.comb(spec.k, x)
    return float(Fraction(num, math.comb(spec.n * spec.k, spec.ell)))


def hypergeo_logpmf(spec: HyperGeoSpec, counts: Sequence[int]) -> float:
    """Log-domain pmf via log-gamma, -inf off support."""
    a = [int(x) for x in counts]
    if len(a) != spec.n:
        raise ValueError(f"need {spec.n} counts, got {len(a)}")
    if sum(a) != spec.ell or any(x < 0 or x > spec.k for x in a):
        return -math.inf

    def logc(m: int, r: int) -> float:
        return math.lgamma(m + 1) - math.lgamma(r + 1) - math.lgamma(m - r + 1)

    return sum(logc(spec.k, x) for x in a) - logc(spec.n * spec.k, spec.ell)


def hypergeo_pmf_table(spec: HyperGeoSpec) -> Tuple[List[Tuple[int, ...]], np.ndarray]:
    """(support vectors, probabilities) with exact probabilities."""
    support = list(hypergeo_support(spec))
    probs = np.asarray([hypergeo_pmf(spec, a) for a in support])
    return support, probs


def hypergeo_sample(spec: HyperGeoSpec, seed: int, size: int, label: str = "hypergeo") -> np.ndarray:
    """Draw count vectors bucket by bucket; shape (size, n)."""
    from .rng import derive_generator

    gen = derive_generator(seed, label)
    out = np.zeros((size, spec.n), dtype=np.int64)
    remaining = np.full(size, spec.ell, dtype=np.int64)
    for v in range(spec.n):
        nbad = spec.k * (spec.n - v - 1)
        if nbad == 0:
            draw = remaining.copy()
        else:
            draw = gen.hypergeometric(spec.k, nbad, remaining)
        out[:, v] = draw
        remaining = remaining - draw
    return out


def hypergeo_concentration(spec: HyperGeoSpec, v: int, eps: float) -> Tuple[float, float]:
    """(exact tail P[|a_v/k - ell/(nk)| >= eps], bound 2 exp(-2 eps^2 k))."""
    if not 0 <= v < spec.n:
        raise ValueError(f"bucket {v} out of range")
    if eps <= 0:
        raise ValueError("eps must be positive")
    total = spec.n * spec.k
    mean = Fraction(spec.ell, total)
    eps_exact = Fraction(eps)
    tail = Fraction(0)
    denom = math.comb(total, spec.ell)
    for a in range(0, min(spec.k, spec.ell) + 1):
        rest = spec.ell - a
        if rest < 0 or rest > total - spec.k:
            continue
        if abs(Fraction(a, spec.k) - mean) >= eps_exact:
            tail += Fraction(math.comb(spec.k, a) * math.comb(total - spec.k, rest), denom)
    return float(tail), 2.0 * math.exp(-2.0 * eps * eps * spec.k)


def hypergeo_concentration_check(
    spec: HyperGeoSpec, eps: float, instance: str = "",
    name: str = "hypergeometric-concentration",
) -> CheckReport:
    """Exact tail of a bucket's normalized count vs 2 exp(-2 eps^2 k).

    Buckets are exchangeable (equal capacity k), so bucket 0 carries the
    common marginal.
    """
    tail, bound = hypergeo_concentration(spec, 0, eps)
    return CheckReport.le(name, instance, tail, bound, constant=2.0)


# ---------------------------------------------------------------------------
# superset sums and conditional-entropy aggregation


def superset_sums(vec: np.ndarray, n: int) -> np.ndarray:
    """out[R] = sum over supersets x of mask R of vec[x]."""
    arr = np.array(vec, dtype=np.float64)
    idx = np.arange(arr.size, dtype=np.int64)
    for b in range(n):
        lo = np.nonzero(((idx >> b) & 1) == 0)[0]
        arr[lo] += arr[lo | (1 << b)]
    return arr


def _xlogx(vals: np.ndarray) -> np.ndarray:
    return np.where(vals > 0, vals * np.log(np.where(vals > 0, vals, 1.0)), 0.0)


def _grouped_entropy_total(gp: np.ndarray, gpf: np.ndarray, gpfl: np.ndarray) -> float:
    """Sum over groups of (group mass) * Ent of f under the group conditional."""
    ok = (gp > 0) & (gpf > 0)
    vals = np.zeros(gp.shape)
    vals[ok] = gpfl[ok] - gpf[ok] * (np.log(gpf[ok]) - np.log(gp[ok]))
    return float(np.sum(np.maximum(vals, 0.0)))


def subset_conditional_entropy(dist: DenseDistribution, sites: Sequence[int], f: FunctionLike) -> float:
    """Expected entropy of f under the conditional given the spins off `sites`.

    Averages Ent of f under the conditional distribution on the block over
    the marginal law of the complement.
    """
    vals = as_values(f, dist.n)
    block = set(sites)
    if block and not all(0 <= v < dist.n for v in block):
        raise ValueError("block sites out of range")
    outside = [v for v in range(dist.n) if v not in block]
    idx = np.arange(dist.prob.size, dtype=np.int64)
    gidx = np.zeros(dist.prob.size, dtype=np.int64)
    for pos, v in enumerate(outside):
        gidx |= ((idx >> v) & 1) << pos
    groups = 1 << len(outside)
    p = dist.prob
    gp = np.bincount(gidx, weights=p, minlength=groups)
    gpf = np.bincount(gidx, weights=p * vals, minlength=groups)
    gpfl = np.bincount(gidx, weights=p * _xlogx(vals), minlength=groups)
    return _grouped_entropy_total(gp, gpf, gpfl)


def ubf_average(dist: DenseDistribution, ell: int, f: FunctionLike) -> float:
    """Average of subset_conditional_entropy over all size-ell blocks."""
    n = dist.n
    if not 1 <= ell <= n:
        raise ValueError(f"block size must lie in [1, n], got {ell}")
    count = math.comb(n, ell)
    if count > 10**6:
        raise CapacityError(f"{count} blocks exceed the enumeration budget")
    total = math.fsum(
        subset_conditional_entropy(dist, S, f) for S in itertools.combinations(range(n), ell)
    )
    return total / count


def ubf_check(
    dist: DenseDistribution,
    ell: int,
    constant: float,
    fs: Sequence[FunctionLike],
    instance: str = "",
    name: str = "uniform-block-factorization",
) -> List[CheckReport]:
    """Ent[f] <= constant * (average block entropy), one report per f."""
    out = []
    for idx, f in enumerate(fs):
        lhs = entropy_functional(dist, f)
        rhs = constant * ubf_average(dist, ell, f)
        witness = f"f[{idx}]" if lhs > rhs * (1.0 + DEFAULT_REL_SLACK) + DEFAULT_ABS_SLACK else None
        out.append(CheckReport.le(name, instance, lhs, rhs, constant, witness=witness))
    return out


# ---------------------------------------------------------------------------
# magnetized block factorization


def mbf_rhs(dist: DenseDistribution, theta: float, f: FunctionLike) -> float:
    """Magnetized-block functional

        (Z_pi / theta^n) * E_R [ pi_R(all plus) * Ent of f given all plus on R ]

    where pi is the uniformly theta-magnetized distribution, R collects
    each site independently with probability 1-theta, and zero-probability
    all-plus events contribute nothing.
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0,1), got {theta}")
    n = dist.n
    vals = as_values(f, n)
    pi = magnetize(dist, FieldAssignment.uniform(n, theta))
    z_pi = magnetized_partition(dist, theta)

    sup_p = superset_sums(pi.prob, n)
    sup_pf = superset_sums(pi.prob * vals, n)
    sup_pfl = superset_sums(pi.prob * _xlogx(vals), n)

    sizes = popcount_table(n)
    log_theta = math.log(theta)
    log_one_minus = math.log1p(-theta)
    weights = np.exp(sizes * log_one_minus + (n - sizes) * log_theta)

    ok = (sup_p > 0) & (sup_pf > 0)
    ent_mass = np.zeros(sup_p.shape)
    ent_mass[ok] = sup_pfl[ok] - sup_pf[ok] * (np.log(sup_pf[ok]) - np.log(sup_p[ok]))
    ent_mass = np.maximum(ent_mass, 0.0)
    inner = float(np.sum(weights * ent_mass))
    return math.exp(math.log(z_pi) - n * log_theta) * inner


def mbf_check(
    dist: DenseDistribution,
    theta: float,
    constant: float,
    fs: Sequence[FunctionLike],
    instance: str = "",
    name: str = "magnetized-block-factorization",
) -> List[CheckReport]:
    """Ent[f] <= constant * mbf_rhs, one report per f."""
    out = []
    for idx, f in enumerate(fs):
        lhs = entropy_functional(dist, f)
        rhs = constant * mbf_rhs(dist, theta, f)
        witness = f"f[{idx}]" if lhs > rhs * (1.0 + DEFAULT_REL_SLACK) + DEFAULT_ABS_SLACK else None
        out.append(CheckReport.le(name, instance, lhs, rhs, constant, witness=witness))
    return out


# ---------------------------------------------------------------------------
# hypergeometric mixture of block entropies: two independent routes


def hf_direct(dist: DenseDistribution, k: int, ell: int, f: FunctionLike) -> float:
    """Uniform-block average over size-ell blocks of the k-copy lift.

    Brute force: lifts the distribution and the function, then averages
    subset_conditional_entropy over all blocks of copy sites.
    """
    nk = dist.n * k
    if not 1 <= ell <= nk:
        raise ValueError(f"block size must lie in [1, nk], got {ell}")
    count = math.comb(nk, ell)
    if count > 10**6:
        raise CapacityError(f"{count} blocks exceed the enumeration budget")
    tdist = k_transform(dist, k)
    fk = lift_function(f, dist.n, k)
    total = math.fsum(
        subset_conditional_entropy(tdist.dist, S, fk)
        for S in itertools.combinations(range(nk), ell)
    )
    return total / count


def _submasks(mask: int) -> Iterator[int]:
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


def hf_formula(dist: DenseDistribution, k: int, ell: int, f: FunctionLike) -> float:
    """Hypergeometric-mixture form of the lifted block average.

    Averages, over the law of the bucket intersection counts a of a
    uniform size-ell block, the base-instance entropies of f after
    magnetizing by b = a/k off a subset R and conditioning to all plus
    on R, weighted by prod_R (1-b) * prod b over the plus set of each
    base configuration.  Terms whose magnetization or conditioning has
    zero mass are dropped, matching the convention that zero-probability
    blocks contribute nothing.
    """
    n = dist.n
    vals = as_values(f, n)
    if not 1 <= ell <= n * k:
        raise ValueError(f"block size must lie in [1, nk], got {ell}")
    spec = HyperGeoSpec(n=n, k=k, ell=ell)
    support_idx = dist.support_indices
    total = 0.0
    for a in hypergeo_support(spec):
        weight_a = hypergeo_pmf(spec, a)
        if weight_a == 0.0:
            continue
        b = np.asarray(a, dtype=np.float64) / k
        zero_mask = 0
        for v in range(n):
            if a[v] == 0:
                zero_mask |= 1 << v
        ent_cache = {}

        def block_entropy(r_mask: int) -> Optional[float]:
            if r_mask in ent_cache:
                return ent_cache[r_mask]
            free_sites = [v for v in range(n) if not (r_mask >> v) & 1]
            try:
                shaped = magnetize(
                    dist,
                    FieldAssignment(tuple(free_sites), tuple(float(b[v]) for v in free_sites)),
                )
                if r_mask:
                    pinned = [v for v in range(n) if (r_mask >> v) & 1]
                    shaped = condition(shaped, Pinning.all_plus(pinned))
            except ValueError:
                ent_cache[r_mask] = None
                return None
            ent = entropy_functional(shaped, vals)
            ent_cache[r_mask] = ent
            return ent

        inner = 0.0
        for x in support_idx:
            tau_weight = float(dist.prob[x])
            plus_mask = int(x)
            forced = plus_mask & zero_mask
            optional = plus_mask & ~zero_mask
            for sub in _submasks(optional):
                r_mask = sub | forced
                ent = block_entropy(r_mask)
                if ent is None:
                    continue
                w = 1.0
                for v in range(n):
                    bit = (1 << v)
                    if r_mask & bit:
                        w *= 1.0 - float(b[v])
                    elif plus_mask & bit:
                        w *= float(b[v])
                if w != 0.0:
                    inner += tau_weight * w * ent
        total += weight_a * inner
    return total


def hf_pair(dist: DenseDistribution, k: int, ell: int, f: FunctionLike) -> Tuple[float, float]:
    """(direct, mixture) values of the lifted block average."""
    return hf_direct(dist, k, ell, f), hf_formula(dist, k, ell, f)


def lbf_convergence(
    dist: DenseDistribution, theta: float, f: FunctionLike, ks: Sequence[int]
) -> List[Tuple[int, float]]:
    """|mixture value at k - magnetized-block value| for increasing k.

    The mixture with block size ceil(theta*n*k) converges to mbf_rhs as
    k grows; the series records the gap at each requested k.
    """
    target = mbf_rhs(dist, theta, f)
    out = []
    for k in ks:
        ell = math.ceil(theta * dist.n * k)
        val = hf_formula(dist, k, ell, f)
        out.append((int(k), abs(val - target)))
    return out
