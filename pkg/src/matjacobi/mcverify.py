"""Monte Carlo verification of the distributional facts behind the pipeline.

Three suites:

* ``jacobi-canonical``: Hermitian canonical moments extracted from spectral
  measures of the big Jacobi ensemble against direct small-ensemble draws
  with the predicted parameters, statistic by statistic, plus pairwise
  independence checks;
* ``gue-coefficients``: recursion blocks of Gaussian spectral measures
  against their known Gaussian/Laguerre laws (a harness self-test);
* ``kmk-limit``: empirical spectral moments of growing Jacobi matrices
  against the Kesten-McKay quadrature moments.

Mean comparisons use pooled standard errors; every run is reproducible from
its seed, and the sample budget is processed in fixed-size chunks with
independently spawned child seeds so thread count never changes the result
(chunks are reduced in order by concatenation).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .canonical import canonical_from_recursion
from .chains import gram_schmidt, spectral_measure
from .ensembles import rng_from, sample_gue, sample_jue, split_seeds
from .exceptions import NumericDegeneracy
from .kmk import kmk_params, kmk_quadrature

STATISTICS = ("trace", "trace_sq", "logdet", "logdet_complement")

CHUNK = 1024


@dataclass(frozen=True)
class McTestConfig:
    """Shape of one Jacobi canonical-moment Monte Carlo run."""

    dim: int
    depth: int
    a: int = 0
    b: int = 0
    samples: int = 10_000
    seed: int = 0
    statistics: tuple = STATISTICS
    tolerance_sigmas: float = 4.0
    threads: int = 1

    def __post_init__(self):
        if self.samples < 100:
            raise ValueError("need at least 100 samples")
        if self.a < 0 or self.b < 0 or int(self.a) != self.a or int(self.b) != self.b:
            raise ValueError("ensemble parameters must be nonnegative integers")
        unknown = set(self.statistics) - set(STATISTICS)
        if unknown:
            raise ValueError(f"unknown statistics: {sorted(unknown)}")


@dataclass(frozen=True)
class McCell:
    """One (index, statistic) comparison between pipeline and reference."""

    label: str
    statistic: str
    mean_pipeline: float
    mean_reference: float
    stderr: float
    z: float
    passed: bool


@dataclass
class McTestReport:
    suite: str
    cells: list
    correlation: np.ndarray | None
    correlation_bound: float
    max_correlation: float
    degeneracy_events: int
    samples: int
    seed: int
    passed: bool
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "suite": self.suite,
            "samples": self.samples,
            "seed": self.seed,
            "degeneracy_events": self.degeneracy_events,
            "passed": self.passed,
            "correlation_bound": self.correlation_bound,
            "max_correlation": self.max_correlation,
            "correlation": None if self.correlation is None else self.correlation.tolist(),
            "cells": [{
                "label": c.label, "statistic": c.statistic,
                "mean_pipeline": c.mean_pipeline, "mean_reference": c.mean_reference,
                "stderr": c.stderr, "z": c.z, "passed": c.passed,
            } for c in self.cells],
            "extras": self.extras,
        }


def spectrum_statistics(lam):
    """Vector (trace, trace_sq, logdet, logdet_complement) from eigenvalues."""
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.stack([
            lam.sum(axis=-1),
            (lam**2).sum(axis=-1),
            np.log(lam).sum(axis=-1),
            np.log1p(-lam).sum(axis=-1),
        ], axis=-1)


def theorem_parameters(dim, depth, a, b, index):
    """Predicted small-ensemble parameters for canonical index k (1-based).

    Odd k = 2j-1 maps to (p(n-j)+a, p(n-j)+b); even k = 2j maps to
    (p(n-j-1), p(n-j)+a+b).
    """
    p, n = dim, depth
    if index % 2:
        j = (index + 1) // 2
        return p * (n - j) + a, p * (n - j) + b
    j = index // 2
    return p * (n - j - 1), p * (n - j) + a + b


def _run_chunked(total, seed, threads, worker):
    """Map `worker(chunk_size, child_seed)` over fixed chunks, in order."""
    sizes = [CHUNK] * (total // CHUNK)
    if total % CHUNK:
        sizes.append(total % CHUNK)
    children = split_seeds(seed, len(sizes))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, sizes, children))
    else:
        results = [worker(s, c) for s, c in zip(sizes, children)]
    return results


def _jacobi_pipeline_chunk(cfg, count, child_seed):
    """Stats array (kept_samples, m, 4) plus degeneracy count for one chunk."""
    rng = np.random.default_rng(child_seed)
    m = 2 * cfg.depth - 1
    big = cfg.dim * cfg.depth
    rows = []
    degenerate = 0
    for _ in range(count):
        x = sample_jue(big, cfg.a, cfg.b, rng)
        try:
            measure = spectral_measure(x, cfg.dim)
            chain = gram_schmidt(measure, cfg.depth)
            canon = canonical_from_recursion(chain)
        except NumericDegeneracy:
            degenerate += 1
            continue
        lam = np.stack([np.linalg.eigvalsh(canon.u_herm[k]) for k in range(m)])
        rows.append(spectrum_statistics(lam))
    stats = np.array(rows) if rows else np.zeros((0, m, 4))
    return stats, degenerate


def _mean_cells(label_fmt, stats_pipe, stats_ref, statistics, sigmas):
    """Pooled-stderr z cells for each requested statistic."""
    cells = []
    s_p = stats_pipe.shape[0]
    s_r = stats_ref.shape[0]
    for name in statistics:
        col = STATISTICS.index(name)
        mp = float(stats_pipe[:, col].mean())
        mr = float(stats_ref[:, col].mean())
        se = float(np.sqrt(stats_pipe[:, col].var(ddof=1) / s_p
                           + stats_ref[:, col].var(ddof=1) / s_r))
        z = (mp - mr) / se if se > 0 else 0.0
        cells.append(McCell(label=label_fmt, statistic=name, mean_pipeline=mp,
                            mean_reference=mr, stderr=se, z=z,
                            passed=abs(z) < sigmas))
    return cells


def run_jacobi_canonical_test(cfg):
    """Extracted canonical-moment laws against direct ensemble draws.

    Route one pushes full spectral samples of the big ensemble through
    Gram-Schmidt and canonical extraction; route two draws the predicted
    small-ensemble law directly with the same sample budget.  Each index and
    statistic is compared by pooled z-score; traces of distinct indices must
    also be uncorrelated within the sqrt-sample band, and any degeneracy
    event fails the run.
    """
    m = 2 * cfg.depth - 1
    pipe_root, ref_root = split_seeds(cfg.seed, 2)
    results = _run_chunked(cfg.samples, pipe_root, cfg.threads,
                           lambda c, s: _jacobi_pipeline_chunk(cfg, c, s))
    stats_pipe = np.concatenate([r[0] for r in results])
    degenerate = sum(r[1] for r in results)

    ref_rng = np.random.default_rng(ref_root)
    cells = []
    for k in range(1, m + 1):
        par = theorem_parameters(cfg.dim, cfg.depth, cfg.a, cfg.b, k)
        ref = sample_jue(cfg.dim, par[0], par[1], ref_rng, size=cfg.samples)
        lam_ref = np.linalg.eigvalsh(ref)
        stats_ref = spectrum_statistics(lam_ref)
        for cell in _mean_cells(f"U{k}", stats_pipe[:, k - 1, :], stats_ref,
                                cfg.statistics, cfg.tolerance_sigmas):
            cells.append(cell)

    traces = stats_pipe[:, :, 0]
    corr = np.corrcoef(traces.T)
    off = corr[~np.eye(m, dtype=bool)]
    bound = cfg.tolerance_sigmas / np.sqrt(max(stats_pipe.shape[0], 1))
    max_corr = float(np.abs(off).max()) if off.size else 0.0
    passed = (all(c.passed for c in cells) and max_corr < bound and degenerate == 0)
    return McTestReport(suite="jacobi-canonical", cells=cells, correlation=corr,
                        correlation_bound=float(bound), max_correlation=max_corr,
                        degeneracy_events=degenerate, samples=cfg.samples,
                        seed=cfg.seed, passed=passed)


def _gue_pipeline_chunk(dim, depth, count, child_seed):
    rng = np.random.default_rng(child_seed)
    big = dim * depth
    rows_b = []
    rows_a = []
    degenerate = 0
    for _ in range(count):
        x = sample_gue(big, rng)
        try:
            chain = gram_schmidt(spectral_measure(x, dim), depth)
        except NumericDegeneracy:
            degenerate += 1
            continue
        rows_b.append([float(np.trace(chain.b[k]).real) for k in range(depth)])
        rows_a.append([float(np.trace(chain.a[k]).real) for k in range(depth - 1)])
    return np.array(rows_b), np.array(rows_a), degenerate


def run_gue_coefficient_test(dim, depth, samples, seed, tolerance_sigmas=4.0, threads=1):
    """Gaussian spectral-measure recursion blocks against their known laws.

    Diagonal blocks have centered Gaussian trace; Hermitian squares of the
    off-diagonal blocks are Laguerre with E[trace] = p^2 (n-k).  Used as a
    self-test of the Gram-Schmidt harness before the Jacobi suite.
    """
    results = _run_chunked(samples, seed, threads,
                           lambda c, s: _gue_pipeline_chunk(dim, depth, c, s))
    tr_b = np.concatenate([r[0] for r in results])
    tr_a = np.concatenate([r[1] for r in results])
    degenerate = sum(r[2] for r in results)
    cells = []
    for k in range(depth):
        col = tr_b[:, k]
        se = float(col.std(ddof=1) / np.sqrt(len(col)))
        z = float(col.mean() / se)
        cells.append(McCell(label=f"B{k + 1}", statistic="trace",
                            mean_pipeline=float(col.mean()), mean_reference=0.0,
                            stderr=se, z=z, passed=abs(z) < tolerance_sigmas))
    for k in range(depth - 1):
        col = tr_a[:, k]
        expected = dim * dim * (depth - (k + 1))
        se = float(col.std(ddof=1) / np.sqrt(len(col)))
        z = float((col.mean() - expected) / se)
        cells.append(McCell(label=f"A{k + 1}", statistic="trace",
                            mean_pipeline=float(col.mean()), mean_reference=float(expected),
                            stderr=se, z=z, passed=abs(z) < tolerance_sigmas))
    passed = all(c.passed for c in cells) and degenerate == 0
    return McTestReport(suite="gue-coefficients", cells=cells, correlation=None,
                        correlation_bound=0.0, max_correlation=0.0,
                        degeneracy_events=degenerate, samples=samples, seed=seed,
                        passed=passed)


def run_kmk_limit_test(dim, depth_list, kappa1, kappa2, samples, seed,
                       tolerance_sigmas=4.0):
    """Empirical spectral moments of growing Jacobi matrices against KMK.

    For each n the matrix size is N = n * dim with parameters kappa * N
    (which must be integers); the first two empirical moments are compared
    to quadrature moments of the limit law, and the absolute errors must
    shrink along the list.
    """
    params = kmk_params(kappa1, kappa2)
    nodes, weights = kmk_quadrature(params, 400)
    ref = [float(np.sum(weights * nodes)), float(np.sum(weights * nodes**2))]
    rng = rng_from(seed)
    cells = []
    errors = []
    for n in depth_list:
        big = n * dim
        a = kappa1 * big
        b = kappa2 * big
        if abs(a - round(a)) > 1e-9 or abs(b - round(b)) > 1e-9:
            raise ValueError("kappa * N must be integral for every size in the list")
        x = sample_jue(big, int(round(a)), int(round(b)), rng, size=samples)
        lam = np.linalg.eigvalsh(x)
        m1 = lam.mean(axis=1)
        m2 = (lam**2).mean(axis=1)
        err_pair = []
        for name, col, target in (("m1", m1, ref[0]), ("m2", m2, ref[1])):
            se = float(col.std(ddof=1) / np.sqrt(samples))
            z = float((col.mean() - target) / se) if se > 0 else 0.0
            cells.append(McCell(label=f"N{big}", statistic=name,
                                mean_pipeline=float(col.mean()),
                                mean_reference=target, stderr=se, z=z,
                                passed=abs(z) < tolerance_sigmas))
            err_pair.append(abs(float(col.mean()) - target))
        errors.append(err_pair)
    errors = np.array(errors)
    trend_ok = bool(np.all(errors[-1] <= errors[0] + 1e-12))
    passed = all(c.passed for c in cells) and trend_ok
    return McTestReport(suite="kmk-limit", cells=cells, correlation=None,
                        correlation_bound=0.0, max_correlation=0.0,
                        degeneracy_events=0, samples=samples, seed=seed,
                        passed=passed,
                        extras={"errors": errors.tolist(),
                                "trend_decreasing": trend_ok,
                                "reference_moments": ref})
