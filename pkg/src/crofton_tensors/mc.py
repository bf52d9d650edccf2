"""Seeded Monte-Carlo harness.

Replications are generated in fixed-size blocks.  Block ``b`` draws from
``numpy.random.default_rng([seed, b])`` so the realized numbers depend only on
(seed, block size, replication count) and never on how many workers ran the
blocks.  Blocks are concatenated in index order before any reduction.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .symtensor import POSDEF_TOL, SymmetricTensor

BLOCK = 8192
THREADS_ENV = "CROFTON_THREADS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class RngStream:
    """Seed plus the block-splitting rule; ``block(b)`` always yields the same generator state."""

    seed: int
    block_size: int = BLOCK

    def block(self, b: int) -> np.random.Generator:
        return np.random.default_rng([int(self.seed) & 0xFFFFFFFFFFFFFFFF, b])

    def blocks(self, replications: int) -> list[tuple[int, int]]:
        """(block index, size) pairs covering ``replications``."""
        out, b, left = [], 0, replications
        while left > 0:
            k = min(self.block_size, left)
            out.append((b, k))
            b, left = b + 1, left - k
        return out


@dataclass
class McSummary:
    replications: int
    mean: np.ndarray
    var: np.ndarray
    se: np.ndarray
    cv: np.ndarray
    posdef_fraction: float | None = None
    samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(self.var)

    def cv_against(self, truth) -> np.ndarray:
        """sd / |truth| per component; nan where the truth is zero."""
        t = np.abs(np.asarray(truth, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t > 0, self.sd / t, np.nan)

    def within(self, truth, k: float = 3.0) -> np.ndarray:
        """Per component: |mean - truth| <= k SE (exact equality when SE is zero)."""
        d = np.abs(self.mean - np.asarray(truth, dtype=float))
        return d <= k * self.se + 1e-12 * np.maximum(1.0, np.abs(truth))


def summarize(X: np.ndarray, tensor_shape: tuple[int, int] | None = None,
              keep: bool = False) -> McSummary:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    N = X.shape[0]
    if N < 2:
        raise ValueError("need at least two replications")
    mean = X.mean(axis=0)
    var = X.var(axis=0, ddof=1)
    se = np.sqrt(var / N)
    with np.errstate(divide="ignore", invalid="ignore"):
        cv = np.where(mean != 0, np.sqrt(var) / np.abs(mean), np.nan)
    pd = None
    if tensor_shape is not None and tensor_shape[1] == 2:
        pd = posdef_fraction(X, tensor_shape[0])
    return McSummary(N, mean, var, se, cv, pd, X if keep else None)


def posdef_fraction(X: np.ndarray, n: int) -> float:
    """Share of rows (rank-2 tensor components) whose matrix form is positive definite."""
    from .symtensor import multi_indices

    M = np.zeros((X.shape[0], n, n))
    for k, (i, j) in enumerate(multi_indices(n, 2)):
        M[:, i, j] = M[:, j, i] = X[:, k]
    return float(np.mean(np.linalg.eigvalsh(M)[:, 0] > POSDEF_TOL))


def mc_samples(estimator: Callable[[np.random.Generator, int], np.ndarray], replications: int,
               seed: int, workers: int | None = None, block_size: int = BLOCK) -> np.ndarray:
    """Run ``estimator(rng, size) -> (size, ncomp)`` over all blocks; rows in replication order."""
    if replications < 2:
        raise ValueError("need at least two replications")
    stream = RngStream(seed, block_size)
    jobs = stream.blocks(replications)
    job = lambda bk: np.asarray(estimator(stream.block(bk[0]), bk[1]), dtype=float).reshape(bk[1], -1)
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(job, jobs))
    else:
        parts = [job(j) for j in jobs]
    return np.concatenate(parts, axis=0)


def mc_run(estimator, replications: int, seed: int, workers: int | None = None,
           tensor_shape: tuple[int, int] | None = None, keep: bool = False,
           block_size: int = BLOCK) -> McSummary:
    X = mc_samples(estimator, replications, seed, workers, block_size)
    return summarize(X, tensor_shape, keep)


def constant_estimator(t: SymmetricTensor):
    """Estimator closure returning ``t`` every time (harness sanity check)."""
    return lambda rng, size: np.tile(t.coeffs, (size, 1))


def bootstrap_var_ci(x: np.ndarray, level: float = 0.99, resamples: int = 200,
                     seed: int = 0) -> tuple[float, float]:
    """Percentile bootstrap interval for the variance of ``x``."""
    from scipy.stats import bootstrap

    res = bootstrap(
        (np.asarray(x, dtype=float),),
        lambda a, axis=-1: np.var(a, axis=axis, ddof=1),
        n_resamples=resamples,
        confidence_level=level,
        method="percentile",
        batch=4,
        random_state=np.random.default_rng(seed),
    )
    return float(res.confidence_interval.low), float(res.confidence_interval.high)
