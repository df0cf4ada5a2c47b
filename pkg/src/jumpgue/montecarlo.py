"""GUE sampling and gap probabilities.

Matrices are drawn with density proportional to exp(-Tr H^2): diagonal
entries N(0, 1/2), real and imaginary parts of each upper entry N(0, 1/4).
The eigenvalue density is then proportional to prod (x_i - x_j)^2 prod exp(-x_k^2),
so the chance that all or none of the eigenvalues lie in (s1, s2) equals
D_n / C_n for the two-jump weight with (A, B1, B2) = (0, 1, -1) or (1, -1, 1).

Sampling is chunked; chunk k draws from SeedSequence(seed).spawn(...)[k],
so results do not depend on how chunks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import ConfigInvalid
from .numerics import PrecisionContext, to_real
from .ortho import auto_bits, build_ortho_system
from .weight import WeightParams, log_partition_constant

MODES = ("none_in_interval", "all_in_interval")
_ALIASES = {"none": "none_in_interval", "all": "all_in_interval"}
MAX_N = 64
CHUNK = 20_000
CSV_FIELDS = ("n", "s1", "s2", "mode", "p_hat", "stderr", "p_det", "sigma_distance")


def canonical_mode(mode: str) -> str:
    mode = _ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ConfigInvalid(f"mode must be one of {MODES} (or none/all), got {mode!r}")
    return mode


@dataclass(frozen=True)
class MCConfig:
    n: int
    samples: int
    seed: int
    s1: float
    s2: float
    mode: str = "none_in_interval"
    chunk: int = CHUNK

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            raise ConfigInvalid(f"n must lie in [1, {MAX_N}]")
        if self.samples < 1 or self.chunk < 1:
            raise ConfigInvalid("samples and chunk must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigInvalid("seed must be a 64-bit unsigned integer")
        if not (math.isfinite(self.s1) and math.isfinite(self.s2) and self.s1 < self.s2):
            raise ConfigInvalid("need finite s1 < s2")
        object.__setattr__(self, "mode", canonical_mode(self.mode))


@dataclass(frozen=True)
class GapEstimate:
    p_hat: float
    stderr: float
    mode: str
    samples: int

    @staticmethod
    def from_count(hits: int, samples: int, mode: str) -> "GapEstimate":
        p = hits / samples
        return GapEstimate(p, math.sqrt(p * (1 - p) / samples), mode, samples)


def sample_gue_matrices(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """``count`` Hermitian n x n matrices with density proportional to exp(-Tr H^2)."""
    diag = rng.normal(0.0, math.sqrt(0.5), size=(count, n))
    re = rng.normal(0.0, 0.5, size=(count, n, n))
    im = rng.normal(0.0, 0.5, size=(count, n, n))
    upper = np.triu(re + 1j * im, k=1)
    H = upper + np.conj(np.swapaxes(upper, 1, 2))
    idx = np.arange(n)
    H[:, idx, idx] = diag
    return H


def sample_gue_spectrum(cfg: MCConfig):
    """Yield eigenvalue arrays of shape (chunk_size, n), ascending along the last axis."""
    chunks = -(-cfg.samples // cfg.chunk)
    seeds = np.random.SeedSequence(cfg.seed).spawn(chunks)
    left = cfg.samples
    for ss in seeds:
        count = min(cfg.chunk, left)
        left -= count
        rng = np.random.Generator(np.random.PCG64(ss))
        yield np.linalg.eigvalsh(sample_gue_matrices(rng, count, cfg.n))


def _hits(ev: np.ndarray, s1: float, s2: float) -> tuple:
    inside = (ev > s1) & (ev < s2)
    count = inside.sum(axis=1)
    return int(np.count_nonzero(count == 0)), int(np.count_nonzero(count == ev.shape[1]))


def gap_probabilities_mc(cfg: MCConfig) -> dict:
    """Both modes from one sample stream."""
    none = every = 0
    for ev in sample_gue_spectrum(cfg):
        a, b = _hits(ev, cfg.s1, cfg.s2)
        none += a
        every += b
    return {
        "none_in_interval": GapEstimate.from_count(none, cfg.samples, "none_in_interval"),
        "all_in_interval": GapEstimate.from_count(every, cfg.samples, "all_in_interval"),
    }


def gap_probability_mc(cfg: MCConfig) -> GapEstimate:
    return gap_probabilities_mc(cfg)[cfg.mode]


def gap_params(mode: str, s1, s2) -> WeightParams:
    mode = canonical_mode(mode)
    if mode == "none_in_interval":
        return WeightParams(1, -1, 1, s1, s2)
    return WeightParams(0, 1, -1, s1, s2)


def gap_probability_det(n: int, s1, s2, mode: str, ctx: PrecisionContext | None = None):
    """D_n(s1, s2) / C_n from the Hankel factorization (log domain)."""
    if not 1 <= n <= MAX_N:
        raise ConfigInvalid(f"n must lie in [1, {MAX_N}]")
    ctx = ctx or PrecisionContext(auto_bits(n))
    sys = build_ortho_system(gap_params(mode, s1, s2), n, ctx)
    with mp.workprec(sys.bits):
        return mp.exp(sys.logD[n] - log_partition_constant(n, PrecisionContext(sys.bits)))


def comparison_row(cfg: MCConfig, est: GapEstimate, p_det) -> list:
    p_det = float(to_real(p_det))
    dist = abs(est.p_hat - p_det) / est.stderr if est.stderr > 0 else (0.0 if est.p_hat == p_det else math.inf)
    return [str(cfg.n), repr(float(cfg.s1)), repr(float(cfg.s2)), est.mode, repr(est.p_hat), repr(est.stderr),
            repr(p_det), repr(dist)]
