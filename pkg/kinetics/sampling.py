"""
Monte-Carlo settings and the block-wise estimator shared by markov and wick.

Samples are drawn in fixed-size blocks, each from its own counter-based
stream, and block partial sums are reduced in block order.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Tuple

import numpy as np

from kinetics.errors import ParameterError, StatisticsError
from kinetics.parallel import block_rng, block_sizes, ordered_map

logger = logging.getLogger(__name__)

# (sum, sum of squares, admissible count) for one block
BlockSums = Tuple[float, float, int]
BlockSampler = Callable[[np.random.Generator, int], BlockSums]

MIN_ACCEPTANCE = 0.1


@dataclass(frozen=True)
class McConfig:
    """Monte-Carlo settings; the seed is mandatory"""

    n_samples: int
    seed: int
    proposal_scale: float = 1.0
    time_quadrature_steps: int = 64

    def __post_init__(self):
        if int(self.n_samples) < 2:
            raise ParameterError("need at least 2 samples")
        if self.seed is None or int(self.seed) < 0:
            raise ParameterError("a non-negative integer seed is required")
        if not self.proposal_scale > 0.0:
            raise ParameterError("proposal_scale must be positive")
        if int(self.time_quadrature_steps) < 1:
            raise ParameterError("time_quadrature_steps must be at least 1")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_samples: int
    n_admissible: int
    seed: int
    proposal_scale: float

    @property
    def acceptance_rate(self) -> float:
        return self.n_admissible / self.n_samples

    def scaled(self, factor: float) -> "McEstimate":
        return McEstimate(
            self.mean * factor,
            self.stderr * abs(factor),
            self.n_samples,
            self.n_admissible,
            self.seed,
            self.proposal_scale,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimate": self.mean,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "n_admissible": self.n_admissible,
            "acceptance_rate": self.acceptance_rate,
            "seed": self.seed,
            "proposal_scale": self.proposal_scale,
        }


def run_blocks(sampler: BlockSampler, cfg: McConfig, threads: int = 1) -> McEstimate:
    """
    Evaluate the sampler on every block and combine into mean ± stderr.

    Raises:
        StatisticsError: fewer than 10% of samples were admissible
    """
    sizes = block_sizes(cfg.n_samples)

    def one_block(index: int) -> BlockSums:
        return sampler(block_rng(cfg.seed, index), sizes[index])

    partials = ordered_map(one_block, range(len(sizes)), threads)
    n = int(cfg.n_samples)
    total = math.fsum(p[0] for p in partials)
    total_sq = math.fsum(p[1] for p in partials)
    admissible = sum(int(p[2]) for p in partials)

    if admissible < MIN_ACCEPTANCE * n:
        raise StatisticsError(f"only {admissible} of {n} samples were admissible")
    if admissible < n:
        logger.debug("acceptance %.3f", admissible / n)

    mean = total / n
    variance = max(total_sq - n * mean * mean, 0.0) / (n - 1)
    return McEstimate(mean, math.sqrt(variance / n), n, admissible, int(cfg.seed), float(cfg.proposal_scale))
