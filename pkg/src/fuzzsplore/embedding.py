"""2D embedding of coverage vectors with t-SNE, for the testcases scatterplot.

The pooled coverage rows of all fuzzers are embedded jointly so that points
from different fuzzers are comparable in one plot. The implementation is the
standard exact O(n^2) algorithm: per-point Gaussian bandwidths found by
binary search to hit the target perplexity, symmetrized affinities, and
momentum gradient descent on the Student-t low-dimensional similarities with
an early exaggeration phase. Results are deterministic for a given input
order, parameter set, and seed; the stochastic nature of the method means
different seeds give different (equally valid) layouts.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from .coverage import HitcountVector
from .errors import (
    DegenerateInput,
    MapSizeMismatch,
    NonFiniteGradient,
    ValidationError,
)

logger = logging.getLogger(__name__)

EUCLIDEAN_BUCKETED = "euclidean_bucketed"
HAMMING_BINARY = "hamming_binary"
METRICS = (EUCLIDEAN_BUCKETED, HAMMING_BINARY)

ENTROPY_TOL = 1e-5
MAX_BISECTION_STEPS = 50
INIT_SIGMA = 1e-4
ZERO_ROW_JITTER = 1e-12
MIN_GAIN = 0.01


@dataclass(frozen=True)
class TsneParams:
    """Hyperparameters of the embedding run, echoed into the artifact.

    The momentum switch from initial to final happens when the early
    exaggeration phase ends.
    """

    perplexity: float = 30.0
    iterations: int = 1000
    early_exaggeration_factor: float = 12.0
    early_exaggeration_iters: int = 250
    learning_rate: float = 200.0
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    rng_seed: int = 0
    metric: str = EUCLIDEAN_BUCKETED

    def __post_init__(self) -> None:
        if self.perplexity < 1:
            raise ValidationError(f"perplexity must be >= 1, got {self.perplexity}")
        if self.iterations < self.early_exaggeration_iters:
            raise ValidationError(
                f"iterations ({self.iterations}) must cover the early exaggeration "
                f"phase ({self.early_exaggeration_iters})"
            )
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.metric not in METRICS:
            raise ValidationError(f"unknown metric {self.metric!r}, expected one of {METRICS}")

    def to_json_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EmbeddingPoint:
    fuzzer_id: str
    tc_id: int
    x: float
    y: float


def clamped_perplexity(perplexity: float, n: int) -> float:
    """Effective perplexity target for n points.

    The bandwidth search has no solution once the target approaches the
    number of neighbors, so tiny inputs are clamped to (n - 1) / 3.
    """
    return min(perplexity, (n - 1) / 3.0)


def _rows_to_csr(
    vectors: Sequence[HitcountVector], metric: str
) -> sparse.csr_matrix:
    map_size = vectors[0].map_size
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for vector in vectors:
        if vector.map_size != map_size:
            raise MapSizeMismatch(
                f"mixed map sizes in embedding input: {vector.map_size} vs {map_size}"
            )
        for index, count in vector.to_pairs():
            indices.append(index)
            data.append(1.0 if metric == HAMMING_BINARY else float(count))
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(vectors), map_size),
    )


def pairwise_sq_distances(
    vectors: Sequence[HitcountVector], metric: str
) -> np.ndarray:
    """Dense n x n squared distances between sparse coverage rows.

    ``euclidean_bucketed`` treats the (classified) counts as reals;
    ``hamming_binary`` works on the nonzero-support indicator, for which the
    squared Euclidean distance equals the Hamming distance.
    """
    matrix = _rows_to_csr(vectors, metric)
    gram = np.asarray((matrix @ matrix.T).todense(), dtype=np.float64)
    norms = np.diag(gram)
    sq = norms[:, None] + norms[None, :] - 2.0 * gram
    np.maximum(sq, 0.0, out=sq)
    np.fill_diagonal(sq, 0.0)
    return sq


def _entropy_and_row(distances: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    # Shifting distances by a constant leaves both the conditional
    # distribution and its entropy unchanged; shifting by the row minimum
    # keeps the exponentials from underflowing to an all-zero row.
    shifted = distances - distances.min()
    weights = np.exp(-shifted * beta)
    total = weights.sum()
    entropy = float(np.log(total) + beta * (shifted @ weights) / total)
    return entropy, weights / total


def conditional_affinities(
    vectors: Sequence[HitcountVector], params: TsneParams
) -> tuple[np.ndarray, np.ndarray]:
    """Per-point conditional distributions with perplexity calibration.

    For each point the Gaussian bandwidth is found by binary search so the
    conditional distribution over the other points reaches the (clamped)
    target perplexity, to entropy tolerance 1e-5 or 50 steps. Returns the
    n x n conditional matrix (zero diagonal, rows summing to 1) and the
    per-point precisions.
    """
    n = len(vectors)
    if n < 2:
        raise DegenerateInput(f"need at least 2 rows to embed, got {n}")
    sq_distances = pairwise_sq_distances(vectors, params.metric)
    target_entropy = np.log(clamped_perplexity(params.perplexity, n))

    cond = np.zeros((n, n))
    betas = np.ones(n)
    others = np.arange(n)
    for i in range(n):
        row = sq_distances[i, others != i]
        if row.max() == 0.0:
            # Identical to every other point; jitter so the search is defined.
            row = row + ZERO_ROW_JITTER
        beta = 1.0
        beta_min, beta_max = -np.inf, np.inf
        entropy, p_row = _entropy_and_row(row, beta)
        for _ in range(MAX_BISECTION_STEPS):
            diff = entropy - target_entropy
            if abs(diff) <= ENTROPY_TOL:
                break
            if diff > 0:
                beta_min = beta
                beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
            entropy, p_row = _entropy_and_row(row, beta)
        cond[i, others != i] = p_row
        betas[i] = beta
    return cond, betas


def pairwise_affinities(
    vectors: Sequence[HitcountVector], params: TsneParams
) -> np.ndarray:
    """Symmetrized joint affinities P = (P_cond + P_cond^T) / (2n).

    P is symmetric with zero diagonal and sums to 1.
    """
    cond, _ = conditional_affinities(vectors, params)
    n = cond.shape[0]
    return (cond + cond.T) / (2.0 * n)


def _student_t_numerators(Y: np.ndarray) -> np.ndarray:
    sq_norms = (Y * Y).sum(axis=1)
    sq = sq_norms[:, None] + sq_norms[None, :] - 2.0 * (Y @ Y.T)
    num = 1.0 / (1.0 + np.maximum(sq, 0.0))
    np.fill_diagonal(num, 0.0)
    return num


def kl_divergence(P: np.ndarray, Y: np.ndarray) -> float:
    """KL(P || Q) where Q is the Student-t similarity of the layout Y."""
    num = _student_t_numerators(Y)
    Q = num / num.sum()
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def kl_gradient(P: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Analytic gradient of :func:`kl_divergence` with respect to Y."""
    num = _student_t_numerators(Y)
    Q = num / num.sum()
    pq_num = (P - Q) * num
    return 4.0 * (pq_num.sum(axis=1)[:, None] * Y - pq_num @ Y)


def run_tsne(
    rows: Sequence[tuple[str, int, HitcountVector]], params: TsneParams
) -> list[EmbeddingPoint]:
    """Embed labeled coverage rows into 2D.

    ``rows`` are (fuzzer_id, tc_id, vector) triples in pooled replay order;
    the output carries one point per input row, in the same order. A single
    row maps to the origin.
    """
    if not rows:
        raise DegenerateInput("no rows to embed")
    labels = [(fuzzer_id, tc_id) for fuzzer_id, tc_id, _ in rows]
    if len(set(labels)) != len(labels):
        raise ValidationError("duplicate (fuzzer, testcase) labels in embedding input")
    if len(rows) == 1:
        fuzzer_id, tc_id, _ = rows[0]
        return [EmbeddingPoint(fuzzer_id, tc_id, 0.0, 0.0)]

    vectors = [vector for _, _, vector in rows]
    P = pairwise_affinities(vectors, params)
    n = len(rows)

    rng = np.random.default_rng(params.rng_seed)
    Y = rng.normal(0.0, INIT_SIGMA, size=(n, 2))
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)

    for iteration in range(params.iterations):
        exaggerating = iteration < params.early_exaggeration_iters
        target = P * params.early_exaggeration_factor if exaggerating else P
        grad = kl_gradient(target, Y)
        if not np.isfinite(grad).all():
            bad = int(np.argwhere(~np.isfinite(grad))[0][0])
            raise NonFiniteGradient(
                f"non-finite gradient at iteration {iteration}, row {bad} "
                f"(label {labels[bad]})"
            )
        momentum = params.momentum_initial if exaggerating else params.momentum_final
        # Per-coordinate adaptive gains, as in the reference optimizer: grow
        # while the step direction is consistent, shrink when it flips.
        same_direction = (grad > 0.0) == (velocity > 0.0)
        gains = np.where(same_direction, gains * 0.8, gains + 0.2)
        np.maximum(gains, MIN_GAIN, out=gains)
        velocity = momentum * velocity - params.learning_rate * gains * grad
        Y = Y + velocity
        Y = Y - Y.mean(axis=0)
        if (iteration + 1) % 100 == 0:
            logger.debug(
                "t-SNE iteration %d: KL=%.6f", iteration + 1, kl_divergence(P, Y)
            )

    return [
        EmbeddingPoint(fuzzer_id, tc_id, float(Y[i, 0]), float(Y[i, 1]))
        for i, (fuzzer_id, tc_id) in enumerate(labels)
    ]
