"""High-entropy position selection with a document-adaptive threshold."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyProfile
from .scoring import EntropyProfile

# positions at or below this entropy are never eligible: they cannot carry
# a meaningful relative gain (division by near-zero base entropy)
MIN_ELIGIBLE_ENTROPY = 1e-6


@dataclass
class HighEntropySet:
    """Selected anchor positions for one document."""

    doc_id: str
    threshold: float
    positions: list[int]
    alpha: float


def adaptive_threshold(profile: EntropyProfile, alpha: float) -> float:
    """Document-adaptive threshold: mean + alpha * population std."""
    if len(profile) == 0:
        raise EmptyProfile(f"profile for {profile.doc_id!r} is empty")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return profile.mean + alpha * profile.std


def select_high_entropy_positions(
    profile: EntropyProfile,
    threshold: float,
    alpha: float = float("nan"),
    max_positions: int | None = None,
) -> HighEntropySet:
    """Positions with entropy strictly above the threshold, ascending.

    If ``max_positions`` is given and the set is larger, only the
    top-entropy positions are kept (ties broken toward earlier positions).
    """
    if not np.isfinite(threshold):
        raise ValueError(f"threshold must be finite, got {threshold}")
    values = profile.entropies
    eligible = (values > threshold) & (values > MIN_ELIGIBLE_ENTROPY)
    positions = np.flatnonzero(eligible)
    if max_positions is not None and positions.size > max_positions:
        # stable sort on -entropy keeps earlier positions on ties
        by_entropy = positions[np.argsort(-values[positions], kind="stable")]
        positions = np.sort(by_entropy[:max_positions])
    return HighEntropySet(
        doc_id=profile.doc_id,
        threshold=float(threshold),
        positions=[int(p) for p in positions],
        alpha=float(alpha),
    )
