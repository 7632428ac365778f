"""Convert a 0..100 trial score into a natural-language evaluation."""

from __future__ import annotations

from dataclasses import dataclass

from clin.errors import OutOfRange

POOR = "The agent performed poorly and made some progress but not enough to solve the task."
SOLVED = "The agent has performed exceptionally well and successfully solved the task."


@dataclass(frozen=True)
class FeedbackBands:
    """Half-open score bands ``[lower_i, lower_{i+1})`` plus the exact-100 band.

    Only the first and last sentences are fixed; the graded ones in between
    can be overridden from a run config.
    """

    lowers: tuple[int, ...] = (0, 20, 35, 50, 65, 80)
    sentences: tuple[str, ...] = (
        POOR,
        "The agent made some progress but is still far from solving the task.",
        "The agent performed moderately and made good progress but not enough to solve the task.",
        "The agent performed reasonably well and completed a significant part of the task but did not solve it.",
        "The agent performed well and completed most of the task but did not solve it.",
        "The agent performed very well and nearly solved the task, but did not complete it.",
        SOLVED,
    )

    def __post_init__(self) -> None:
        if len(self.sentences) != len(self.lowers) + 1:
            raise ValueError("need one sentence per band plus one for a perfect score")
        if self.lowers[0] != 0 or list(self.lowers) != sorted(set(self.lowers)) or self.lowers[-1] >= 100:
            raise ValueError("band lower bounds must start at 0, increase strictly and stay below 100")

    def band(self, score: int) -> int:
        if isinstance(score, bool) or not isinstance(score, int) or not 0 <= score <= 100:
            raise OutOfRange(f"score must be an integer in 0..100, got {score!r}")
        if score == 100:
            return len(self.lowers)
        idx = 0
        for i, lo in enumerate(self.lowers):
            if score >= lo:
                idx = i
        return idx


DEFAULT_BANDS = FeedbackBands()


def reward_to_feedback(score: int, bands: FeedbackBands = DEFAULT_BANDS) -> str:
    return bands.sentences[bands.band(score)]
