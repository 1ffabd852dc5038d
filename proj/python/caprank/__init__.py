"""Rank candidate captions by their distance from the consensus subspace."""

from ._core import (
    Error,
    decompose,
    gt_caption_score,
    generate_scene,
    rank_captions,
    run_cli,
    singular_values,
    spearman_rho,
    split_sentences,
)

__all__ = [
    "Error",
    "decompose",
    "gt_caption_score",
    "generate_scene",
    "rank_captions",
    "run_cli",
    "singular_values",
    "spearman_rho",
    "split_sentences",
]
