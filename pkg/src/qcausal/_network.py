"""Sequential pairwise tensor contraction with explicit leg labels."""

from __future__ import annotations

from typing import Hashable, Sequence

import numpy as np


def contract(tensors: Sequence[tuple[np.ndarray, Sequence[Hashable]]], open_labels: Sequence[Hashable]) -> np.ndarray:
    """Contract ``tensors`` left to right; every label appears at most twice.

    Labels appearing once must be listed in ``open_labels``, which fixes the
    axis order of the result.
    """
    acc = np.ones(())
    acc_labels: list = []
    for t, labels in tensors:
        labels = list(labels)
        if t.ndim != len(labels):
            raise ValueError(f"tensor of rank {t.ndim} given {len(labels)} labels")
        shared = [lab for lab in labels if lab in acc_labels]
        axes = ([acc_labels.index(lab) for lab in shared], [labels.index(lab) for lab in shared])
        acc = np.tensordot(acc, t, axes=axes)
        acc_labels = [lab for lab in acc_labels if lab not in shared] + [lab for lab in labels if lab not in shared]
    if sorted(map(repr, acc_labels)) != sorted(map(repr, open_labels)):
        raise ValueError(f"dangling legs {acc_labels} do not match requested {list(open_labels)}")
    return acc.transpose([acc_labels.index(lab) for lab in open_labels])
