"""
Named, counter-based random streams.

A stream is identified by ``(seed, label)``; every call to ``generator()``
returns a fresh Philox generator positioned at the start of that stream, so
parallel runs that share a seed but use different labels never interfere.
"""

import hashlib
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


def _label_words(label: str) -> List[int]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


class RngStream(BaseModel):
    """Deterministic random stream keyed by a 64-bit seed and a purpose label."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(ge=0, lt=2**64)
    label: str = "default"

    def generator(self) -> np.random.Generator:
        """Return a new generator at the beginning of this stream."""
        entropy = [self.seed & 0xFFFFFFFF, self.seed >> 32, *_label_words(self.label)]
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))

    def child(self, suffix: str) -> "RngStream":
        """Derive an independent stream for a sub-purpose."""
        return RngStream(seed=self.seed, label=f"{self.label}/{suffix}")
