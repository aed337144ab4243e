"""Flat parameter vectors with named, shaped sub-blocks.

Every cell stores its weights in one flat float64 vector; a layout maps
block names (e.g. ``"W_hi"``) to (offset, shape) slices.  Keeping the
vector flat makes parameter rays ``s * theta``, finite differences and
optimizer updates trivial.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BlockSpec:
    name: str
    offset: int
    shape: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=int)) if self.shape else 1


class ParameterLayout:
    """Ordered, disjoint, covering map from block names to vector slices."""

    def __init__(self, blocks):
        specs = []
        offset = 0
        for name, shape in blocks:
            shape = tuple(int(s) for s in shape)
            spec = BlockSpec(name, offset, shape)
            specs.append(spec)
            offset += spec.size
        self.blocks = tuple(specs)
        self.size = offset
        self._by_name = {b.name: b for b in self.blocks}
        if len(self._by_name) != len(self.blocks):
            raise ValueError("duplicate block names in layout")

    def __contains__(self, name):
        return name in self._by_name

    def names(self):
        return [b.name for b in self.blocks]

    def spec(self, name: str) -> BlockSpec:
        return self._by_name[name]

    def slice(self, name: str) -> slice:
        b = self._by_name[name]
        return slice(b.offset, b.offset + b.size)


class ParameterVector:
    """A flat float64 vector plus its block layout.

    Mutating methods return new vectors; the underlying array is owned by
    this object and callers must not write through views obtained from
    :meth:`get`.
    """

    def __init__(self, layout: ParameterLayout, values=None):
        self.layout = layout
        if values is None:
            values = np.zeros(layout.size)
        values = np.asarray(values, dtype=float).ravel()
        if values.size != layout.size:
            raise ValueError(
                f"expected {layout.size} values for layout, got {values.size}"
            )
        self.values = values

    def copy(self) -> "ParameterVector":
        return ParameterVector(self.layout, self.values.copy())

    @property
    def size(self) -> int:
        return self.layout.size

    def get(self, name: str) -> np.ndarray:
        b = self.layout.spec(name)
        return self.values[b.offset : b.offset + b.size].reshape(b.shape)

    def with_block(self, name: str, block) -> "ParameterVector":
        b = self.layout.spec(name)
        block = np.asarray(block, dtype=float)
        if block.shape != b.shape:
            raise ValueError(f"block {name} expects shape {b.shape}, got {block.shape}")
        values = self.values.copy()
        values[b.offset : b.offset + b.size] = block.ravel()
        return ParameterVector(self.layout, values)

    def with_values(self, values) -> "ParameterVector":
        return ParameterVector(self.layout, values)

    def theta_hash(self) -> str:
        """SHA-256 over layout names/shapes and the raw value bytes."""
        h = hashlib.sha256()
        for b in self.layout.blocks:
            h.update(b.name.encode())
            h.update(repr(b.shape).encode())
        h.update(self.values.tobytes())
        return h.hexdigest()

    def to_dict(self) -> dict:
        """Block name -> nested row-major lists (exact float round-trip)."""
        return {b.name: self.get(b.name).tolist() for b in self.layout.blocks}

    @classmethod
    def from_dict(cls, layout: ParameterLayout, blocks: dict) -> "ParameterVector":
        pv = cls(layout)
        for name, block in blocks.items():
            pv = pv.with_block(name, np.asarray(block, dtype=float))
        return pv
