"""Array-framework consumer for .klay layered circuit files.

Loads the index-vector representation, replays the forward pass with JAX
gather and segment-reduce primitives (real or log domain), differentiates it
with jax.grad, and emits the same JSON dump schema as the producing engine so
the two can be diffed file-for-file.
"""

from .loader import KlayFormatError, Layer, LayeredProgram, load, loads
from .runner import decode_weights, dump_payload, forward, gradient

__all__ = [
    "KlayFormatError",
    "Layer",
    "LayeredProgram",
    "decode_weights",
    "dump_payload",
    "forward",
    "gradient",
    "load",
    "loads",
]
