"""laycirc: layered, tensorized evaluation of compiled Boolean circuits.

Pipeline: parse (c2d/d4/sdd) -> fold constants -> layerize (height grouping,
pass-through chains, hash-based dedup) -> tensorize (per-layer index vectors)
-> evaluate (gather + segment-reduce, forward/backward, batched, in real, log,
or other semirings). Reference oracles (post-order traversal, exhaustive
enumeration) pin down the semantics.
"""

from .circuit import (
    Circuit,
    CircuitError,
    Literal,
    boolean_eval,
    fold_constants,
)
from .compile import compile_cnf
from .engine import (
    BOOLEAN,
    MAX_PRODUCT,
    REAL,
    EvalTrace,
    Semiring,
    WeightAssignment,
    backward,
    evaluate_semiring,
    forward_log,
    forward_real,
    weights_from_json,
    weights_from_map,
    weights_from_probabilities,
)
from .layerize import LayeredCircuit, MerkleHasher, layerize, node_hash, stats
from .oracle import enumerate_model_count, enumerate_wmc, postorder_eval
from .parsers import (
    CnfFormula,
    ParseError,
    parse_c2d_nnf,
    parse_circuit,
    parse_d4_nnf,
    parse_dimacs,
    parse_sdd,
)
from .tensorize import (
    KlayFormatError,
    TensorizedCircuit,
    read_klay,
    tensorize,
    write_klay,
)

__version__ = "0.1.0"

__all__ = [
    "BOOLEAN",
    "Circuit",
    "CircuitError",
    "CnfFormula",
    "EvalTrace",
    "KlayFormatError",
    "LayeredCircuit",
    "Literal",
    "MAX_PRODUCT",
    "MerkleHasher",
    "ParseError",
    "REAL",
    "Semiring",
    "TensorizedCircuit",
    "WeightAssignment",
    "backward",
    "boolean_eval",
    "compile_cnf",
    "enumerate_model_count",
    "enumerate_wmc",
    "evaluate_semiring",
    "fold_constants",
    "forward_log",
    "forward_real",
    "layerize",
    "node_hash",
    "parse_c2d_nnf",
    "parse_circuit",
    "parse_d4_nnf",
    "parse_dimacs",
    "parse_sdd",
    "postorder_eval",
    "read_klay",
    "stats",
    "tensorize",
    "weights_from_json",
    "weights_from_map",
    "weights_from_probabilities",
    "write_klay",
]
