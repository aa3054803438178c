"""Laboratory for uniform random d-regular digraphs."""
from .digraph import RegularDigraph, circulant, complement, from_dense, normalized
from .errors import RegDigraphError
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "RegularDigraph",
    "RegDigraphError",
    "RngStream",
    "circulant",
    "complement",
    "from_dense",
    "normalized",
    "__version__",
]
