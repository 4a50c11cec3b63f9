"""Digital memcomputing 3-SAT solver with voltage jumps, plus benchmarking tools."""

__version__ = "0.1.0"
