"""Graph-based air traffic scenario generation, verification and LLM
benchmarking toolkit."""

__version__ = "0.1.0"
