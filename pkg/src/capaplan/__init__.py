"""capaplan: capability-based bounded-horizon planning with assisted repair."""

__version__ = "0.1.0"
