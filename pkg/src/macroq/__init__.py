"""Near-field matter-wave interference, collapse-model limits and mission checks."""

__version__ = "0.1.0"
