"""Random coprime colourings of lattices: exact constants, samplers, percolation events."""

__version__ = "0.1.0"
