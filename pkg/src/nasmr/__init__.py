"""Network-agnostic BFT consensus toolkit with a deterministic adversarial simulator."""

__version__ = "0.1.0"
