"""Hidden-inverse coherent-error mitigation toolkit."""

__version__ = "0.1.0"
