"""rotogp: ground-state laboratory for rotating dilute Bose gases."""

__version__ = "0.1.0"
