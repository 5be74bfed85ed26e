"""blowuplab - numerical verification of boundary blow-up for a critical 4D Neumann system."""

__version__ = "0.1.0"
