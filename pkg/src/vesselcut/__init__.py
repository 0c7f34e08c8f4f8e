"""Material-boundary tracing in transparent vessels by seeded graph cut."""

__version__ = "0.1.0"
