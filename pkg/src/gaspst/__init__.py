"""Perfect state transfer on underlying networks of group association schemes."""

__version__ = "0.1.0"
