"""Self-hosted multi-user ECG annotation platform."""

__version__ = "0.1.0"
