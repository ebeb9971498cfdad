"""Re-identification audit of de-identified hospital discharge data."""

__version__ = "0.1.0"
