"""Visual predictive checks: density overlays, PIT-ECDF tests, rootograms and calibration."""

__version__ = "0.1.0"
