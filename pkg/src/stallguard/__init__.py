"""Fixed-point LMS / AN-LMS simulator and stalling analysis."""

__version__ = "0.1.0"
