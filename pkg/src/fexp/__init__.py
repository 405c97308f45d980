"""Error-exponent laboratory for one-bit transmission over a Gaussian
channel with an active noisy Gaussian feedback link."""

__version__ = "0.1.0"
