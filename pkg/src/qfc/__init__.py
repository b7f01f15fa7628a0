"""Design and simulation toolkit for cavity-enhanced sum-frequency conversion
in periodically poled microring resonators."""

from . import cmt, dispersion, layout, ring, spectra, system

__all__ = ["cmt", "dispersion", "layout", "ring", "spectra", "system"]
__version__ = "0.1.0"
