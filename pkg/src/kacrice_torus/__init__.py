"""
kacrice-torus - Kac-Rice predictions and simulations for critical points of Gaussian random Fourier series on tori.
"""

from .__version__ import __version__

__author__ = "Ricardo Henriques"
__email__ = "ricardo@henriqueslab.org"
