"""Area-constrained Willmore flow in asymptotically Schwarzschild geometry.

Spectral graph-surface representation over coordinate spheres, Lyapunov-
Schmidt reduction onto the slow (area, center) parameters, and the full vs
effective flow comparison harnesses.  See README for the module map.
"""

__version__ = "0.1.0"
