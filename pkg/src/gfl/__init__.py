"""Grasp-force lab: simulation and control of grasping with generalized stiffness.

Synthetic nonlinear time-varying objects, online stiffness estimators (sliding
least squares and a recurrent corrector trained from scratch), an adaptive PI
force-tracking loop, and the stability/performance analysis around it.
"""

__version__ = "0.1.0"
