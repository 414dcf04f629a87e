"""Heave return-to-equilibrium of a floating cylinder in shallow water.

Submodules:

* ``special_functions`` -- Bessel and Hankel functions of order 0 and 1.
* ``kernel`` -- radiation impulse-response kernel by Laplace inversion.
* ``solid_motion`` -- nonlinear and linear (Cummins) equations of motion.
* ``exterior_field`` -- direct radial shallow-water solver used as an oracle.
* ``cli`` -- configuration parsing and CSV-emitting command line.
"""

__version__ = "0.1.0"
