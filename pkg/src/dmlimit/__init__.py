# -*- coding: utf-8 -*-
"""
DM-Continuum

Simulator and verification harness for the dispersion-managed nonlinear
Schrödinger equation and its lattice discretization.
"""

__version__ = "0.1.0"
