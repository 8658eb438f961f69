"""Desk-scale laboratory for quantum/classical PAC learning separations."""
__version__ = "0.1.0"
