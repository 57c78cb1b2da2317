"""
Tools and Utilities Module

Helper scripts for preparing NNTS symmetry experiments.
"""

__version__ = "1.0.0"
