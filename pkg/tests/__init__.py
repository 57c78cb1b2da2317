"""
Tests for the NNTS symmetry toolkit.
"""
