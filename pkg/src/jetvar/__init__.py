"""Symbolic variational calculus on finite-order jet coordinates."""
