"""Tensor-decomposition channel estimation for beyond-diagonal RIS."""
