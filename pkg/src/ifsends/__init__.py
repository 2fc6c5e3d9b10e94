"""Exact analysis of affine iterated function systems through their semigroup Cayley graphs."""
