"""Sampled multiplicative-weights solver for Electoral Colonel Blotto games."""
