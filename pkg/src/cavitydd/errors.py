"""Shared exception types."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed its convergence / self-consistency check."""
