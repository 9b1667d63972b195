"""Exception types shared across the package.

The CLI maps these onto exit codes: infeasible traffic exits with 1,
every other input problem (bad files, violated hypotheses) with 2.
"""


class InfeasibleTrafficError(ValueError):
    """Traffic lies outside the per-node load region it must belong to."""


class HypothesisError(ValueError):
    """A bound was requested outside the parameter range it is valid for."""
