"""Exception types shared across the package.

The split mirrors the CLI exit codes: configuration problems are user
errors and should be reported before any heavy computation starts, while
compute errors signal that a numerical routine hit an invalid regime
(unstable time step, overflowing scaling, empty density, ...).
"""


class ConfigError(ValueError):
    """A scenario or CLI input failed validation."""


class ComputeError(RuntimeError):
    """A numerical routine was asked to operate outside its valid regime."""


class HealthCheckError(RuntimeError):
    """A finished run failed a basic sanity check (e.g. acceptance rate 0 or 1)."""
