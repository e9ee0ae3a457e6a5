"""Shared exception types.

ValidationError: bad user input or arguments outside an operation's domain.
ResourceError: a request that would exceed the configured desk-scale caps
(dense dimensions, register widths). The CLI maps these to distinct exit
codes so scripted sweeps can tell the two apart.
"""


class ValidationError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass
