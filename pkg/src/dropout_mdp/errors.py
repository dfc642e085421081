"""Structured errors raised across the package."""


class DropoutMdpError(Exception):
    """Base class for all package errors."""


class InvalidModelError(DropoutMdpError, ValueError):
    """A system, policy or file violates a probability or shape invariant."""


class StateSpaceTooLargeError(DropoutMdpError):
    """Joint state or action space exceeds the supported index range."""


class PolicyDimensionError(DropoutMdpError, ValueError):
    """A policy or mask does not match the agents it is applied to."""


class MaskCapExceededError(DropoutMdpError):
    """Too many agents to enumerate all dropout masks."""


class ErgodicityError(DropoutMdpError):
    """The induced Markov chain has no unique limiting distribution."""


class ConvergenceError(DropoutMdpError):
    """An iterative routine hit its iteration cap."""


class SupportViolationError(DropoutMdpError):
    """The target policy puts mass on an action the behavioral policy never takes."""


class BoundViolationError(DropoutMdpError, AssertionError):
    """A numerical check of a proven inequality failed."""
