"""Shared exception base for the transodb package."""


class TransodbError(Exception):
    """Base class for every error raised by this package."""


class ModelMismatchError(TransodbError):
    """Two components were handed models whose dumps disagree."""
