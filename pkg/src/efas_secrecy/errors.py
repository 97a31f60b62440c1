"""Exception types shared across modules."""

from __future__ import annotations


class SeriesTruncationError(ArithmeticError):
    """A Poisson series would need more terms than the hard cap allows."""


class DegenerateEstimateError(ValueError):
    """The channel estimate is zero, so MRT and the null-space basis are undefined."""


class ConfigValidationError(ValueError):
    """One or more configuration invariants failed.

    Attributes
    ----------
    errors : list of (field, message)
        Every offending field with a short reason.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "; ".join(f"{field}: {msg}" for field, msg in self.errors)
        super().__init__(f"invalid configuration ({lines})")


class ConfigParseError(ConfigValidationError):
    """A configuration file could not be mapped onto :class:`SystemConfig`.

    Each entry of ``errors`` is ``(field, message)``; ``lines`` holds the
    matching 1-based line numbers (``None`` when unknown).
    """

    def __init__(self, errors, lines=None, path=None):
        self.lines = list(lines) if lines is not None else [None] * len(list(errors))
        self.path = path
        tagged = []
        for (field, msg), line in zip(errors, self.lines):
            where = f" (line {line})" if line else ""
            tagged.append((field, f"{msg}{where}"))
        super().__init__(tagged)
