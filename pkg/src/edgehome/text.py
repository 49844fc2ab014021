"""Tokenization and scalar formatting shared by the codec, classifier, and scorer."""

import re

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def format_scalar(value: float | str) -> str:
    """Render an attribute value for the device-line wire format.

    Floats use the shortest representation that round-trips (0.88 stays
    0.88, never 0.8800000000000001).
    """
    if isinstance(value, str):
        return value
    return repr(float(value))


def parse_scalar(text: str) -> float | str:
    """Inverse of format_scalar; numeric-looking values become floats."""
    try:
        return float(text)
    except ValueError:
        return text
