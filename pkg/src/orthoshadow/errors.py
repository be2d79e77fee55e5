"""Exception types shared across the package.

ValueError is used for plain argument errors (bad flag combinations,
mismatched raster sizes). The classes below mark conditions the CLI maps
to dedicated exit codes.
"""


class DomainError(ValueError):
    """Input is syntactically fine but physically or numerically invalid.

    Examples: a proportionality constant K <= 0, K == 1 (singular log
    ratios), negative spectral power, an all-zero spectrum.
    """


class SpdParseError(ValueError):
    """A spectral data file could not be parsed."""

    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class ImageFormatError(ValueError):
    """An image file is not in a supported or well-formed format."""
