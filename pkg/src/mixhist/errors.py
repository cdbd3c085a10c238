"""Exception hierarchy shared by the mixhist modules."""

from __future__ import annotations


class MixHistError(Exception):
    """Base class for every error raised by this package."""


# --- images -----------------------------------------------------------------


class ImageError(MixHistError):
    pass


class ImageNotFound(ImageError, FileNotFoundError):
    pass


class UnsupportedFormat(ImageError):
    pass


class CorruptImage(ImageError):
    pass


class ImageTooSmall(ImageError):
    pass


# --- descriptor / query -----------------------------------------------------


class SchemeMismatch(MixHistError, ValueError):
    """Feature vector length or scheme does not match the database."""


class DimensionMismatch(MixHistError, ValueError):
    pass


# --- manifest / index -------------------------------------------------------


class ManifestError(MixHistError):
    pass


class MissingFile(ManifestError, FileNotFoundError):
    pass


class MalformedRow(ManifestError, ValueError):
    pass


class DuplicateId(ManifestError, ValueError):
    pass


class ExtractionError(MixHistError):
    """Feature extraction failed for one manifest entry."""

    def __init__(self, image_id: str, cause: BaseException):
        self.image_id = image_id
        self.cause = cause
        super().__init__(f"image {image_id!r}: {cause}")


class DBFormatError(MixHistError):
    pass


class BadMagic(DBFormatError):
    pass


class VersionMismatch(DBFormatError):
    pass


class ChecksumMismatch(DBFormatError):
    pass


# --- evaluation -------------------------------------------------------------


class CategoryTooSmall(MixHistError, ValueError):
    pass


class UnknownCategory(MixHistError, KeyError):
    pass
