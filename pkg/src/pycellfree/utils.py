"""Some utility functions shared by the simulator modules."""
import numpy as np

from pycellfree.exceptions import InvalidArgument


def db_to_linear(value_db):
    """Convert a power ratio from decibels to linear scale.

    :param value_db: Value(s) in dB.
    :type value_db: ``float`` or ``numpy.ndarray``

    :rtype: ``float`` or ``numpy.ndarray``
    """
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    """Convert a (positive) linear power ratio to decibels."""
    return 10.0 * np.log10(np.asarray(value, dtype=float))


def mw_to_watts(milliwatts):
    return milliwatts * 1e-3


def mhz_to_hz(megahertz):
    return megahertz * 1e6


def as_matrix(values, name, shape=None, nonnegative=True):
    """Convert an array-like into a 2-D float matrix, validating it.

    :param values: The matrix entries.
    :type values: array-like
    :param name: Name used in error messages.
    :type name: ``str``
    :param shape: If given, the required shape.
    :type shape: ``tuple`` of ``int`` or ``NoneType``
    :param nonnegative: Reject negative entries.
    :type nonnegative: ``bool``

    :return: A float matrix.
    :rtype: ``numpy.ndarray``

    :raises: :py:class:`InvalidArgument` on a bad shape or entry.
    """
    matrix = np.asarray(values, dtype=float)
    if matrix.ndim != 2:
        raise InvalidArgument("{} must be a 2-D matrix, got shape {}"
                              .format(name, matrix.shape))
    if shape is not None and matrix.shape != tuple(shape):
        raise InvalidArgument("{} must have shape {}, got {}"
                              .format(name, tuple(shape), matrix.shape))
    if not np.all(np.isfinite(matrix)):
        raise InvalidArgument("{} has non-finite entries".format(name))
    if nonnegative and np.any(matrix < 0):
        raise InvalidArgument("{} has negative entries".format(name))
    return matrix


def as_vector(values, name, length=None):
    """Convert an array-like or scalar into a 1-D float vector."""
    vector = np.atleast_1d(np.asarray(values, dtype=float))
    if vector.ndim != 1:
        raise InvalidArgument("{} must be a vector, got shape {}"
                              .format(name, vector.shape))
    if length is not None:
        if vector.size == 1 and length != 1:
            vector = np.full(length, vector[0])
        elif vector.size != length:
            raise InvalidArgument("{} must have {} entries, got {}"
                                  .format(name, length, vector.size))
    return vector


def tell_size(obj, word, suffix="s"):
    """Useful when you want to write a message to the user.

    :param obj: The object being described.
    :type obj: Anything that works with the len() function.
    :param word: Word to use to describe the object.
    :type word: ``str``
    :param suffix: What to append to the word if plural.
    :type suffix: ``str``

    :return: The length, followed by the possibly pluralized word.
    :rtype: ``str``
    """
    if len(obj) == 1:
        return "1 {}".format(word)
    else:
        return "{} {}{}".format(len(obj), word, suffix)


def format_seconds(seconds):
    """Format a number of seconds into a human-readable string."""
    seconds = int(round(seconds))
    if seconds < 60:
        return "{} seconds".format(seconds)
    elif seconds < 3600:
        return "{:02d}:{:02d}".format(seconds // 60, seconds % 60)
    else:
        return ("{:02d}:{:02d}:{:02d}"
                .format(seconds // 3600, (seconds // 60) % 60, seconds % 60))
