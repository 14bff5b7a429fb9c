"""Random AP/UE deployments on a wrap-around square."""
import numpy as np

from pycellfree.exceptions import InvalidArgument


def place_uniform(count, side, rng):
    """Draw points uniformly at random in the square [0, side)^2.

    :param count: How many points to draw.
    :type count: ``int``
    :param side: Side length of the square, in meters.
    :type side: ``float``
    :param rng: The random stream to draw from.
    :type rng: :py:class:`numpy.random.Generator`

    :return: A ``count`` x 2 array of coordinates.
    :rtype: ``numpy.ndarray``

    :raises: :py:class:`InvalidArgument` if count or side isn't positive.
    """
    if int(count) != count or count < 1:
        raise InvalidArgument("Point count must be a positive integer, got {}"
                              .format(count))
    if not side > 0:
        raise InvalidArgument("Area side must be positive, got {}"
                              .format(side))
    points = rng.uniform(0.0, side, size=(int(count), 2))
    # uniform() samples [low, high) but rounding can land exactly on high.
    points[points >= side] = 0.0
    return points


def _check_in_area(points, side, name):
    points = np.asarray(points, dtype=float)
    if np.any(points < 0) or np.any(points >= side):
        raise InvalidArgument("{} lies outside the area [0, {})^2"
                              .format(name, side))
    return points


def torus_distance(p, q, side):
    """Euclidean distance between two points on the wrap-around square.

    Each axis wraps independently: the per-axis offset is
    min(|p - q|, side - |p - q|).

    :param p: First point (x, y), in meters.
    :param q: Second point (x, y), in meters.
    :param side: Side of the square, in meters.
    :type side: ``float``

    :rtype: ``float``

    :raises: :py:class:`InvalidArgument` if a point is outside the area.
    """
    p = _check_in_area(p, side, "Point {}".format(tuple(p)))
    q = _check_in_area(q, side, "Point {}".format(tuple(q)))
    delta = np.abs(p - q)
    delta = np.minimum(delta, side - delta)
    return float(np.hypot(delta[0], delta[1]))


def distance_matrix(ap_positions, ue_positions, side):
    """Wrap-around distances from every AP to every UE (M x K, meters)."""
    aps = np.asarray(ap_positions, dtype=float)[:, None, :]
    ues = np.asarray(ue_positions, dtype=float)[None, :, :]
    delta = np.abs(aps - ues)
    delta = np.minimum(delta, side - delta)
    return np.hypot(delta[..., 0], delta[..., 1])


class Deployment(object):
    """Planar positions of M APs and K UEs in a wrap-around square."""
    def __init__(self, ap_positions, ue_positions, side, strict=True):
        """Initializer.

        :param ap_positions: M x 2 AP coordinates, in meters.
        :type ap_positions: array-like
        :param ue_positions: K x 2 UE coordinates, in meters.
        :type ue_positions: array-like
        :param side: Side of the square area, in meters.
        :type side: ``float``
        :param strict: Require more APs than UEs. Studies that only look
                       at large-scale fading (channel hardening) can
                       relax this.
        :type strict: ``bool``
        """
        if not side > 0:
            raise InvalidArgument("Area side must be positive, got {}"
                                  .format(side))
        self.side = float(side)
        self.ap_positions = _check_in_area(
            np.reshape(ap_positions, (-1, 2)), side, "An AP")
        self.ue_positions = _check_in_area(
            np.reshape(ue_positions, (-1, 2)), side, "A UE")
        if self.num_ues < 1:
            raise InvalidArgument("A deployment needs at least one UE")
        if self.num_aps < 1:
            raise InvalidArgument("A deployment needs at least one AP")
        if strict and self.num_aps <= self.num_ues:
            raise InvalidArgument("A deployment needs more APs than UEs "
                                  "(M={}, K={})"
                                  .format(self.num_aps, self.num_ues))
        # Built lazily.
        self._distances = None

    @property
    def num_aps(self):
        return len(self.ap_positions)

    @property
    def num_ues(self):
        return len(self.ue_positions)

    @property
    def distances(self):
        """M x K matrix of wrap-around AP-to-UE distances, in meters."""
        if self._distances is None:
            self._distances = distance_matrix(self.ap_positions,
                                              self.ue_positions, self.side)
        return self._distances

    def __repr__(self):
        return "Deployment(M={}, K={}, side={})".format(
            self.num_aps, self.num_ues, self.side)

    @classmethod
    def draw(cls, num_aps, num_ues, side, rng, strict=True):
        """Deploy APs, then UEs, uniformly at random from one stream."""
        aps = place_uniform(num_aps, side, rng)
        ues = place_uniform(num_ues, side, rng)
        return cls(aps, ues, side, strict=strict)
