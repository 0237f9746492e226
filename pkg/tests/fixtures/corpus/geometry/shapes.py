import math
from typing import Optional


class Circle:
    def __init__(self, r):
        self.r = r

    def area(self, scale=1.0):
        """Area of the circle.

        Args:
            scale (float): Multiplier applied to the radius before squaring.

        Returns:
            float: the area.
        """
        return math.pi * (self.r * scale) ** 2

    @classmethod
    def from_diameter(cls, diameter):
        """Build a circle from its diameter.

        :param diameter: Full width of the circle. Must be positive.
        :type diameter: float
        """
        return cls(diameter / 2)

    def perimeter(self):
        """Perimeter.

        :returns: 2 pi r
        """
        return 2 * math.pi * self.r

    def radius_of(self, other):
        return other.r


def scale_points(points, factor, origin: Optional[tuple] = None):
    """Scale 2-D points about an origin.

    Parameters
    ----------
    points : list of tuple
        The points to scale.
    factor : float
        Scale factor. Values below 1 shrink the shape.
    origin : tuple, optional
        Centre of scaling. If None, the centroid is used.

    Returns
    -------
    list of tuple
    """
    if origin is None:
        origin = (
            sum(p[0] for p in points) / len(points),
            sum(p[1] for p in points) / len(points),
        )
    ox, oy = origin
    return [(ox + (x - ox) * factor, oy + (y - oy) * factor) for x, y in points]
