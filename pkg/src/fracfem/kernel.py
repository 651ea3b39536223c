"""The fractional interaction kernel and its closed-form tail integrals.

The kernel is the radial function K(z) = (1/2) * c * |z|^(-N-2s) where the
normalization constant c makes the associated nonlocal operator agree with
the Fourier-symbol definition of the fractional Laplacian.
"""

import math
from dataclasses import dataclass, field

from .errors import DomainError

#: Surface measure of the unit sphere S^(N-1), indexed by dimension N.
_SPHERE_MEASURE = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


def fractional_constant(dim, s):
    """Normalization constant s * 2^(2s) * Gamma((N+2s)/2) / (pi^(N/2) * Gamma(1-s)).

    Supported for dim in {1, 2, 3} and s in (0, 1).
    """
    if dim not in (1, 2, 3):
        raise DomainError(f"dimension must be 1, 2 or 3, got {dim}")
    if not 0.0 < s < 1.0:
        raise DomainError(f"fractional order must lie in (0, 1), got {s}")
    return (
        s
        * 2.0 ** (2.0 * s)
        * math.gamma((dim + 2.0 * s) / 2.0)
        / (math.pi ** (dim / 2.0) * math.gamma(1.0 - s))
    )


@dataclass(frozen=True)
class Kernel:
    """Fractional kernel of order ``s`` in dimension ``dim``.

    Immutable; safe to share. ``gamma`` is the singularity exponent N + 2s
    and ``c`` the normalization constant.
    """

    dim: int
    s: float
    c: float = field(init=False)
    gamma: float = field(init=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"kernel dimension must be 1 or 2, got {self.dim}")
        if not 0.0 < self.s < 1.0:
            raise DomainError(f"fractional order must lie in (0, 1), got {self.s}")
        object.__setattr__(self, "c", fractional_constant(self.dim, self.s))
        object.__setattr__(self, "gamma", self.dim + 2.0 * self.s)

    def eval(self, r):
        """Kernel value at radius r > 0: (1/2) * c * r^(-N-2s)."""
        if r <= 0.0:
            raise DomainError("kernel is singular at r <= 0; use quadrature instead")
        return 0.5 * self.c * r ** (-self.gamma)

    def tail_integral(self, radius):
        """Exact integral of the kernel over the complement of a ball.

        For any center x, the integral of K(x - y) over |y - x| > radius
        equals c * |S^(N-1)| / (4 * s * radius^(2s)).
        """
        if radius <= 0.0:
            raise DomainError(f"ball radius must be positive, got {radius}")
        surf = _SPHERE_MEASURE[self.dim]
        return self.c * surf / (4.0 * self.s * radius ** (2.0 * self.s))
