"""Random walks on primitive lattice points: gcd-normalized steps, seeded
Monte Carlo for stationary measures, return times and drift, and an exact
rational transition-operator oracle."""

from fractions import Fraction

from ._primwalk import *  # noqa: F401,F403
from ._primwalk import Rational, __version__  # noqa: F401


def to_fraction(r: Rational) -> Fraction:
    """Exact value of a Rational result as a fractions.Fraction."""
    return Fraction(int(r.num_str()), int(r.den_str()))
