"""Exception types shared across the package."""


class YpqError(Exception):
    """Base class for all errors raised by this package."""


class InvalidLabel(YpqError):
    """Label pair (p, q) violates p >= 2, p < q < 2p, gcd(p, q) = 1."""


class NoRoot(YpqError):
    """Bisection bracket carries no sign change (internal bug)."""


class OutOfRange(YpqError):
    """Evaluation point outside the coordinate chart."""


class DegreeOrderError(YpqError):
    """Associated Legendre order exceeds the degree."""


class EigenFailure(YpqError):
    """Tridiagonal eigensolver did not converge."""


class QuadratureUnderflow(YpqError):
    """Quadrature weights degenerate for the requested rule."""


class NotConverged(YpqError):
    """Eigenvalues still moving under basis refinement."""


class BracketError(YpqError):
    """Shooting bracket carries no sign change of the matching determinant."""


class IndexChainError(YpqError):
    """Spherical-harmonic index chain s1 >= s2 >= |s3| violated."""


class GridMismatch(YpqError):
    """Sampled data does not match the quadrature grid descriptor."""


class SourceCoverage(YpqError):
    """Source samples do not cover the requested time window."""


class CacheCorrupt(YpqError):
    """Cache entry failed its checksum (recovered by re-solving)."""


class ConfigError(YpqError):
    """Run configuration file is malformed; message carries the line number."""
