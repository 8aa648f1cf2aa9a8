class JetvarError(Exception):
    """Base class for engine errors."""


class NotExact(JetvarError):
    """A density has a nonzero Euler-Lagrange expression, so it is not d_H-exact."""


class UnsupportedFragment(JetvarError):
    """The input lies outside the fragment an algorithm handles."""


class NotProjectable(JetvarError):
    """A generalized vector field has base components depending on fibre jets."""


class InternalInconsistency(JetvarError):
    """A self-verification failed; this indicates a bug, not bad input."""
