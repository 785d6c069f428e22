"""Exception types shared across the package."""


class TandemPollError(Exception):
    """Base class for all package errors."""


class NonPositiveRate(TandemPollError):
    """An arrival or service rate is zero, negative, or non-finite."""


class UnstableSystem(TandemPollError):
    """Total traffic intensity at some station is >= 1."""


class UnstableQueue(TandemPollError):
    """A single queue has arrival rate >= service rate where stability is required."""


class InvalidSupport(TandemPollError):
    """An argument lies outside the support a formula is derived for."""


class SeriesOverflow(TandemPollError):
    """A series evaluation could not be completed even in the log domain."""


class QuadratureFailure(TandemPollError):
    """Adaptive quadrature could not reach the requested tolerance."""


class SingularSystem(TandemPollError):
    """A linear system arising from an absorbing chain could not be solved."""


class TruncationTooTight(TandemPollError):
    """Probability mass escaping the truncated state space exceeds the tolerance."""


class ThresholdUnreached(TandemPollError):
    """Sub-scenario expansion hit the depth limit before the residual dropped below eps."""


class NonTermination(TandemPollError):
    """The deterministic timeline failed to reach the tagged departure within the event budget."""
