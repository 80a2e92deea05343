"""Exception and warning types raised across the package."""


class DomainError(ValueError):
    """Evaluation requested at or across the singular point x = 0."""


class AdmissibilityError(ValueError):
    """Quantum configuration violates the bound-state condition a^2 + eps >= 1/4."""


class AmplitudeDomainError(ValueError):
    """Closed-form orbit requested with |E / (a omega)| <= 1."""


class IntegrationError(RuntimeError):
    """Base class for classical solver failures."""


class StepSizeUnderflow(IntegrationError):
    pass


class SingularWallHit(IntegrationError):
    pass


class InsufficientSpan(IntegrationError):
    """Trajectory does not contain enough complete oscillations."""


class DegenerateAmplitude(InsufficientSpan):
    """Orbit energy is too close to the fixed-point energy to resolve a period."""


class NonConvergence(RuntimeError):
    pass


class QuadratureFailure(RuntimeError):
    pass


class GridTooCoarse(RuntimeError):
    pass


class SingularEndpointWarning(UserWarning):
    """Boundary case a^2 + eps = 1/4: Dirichlet condition at the origin is not enforced by
    the equation itself, so numerical results carry reduced confidence."""
