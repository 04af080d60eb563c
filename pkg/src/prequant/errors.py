"""Exception hierarchy shared by the library and the CLI."""


class PrequantError(Exception):
    """Base class for all library errors."""


class CatalogError(PrequantError):
    """Unknown or unsupported catalog id (group, manifold, action, moment map)."""


class ScenarioParseError(PrequantError):
    """Malformed scenario file or fragment."""


class NumericalError(PrequantError):
    """A numerical procedure failed to meet its stated accuracy."""


class QuadratureError(NumericalError):
    def __init__(self, coarse: float, fine: float, tol: float):
        self.coarse = coarse
        self.fine = fine
        super().__init__(
            f"quadrature did not converge: I_N={coarse!r}, I_2N={fine!r}, tol={tol:g}"
        )


class NoHolonomyRouteError(PrequantError):
    """No way to evaluate the holonomy of a loop with the available data."""


class LoopError(PrequantError):
    """A loop fails closure, cap-boundary or homology-rounding checks."""


class InconsistentScenarioError(NumericalError):
    """Quantities that must agree (base points, routes) disagree."""


class MomentMapError(PrequantError):
    """The declared moment map fails compatibility or equivariance."""


class NotIntegralError(PrequantError):
    """A connection was requested for a form with non-integral fluxes."""
