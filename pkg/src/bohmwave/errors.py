"""Exception types shared across the package."""


class BohmwaveError(Exception):
    """Base class for all package errors."""


class NearNode(BohmwaveError):
    """Velocity/quantum-potential evaluation requested where the density is
    below the node guard (destructive-interference node)."""


class ParallelCentroids(BohmwaveError):
    """The two packet centroids never meet (equal velocities)."""


class OverlapTooLarge(BohmwaveError):
    """Initial packet overlap too large for per-packet sampling."""


class NodeEncounter(BohmwaveError):
    """Trajectory integration hit a density node and step reduction did not
    resolve it."""


class StepFailure(BohmwaveError):
    """Adaptive integrator failed to meet its tolerances."""


class EnsembleError(BohmwaveError):
    """One or more trajectories of an ensemble failed to integrate.

    Carries (index, exception) pairs in .failures.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        detail = "; ".join(f"trajectory {i}: {exc}" for i, exc in self.failures)
        super().__init__(f"{len(self.failures)} trajectories failed: {detail}")


class WindowTooShort(BohmwaveError):
    """Slope-fit window contains fewer than the minimum number of samples."""


class NonpositiveMomentum(BohmwaveError):
    """Wall/well construction needs p > 0."""


class PacketTouchesBoundary(BohmwaveError):
    """Initial packet amplitude is not negligible at the grid boundary."""


class SolverSingular(BohmwaveError):
    """Banded solve failed; the grid state is corrupted."""


class OutOfDomain(BohmwaveError):
    """A grid-driven trajectory left the usable part of the grid."""


class PreconditionError(BohmwaveError):
    """A strict-mode formula precondition is violated."""


class ParseError(BohmwaveError):
    """Scenario document is not well-formed."""


class ValidationError(BohmwaveError):
    """Scenario document is well-formed but semantically invalid."""


class IncompatibleSampling(BohmwaveError):
    """Two run bundles cannot be compared on a common grid/time set."""
