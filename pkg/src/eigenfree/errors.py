"""Typed errors shared across the package."""


class EigenfreeError(Exception):
    """Base class for all package errors."""


class DuplicateEigenvalue(EigenfreeError):
    """Two enumeration indices carry the same eigenvalue."""

    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"eigenvalues at indices {i} and {j} coincide")


class OnGridLine(EigenfreeError):
    """Point sits on a dyadic grid line of the requested stage."""

    def __init__(self, z: complex, stage: int):
        self.z, self.stage = z, stage
        super().__init__(f"{z} lies on a stage-{stage} grid line")


class POutOfRange(EigenfreeError):
    """Block half-width exceeds the room available around the point."""

    def __init__(self, p: int, p_max: int):
        self.p, self.p_max = p, p_max
        super().__init__(f"p={p} exceeds p_max={p_max}")


class PickExhausted(EigenfreeError):
    """No unused enumerated eigenvalue lies in the target region."""

    def __init__(self, stage: int, target: str):
        self.stage, self.target = stage, target
        super().__init__(
            f"stage {stage}: no fresh eigenvalue found in {target}; "
            "increase the horizon")


class HitsEigenvalue(EigenfreeError):
    """Query point coincides with an enumerated eigenvalue."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"z equals eigenvalue {index}; the sum is singular")


class OutsideSpectrum(EigenfreeError):
    """Diagnostic requested at a point outside the spectrum model."""

    def __init__(self, z: complex):
        self.z = z
        super().__init__(f"{z} lies outside the spectrum")


class SearchFailed(EigenfreeError):
    """No admissible interpolation node found within the probe budget."""

    def __init__(self, k: int, detail: str = ""):
        self.k = k
        super().__init__(f"node search failed at k={k}" +
                         (f": {detail}" if detail else ""))


class DegenerateLambda(EigenfreeError):
    """Coefficient formulas need pairwise distinct eigenvalues."""

    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"eigenvalues {i} and {j} coincide")


class PoleHit(EigenfreeError):
    """Evaluation point equals one of the poles."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"z equals pole {index}")


class GammaMismatch(EigenfreeError):
    """A coefficient exceeds its budget delta * |u_i|^2."""

    def __init__(self, index: int, abs_c: float, budget: float):
        self.index, self.abs_c, self.budget = index, abs_c, budget
        super().__init__(
            f"|c_{index}| = {abs_c:.3e} exceeds budget {budget:.3e}")


class ZeroUEntry(EigenfreeError):
    """The avoidance vector has a vanishing coordinate."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"u has a zero entry at index {index}")


class SolverFailure(EigenfreeError):
    """The dense eigenvalue solver did not converge."""


class SchemaMismatch(EigenfreeError):
    """Artifact file does not match the expected schema."""


class ConfigError(EigenfreeError):
    """Invalid run configuration."""
