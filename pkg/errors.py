from typing import Any, Optional


class ToolkitError(Exception):
    """Erreur de base : porte un code de sortie, un détail et un témoin optionnel."""

    exit_code = 1

    def __init__(self, detail: str, witness: Optional[Any] = None):
        super().__init__(detail)
        self.detail = detail
        self.witness = witness

    def to_dict(self):
        return {
            "error": type(self).__name__,
            "detail": self.detail,
            "witness": self.witness,
        }


# === Complexes simpliciaux ===

class InvalidComplex(ToolkitError):
    pass


class NonPseudoManifold(ToolkitError):
    pass


class NotStronglyConnected(ToolkitError):
    pass


class NonOrientable(ToolkitError):
    pass


class IrregularColoring(ToolkitError):
    pass


class NotSimplicial(ToolkitError):
    pass


class InconsistentDegree(ToolkitError):
    pass


class DegenerateBase(ToolkitError):
    pass


# === Algèbre de Coxeter ===

class InvalidPoset(ToolkitError):
    pass


# === Petits revêtements ===

class RankDeficient(ToolkitError):
    pass


class InvalidCharacteristic(ToolkitError):
    pass


class ZeroDegreeInput(ToolkitError):
    pass


# === Réalisation ===

class UnbalancedStar(ToolkitError):
    pass


class InvalidPairing(ToolkitError):
    pass


class BudgetExhausted(ToolkitError):
    exit_code = 2

    def __init__(self, detail: str, atlas=None):
        super().__init__(detail, witness=None)
        self.atlas = atlas


# === Géométrie sphérique ===

class ZeroDirection(ToolkitError):
    pass


class ZeroNorm(ToolkitError):
    pass


class DiameterExceeded(ToolkitError):
    pass


class DegenerateSimplex(ToolkitError):
    pass


class BoundViolated(ToolkitError):
    pass


class NotFlag(ToolkitError):
    pass


class NonzeroDegreeFailed(ToolkitError):
    pass


class PreconditionFailed(ToolkitError):
    pass


# === Entrées / sorties ===

class ParseError(ToolkitError):
    exit_code = 3


class UsageError(ToolkitError):
    exit_code = 3


class InternalError(ToolkitError):
    """Un rapport n'a pas pu être construit ou sérialisé."""
