"""Exception types shared across the laboratory."""


class KamlabError(Exception):
    """Base class for all kamlab errors."""


class PrecisionExhausted(KamlabError):
    """A quantity fell below the resolution of the working precision."""


class TooFewConvergents(KamlabError):
    """A continued fraction does not carry enough convergents."""


class GrowthOverflow(KamlabError):
    """An exact-growth step would exceed the configured digit budget.

    Carries ``feasible_steps``, the number of steps that were completed.
    """

    def __init__(self, msg, feasible_steps=0):
        super().__init__(msg)
        self.feasible_steps = feasible_steps


class NoWitness(KamlabError):
    """No coprime witness exists in the prescribed window (internal inconsistency)."""


class CapExceeded(KamlabError):
    """A brute-force enumeration exceeds its configured cap.

    Carries ``largest_feasible``, the largest index that can still be verified.
    """

    def __init__(self, msg, largest_feasible=None):
        super().__init__(msg)
        self.largest_feasible = largest_feasible


class DivisorUnderflow(KamlabError):
    """A cohomological divisor is numerically indistinguishable from zero.

    Carries ``mode``, the offending lattice point.
    """

    def __init__(self, msg, mode=None):
        super().__init__(msg)
        self.mode = mode


class IllConditioned(KamlabError):
    """A per-layer linear system exceeds the condition-number guard."""

    def __init__(self, msg, layer=None, cond=None):
        super().__init__(msg)
        self.layer = layer
        self.cond = cond


class HypothesisViolated(KamlabError):
    """Input fails a validated hypothesis of the operation."""


class NotSl2(KamlabError):
    """Matrix-valued series has a nonzero trace component."""


class LogDomain(KamlabError):
    """Matrix (or matrix series) is too far from the identity for a principal log."""


class NotHomotopicToIdentity(KamlabError):
    """Winding-number check along a torus generator is nonzero."""


class DegenerateB(KamlabError):
    """Winding estimate of a conjugation is not close to an integer vector."""


class DiophantineLost(KamlabError):
    """The rotation number left the Diophantine class mid-run."""


class NormBudgetExceeded(KamlabError):
    """A theory-mode norm inequality failed.

    Carries ``inequality``, a short description of the failed bound.
    """

    def __init__(self, msg, inequality=None):
        super().__init__(msg)
        self.inequality = inequality


class NoConvergence(KamlabError):
    """A fixed-point iteration stagnated; carries the last residual."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class NonConvergence(KamlabError):
    """A KAM run failed to contract for several consecutive steps."""


class ConfigError(KamlabError):
    """A run configuration failed to parse or validate.

    Carries ``key``, the offending config key when known.
    """

    def __init__(self, msg, key=None):
        super().__init__(msg)
        self.key = key
