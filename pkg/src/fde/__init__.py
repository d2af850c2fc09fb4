"""Singular self-similar solutions of the fast diffusion equation on the punctured space.

Subpackages by concern: `params` (regime + derived constants), `profile`
(singular ODE pipeline and evaluators), `asymptotics` (closed-form blow-up
expansions and residual checks), `evolution` (implicit radial PDE solver on
annuli), `measures` (weighted L1 norms, contraction and convergence
reports), `cli` (the `fde` command).
"""

from .params import DerivedConstants, ModelParams, RegimeReport, derive_constants, validate_regime

__all__ = [
    "DerivedConstants",
    "ModelParams",
    "RegimeReport",
    "derive_constants",
    "validate_regime",
]

__version__ = "0.1.0"
