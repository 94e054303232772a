"""igk: information-geometric Kähler structures.

Exponential families carry a dually flat geometry (Fisher metric plus a
one-parameter pencil of flat affine connections); their tangent bundles carry
an almost-Kähler structure; and a lift into complex projective space turns
statistical observables into quantum-style spectral data.  This package
implements that pipeline end to end with verifiable numerics: finite
families, Gaussians, the spin (binomial) model, and the harmonic-oscillator
(Gaussian location) model, together with a deterministic verification CLI.
"""

from .errors import (
    DomainError,
    NotKahlerError,
    NumericalError,
    SpecFileError,
    UndefinedProjectionError,
)
from .families import (
    BUILTIN_FAMILIES,
    Box,
    ExpectationPoint,
    ExponentialFamilySpec,
    FiniteSpace,
    NaturalPoint,
    RealLine,
    family,
)
from .specfile import family_from_dict, load_family

__version__ = "0.1.0"
