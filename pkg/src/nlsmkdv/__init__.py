"""Periodic spectral theory of the Zakharov-Shabat and Hill operators, numerically."""

from .potentials import (
    GridFunction,
    Potential,
    derivative,
    diagonal,
    integrate,
    make_trig,
    mean,
    miura,
    multiply,
    random_trig,
    transform,
)
from .transfer import hill_fundamental, hill_monodromy, zs_fundamental, zs_monodromy
from .discriminant import (
    conjugation_residual,
    hill_delta,
    xi_identity_residual,
    zs_delta,
    zs_gradient,
)
from .spectrum import SpectrumError, hill_spectrum, isolating_discs, zs_spectrum
from .abelian import (
    SpectralCurve,
    action_I,
    action_J,
    asymptotic_hamiltonians,
    canonical_root,
    F_mkdv_value,
    F_value,
    mean_identity_residual,
)
from .hierarchy import (
    HamiltonianId,
    eval_hamiltonian,
    gardner_bracket,
    gradient,
    identity_residuals,
    nls_bracket,
    vector_field,
)
from .flows import (
    FlowSpec,
    conservation_report,
    evolve,
    isospectrality_probe,
    restriction_check,
)

__version__ = "0.1.0"
