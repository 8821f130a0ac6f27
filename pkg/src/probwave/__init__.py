"""Non-localized probability-wave models for volume-price distributions.

Closed-form Bessel and Kummer eigenfunction families, shooting eigensolvers
for the non-localized and the V-potential Schrödinger equations, and a
least-squares pipeline that fits the families to binned trade volume.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .specfun import (  # noqa: F401
    EvalPolicy,
    airy,
    bessel_j0,
    bessel_j1,
    find_root,
    kummer_m,
    pochhammer,
)
from .wavemodel import (  # noqa: F401
    ConservationReport,
    EnergySpec,
    Family,
    Grid,
    PotentialSpec,
    WaveModel,
    eigen_energy_kummer,
    eval_model,
    interaction_diagnostic,
    model_derivatives,
    normalize_discrete,
    ode_residual,
)
from .eigensolve import (  # noqa: F401
    ComparisonTable,
    EigenSolution,
    SolverConfig,
    compare_spectra,
    shoot_nonlocal,
    solve_bessel_truncated,
    solve_spectrum_nonlocal,
    solve_spectrum_schrodinger,
)
from .dataio import (  # noqa: F401
    Distribution,
    TradeRecord,
    build_distribution,
    export_report,
    generate_synthetic,
    parse_trades,
)
from .fitkit import (  # noqa: F401
    FitOptions,
    FitResult,
    fit_model,
    goodness_of_fit,
    select_model,
)
