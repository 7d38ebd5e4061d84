"""Mod-Poisson convergence for Dirichlet series distributions on arithmetic
semigroups: domains, prime sums, residue functions, deviation estimates,
exact laws and samplers."""

__version__ = "0.1.0"

from .analytics import (
    DeviationEstimate,
    ResidueEval,
    berry_esseen_bound,
    ld_estimate,
    legendre_fenchel_poisson,
    moderate_estimate,
    poisson_pmf_tail,
    residue_Omega,
    residue_omega,
)
from .domains import (
    FactoredElement,
    IrreducibleInfo,
    SemigroupDescriptor,
    count_irreducibles,
    factor_element,
    get_domain,
    irreducible_count_by_degree,
    list_irreducibles,
)
from .errors import (
    DecodeError,
    DivergenceError,
    DomainError,
    InvalidArgument,
    ModPoissonError,
    NumericError,
    ResourceError,
    SingularityError,
    StripViolation,
    UnsupportedStatistic,
)
from .montecarlo import EmpiricalLaw, SamplerConfig, compare_laws, empirical_law, sample_element
from .oracle import LatticePmf, fourier_point, fourier_tail, pmf_Omega_exact, pmf_omega_exact
from .series import (
    LocalFactor,
    ModPoissonParams,
    TruncatedSum,
    alpha_p,
    global_series,
    local_factor,
    mod_poisson_params,
    power_sum,
    prime_power_sum,
)
