"""Plus-space eigenform construction, von Mangoldt / Vaughan sieve machinery,
sign-change experiments over almost primes, and twisted central L-values."""

__version__ = "0.1.0"

from .errors import (
    CertificationError,
    KohnenError,
    PrecisionError,
    UndefinedFitError,
    ValidationError,
)
from .qseries import (
    EtaSpec,
    QSeries,
    discriminant_series,
    eisenstein_F,
    eta_product,
    series_mul,
    series_pow,
    theta_series,
)
from .forms import (
    HalfIntegralForm,
    ShimuraLiftOracle,
    build_plus_cusp_form,
    certify,
    eigenvalue_check,
    hecke_Tp2,
    load_form,
    monomial_basis,
    normalized_coeff,
    save_form,
)
from .sieve import (
    FactorSieve,
    LambdaValue,
    VaughanParams,
    VaughanTerms,
    almost_primes,
    arithmetic_functions,
    build_factor_sieve,
    dyadic_decomposition,
    lambda_r_exact,
    lambda_r_table,
    vaughan_terms,
    vaughan_two_term,
)
from .experiments import (
    ExponentFit,
    SignChangeReport,
    SumSample,
    exponent_fit,
    partial_sum_series,
    prime_sign_changes,
    ramanujan_growth,
    second_moment,
    sign_change_count,
    smoothed_P,
)
from .lcentral import (
    CentralValue,
    TwistedLSpec,
    central_value,
    kronecker_chi,
    siegel_probe,
    waldspurger_ratio_scan,
)
