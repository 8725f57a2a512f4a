from enum import Enum

from src.utils.extended_enum import ExtendedEnumMixin


class Scenario(ExtendedEnumMixin, Enum):
    """Named experiments runnable from the command line"""
    SIMULATE = "simulate"
    STEADY = "steady"
    STEFAN_ORACLE = "stefan-oracle"
    ENTROPY = "entropy"
    PERIODICITY_SCAN = "periodicity-scan"
    PARTICLE_COMPARE = "particle-compare"
    SUPERSOLUTION_CHECK = "supersolution-check"


class ExitCode(ExtendedEnumMixin, Enum):
    SUCCESS = 0
    VALIDATION = 2
    NUMERIC = 3
    BLOW_UP = 4


class NormalizationTarget(ExtendedEnumMixin, Enum):
    """Which parameters an affine voltage map sends to their canonical values"""
    THRESHOLD = "threshold"            # a = 1, V_F = 0
    ZERO_STIMULUS = "zero_stimulus"    # a = 1, b0 = 0


class InitialFamily(ExtendedEnumMixin, Enum):
    GAUSSIAN = "gaussian"
    STEADY_STATE = "steady-state"
    TABLE = "table"


class HistoryFamily(ExtendedEnumMixin, Enum):
    CONSTANT = "constant"
    TABLE = "table"


class MapDirection(ExtendedEnumMixin, Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


class Region(ExtendedEnumMixin, Enum):
    """Voltage regions used by the super-solution check"""
    BELOW_RESET = "below_reset"
    MIDDLE = "middle"
    RIGHT = "right"


class Monotonicity(ExtendedEnumMixin, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    CONSTANT = "constant"
    NONE = "none"


class SignSide(ExtendedEnumMixin, Enum):
    """Sign of one side of the averaged first-moment identity"""
    NEGATIVE = "negative"
    ZERO = "zero"
    POSITIVE = "positive"


class TableName(ExtendedEnumMixin, Enum):
    """CSV artifacts written by the scenarios"""
    SERIES = "series"
    SNAPSHOTS = "snapshots"
    STEADY_PROFILES = "steady_profiles"
    STEADY_ROOTS = "steady_roots"
    STEFAN = "stefan"
    STEFAN_FIELD = "stefan_field"
    ENTROPY = "entropy"
    PERIOD_SCAN = "period_scan"
    PARTICLE_RATE = "particle_rate"
    PARTICLE_HISTOGRAM = "particle_histogram"
    SPIKES = "spikes"
    SUPERSOLUTION = "supersolution"


class SummaryKey(ExtendedEnumMixin, Enum):
    """Stable keys of summary.txt"""
    SCENARIO = "scenario"
    EXIT_CODE = "exit_code"
    SEED = "seed"
    N_CELLS = "n_cells"
    DT = "dt"
    T_FINAL = "t_final"
    MASS_DRIFT = "mass_drift"
    MASS_RESIDUAL = "mass_residual"
    N_MAX = "n_max"
    N_FINAL = "n_final"
    N_INF = "N_inf"
    N_INF_DISCRETE = "N_inf_discrete"
    N_ROOTS = "n_roots"
    BLOW_UP = "blow_up"
    BLOW_UP_TIME = "blow_up_time"
    BLOW_UP_REFINED_TIME = "blow_up_refined_time"
    BLOW_UP_EXTRAPOLATED_TIME = "blow_up_extrapolated_time"
    BLOW_UP_CONSISTENT = "blow_up_consistent"
    BLOW_UP_UNCONFIRMED = "blow_up_unconfirmed"
    CLAMPED_STENCILS = "clamped_stencils"
    MOMENT_RESIDUAL_MAX = "moment_residual_max"
    STEADY_L1_DISTANCE = "steady_l1_distance"
    MU_FIT = "mu_fit"
    MU_FIT_R2 = "mu_fit_r2"
    MU_FIT_STDERR = "mu_fit_stderr"
    ENTROPY_IDENTITY_RESIDUAL = "entropy_identity_residual"
    ENTROPY_MAX_DEDT = "entropy_max_dEdt"
    ENTROPY_SIGN_OK = "entropy_sign_ok"
    C0_HYPOTHESIS_OK = "c0_hypothesis_ok"
    C0_RATIO = "c0_ratio"
    POINCARE_GAMMA = "poincare_gamma"
    POINCARE_GAMMA_REFINED = "poincare_gamma_refined"
    POINCARE_RELATIVE_GAP = "poincare_relative_gap"
    L2_BUDGET_INTEGRAL = "l2_budget_integral"
    L2_BUDGET_C_FIT = "l2_budget_c_fit"
    WEIGHTED_L2_INITIAL = "weighted_l2_initial"
    STEFAN_SIGMA = "stefan_sigma"
    STEFAN_ITERATIONS = "stefan_iterations"
    STEFAN_M_REL_ERROR = "stefan_M_rel_error"
    STEFAN_L1_ERROR = "stefan_rho_l1_error"
    STEFAN_PHI1 = "stefan_phi1"
    STEFAN_PHI1_BOUND = "stefan_phi1_bound"
    STEFAN_BOUNDARY = "stefan_boundary_monotonicity"
    PERIOD_MIN_RESIDUAL = "period_min_residual"
    PERIOD_TOLERANCE = "period_tolerance"
    PERIOD_FOUND = "period_found"
    PERIOD_LHS_SIGN = "period_lhs_sign"
    PERIOD_RHS_SIGN = "period_rhs_sign"
    PERIOD_CONTRADICTION = "period_contradiction"
    PARTICLE_L1_DISTANCE = "particle_l1_distance"
    PARTICLE_NOISE_LEVEL = "particle_noise_level"
    PARTICLE_RATE_MEAN = "particle_rate_mean"
    PARTICLE_RATE_STDERR = "particle_rate_stderr"
    PARTICLE_MAX_CASCADE = "particle_max_cascade"
    SUPERSOLUTION_XI = "supersolution_xi"
    SUPERSOLUTION_DELTA = "supersolution_delta"
    SUPERSOLUTION_B = "supersolution_B"
    SUPERSOLUTION_PASSED = "supersolution_passed"
    SUPERSOLUTION_MIN_RESIDUAL = "supersolution_min_residual"
    ENVELOPE_ALPHA = "envelope_alpha"
    ENVELOPE_OK = "envelope_ok"
