"""Lab-wide constants

Single source of truth for numerical defaults and environment variable names.
Dataclass configs take their defaults from here.
"""


class EnvSettings:
    """Environment variables read by LabSettings"""
    THREADS_ENV: str = "NNLIF_THREADS"
    LOG_LEVEL_ENV: str = "NNLIF_LOG_LEVEL"
    MEMORY_BUDGET_ENV: str = "NNLIF_MEMORY_BUDGET_MB"
    DEFAULT_THREADS: int = 1
    DEFAULT_LOG_LEVEL: str = "INFO"
    DEFAULT_MEMORY_BUDGET_MB: int = 512


class GridDefaults:
    """Truncated voltage grid.

    The left boundary sits TRUNCATION_SIGMAS diffusion lengths below the
    threshold, widened by the largest expected drift shift |b|·N_GUESS.
    """
    N_CELLS: int = 1000
    MIN_CELLS: int = 4
    TRUNCATION_SIGMAS: float = 12.0
    N_GUESS: float = 1.0


class SolverDefaults:
    """Time stepping of the delayed Fokker-Planck equation"""
    DT: float = 1e-3
    T_FINAL: float = 1.0
    BLOW_UP_THRESHOLD: float = 1e3
    CFL_SAFETY: float = 0.5
    NEGATIVE_TOLERANCE: float = 1e-12
    STENCIL_TOLERANCE: float = 1e-8
    CONSISTENCY_RTOL: float = 1e-2
    SNAPSHOT_EVERY: float = 0.1
    CHECKPOINT_EVERY: float = 0.05
    REFINEMENT_CONSISTENCY: float = 0.1
    EXTRAPOLATION_POINTS: int = 20
    MASS_TOLERANCE: float = 1e-6


class SteadyStateDefaults:
    N_LO: float = 1e-3
    N_HI: float = 50.0
    N_SCAN: int = 200
    ROOT_RTOL: float = 1e-10
    QUADRATURE_RTOL: float = 1e-12
    MAX_LEVELS: int = 24


class SuperSolutionDefaults:
    XI_MARGIN: float = 0.1
    TOLERANCE: float = 1e-8
    INF_FLOOR: float = 1e-12


class StefanDefaults:
    TAU_STEP: float = 2e-3
    TOLERANCE: float = 1e-10
    MAX_ITER: int = 200
    SIGMA_MIN: float = 1e-8
    SEAM_RTOL: float = 5e-2


class DiagnosticsDefaults:
    TAIL_FRACTION: float = 0.5
    RHO_FLOOR: float = 1e-280
    C0_LIMIT: float = 1e8
    PERIOD_MIN: float = 0.5
    PERIOD_MAX: float = 10.0
    PERIOD_COUNT: int = 96
    BUDGET_WINDOW_COUNT: int = 16
    IDENTITY_RTOL: float = 5e-3
    ENTROPY_FLOOR: float = 1e-20
    RELAX_TOL: float = 1e-12
    RELAX_MAX_TIME: float = 200.0
    RELAX_CHECK_EVERY: int = 200


class ParticleDefaults:
    N_NEURONS: int = 10_000
    MIN_NEURONS: int = 1_000
    BANDWIDTH_STEPS: int = 10
    BYTES_PER_NEURON: int = 8


class OutputFormat:
    """Bit-stable artifact formatting"""
    SIGNIFICANT_DIGITS: int = 17
    LINE_TERMINATOR: str = "\n"
    SUMMARY_FILE: str = "summary.txt"
    CONFIG_FILE: str = "config.json"
    CSV_SUFFIX: str = ".csv"
