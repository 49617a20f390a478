"""Constants"""

MAXVOL_DELTA = 0.01
MAXVOL_MAX_ITERS = 100
# pivots below this fraction of the largest one count as numerically zero
RANK_TOLERANCE = 1e-12
FULL_TENSOR_CAP = 10**7
EXHAUSTIVE_OPTIMUM_CAP = 10**6
EXP_SHIFT_BETA = 1.0


class ExitCode:
    """Process exit codes of the command line interface."""

    OK = 0
    FAILURE = 1
    USAGE = 2
    INPUT = 3
    PLAN = 4


class Container:
    """Constants of the TAML binary container."""

    MAGIC = b"TAML"
    VERSION = 1
    ALIGNMENT = 8


class Reference:
    """Published reference values. They need the real NATS table or a full ResNet-18
    training run and are documentation only."""

    TT_OPT_ACCURACY = 93.7
    BAYESIAN_ACCURACY = 93.5
    RANDOM_SEARCH_ACCURACY = 92.8
    COMPRESSION_MODERATE = 4.5
    COMPRESSION_STRONG = 14.5
    ACCURACY_LOSS_AT_STRONG = 3.2
    NATS_TOPOLOGY_SIZE = 15_625


NATS_OPERATIONS = (
    "none",
    "skip_connect",
    "nor_conv_1x1",
    "nor_conv_3x3",
    "avg_pool_3x3",
)
NATS_EDGES = 6

TRACE_CSV_COLUMNS = ("algo", "seed", "eval_ordinal", "value", "best_so_far")
