"""SIC-free multi-antenna coded-caching delivery: coefficient matrices, beamformers and rates."""

from .beamforming import BeamformerSet, ScaOptions, ScaTrace, sca_optimize, taylor_lower_bound, zf_beamformers
from .channel import (
    ChannelRealization,
    UserOrdering,
    draw_channel,
    priority_from_order,
    successive_projection_order,
)
from .coefficients import (
    CoefficientMatrix,
    DecodabilityReport,
    equal_distance_generate,
    generate,
    interference_submatrix,
    noise_amplification,
    random_generate,
    read_matrix_csv,
    sparse_generate,
    user_submatrix,
    validate_decodability,
    write_matrix_csv,
)
from .combinatorics import (
    GroupIndex,
    SystemParams,
    enumerate_multicast_groups,
    enumerate_serving_sets,
    user_group_partition,
)
from .errors import *  # noqa: F401,F403
from .harness import SweepConfig, SweepResult, emit_csv, load_config, run_sweep
from .rates import (
    RateReport,
    decode_oracle,
    interval_rate_report,
    no_cc_baseline_rate,
    oracle_sinr_via_elimination,
    sic_zf_baseline_rate,
    stream_sinr,
)

__version__ = "0.1.0"
