"""SVD-based MIMO precoding, low-complexity ML decoding, and Monte Carlo experiments."""

__version__ = "0.1.0"

from .channel import (
    ChannelDecomposition,
    ChannelRealization,
    SubchannelPair,
    decompose,
    sample_rayleigh,
    subchannel_pairs,
    trial_rng,
)
from .constellation import (
    QamConstellation,
    compose_superposed,
    decompose_superposed,
    difference_pairs,
    make_qam,
)
from .optimizer import (
    PrecoderProfile,
    PrecoderSegment,
    SearchGrid,
    build_profile,
    eval_profile,
    grid_search,
    load_profile,
    pair_distance_sq,
    profile_delta,
    save_profile,
    shaping_matrix,
    solve_pair_weight,
    solve_rotation_angle,
    solve_segment_boundary,
)
from .baselines import (
    LatticeGenerator,
    PairMatrix,
    XLookup,
    build_x_lookup,
    edmin_delta,
    edmin_pair,
    lattice_precoder,
    x_pair,
    y_effective,
)
from .system import (
    AssembledPrecoder,
    PairMeta,
    assemble,
    pair_delta_curve,
    power_control,
    union_bound,
    zeta,
)
from .decoder import (
    DecodeResult,
    ReceivedWord,
    decode_oracle,
    decode_pair_fast,
    decode_scalar_case,
    decode_word,
    quantize_pam,
)
from .simulator import (
    SimConfig,
    SimContext,
    WepPoint,
    estimate_slope,
    prepare_context,
    run_nosearch,
    run_wep,
    run_zeta_stats,
)
