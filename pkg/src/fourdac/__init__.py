"""4D amplitude-coded modulation toolkit.

Shaped 4D constellations generated by small logic circuits on top of two
conventional 16QAM mappers, uniform baselines, an AWGN link with exact
bitwise soft demapping, Monte Carlo GMI estimation, and an LDPC-coded BICM
chain, all behind a reproducible sweep CLI.
"""

from .alphabets import AmplitudeSpec, ask4_map, brgc_labels, qam16_map
from .channel import ChannelConfig, snr_to_sigma2, transmit
from .circuits import (MapperWord, decode6, decode7, encode6, encode7,
                       map_symbol6, map_symbol7)
from .constellations import (Constellation4D, Marginal1D, auto_amplitudes,
                             build_6b4dac, build_7b4dac, build_pm8qam,
                             build_pm16qam, build_sp128_16qam,
                             default_amplitudes, energy_levels, marginal_1d,
                             min_squared_distance, normalize)
from .demapper import (LlrFrame, demap_frame, exact_llr, exact_llrs,
                       hard_decide, hard_decisions, maxlog_llr, maxlog_llrs)
from .metrics import GmiEstimate, ber_count, gmi_mc, mi_mc, required_snr

__version__ = "0.1.0"
