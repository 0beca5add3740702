"""Encoding of probability distributions for ANS entropy coders.

Quantization of distributions to integer compositions with power
deformation, compact header coding of those compositions, tANS symbol
spreads (fast and tuned) and exact evaluation of the automaton's rate.
"""

from .automaton_analysis import (AutomatonModel, StationaryError, automaton_delta_h,
                                 bits_table, build_model, mean_bits_per_symbol, stationary)
from .header_codec import (CompositionModel, HeaderDecodeError, conditional_probability,
                           count_compositions, enum_decode, enum_encode, header_cost_bits,
                           stream_decode_header, stream_encode_header)
from .probmodel import (PenaltyReport, as_probabilities, entropy, kl_divergence, kl_quadratic,
                        mdl_penalty, random_simplex, unused_marking_cost,
                        unused_marking_estimate, zero_symbol_penalty)
from .quantizer import PLAIN, DeformParams, quantization_loss, quantize, reconstruct
from .tans import (SPREAD_KINDS, Bitstream, SpreadTable, TansCoder, TansError, build_coder,
                   decode, encode, make_spread, spread_fast, spread_tuned_bucketed,
                   spread_tuned_iterated, spread_tuned_sorted)

__version__ = "0.1.0"
