"""CRC-augmented polar codes: CRC-aided BP list decoding combined with
ordered-statistics reprocessing, plus a Monte-Carlo FER harness."""

from .bp import BpState, CbpResult, boxplus, bp_iteration, cbp_decode
from .channel import DEFAULT_SAT, ChannelParams, awgn, bpsk, channel_llrs
from .codes import CodeSpec, build_code_spec, encode_frame
from .crc import CrcSpec, crc_check, crc_encode
from .gf2 import (BitMatrix, SystematicForm, encode_row, multiply,
                  systematize_by_reliability)
from .oracle import TinyCode, exhaustive_osd, ml_decode
from .osd import Candidate, OsdContext, build_context, decode_osd
from .pipeline import (DecoderConfig, decode_cbpl, decode_cbplosd,
                       decode_plain_osd, decode_suite)
from .polar import (PolarParams, bit_index_permutation, kron_generator,
                    layer_permutations, polar_encode, polar_transform,
                    select_info_set)
from .simharness import FerPoint, SimConfig, emit_csv, run_fer, wilson_interval

__version__ = "0.1.0"
