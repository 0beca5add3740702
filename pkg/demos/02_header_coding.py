"""
Storing the counts in a header
==============================

The counts ``Q`` must travel with the compressed data. There are
``C(K+D-1, D-1)`` possible count vectors, so an optimal header spends
``lg C(K+D-1, D-1)`` bits. Two codecs are shown: an exact enumerative rank
(the bit-optimal reference) and a streaming coder that gets close to it
with fixed-width arithmetic.
"""
# %%
import math

from ansprob import (count_compositions, enum_decode, enum_encode, header_cost_bits, quantize,
                     random_simplex, stream_decode_header, stream_encode_header)
from ansprob.header_codec import payload_bits

D, K = 256, 2048
exact, estimate = header_cost_bits(D, K)
print(f"D={D} K={K}: exact {exact:.1f} bits, entropy estimate {estimate:.1f} bits")

# %%
# Enumerative coding ranks Q among all compositions of K into D parts.
Q = quantize(random_simplex(D, 1), K)
index = enum_encode(Q)
assert (enum_decode(index, D, K) == Q).all()
print("rank needs", index.bit_length(), "bits; ceiling is",
      math.ceil(math.log2(count_compositions(D, K))))

# %%
# The streaming coder feeds each count through a small range coder whose
# model is the fraction of compositions still reachable.
header = stream_encode_header(Q)
print("stream header:", len(header), "bytes,", payload_bits(header), "payload bits")
assert (stream_decode_header(header) == Q).all()

# %%
# Truncating or flipping bits is detected on decode.
try:
    stream_decode_header(header[:-3])
except ValueError as err:
    print("truncated header rejected:", err)
