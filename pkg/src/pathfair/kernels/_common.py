"""Constants and input encoding shared by both kernel backends.

Hash input for one hub-member draw is a single SHA-256 block (52 bytes):

    seed r (32 bytes) | block b (u64 BE) | path_id (u32 BE) | hub j (u32 BE) | slot (u32 BE)

Every field has a fixed width, so the encoding is unambiguous without length
prefixes. The digest is read as a big-endian 256-bit integer and reduced mod n.
"""

import numpy as np

MASK32 = 0xFFFFFFFF
# Slot base used when member index 0 has to be re-derived (0 * a == 0).
ZERO_SLOT_SALT = 0x9E3779B9
MAX_ATTEMPTS = 1 << 20
MESSAGE_BITS = 52 * 8

K256 = np.array([
    0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B, 0x59F111F1, 0x923F82A4, 0xAB1C5ED5,
    0xD807AA98, 0x12835B01, 0x243185BE, 0x550C7DC3, 0x72BE5D74, 0x80DEB1FE, 0x9BDC06A7, 0xC19BF174,
    0xE49B69C1, 0xEFBE4786, 0x0FC19DC6, 0x240CA1CC, 0x2DE92C6F, 0x4A7484AA, 0x5CB0A9DC, 0x76F988DA,
    0x983E5152, 0xA831C66D, 0xB00327C8, 0xBF597FC7, 0xC6E00BF3, 0xD5A79147, 0x06CA6351, 0x14292967,
    0x27B70A85, 0x2E1B2138, 0x4D2C6DFC, 0x53380D13, 0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85,
    0xA2BFE8A1, 0xA81A664B, 0xC24B8B70, 0xC76C51A3, 0xD192E819, 0xD6990624, 0xF40E3585, 0x106AA070,
    0x19A4C116, 0x1E376C08, 0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A, 0x5B9CCA4F, 0x682E6FF3,
    0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208, 0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7, 0xC67178F2,
], dtype=np.uint64)

H256 = np.array([
    0x6A09E667, 0xBB67AE85, 0x3C6EF372, 0xA54FF53A, 0x510E527F, 0x9B05688C, 0x1F83D9AB, 0x5BE0CD19,
], dtype=np.uint64)


def seed_words(seed: bytes) -> np.ndarray:
    """The 32-byte block seed as eight big-endian 32-bit words."""
    if len(seed) != 32:
        raise ValueError("block seed must be 32 bytes")
    return np.frombuffer(seed, dtype=">u4").astype(np.uint32)


def slot_value(member: int, attempt: int) -> int:
    """Member-index field for the given collision attempt: m, 2m, 3m, ..."""
    if attempt == 0:
        return member
    base = member if member > 0 else ZERO_SLOT_SALT
    return ((attempt + 1) * base) & MASK32
