"""Compressor adapters used as K proxies.

Every proxy value is an honest code length: a real, decodable payload plus
a self-delimiting length header (``encode_nat(len(payload) + 1)``).
"""

from __future__ import annotations

import bz2
import lzma
import math
import os
import subprocess
import zlib

from .bitcode import BitString, gamma_length, to_bytes

ENV_COMPRESSOR = "NAQKIT_COMPRESSOR_PATH"
LZ78_VERSION = "lz78-bits-1"


class CompressorError(RuntimeError):
    def __init__(self, message: str, returncode: int | None = None, stderr: bytes = b""):
        super().__init__(message)
        self.returncode = returncode
        self.stderr = stderr


def _index_width(phrase_no: int) -> int:
    # the i-th phrase (1-based) points into a dictionary of i entries
    return math.ceil(math.log2(phrase_no)) if phrase_no > 1 else 0


def lz78_encode(bits: BitString) -> BitString:
    """LZ78 over the binary alphabet: (dictionary index, next bit) phrases.

    A trailing phrase that is already in the dictionary is sent as a bare
    index; the decoder tells it apart from the payload length.
    """
    table = {"": 0}
    out = []
    cur = ""
    for b in bits:
        if cur + b in table:
            cur += b
            continue
        i = len(table)
        width = _index_width(i)
        if width:
            out.append(format(table[cur], f"0{width}b"))
        out.append(b)
        table[cur + b] = i
        cur = ""
    if cur:
        width = _index_width(len(table))
        out.append(format(table[cur], f"0{width}b"))
    return "".join(out)


def lz78_decode(code: BitString) -> BitString:
    phrases = [""]
    out = []
    pos = 0
    while pos < len(code):
        width = _index_width(len(phrases))
        idx = int(code[pos:pos + width], 2) if width else 0
        pos += width
        if pos == len(code):
            out.append(phrases[idx])
            break
        phrase = phrases[idx] + code[pos]
        pos += 1
        phrases.append(phrase)
        out.append(phrase)
    return "".join(out)


def framing_charge(payload_bits: int) -> int:
    return gamma_length(payload_bits + 1)


def _bytes_codec(fn):
    def run(bits: BitString) -> int:
        return 8 * len(fn(to_bytes(bits)))
    return run


def _external(bits: BitString) -> int:
    path = os.environ.get(ENV_COMPRESSOR)
    if not path:
        raise CompressorError(f"{ENV_COMPRESSOR} is not set")
    try:
        proc = subprocess.run([path], input=to_bytes(bits), capture_output=True, timeout=60)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise CompressorError(f"external compressor {path!r} failed: {exc}") from exc
    if proc.returncode != 0:
        raise CompressorError(f"external compressor {path!r} exited with {proc.returncode}",
                              proc.returncode, proc.stderr)
    return 8 * len(proc.stdout)


PAYLOAD_BITS = {
    "lz78": lambda bits: len(lz78_encode(bits)),
    "zlib": _bytes_codec(lambda b: zlib.compress(b, 9)),
    "bz2": _bytes_codec(lambda b: bz2.compress(b, 9)),
    "lzma": _bytes_codec(lambda b: lzma.compress(b, format=lzma.FORMAT_RAW,
                                                 filters=[{"id": lzma.FILTER_LZMA2, "preset": 9}])),
    "external": _external,
}

VERSIONS = {
    "lz78": LZ78_VERSION,
    "zlib": f"zlib-{zlib.ZLIB_RUNTIME_VERSION}",
    "bz2": "bz2",
    "lzma": "lzma-raw-preset9",
    "external": "external",
}


def compressed_bits(bits: BitString, compressor_id: str = "lz78") -> int:
    try:
        payload = PAYLOAD_BITS[compressor_id](bits)
    except KeyError:
        raise CompressorError(f"unknown compressor {compressor_id!r}") from None
    return payload + framing_charge(payload)
