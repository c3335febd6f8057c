"""Bit-level I/O, most-significant-bit first.

Both the policy codec and the compact-word serializer write fields as
MSB-first bit runs packed into bytes; this module is the single place
that owns that arithmetic.
"""

from __future__ import annotations

from .errors import TruncatedError


class BitWriter:
    """Accumulates bits MSB-first and byte-aligns on demand."""

    def __init__(self) -> None:
        self._buf = bytearray()
        self._acc = 0       # bits not yet flushed, left-aligned in _nacc
        self._nacc = 0

    def write_uint(self, value: int, width: int) -> None:
        if value < 0 or value >> width:
            raise ValueError(f"value {value} does not fit in {width} bits")
        self._acc = (self._acc << width) | value
        self._nacc += width
        while self._nacc >= 8:
            self._nacc -= 8
            self._buf.append((self._acc >> self._nacc) & 0xFF)
        self._acc &= (1 << self._nacc) - 1

    def write_bit(self, bit: int) -> None:
        self.write_uint(bit, 1)

    def write_bits(self, bits: str) -> None:
        for ch in bits:
            if ch == "0":
                self.write_uint(0, 1)
            elif ch == "1":
                self.write_uint(1, 1)
            else:
                raise ValueError(f"not a bit: {ch!r}")

    @property
    def bit_length(self) -> int:
        return len(self._buf) * 8 + self._nacc

    def to_bytes(self) -> bytes:
        """Zero-pad to a byte boundary and return the packed bytes."""
        out = bytearray(self._buf)
        if self._nacc:
            out.append((self._acc << (8 - self._nacc)) & 0xFF)
        return bytes(out)


class BitReader:
    """Reads MSB-first bit runs; raises TruncatedError past the end."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0  # bit cursor

    @property
    def bits_remaining(self) -> int:
        return len(self._data) * 8 - self._pos

    def read_uint(self, width: int) -> int:
        if width > self.bits_remaining:
            raise TruncatedError(
                f"needed {width} bits, only {self.bits_remaining} remain"
            )
        value = 0
        pos = self._pos
        for _ in range(width):
            byte = self._data[pos >> 3]
            value = (value << 1) | ((byte >> (7 - (pos & 7))) & 1)
            pos += 1
        self._pos = pos
        return value

    def read_bit(self) -> int:
        return self.read_uint(1)

    def read_bits(self, width: int) -> str:
        if width > self.bits_remaining:
            raise TruncatedError(
                f"needed {width} bits, only {self.bits_remaining} remain"
            )
        return "".join("1" if self.read_uint(1) else "0" for _ in range(width))


def bits_of_bytes(data: bytes) -> str:
    """The full bit string of ``data``, MSB-first."""
    return "".join(format(b, "08b") for b in data)
