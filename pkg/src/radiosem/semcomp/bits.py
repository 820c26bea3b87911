"""MSB-first bit packing with order-0 Exp-Golomb integer codes."""
from __future__ import annotations

from ..errors import CorruptStream


class BitWriter:
    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0

    def write(self, value: int, nbits: int) -> None:
        if nbits == 0:
            return
        if value < 0 or value >> nbits:
            raise ValueError(f"{value} does not fit in {nbits} bits")
        self._acc = (self._acc << nbits) | value
        self._nacc += nbits
        while self._nacc >= 8:
            self._nacc -= 8
            self._buf.append((self._acc >> self._nacc) & 0xFF)
        self._acc &= (1 << self._nacc) - 1

    def write_ue(self, value: int) -> None:
        """Unsigned Exp-Golomb: ``value + 1`` in binary, preceded by (length - 1) zeros."""
        v = value + 1
        n = v.bit_length()
        self.write(0, n - 1)
        self.write(v, n)

    def write_se_nonzero(self, value: int) -> None:
        """Nonzero signed integer as ``ue(|v| - 1)`` followed by a sign bit."""
        self.write_ue(abs(value) - 1)
        self.write(1 if value < 0 else 0, 1)

    def getvalue(self) -> bytes:
        """Bytes so far, zero-padded to a byte boundary."""
        if self._nacc:
            return bytes(self._buf) + bytes([(self._acc << (8 - self._nacc)) & 0xFF])
        return bytes(self._buf)


class BitReader:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0
        self._nbits = 8 * len(data)

    @property
    def remaining(self) -> int:
        return self._nbits - self._pos

    def read(self, nbits: int) -> int:
        if nbits > self.remaining:
            raise CorruptStream("bitstream ended early")
        out = 0
        for _ in range(nbits):
            byte = self._data[self._pos >> 3]
            out = (out << 1) | ((byte >> (7 - (self._pos & 7))) & 1)
            self._pos += 1
        return out

    def read_ue(self) -> int:
        zeros = 0
        while self.read(1) == 0:
            zeros += 1
            if zeros > 40:
                raise CorruptStream("Exp-Golomb prefix too long")
        return ((1 << zeros) | self.read(zeros)) - 1

    def read_se_nonzero(self) -> int:
        mag = self.read_ue() + 1
        return -mag if self.read(1) else mag

    def check_padding(self) -> None:
        """The rest must be fewer than 8 zero bits."""
        if self.remaining >= 8 or (self.remaining and self.read(self.remaining) != 0):
            raise CorruptStream("trailing data after end of stream")
