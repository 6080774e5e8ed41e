"""Integer codec for XTC compressed coordinates ("3dfcoord" scheme).

Coordinates are quantized to integers by a precision factor, offset against
the frame's per-axis minimum, and bit-packed big-endian using a mixed-radix
encoding whose radices come from the magic-integers table below. Consecutive
atoms closer than a threshold are stored as small deltas in run-length
groups; the threshold adapts up and down via the same table. The bit-level
behaviour here matches the GROMACS xdrfile reference routines exactly, so
files written by GROMACS decode bit-identically and vice versa.

Functions are jitted with numba when available (needed to hit streaming-rate
decode speed); the same code runs as plain Python when it is not.

The pack side exists to build test fixtures and is not a supported
production writer.
"""

from __future__ import annotations

import numpy as np

from mdstream.errors import CorruptFileError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dep, kept importable without
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


FIRSTIDX = 9
LASTIDX = 73
MAXABS = 2147483645  # INT32_MAX - 2, largest magnitude the quantizer accepts

# round(2 ** (k / 3)) for k >= FIRSTIDX, zeros below, except the two entries
# 524287 and 8388607 which the reference table keeps one below the power of
# two so that three packed values always fit in k bits. One guard entry is
# appended because the adaptive window may probe index LASTIDX.
MAGICINTS = np.array(
    [
        0, 0, 0, 0, 0, 0, 0, 0, 0, 8,
        10, 12, 16, 20, 25, 32, 40, 50, 64, 80,
        101, 128, 161, 203, 256, 322, 406, 512, 645, 812,
        1024, 1290, 1625, 2048, 2580, 3250, 4096, 5060, 6501, 8192,
        10321, 13003, 16384, 20642, 26007, 32768, 41285, 52015, 65536, 82570,
        104031, 131072, 165140, 208063, 262144, 330280, 416127, 524287,
        660561, 832255, 1048576, 1321122, 1664510, 2097152, 2642245, 3329021,
        4194304, 5284491, 6658042, 8388607, 10568983, 13316085, 16777216,
        16777216,
    ],
    dtype=np.int64,
)


@njit(cache=True, nogil=True)
def _sizeofint(size):
    num = 1
    num_of_bits = 0
    while size >= num and num_of_bits < 32:
        num_of_bits += 1
        num <<= 1
    return num_of_bits


@njit(cache=True, nogil=True)
def _sizeofints(num_of_ints, sizes, scratch):
    num_of_bytes = 1
    scratch[0] = 1
    num_of_bits = 0
    for i in range(num_of_ints):
        tmp = 0
        bytecnt = 0
        while bytecnt < num_of_bytes:
            tmp = scratch[bytecnt] * sizes[i] + tmp
            scratch[bytecnt] = tmp & 0xFF
            tmp >>= 8
            bytecnt += 1
        while tmp != 0:
            scratch[bytecnt] = tmp & 0xFF
            bytecnt += 1
            tmp >>= 8
        num_of_bytes = bytecnt
    num = 1
    num_of_bytes -= 1
    while scratch[num_of_bytes] >= num:
        num_of_bits += 1
        num *= 2
    return num_of_bits + num_of_bytes * 8


@njit(cache=True, nogil=True)
def _receivebits(data, state, num_of_bits):
    # state: cnt, lastbits, lastbyte, error
    mask = (1 << num_of_bits) - 1
    cnt = state[0]
    lastbits = state[1]
    lastbyte = state[2]
    num = 0
    while num_of_bits >= 8:
        if cnt >= data.size:
            state[3] = 1
            return 0
        lastbyte = ((lastbyte << 8) | data[cnt]) & 0xFFFFFFFF
        cnt += 1
        num |= ((lastbyte >> lastbits) & 0xFF) << (num_of_bits - 8)
        num_of_bits -= 8
    if num_of_bits > 0:
        if lastbits < num_of_bits:
            lastbits += 8
            if cnt >= data.size:
                state[3] = 1
                return 0
            lastbyte = ((lastbyte << 8) | data[cnt]) & 0xFFFFFFFF
            cnt += 1
        lastbits -= num_of_bits
        num |= (lastbyte >> lastbits) & ((1 << num_of_bits) - 1)
    num &= mask
    state[0] = cnt
    state[1] = lastbits
    state[2] = lastbyte
    return num


@njit(cache=True, nogil=True)
def _receiveints(data, state, num_of_ints, num_of_bits, sizes, nums, scratch):
    scratch[0] = 0
    scratch[1] = 0
    scratch[2] = 0
    scratch[3] = 0
    num_of_bytes = 0
    while num_of_bits > 8:
        scratch[num_of_bytes] = _receivebits(data, state, 8)
        num_of_bytes += 1
        num_of_bits -= 8
    if num_of_bits > 0:
        scratch[num_of_bytes] = _receivebits(data, state, num_of_bits)
        num_of_bytes += 1
    for i in range(num_of_ints - 1, 0, -1):
        num = 0
        for j in range(num_of_bytes - 1, -1, -1):
            num = (num << 8) | scratch[j]
            p = num // sizes[i]
            scratch[j] = p
            num -= p * sizes[i]
        nums[i] = num
    nums[0] = scratch[0] | (scratch[1] << 8) | (scratch[2] << 16) | (scratch[3] << 24)


@njit(cache=True, nogil=True)
def _unpack_kernel(data, n_atoms, minint, maxint, smallidx, magic, out):
    """Decode the packed bitstream into absolute quantized coordinates.

    Returns 0 on success, 1 if the stream claims more atoms than n_atoms,
    2 if the stream ran out of bytes.
    """
    state = np.zeros(4, np.int64)
    scratch = np.zeros(32, np.int64)
    sizeint = np.empty(3, np.int64)
    sizesmall = np.empty(3, np.int64)
    tmpint = np.empty(3, np.int64)
    bitsizeint = np.zeros(3, np.int64)

    for k in range(3):
        sizeint[k] = maxint[k] - minint[k] + 1

    if (sizeint[0] | sizeint[1] | sizeint[2]) > 0xFFFFFF:
        bitsizeint[0] = _sizeofint(sizeint[0])
        bitsizeint[1] = _sizeofint(sizeint[1])
        bitsizeint[2] = _sizeofint(sizeint[2])
        bitsize = 0
    else:
        bitsize = _sizeofints(3, sizeint, scratch)

    if smallidx - 1 > FIRSTIDX:
        smaller = magic[smallidx - 1] // 2
    else:
        smaller = magic[FIRSTIDX] // 2
    smallnum = magic[smallidx] // 2
    for k in range(3):
        sizesmall[k] = magic[smallidx]

    prev0 = 0
    prev1 = 0
    prev2 = 0
    run = 0
    i = 0
    w = 0
    while i < n_atoms:
        if bitsize == 0:
            big0 = _receivebits(data, state, bitsizeint[0]) + minint[0]
            big1 = _receivebits(data, state, bitsizeint[1]) + minint[1]
            big2 = _receivebits(data, state, bitsizeint[2]) + minint[2]
        else:
            _receiveints(data, state, 3, bitsize, sizeint, tmpint, scratch)
            big0 = tmpint[0] + minint[0]
            big1 = tmpint[1] + minint[1]
            big2 = tmpint[2] + minint[2]
        if state[3] != 0:
            return 2
        i += 1
        prev0 = big0
        prev1 = big1
        prev2 = big2

        flag = _receivebits(data, state, 1)
        is_smaller = 0
        if flag == 1:
            rl = _receivebits(data, state, 5)
            is_smaller = rl % 3
            run = rl - is_smaller
            is_smaller -= 1
        if state[3] != 0:
            return 2
        if w + 1 + (run // 3) > n_atoms:
            return 1

        if run > 0:
            for k in range(0, run, 3):
                _receiveints(data, state, 3, smallidx, sizesmall, tmpint, scratch)
                if state[3] != 0:
                    return 2
                i += 1
                c0 = tmpint[0] + prev0 - smallnum
                c1 = tmpint[1] + prev1 - smallnum
                c2 = tmpint[2] + prev2 - smallnum
                if k == 0:
                    # the first run atom was swapped ahead of its anchor by
                    # the packer; emit it first, then the anchor
                    out[w * 3] = c0
                    out[w * 3 + 1] = c1
                    out[w * 3 + 2] = c2
                    w += 1
                    out[w * 3] = big0
                    out[w * 3 + 1] = big1
                    out[w * 3 + 2] = big2
                    w += 1
                    prev0 = c0
                    prev1 = c1
                    prev2 = c2
                else:
                    prev0 = c0
                    prev1 = c1
                    prev2 = c2
                    out[w * 3] = c0
                    out[w * 3 + 1] = c1
                    out[w * 3 + 2] = c2
                    w += 1
        else:
            out[w * 3] = big0
            out[w * 3 + 1] = big1
            out[w * 3 + 2] = big2
            w += 1

        smallidx += is_smaller
        if is_smaller < 0:
            smallnum = smaller
            if smallidx > FIRSTIDX:
                smaller = magic[smallidx - 1] // 2
            else:
                smaller = 0
        elif is_smaller > 0:
            smaller = smallnum
            smallnum = magic[smallidx] // 2
        for k in range(3):
            sizesmall[k] = magic[smallidx]

    if w != n_atoms:
        return 1
    return 0


@njit(cache=True, nogil=True)
def _sendbits(out, state, num_of_bits, num):
    cnt = state[0]
    lastbits = state[1]
    lastbyte = state[2]
    num &= (1 << num_of_bits) - 1 if num_of_bits < 63 else -1
    while num_of_bits >= 8:
        lastbyte = ((lastbyte << 8) | ((num >> (num_of_bits - 8)) & 0xFF)) & 0xFFFFFFFF
        out[cnt] = (lastbyte >> lastbits) & 0xFF
        cnt += 1
        num_of_bits -= 8
    if num_of_bits > 0:
        lastbyte = ((lastbyte << num_of_bits) | (num & ((1 << num_of_bits) - 1))) & 0xFFFFFFFF
        lastbits += num_of_bits
        if lastbits >= 8:
            lastbits -= 8
            out[cnt] = (lastbyte >> lastbits) & 0xFF
            cnt += 1
    state[0] = cnt
    state[1] = lastbits
    state[2] = lastbyte
    if lastbits > 0:
        out[cnt] = (lastbyte << (8 - lastbits)) & 0xFF


@njit(cache=True, nogil=True)
def _sendints(out, state, num_of_ints, num_of_bits, sizes, nums, scratch):
    tmp = nums[0]
    num_of_bytes = 0
    while True:
        scratch[num_of_bytes] = tmp & 0xFF
        num_of_bytes += 1
        tmp >>= 8
        if tmp == 0:
            break
    for i in range(1, num_of_ints):
        if nums[i] >= sizes[i]:
            return 1  # value does not fit its radix; packer invariant broken
        tmp = nums[i]
        bytecnt = 0
        while bytecnt < num_of_bytes:
            tmp = scratch[bytecnt] * sizes[i] + tmp
            scratch[bytecnt] = tmp & 0xFF
            tmp >>= 8
            bytecnt += 1
        while tmp != 0:
            scratch[bytecnt] = tmp & 0xFF
            bytecnt += 1
            tmp >>= 8
        num_of_bytes = bytecnt
    if num_of_bits >= num_of_bytes * 8:
        for i in range(num_of_bytes):
            _sendbits(out, state, 8, scratch[i])
        _sendbits(out, state, num_of_bits - num_of_bytes * 8, 0)
    else:
        for i in range(num_of_bytes - 1):
            _sendbits(out, state, 8, scratch[i])
        _sendbits(
            out, state, num_of_bits - (num_of_bytes - 1) * 8, scratch[num_of_bytes - 1]
        )
    return 0


@njit(cache=True, nogil=True)
def _pack_kernel(ints, n_atoms, minint, maxint, smallidx, magic, out):
    """Bit-pack quantized coordinates. Returns byte count, or -1 on error.

    ints is modified in place (neighbour-pair interchange), pass a copy.
    """
    state = np.zeros(4, np.int64)
    scratch = np.zeros(32, np.int64)
    sizeint = np.empty(3, np.int64)
    sizesmall = np.empty(3, np.int64)
    tmpcoord = np.empty(30, np.int64)
    bitsizeint = np.zeros(3, np.int64)

    for k in range(3):
        sizeint[k] = maxint[k] - minint[k] + 1

    if (sizeint[0] | sizeint[1] | sizeint[2]) > 0xFFFFFF:
        bitsizeint[0] = _sizeofint(sizeint[0])
        bitsizeint[1] = _sizeofint(sizeint[1])
        bitsizeint[2] = _sizeofint(sizeint[2])
        bitsize = 0
    else:
        bitsize = _sizeofints(3, sizeint, scratch)

    maxidx = min(LASTIDX, smallidx + 8)
    minidx = maxidx - 8
    if smallidx - 1 > FIRSTIDX:
        smaller = magic[smallidx - 1] // 2
    else:
        smaller = magic[FIRSTIDX] // 2
    smallnum = magic[smallidx] // 2
    for k in range(3):
        sizesmall[k] = magic[smallidx]
    larger = magic[maxidx] // 2

    prevrun = -1
    prev0 = 0
    prev1 = 0
    prev2 = 0
    i = 0
    while i < n_atoms:
        is_small = 0
        b = i * 3
        if smallidx < maxidx and i >= 1:
            if (
                abs(ints[b] - prev0) < larger
                and abs(ints[b + 1] - prev1) < larger
                and abs(ints[b + 2] - prev2) < larger
            ):
                is_smaller = 1
            elif smallidx > minidx:
                is_smaller = -1
            else:
                is_smaller = 0
        elif smallidx > minidx:
            is_smaller = -1
        else:
            is_smaller = 0
        if i + 1 < n_atoms:
            if (
                abs(ints[b] - ints[b + 3]) < smallnum
                and abs(ints[b + 1] - ints[b + 4]) < smallnum
                and abs(ints[b + 2] - ints[b + 5]) < smallnum
            ):
                # interchange with the next atom so the pair packs as a run
                for k in range(3):
                    tmp = ints[b + k]
                    ints[b + k] = ints[b + 3 + k]
                    ints[b + 3 + k] = tmp
                is_small = 1

        tmpcoord[0] = ints[b] - minint[0]
        tmpcoord[1] = ints[b + 1] - minint[1]
        tmpcoord[2] = ints[b + 2] - minint[2]
        if bitsize == 0:
            _sendbits(out, state, bitsizeint[0], tmpcoord[0])
            _sendbits(out, state, bitsizeint[1], tmpcoord[1])
            _sendbits(out, state, bitsizeint[2], tmpcoord[2])
        else:
            if _sendints(out, state, 3, bitsize, sizeint, tmpcoord, scratch) != 0:
                return -1
        prev0 = ints[b]
        prev1 = ints[b + 1]
        prev2 = ints[b + 2]
        i += 1
        b += 3

        run = 0
        if is_small == 0 and is_smaller == -1:
            is_smaller = 0
        while is_small != 0 and run < 8 * 3:
            if is_smaller == -1:
                d0 = ints[b] - prev0
                d1 = ints[b + 1] - prev1
                d2 = ints[b + 2] - prev2
                if d0 * d0 + d1 * d1 + d2 * d2 >= smaller * smaller:
                    is_smaller = 0
            tmpcoord[run] = ints[b] - prev0 + smallnum
            tmpcoord[run + 1] = ints[b + 1] - prev1 + smallnum
            tmpcoord[run + 2] = ints[b + 2] - prev2 + smallnum
            run += 3
            prev0 = ints[b]
            prev1 = ints[b + 1]
            prev2 = ints[b + 2]
            i += 1
            b += 3
            is_small = 0
            if i < n_atoms:
                if (
                    abs(ints[b] - prev0) < smallnum
                    and abs(ints[b + 1] - prev1) < smallnum
                    and abs(ints[b + 2] - prev2) < smallnum
                ):
                    is_small = 1

        if run != prevrun or is_smaller != 0:
            prevrun = run
            _sendbits(out, state, 1, 1)
            _sendbits(out, state, 5, run + is_smaller + 1)
        else:
            _sendbits(out, state, 1, 0)
        for k in range(0, run, 3):
            sub = tmpcoord[k : k + 3]
            if _sendints(out, state, 3, smallidx, sizesmall, sub, scratch) != 0:
                return -1
        if is_smaller != 0:
            smallidx += is_smaller
            if is_smaller < 0:
                smallnum = smaller
                smaller = magic[smallidx - 1] // 2
            else:
                smaller = smallnum
                smallnum = magic[smallidx] // 2
            for k in range(3):
                sizesmall[k] = magic[smallidx]

    nbytes = state[0]
    if state[1] != 0:
        nbytes += 1
    return nbytes


def quantize(coords_nm: np.ndarray, precision: float) -> np.ndarray:
    """Quantize nm coordinates to integers, float32 reference semantics.

    Rounds half away from zero after multiplying by the precision in
    single-precision arithmetic, exactly as the reference encoder does.
    """
    c = np.ascontiguousarray(coords_nm, dtype=np.float32)
    scaled = (c * np.float32(precision)).astype(np.float64)
    lf = np.where(c >= 0.0, scaled + 0.5, scaled - 0.5).astype(np.float32)
    if np.any(np.abs(lf) > MAXABS):
        raise ValueError("coordinate magnitude overflows the codec at this precision")
    return np.trunc(lf).astype(np.int64).reshape(-1, 3)


def dequantize(ints: np.ndarray, precision: float) -> np.ndarray:
    """Integer coordinates back to float32 nm, reference semantics."""
    inv = np.float32(1.0 / np.float64(np.float32(precision)))
    return (np.asarray(ints).astype(np.float32) * inv).reshape(-1, 3)


def pack_ints(ints: np.ndarray) -> tuple[bytes, np.ndarray, np.ndarray, int]:
    """Pack quantized coordinates; returns (payload, minint, maxint, smallidx).

    The payload is the raw bitstream without any header fields and without
    trailing XDR padding.
    """
    flat = np.ascontiguousarray(ints, dtype=np.int64).reshape(-1)
    n_atoms = flat.size // 3
    if n_atoms * 3 != flat.size:
        raise ValueError("coordinate array length must be a multiple of 3")
    if n_atoms < 1:
        raise ValueError("cannot pack an empty frame")
    per_axis = flat.reshape(-1, 3)
    minint = per_axis.min(axis=0)
    maxint = per_axis.max(axis=0)
    if np.any(maxint.astype(np.float64) - minint.astype(np.float64) >= MAXABS):
        raise ValueError("coordinate spread overflows the codec")

    if n_atoms > 1:
        mindiff = int(np.abs(np.diff(per_axis, axis=0)).sum(axis=1).min())
    else:
        mindiff = np.iinfo(np.int32).max
    smallidx = FIRSTIDX
    while smallidx < LASTIDX - 1 and MAGICINTS[smallidx] < mindiff:
        smallidx += 1

    out = np.zeros(flat.size * 8 + 64, dtype=np.uint8)
    work = flat.copy()
    nbytes = _pack_kernel(
        work,
        n_atoms,
        minint.astype(np.int64),
        maxint.astype(np.int64),
        smallidx,
        MAGICINTS,
        out,
    )
    if nbytes < 0:
        raise ValueError("coordinate pattern not packable (delta exceeded radix)")
    return bytes(out[:nbytes]), minint, maxint, smallidx


def unpack_ints(
    data: bytes | np.ndarray,
    n_atoms: int,
    minint: np.ndarray,
    maxint: np.ndarray,
    smallidx: int,
) -> np.ndarray:
    """Decode a packed bitstream into (n_atoms, 3) int32 quantized coords."""
    if not FIRSTIDX <= smallidx < LASTIDX:
        raise CorruptFileError(f"smallidx {smallidx} outside valid range")
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    out = np.empty(n_atoms * 3, dtype=np.int64)
    status = _unpack_kernel(
        buf,
        n_atoms,
        np.asarray(minint, dtype=np.int64),
        np.asarray(maxint, dtype=np.int64),
        smallidx,
        MAGICINTS,
        out,
    )
    if status == 1:
        raise CorruptFileError("compressed frame encodes a different atom count")
    if status == 2:
        raise CorruptFileError("compressed frame truncated mid-stream")
    result = out.astype(np.int32).reshape(-1, 3)
    return result
