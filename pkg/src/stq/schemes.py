"""Coding and encryption layers used by task plans.

Three groups of primitives:

* the ((2,3)) qutrit threshold code -- encode isometry plus, for every pair of
  shares, a two-qutrit permutation unitary that concentrates the secret onto
  the pair's first slot and leaves the second slot maximally entangled with
  the excluded share;
* the qudit one-time pad (one Weyl pair per qudit) with byte packing for the
  classical sharing layer; and
* classical sharing: bitwise XOR and mod-d additive ((m,m)) splits, plus
  Shamir threshold sharing over GF(257) for the cost comparison.

The decode permutations are derived from the encoded basis
|i> -> (1/sqrt 3) sum_j |j, j+i, j+2i>:  each pair of share values determines
(i, third value) linearly mod 3, and the maps below are exactly those
bijections of Z_3 x Z_3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qsim

# --------------------------------------------------------------------
# ((2,3)) qutrit code
# --------------------------------------------------------------------

CODE_D = 3


def code23_isometry() -> np.ndarray:
    """Encoding isometry C^3 -> C^27: |i> -> (1/sqrt 3) sum_j |j, j+i, j+2i>."""
    iso = np.zeros((27, 3), dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            s1, s2, s3 = j, (j + i) % 3, (j + 2 * i) % 3
            iso[s1 * 9 + s2 * 3 + s3, i] = 1.0 / math.sqrt(3)
    return iso


def code23_encode(state: qsim.State, label: str,
                  share_labels: Sequence[str]) -> qsim.State:
    """Encode one qutrit slot into three share slots."""
    if len(share_labels) != 3:
        raise ValueError("the ((2,3)) code produces exactly three shares")
    return qsim.apply_isometry(
        state, code23_isometry(), label, [(l, 3) for l in share_labels])


# share index pairs are 0-based positions in the (s1, s2, s3) encoding order
_DECODE_MAPS = {
    (0, 1): lambda p, q: ((q - p) % 3, (2 * q - p) % 3),
    (0, 2): lambda p, q: ((2 * (q - p)) % 3, (2 * q - p) % 3),
    (1, 2): lambda p, q: ((q - p) % 3, (2 * p - q) % 3),
}


def code23_decode_unitary(pair: tuple[int, int]) -> np.ndarray:
    """Permutation unitary on a share pair (9x9).

    After applying it to shares (pair[0], pair[1]) of a codeword, the first
    slot carries the encoded qutrit and the second slot is maximally
    entangled with the excluded share.
    """
    pair = (min(pair), max(pair))
    if pair not in _DECODE_MAPS:
        raise ValueError(f"not a share pair: {pair}")
    f = _DECODE_MAPS[pair]
    mat = np.zeros((9, 9), dtype=np.complex128)
    for p in range(3):
        for q in range(3):
            a, b = f(p, q)
            mat[a * 3 + b, p * 3 + q] = 1.0
    return mat


def code23_decode(state: qsim.State, pair: tuple[int, int],
                  label_a: str, label_b: str) -> qsim.State:
    """Decode from two shares; `pair` gives their 0-based code positions.

    label_a must hold share pair[0] and label_b share pair[1]; afterwards
    label_a holds the secret.
    """
    return qsim.apply_unitary(
        state, code23_decode_unitary(pair), [label_a, label_b])


def chi_state() -> np.ndarray:
    """The check state (|00> + |11> + |22>)/sqrt 3 as a flat 9-vector."""
    vec = np.zeros(9, dtype=np.complex128)
    for m in range(3):
        vec[m * 3 + m] = 1.0
    return vec / math.sqrt(3)


# --------------------------------------------------------------------
# qudit one-time pad
# --------------------------------------------------------------------


def qotp_key(rng: np.random.Generator, d: int = 3) -> tuple[int, int]:
    """Uniform Weyl pair (a, b) in Z_d x Z_d."""
    return int(rng.integers(d)), int(rng.integers(d))


def qotp_encrypt(state: qsim.State, label: str, key: tuple[int, int]) -> qsim.State:
    return qsim.apply_weyl(state, label, key[0], key[1])


def qotp_decrypt(state: qsim.State, label: str, key: tuple[int, int]) -> qsim.State:
    d = state.register.dim(label)
    w = qsim.weyl(d, key[0], key[1])
    return qsim.apply_unitary(state, w.conj().T, [label])


def key_to_byte(key: tuple[int, int], d: int = 3) -> int:
    return key[0] * d + key[1]


def byte_to_key(byte: int, d: int = 3) -> tuple[int, int]:
    return byte // d, byte % d


# --------------------------------------------------------------------
# classical ((m,m)) splits
# --------------------------------------------------------------------


def xor_split(data: bytes, m: int, rng: np.random.Generator) -> list[bytes]:
    """Split a byte string into m shares, all of which XOR back to it."""
    if m < 1:
        raise ValueError("need at least one share")
    shares = [bytes(rng.integers(0, 256, size=len(data)).tolist())
              for _ in range(m - 1)]
    last = bytearray(data)
    for share in shares:
        for i, byte in enumerate(share):
            last[i] ^= byte
    shares.append(bytes(last))
    return shares


def xor_merge(shares: Sequence[bytes]) -> bytes:
    if not shares:
        raise ValueError("no shares")
    out = bytearray(len(shares[0]))
    for share in shares:
        if len(share) != len(out):
            raise ValueError("share length mismatch")
        for i, byte in enumerate(share):
            out[i] ^= byte
    return bytes(out)


def modd_split(values: Sequence[int], d: int, m: int,
               rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Additive ((m,m)) split of a digit string over Z_d."""
    if m < 1:
        raise ValueError("need at least one share")
    vals = [v % d for v in values]
    shares = [tuple(int(x) for x in rng.integers(0, d, size=len(vals)))
              for _ in range(m - 1)]
    last = list(vals)
    for share in shares:
        for i, digit in enumerate(share):
            last[i] = (last[i] - digit) % d
    shares.append(tuple(last))
    return shares


def modd_merge(shares: Sequence[Sequence[int]], d: int) -> tuple[int, ...]:
    if not shares:
        raise ValueError("no shares")
    out = [0] * len(shares[0])
    for share in shares:
        for i, digit in enumerate(share):
            out[i] = (out[i] + digit) % d
    return tuple(out)


# --------------------------------------------------------------------
# Shamir threshold sharing over GF(257)
# --------------------------------------------------------------------

_P = 257  # smallest prime above 255; byte values embed directly


def _eval_poly(coeffs: Sequence[int], x: int) -> int:
    # Horner, constant term last in coeffs[0]
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % _P
    return acc


def shamir_share(values: Sequence[int], threshold: int, n: int,
                 rng: np.random.Generator) -> list[tuple[int, tuple[int, ...]]]:
    """Shamir shares of a digit string (values < 257): n points of random
    degree-(threshold-1) polynomials with the secrets as constant terms.

    Any `threshold` shares reconstruct; fewer reveal nothing.
    """
    if not 1 <= threshold <= n < _P:
        raise ValueError("need 1 <= threshold <= n < 257")
    polys = []
    for v in values:
        if not 0 <= v < _P:
            raise ValueError("values must lie in GF(257)")
        polys.append([v] + [int(rng.integers(_P)) for _ in range(threshold - 1)])
    return [(x, tuple(_eval_poly(p, x) for p in polys)) for x in range(1, n + 1)]


def shamir_reconstruct(shares: Sequence[tuple[int, Sequence[int]]],
                       threshold: int) -> bytes:
    """Lagrange interpolation at 0 from at least `threshold` shares."""
    if len(shares) < threshold:
        raise ValueError("not enough shares")
    pts = shares[:threshold]
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate share indices")
    length = len(pts[0][1])
    out = [0] * length
    for i, (xi, ys) in enumerate(pts):
        num, den = 1, 1
        for j, (xj, _) in enumerate(pts):
            if i == j:
                continue
            num = (num * (-xj)) % _P
            den = (den * (xi - xj)) % _P
        lam = num * pow(den, _P - 2, _P) % _P
        for k in range(length):
            out[k] = (out[k] + lam * ys[k]) % _P
    if any(v > 255 for v in out):
        raise ValueError("shares do not interpolate to byte values")
    return bytes(out)


# --------------------------------------------------------------------
# cost accounting
# --------------------------------------------------------------------


@dataclass(frozen=True)
class CostReport:
    """Resource counts for the edge-coded construction on n authorized sets,
    m unauthorized sets, and L-bit edge keys."""

    edges: int
    quantum_shares: int
    quantum_qubits: int
    classical_bits: int
    shamir_scaling: str

    def lines(self) -> list[str]:
        return [
            f"edges              {self.edges}",
            f"quantum shares     {self.quantum_shares}",
            f"quantum qubits     {self.quantum_qubits}",
            f"classical key bits {self.classical_bits}",
            f"shamir alternative {self.shamir_scaling}",
        ]


def scheme_cost(n: int, m: int, key_bits: int = 8) -> CostReport:
    """Headline costs of the pairwise construction.

    One quantum share per unordered pair of authorized sets (two qubits each
    in the qubit accounting), and three independently split key copies per
    share: 3 * m * C(n,2) * key_bits classical bits in total.  Shamir
    sharing of the same keys scales like C(n,2) * key_bits * O(log m) and is
    reported as an asymptotic note only.
    """
    if n < 2:
        raise ValueError("need at least two authorized sets")
    if m < 0:
        raise ValueError("negative unauthorized count")
    edges = n * (n - 1) // 2
    return CostReport(
        edges=edges,
        quantum_shares=edges,
        quantum_qubits=2 * edges,
        classical_bits=3 * m * edges * key_bits,
        shamir_scaling=f"~{edges * key_bits} * O(log m) bits (asymptotic)",
    )
