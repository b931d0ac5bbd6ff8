"""Reference oracles the suite trusts over the package itself.

Everything here is an independent re-derivation -- index loops, dense
arrays, raster grids -- of something src/stq computes more cleverly.
Slow and transparent on purpose: when a test disagrees with an oracle,
the oracle is the side to believe.  Nothing in this module imports stq.
"""

from __future__ import annotations

import numpy as np

# --------------------------------------------------------------------
# monotone escape on a unit-cell raster
# --------------------------------------------------------------------
#
# Boxes are (u_lo, u_hi, v_lo, v_hi) tuples with INTEGER corners kept
# inside [1, size-1].  A curve from the infinite past to the infinite
# future is a lattice path over unit cells, entering anywhere along the
# bottom/left rim and leaving along the top/right rim, stepping one cell
# right (+v) or up (+u) at a time.  With integer corners the cell walk
# agrees exactly with the continuous monotone-curve picture: an obstacle
# overlapping a cell's interior necessarily covers the whole closed cell,
# so corner contact blocks and gaps of width >= 1 stay open.


def raster_escape(targets, obstacles, size=256):
    """True when a monotone path hits some target box and no obstacle."""
    centers = np.arange(size) + 0.5
    free = np.ones((size, size), dtype=bool)
    for (ul, uh, vl, vh) in obstacles:
        free &= ~(((centers >= ul) & (centers <= uh))[:, None]
                  & ((centers >= vl) & (centers <= vh))[None, :])
    fwd = _monotone_reach(free)
    bwd = _monotone_reach(free[::-1, ::-1])[::-1, ::-1]
    ok = free & fwd & bwd
    idx = np.arange(size)
    for (ul, uh, vl, vh) in targets:
        touch = (((ul <= idx + 1) & (uh >= idx))[:, None]
                 & ((vl <= idx + 1) & (vh >= idx))[None, :])
        if np.any(ok & touch):
            return True
    return False


def _monotone_reach(free):
    """Cells reachable from below/left of the window by right/up steps."""
    n, m = free.shape
    reach = np.zeros_like(free)
    prev = np.zeros(m, dtype=bool)
    idx = np.arange(m)
    for i in range(n):
        f = free[i]
        seed = prev | (i == 0)
        seed[0] = True
        s = seed & f
        # per-row scan: j is reachable when some seeded cell sits in the
        # same unbroken free run at or before j
        last_block = np.maximum.accumulate(np.where(f, -1, idx))
        cnt = np.cumsum(s)
        before = np.where(last_block >= 0,
                          cnt[np.maximum(last_block, 0)], 0)
        row = f & (cnt - before > 0)
        reach[i] = row
        prev = row
    return reach


# --------------------------------------------------------------------
# causal order, brute force
# --------------------------------------------------------------------


def brute_causal_leq(p, q):
    """p precedes q: coordinate tuples (t, x1, ..)."""
    dt = q[0] - p[0]
    dx2 = sum((b - a) ** 2 for a, b in zip(p[1:], q[1:]))
    return dt >= 0 and dt * dt >= dx2


def brute_boxes_linked(boxa, boxb):
    """Some point of one integer (u,v) box precedes some point of the
    other, by scanning every lattice point of both."""
    def pts(box):
        ul, uh, vl, vh = box
        return [(u, v) for u in range(ul, uh + 1)
                for v in range(vl, vh + 1)]
    pa, pb = pts(boxa), pts(boxb)
    for (u1, v1) in pa:
        for (u2, v2) in pb:
            if (u1 <= u2 and v1 <= v2) or (u2 <= u1 and v2 <= v1):
                return True
    return False


# --------------------------------------------------------------------
# Weyl operators and the one-time-pad twirl
# --------------------------------------------------------------------


def oracle_weyl(d, a, b):
    """X^a Z^b by direct indexing: column m -> omega^(b m) row m+a."""
    omega = np.exp(2j * np.pi / d)
    mat = np.zeros((d, d), dtype=complex)
    for m in range(d):
        mat[(m + a) % d, m] = omega ** (b * m)
    return mat


def qotp_twirl(rho, dims, idx):
    """Average rho over conjugation by every Weyl operator on slot idx."""
    d = dims[idx]
    left = int(np.prod(dims[:idx], dtype=int))
    right = int(np.prod(dims[idx + 1:], dtype=int))
    out = np.zeros_like(rho)
    for a in range(d):
        for b in range(d):
            wk = np.kron(np.eye(left),
                         np.kron(oracle_weyl(d, a, b), np.eye(right)))
            out += wk @ rho @ wk.conj().T
    return out / d ** 2


def reduced(vec, dims, keep):
    """Density operator of the kept slots, in the listed order."""
    psi = np.asarray(vec, dtype=complex).reshape(dims)
    drop = [i for i in range(len(dims)) if i not in keep]
    psi = np.transpose(psi, list(keep) + drop)
    k = int(np.prod([dims[i] for i in keep], dtype=int))
    mat = psi.reshape(k, -1)
    return mat @ mat.conj().T


# --------------------------------------------------------------------
# the three-qutrit two-out-of-three code
# --------------------------------------------------------------------
#
# Codewords: secret q spreads over shares (t, t+q, t+2q) mod 3, summed
# over t with amplitude 1/sqrt(3).  Any single share is maximally mixed;
# any two shares determine q as a difference.


def oracle_code23_isometry():
    iso = np.zeros((27, 3), dtype=complex)
    amp = 3 ** -0.5
    for q in range(3):
        for t in range(3):
            iso[9 * t + 3 * ((t + q) % 3) + (t + 2 * q) % 3, q] = amp
    return iso


def oracle_chi():
    """The leftover maximally entangled pair after a two-share decode."""
    chi = np.zeros(9, dtype=complex)
    for t in range(3):
        chi[3 * t + t] = 3 ** -0.5
    return chi


def oracle_decode_front_pair():
    """Decode unitary on shares (0, 1): |a,b> -> |b-a, 2b-a| mod 3.

    The first output slot carries the secret (difference of the two
    shares); the second lines up with the untouched third share so the
    pair lands exactly on oracle_chi().  Self-checked on construction.
    """
    u = np.zeros((9, 9), dtype=complex)
    for a in range(3):
        for b in range(3):
            u[3 * ((b - a) % 3) + (2 * b - a) % 3, 3 * a + b] = 1.0
    iso = oracle_code23_isometry()
    chi = oracle_chi()
    big = np.kron(u, np.eye(3))
    for q in range(3):
        got = big @ iso[:, q]
        want = np.kron(np.eye(3)[q], chi)
        assert np.allclose(got, want), "decode self-check failed"
    return u


# --------------------------------------------------------------------
# transfer certification: the two-independent-encodings cheat
# --------------------------------------------------------------------


def oracle_pit_cheat(seed=0):
    """Certification pass probability when the receiver decodes one
    encoding but presents a spare share from an unrelated second one.

    Slots: (ref, a0, a1, a2, b0, b1, b2).  The a-encoding carries half a
    maximally entangled pair; the b-encoding carries an independent
    random pure state.  Decoding (a0, a1) leaves the residual in a1; the
    certification projects (a1, b2) onto the entangled test state.
    """
    rng = np.random.default_rng(seed)
    iso = oracle_code23_isometry()

    a_side = np.zeros((3, 27), dtype=complex)
    for q in range(3):
        a_side[q] = 3 ** -0.5 * iso[:, q]
    a_side = a_side.reshape(81)

    phi = rng.normal(size=3) + 1j * rng.normal(size=3)
    phi = phi / np.linalg.norm(phi)
    b_side = iso @ phi

    full = np.kron(a_side, b_side)
    decode = np.kron(np.eye(3),
                     np.kron(oracle_decode_front_pair(), np.eye(81)))
    full = decode @ full

    rho = reduced(full, [3] * 7, (2, 6))
    chi = oracle_chi()
    return float(np.real(chi.conj() @ rho @ chi))


# --------------------------------------------------------------------
# classical sharing, enumerated
# --------------------------------------------------------------------


def shamir_share_counts(secret, x, p=257):
    """Distribution of the degree-1 share at abscissa x over every
    coefficient choice; uniform for x != 0 whatever the secret."""
    counts = np.zeros(p, dtype=int)
    for c1 in range(p):
        counts[(secret + c1 * x) % p] += 1
    return counts


class ScriptedRng:
    """Duck-typed stand-in for numpy's Generator that replays scripted
    draws, so additive-split privacy can be checked by enumeration."""

    def __init__(self, draws):
        self._draws = list(draws)

    def integers(self, low, high=None, size=None):
        n = 1 if size is None else int(np.prod(size, dtype=int))
        vals = [self._draws.pop(0) for _ in range(n)]
        arr = np.asarray(vals, dtype=np.int64)
        if size is None:
            return arr[0]
        return arr.reshape(size)
