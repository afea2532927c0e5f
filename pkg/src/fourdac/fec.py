"""LDPC coding and the frame arrangement between the FEC and the 4D mapper.

Codes are defined by a textual sparse parity-check file:

    # optional comment lines
    n_c k_c
    <bit indices of check 0, space separated, 0-based>
    ...                                   (n_c - k_c lines)

The parity part (columns k_c..n_c-1) must form the accumulator staircase of
IRA/DVB-S2-style codes: check i contains parity column k_c+i and, for i>0,
column k_c+i-1, and no other parity columns.  This makes encoding a prefix
XOR (back substitution) and guarantees the parity part is full rank.
Files ending in .gz are read through gzip.

Decoding is flooding belief propagation over the edge list, with either the
exact sum-product check update (sign/magnitude form of the tanh rule) or
normalized min-sum.  LLRs follow the package convention: positive favors
bit 0.
"""

import gzip
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .exceptions import LoadError, ParameterError
from .seeding import uniform_stream

__all__ = [
    "LdpcCode",
    "FrameSchedule",
    "load_code",
    "encode",
    "decode",
    "make_schedule",
    "frame_to_symbols",
    "symbols_to_frame",
    "deframe_llrs",
    "convert_alist",
    "generate_ira_code",
    "toy_code_path",
    "big_code_path",
]

_PHI_CLIP = 1e-12  # phi(x) = -ln tanh(x/2) is its own inverse; clip near 0


@dataclass(frozen=True)
class LdpcCode:
    """Sparse parity-check structure with a staircase (accumulator) parity part."""

    n_c: int
    k_c: int
    check_idx: np.ndarray  # (E,) check index per edge, sorted
    var_idx: np.ndarray    # (E,) bit index per edge
    check_ptr: np.ndarray  # (m+1,) segment boundaries into the edge arrays
    info_check: np.ndarray  # edges restricted to info columns, for encoding
    info_var: np.ndarray

    @property
    def rate(self) -> float:
        return self.k_c / self.n_c

    @property
    def m(self) -> int:
        return self.n_c - self.k_c

    @classmethod
    def from_checks(cls, n_c: int, k_c: int, checks: list) -> "LdpcCode":
        m = n_c - k_c
        if not (0 < k_c < n_c):
            raise LoadError(f"bad dimensions n_c={n_c}, k_c={k_c}")
        if len(checks) != m:
            raise LoadError(f"expected {m} checks, got {len(checks)}")
        ci, vi = [], []
        for i, row in enumerate(checks):
            if len(set(row)) != len(row):
                raise LoadError(f"check {i} lists a bit index twice")
            if len(row) < 2:
                raise LoadError(f"check {i} has degree {len(row)} < 2")
            parity = sorted(v for v in row if v >= k_c)
            expected = [k_c + i] if i == 0 else [k_c + i - 1, k_c + i]
            if parity != expected:
                raise LoadError(
                    f"check {i} parity columns {parity} break the staircase structure"
                )
            for v in row:
                if not 0 <= v < n_c:
                    raise LoadError(f"check {i} references bit {v} outside [0, {n_c})")
                ci.append(i)
                vi.append(v)
        ci = np.asarray(ci, dtype=np.int64)
        vi = np.asarray(vi, dtype=np.int64)
        order = np.lexsort((vi, ci))
        ci, vi = ci[order], vi[order]
        ptr = np.searchsorted(ci, np.arange(m + 1))
        info = vi < k_c
        return cls(n_c, k_c, ci, vi, ptr, ci[info], vi[info])


def _open_text(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt")
    return open(path)


def load_code(source) -> LdpcCode:
    """Load and validate a code from the documented sparse text format."""
    try:
        with _open_text(source) as fh:
            rows = [ln.split() for ln in fh
                    if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as e:
        raise LoadError(f"cannot read {source}: {e}") from e
    if not rows:
        raise LoadError(f"{source}: empty code file")
    try:
        header = [int(x) for x in rows[0]]
        checks = [[int(x) for x in row] for row in rows[1:]]
    except ValueError as e:
        raise LoadError(f"{source}: non-integer token ({e})") from e
    if len(header) != 2:
        raise LoadError(f"{source}: header must be 'n_c k_c', got {rows[0]}")
    return LdpcCode.from_checks(header[0], header[1], checks)


def encode(code: LdpcCode, info_bits) -> np.ndarray:
    """Systematic encoding: info bits in place, parity by accumulator back substitution."""
    u = np.asarray(info_bits, dtype=np.uint8).ravel()
    if u.size != code.k_c:
        raise ParameterError(f"expected {code.k_c} info bits, got {u.size}")
    acc = np.bincount(code.info_check, weights=u[code.info_var].astype(np.float64),
                      minlength=code.m).astype(np.int64) & 1
    parity = (np.cumsum(acc) & 1).astype(np.uint8)
    return np.concatenate([u, parity])


def syndrome(code: LdpcCode, word) -> np.ndarray:
    """Per-check parity of a hard word (all zeros for a codeword)."""
    w = np.asarray(word, dtype=np.int64).ravel()
    if w.size != code.n_c:
        raise ParameterError(f"expected {code.n_c} bits, got {w.size}")
    return (np.bincount(code.check_idx, weights=w[code.var_idx].astype(np.float64),
                        minlength=code.m).astype(np.int64) & 1)


def _phi(x: np.ndarray) -> np.ndarray:
    return -np.log(np.tanh(np.clip(x, _PHI_CLIP, None) / 2.0))


def _check_update_sum_product(v2c, ci, ptr):
    mag = np.abs(v2c)
    phi = _phi(mag)
    phi_sum = np.add.reduceat(phi, ptr[:-1])
    neg = (v2c < 0).astype(np.int64)
    parity = np.add.reduceat(neg, ptr[:-1]) & 1
    sign = 1.0 - 2.0 * (parity[ci] ^ neg)
    return sign * _phi(np.clip(phi_sum[ci] - phi, _PHI_CLIP, None))


def _check_update_min_sum(v2c, ci, ptr, alpha):
    mag = np.abs(v2c)
    m1 = np.minimum.reduceat(mag, ptr[:-1])
    is_min = mag <= m1[ci]
    m2 = np.minimum.reduceat(np.where(is_min, np.inf, mag), ptr[:-1])
    n_min = np.add.reduceat(is_min.astype(np.int64), ptr[:-1])
    excl = np.where(is_min & (n_min[ci] == 1), m2[ci], m1[ci])
    neg = (v2c < 0).astype(np.int64)
    parity = np.add.reduceat(neg, ptr[:-1]) & 1
    sign = 1.0 - 2.0 * (parity[ci] ^ neg)
    return alpha * sign * excl


def decode(code: LdpcCode, llrs, max_iters: int = 50, variant: str = "sum_product",
           alpha: float = 0.75, return_codeword: bool = False):
    """Flooding BP decode; returns (info bits, converged, iterations).

    Stops early when the hard decisions satisfy every check and every
    posterior is nonzero (an all-tied posterior carries no decision).
    Non-convergence is reported in the flag, never raised.
    """
    llr_ch = np.asarray(llrs, dtype=np.float64).ravel()
    if llr_ch.size != code.n_c:
        raise ParameterError(f"expected {code.n_c} LLRs, got {llr_ch.size}")
    if variant not in ("sum_product", "min_sum"):
        raise ParameterError(f"unknown decoder variant '{variant}'")
    ci, vi, ptr = code.check_idx, code.var_idx, code.check_ptr
    c2v = np.zeros(ci.size)
    posterior = llr_ch.copy()
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        v2c = posterior[vi] - c2v
        if variant == "sum_product":
            c2v = _check_update_sum_product(v2c, ci, ptr)
        else:
            c2v = _check_update_min_sum(v2c, ci, ptr, alpha)
        posterior = llr_ch + np.bincount(vi, weights=c2v, minlength=code.n_c)
        bits = (posterior < 0).astype(np.uint8)
        if np.min(np.abs(posterior)) > 0 and not syndrome(code, bits).any():
            converged = True
            break
    bits = (posterior < 0).astype(np.uint8)
    if return_codeword:
        return bits[: code.k_c], converged, iters, bits
    return bits[: code.k_c], converged, iters


# --- frame arrangement ----------------------------------------------------


@dataclass(frozen=True)
class FrameSchedule:
    """How one codeword is laid across 4D symbols.

    Coded bit j goes to stream j mod k_ac at symbol floor(j / k_ac) (block
    mapping); an optional seeded permutation is applied to the coded bits
    first.  When k_ac does not divide n_c the codeword is zero-padded at the
    tail up to the next multiple: ``pad`` bits, transmitted as known zeros
    and dropped again at the demapper.
    """

    n: int
    k_ac: int
    n_c: int
    pad: int
    perm: np.ndarray | None = None
    inv_perm: np.ndarray | None = field(default=None, repr=False)


def make_schedule(n_c: int, k_ac: int, interleave: str = "block", seed: int = 0) -> FrameSchedule:
    pad = (-n_c) % k_ac
    n = (n_c + pad) // k_ac
    if interleave == "block":
        perm = inv = None
    elif interleave == "random":
        u = uniform_stream(seed, "interleaver", 0, n_c)
        perm = np.argsort(u)
        inv = np.argsort(perm)
    else:
        raise ParameterError(f"unknown interleave mode '{interleave}'")
    return FrameSchedule(n, k_ac, n_c, pad, perm, inv)


def frame_to_symbols(codeword, sched: FrameSchedule) -> np.ndarray:
    """Codeword -> (n, k_ac) input words, one row per 4D symbol."""
    w = np.asarray(codeword, dtype=np.uint8).ravel()
    if w.size != sched.n_c:
        raise ParameterError(f"expected {sched.n_c} coded bits, got {w.size}")
    if sched.perm is not None:
        w = w[sched.perm]
    if sched.pad:
        w = np.concatenate([w, np.zeros(sched.pad, dtype=np.uint8)])
    return w.reshape(sched.n, sched.k_ac)


def symbols_to_frame(words, sched: FrameSchedule) -> np.ndarray:
    """Inverse of frame_to_symbols; drops padding and undoes the permutation."""
    w = np.asarray(words, dtype=np.uint8).reshape(-1)
    if w.size != sched.n * sched.k_ac:
        raise ParameterError(f"expected {sched.n * sched.k_ac} bits, got {w.size}")
    w = w[: sched.n_c]
    if sched.perm is not None:
        w = w[sched.inv_perm]
    return w


def deframe_llrs(llrs, sched: FrameSchedule) -> np.ndarray:
    """Map demapper output (n, k_ac) back to per-coded-bit LLR order."""
    flat = np.asarray(llrs, dtype=np.float64).reshape(-1)
    if flat.size != sched.n * sched.k_ac:
        raise ParameterError(f"expected {sched.n * sched.k_ac} LLRs, got {flat.size}")
    flat = flat[: sched.n_c]
    if sched.perm is not None:
        flat = flat[sched.inv_perm]
    return flat


# --- code construction and file tooling ------------------------------------


def convert_alist(alist_path, out_path) -> None:
    """Convert a MacKay adjacency-list ('alist') file to the sparse text format.

    Uses the per-check rows of the alist; the parity part must already have
    the staircase structure or loading the result will fail.
    """
    with _open_text(alist_path) as fh:
        tokens = fh.read().split()
    it = iter(tokens)
    checks = []
    try:
        n, m = int(next(it)), int(next(it))
        max_col, max_row = int(next(it)), int(next(it))
        _col_deg = [int(next(it)) for _ in range(n)]
        row_deg = [int(next(it)) for _ in range(m)]
        for _ in range(n * max_col):  # per-variable lists, zero-padded
            next(it)
        for i in range(m):
            row = [int(next(it)) for _ in range(max_row)]
            vals = [v - 1 for v in row if v > 0]
            if len(vals) != row_deg[i]:
                raise LoadError(f"{alist_path}: check {i} degree mismatch")
            checks.append(sorted(vals))
    except StopIteration:
        raise LoadError(f"{alist_path}: truncated alist file") from None
    except ValueError as e:
        raise LoadError(f"{alist_path}: non-integer token ({e})") from None
    lines = [f"{n} {n - m}"] + [" ".join(map(str, row)) for row in checks]
    Path(out_path).write_text("\n".join(lines) + "\n")


def generate_ira_code(n_c: int, k_c: int, group: int, high_degree: int,
                      n_high_groups: int, seed: int) -> LdpcCode:
    """Deterministically generate an IRA code with DVB-S2-style structure.

    Info bits come in ``group``-sized column groups; group g has base check
    addresses {x_1..x_d} and bit (g, j) connects to checks (x + j*q) mod m
    with q = m / group.  Base residues mod q are balanced so every check has
    identical information degree.  The first ``n_high_groups`` groups get
    ``high_degree`` bases, the rest degree 3.
    """
    m = n_c - k_c
    if m % group or k_c % group:
        raise ParameterError("group size must divide both k_c and n_c - k_c")
    q = m // group
    n_groups = k_c // group
    degrees = [high_degree] * n_high_groups + [3] * (n_groups - n_high_groups)
    n_bases = sum(degrees)
    if n_bases % q:
        raise ParameterError(f"total base count {n_bases} not divisible by q={q}")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    residues = np.repeat(np.arange(q), n_bases // q)
    rng.shuffle(residues)
    checks_info = [[] for _ in range(m)]
    pos = 0
    for g, d in enumerate(degrees):
        bases = set()
        for r in residues[pos: pos + d]:
            x = int(r + q * rng.integers(0, group))
            while x in bases:
                x = int(r + q * rng.integers(0, group))
            bases.add(x)
            for j in range(group):
                checks_info[(x + j * q) % m].append(g * group + j)
        pos += d
    checks = []
    for i in range(m):
        parity = [k_c + i] if i == 0 else [k_c + i - 1, k_c + i]
        checks.append(sorted(checks_info[i]) + parity)
    return LdpcCode.from_checks(n_c, k_c, checks)


def write_code(code: LdpcCode, path) -> None:
    """Write a code in the sparse text format (gz-compressed if path ends in .gz)."""
    lines = [f"{code.n_c} {code.k_c}"]
    for i in range(code.m):
        lo, hi = code.check_ptr[i], code.check_ptr[i + 1]
        lines.append(" ".join(str(v) for v in code.var_idx[lo:hi]))
    text = "\n".join(lines) + "\n"
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "wt") as fh:
            fh.write(text)
    else:
        path.write_text(text)


def toy_code_path() -> Path:
    """Bundled (16, 8) fixture code."""
    return Path(resources.files("fourdac").joinpath("data/toy_n16_k8.txt"))


def big_code_path() -> Path:
    """Bundled rate-4/5 64800-bit IRA code (DVB-S2 long-frame structure)."""
    return Path(resources.files("fourdac").joinpath("data/ira_r45_n64800.txt.gz"))
