"""Exact dense linear algebra over GF(p^k).

Matrices over prime fields are int64 residue arrays; rank uses blocked
Gaussian elimination whose trailing updates run as float64 GEMMs (exact:
every inner product is below _PANEL * (p-1)^2, far inside the float64
integer range).  GF(2) matrices additionally get a bit-packed row
representation for the elimination itself.  Extension fields store one
coefficient vector per entry and use a slower generic elimination; every
heavy computation in the pipeline is over a prime field.

Elimination mutates a private copy, so matrices are exclusively owned while
being reduced; callers may parallelize over independent matrices.
"""

from __future__ import annotations

import numpy as np

from .gf import FieldCtx

_PANEL = 256
_GEMM_CHUNK = 4_000_000  # float64 temp elements per matmul row chunk


class LinAlgError(ValueError):
    pass


class DenseMatrix:
    """rows x cols matrix over a FieldCtx.

    Prime fields: data has shape (rows, cols), entries in [0, p).
    Extension fields: shape (rows, cols, k) of coefficient vectors.
    """

    __slots__ = ("ctx", "data")

    def __init__(self, ctx: FieldCtx, data: np.ndarray):
        want_dims = 2 if ctx.k == 1 else 3
        if data.ndim != want_dims:
            raise LinAlgError(f"expected {want_dims}-d array for k={ctx.k}")
        self.ctx = ctx
        self.data = data.astype(np.int64) % ctx.p

    @classmethod
    def zeros(cls, ctx: FieldCtx, rows: int, cols: int) -> "DenseMatrix":
        shape = (rows, cols) if ctx.k == 1 else (rows, cols, ctx.k)
        return cls(ctx, np.zeros(shape, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def copy(self) -> "DenseMatrix":
        return DenseMatrix(self.ctx, self.data.copy())

    def is_square(self) -> bool:
        return self.rows == self.cols

    def frobenius_entrywise(self, e: int = 1) -> "DenseMatrix":
        """sigma^e applied to every entry (identity over prime fields)."""
        if self.ctx.k == 1 or e % self.ctx.k == 0:
            return self
        M = self.ctx.frob_matrix(e)
        return DenseMatrix(self.ctx, np.tensordot(self.data, M.T, axes=([2], [0])) % self.ctx.p)

    def __matmul__(self, other: "DenseMatrix") -> "DenseMatrix":
        if self.ctx != other.ctx or self.cols != other.rows:
            raise LinAlgError("matmul shape/field mismatch")
        return DenseMatrix(self.ctx, _matmul(self.data, other.data, self.ctx))

    def __eq__(self, other):
        return (isinstance(other, DenseMatrix) and other.ctx == self.ctx
                and other.data.shape == self.data.shape
                and bool((other.data == self.data).all()))


def _matmul(a: np.ndarray, b: np.ndarray, ctx: FieldCtx) -> np.ndarray:
    p, k = ctx.p, ctx.k
    if k == 1:
        out = np.empty((a.shape[0], b.shape[1]), dtype=np.int64)
        bf = b.astype(np.float64)
        # row-chunked so the float64 temporaries stay modest
        chunk = max(1, _GEMM_CHUNK // max(b.shape[1], 1))
        for r0 in range(0, a.shape[0], chunk):
            blk = a[r0:r0 + chunk].astype(np.float64) @ bf
            out[r0:r0 + chunk] = blk.astype(np.int64) % p
        return out
    # coefficient-vector product: convolve in t then reduce t^k.. via redmat
    raw = np.zeros((a.shape[0], b.shape[1], 2 * k - 1), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            raw[:, :, i + j] += (a[:, :, i].astype(np.float64)
                                 @ b[:, :, j].astype(np.float64)).astype(np.int64)
    out = raw[:, :, :k] % p
    red = ctx.reduction_matrix
    for s in range(k - 1):
        out += raw[:, :, k + s][:, :, None] % p * red[s][None, None, :]
    return out % p


# ---------------------------------------------------------------------------
# rank / kernel
# ---------------------------------------------------------------------------

def rank(M: DenseMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    if M.ctx.k > 1:
        return _rank_generic(M)
    if M.ctx.p == 2:
        return _rank_gf2_bitpacked(M.data)
    return _rank_blocked(M.data.copy(), M.ctx.p)


def kernel_dim(M: DenseMatrix) -> int:
    """cols - rank, by Gaussian elimination; rank + nullity = cols by construction."""
    return M.cols - rank(M)


def _rank_gf2_bitpacked(data: np.ndarray) -> int:
    """Elimination on bit-packed rows: 64 columns per word, XOR row updates."""
    rows, cols = data.shape
    nbytes = -(-cols // 8)
    nwords = -(-nbytes // 8)
    packed = np.zeros((rows, nwords * 8), dtype=np.uint8)
    packed[:, :nbytes] = np.packbits(data.astype(np.uint8), axis=1, bitorder="little")
    W = packed.view(np.uint64)  # little-endian layout: column c is bit c%64 of word c//64
    r = 0
    for c in range(cols):
        w, b = divmod(c, 64)
        col = (W[r:, w] >> np.uint64(b)) & np.uint64(1)
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            W[[r, piv]] = W[[piv, r]]
        hit = r + 1 + np.nonzero((W[r + 1:, w] >> np.uint64(b)) & np.uint64(1))[0]
        if hit.size:
            W[hit] ^= W[r]
        r += 1
        if r == rows:
            break
    return r


def _rank_blocked(Ai: np.ndarray, p: int) -> int:
    """Blocked LU-style rank over GF(p), running entirely in float64.

    Everything stays an exact integer: multipliers and pivot rows are reduced
    mod p before use, so one trailing GEMM adds at most _PANEL * (p-1)^2 in
    magnitude and entries stay below ~144 n, far inside float64's 2^53 exact
    range.  Within a panel each rank-1 update touches only columns right of
    the pivot; the pivot column stores the multipliers so row swaps keep L
    attached to the correct rows.
    """
    m, n = Ai.shape
    A = Ai.astype(np.float64)
    r = 0
    for c0 in range(0, n, _PANEL):
        c1 = min(c0 + _PANEL, n)
        panel = A[:, c0:c1]
        pivots: list[int] = []  # panel-local pivot columns; pivot rows are r0, r0+1, ...
        r0 = r
        for c in range(c1 - c0):
            if r == m:
                break
            col = panel[r:, c] % p
            nz = np.nonzero(col)[0]
            if nz.size == 0:
                continue
            piv = r + int(nz[0])
            if piv != r:
                A[[r, piv]] = A[[piv, r]]
            inv = pow(int(col[int(nz[0])]), p - 2, p)
            factors = (panel[r + 1:, c] * inv) % p
            if factors.any():
                panel[r + 1:, c + 1:] -= np.outer(factors, panel[r, c + 1:] % p)
            panel[r + 1:, c] = factors
            pivots.append(c)
            r += 1
        npiv = len(pivots)
        if r == m or c1 == n:
            break
        if npiv == 0:
            continue
        pcols = np.array(pivots, dtype=np.intp)
        # triangular solve on the pivot rows of the trailing block
        U = A[r0:r0 + npiv, c1:]
        U %= p
        for t in range(1, npiv):
            ft = panel[r0 + t, pcols[:t]]
            if ft.any():
                U[t] -= ft @ U[:t]
                U[t] %= p
        # trailing GEMM update: A[below] -= L21 @ U
        L21 = panel[r0 + npiv:, pcols]
        if L21.size and U.size:
            A[r0 + npiv:, c1:] -= L21 @ U
    return r


def _entry_nonzero(data: np.ndarray) -> np.ndarray:
    return data.any(axis=-1) if data.ndim == 3 else data != 0


def _rank_generic(M: DenseMatrix) -> int:
    R = rref(M)[0]
    return int(_entry_nonzero(R.data).any(axis=1).sum())


def rref(M: DenseMatrix) -> tuple[DenseMatrix, list[int]]:
    """Reduced row echelon form and pivot column list (small-matrix path)."""
    ctx = M.ctx
    p, k = ctx.p, ctx.k
    A = M.data.copy()
    if k == 1:
        A = A[:, :, None]
    rows, cols = A.shape[0], A.shape[1]
    # T[i, j] = coefficient vector of t^(i+j) mod the field modulus
    T = np.zeros((k, k, k), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            if i + j < k:
                T[i, j, i + j] = 1
            else:
                T[i, j] = ctx.reduction_matrix[i + j - k]
    r = 0
    pivots = []
    for c in range(cols):
        nzmask = A[r:, c].any(axis=-1)
        nz = np.nonzero(nzmask)[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = np.array(ctx.elem(tuple(int(v) for v in A[r, c])).inverse().coeffs,
                       dtype=np.int64)
        A[r] = np.einsum("i,cj,ijl->cl", inv, A[r], T) % p
        others = np.nonzero(A[:, c].any(axis=-1))[0]
        others = others[others != r]
        if others.size:
            A[others] = (A[others] - np.einsum("ri,cj,ijl->rcl", A[others, c], A[r], T)) % p
        pivots.append(c)
        r += 1
        if r == rows:
            break
    out = A[:, :, 0] if k == 1 else A
    return DenseMatrix(ctx, out), pivots


def kernel_basis(M: DenseMatrix) -> list[np.ndarray]:
    """Basis vectors of the right kernel (small-matrix path via RREF).

    Each vector has shape (cols,) for k = 1 or (cols, k) otherwise.
    """
    ctx = M.ctx
    p, k = ctx.p, ctx.k
    R, pivots = rref(M)
    free = [c for c in range(M.cols) if c not in pivots]
    data = R.data if k > 1 else R.data[:, :, None]
    basis = []
    for fc in free:
        v = np.zeros((M.cols, k), dtype=np.int64)
        v[fc, 0] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-data[r, fc]) % p
        basis.append(v[:, 0] if k == 1 else v)
    return basis


def twisted_power_kernels(M: DenseMatrix, R: int) -> list[int]:
    """Kernel dimensions of N_r = M sigma^-1(M) ... sigma^-(r-1)(M), r = 1..R.

    These are the kernel dimensions of the powers of the sigma^-1-semilinear
    operator with matrix M (over prime fields simply M^r).  The sequence is
    nondecreasing with concave increments; both are asserted.
    """
    if not M.is_square():
        raise LinAlgError("twisted powers need a square matrix")
    dims = []
    N = M
    for r in range(1, R + 1):
        if r > 1:
            N = N @ M.frobenius_entrywise(-(r - 1))
        dims.append(kernel_dim(N))
        if len(dims) >= 2:
            assert dims[-1] >= dims[-2], "kernel dimensions must be nondecreasing"
        if len(dims) >= 3:
            assert dims[-1] - dims[-2] <= dims[-2] - dims[-3], \
                "kernel increments must be concave"
        if M.cols and dims[-1] == M.cols:
            dims.extend([M.cols] * (R - r))
            break
    return dims


def kernels_to_stabilization(M: DenseMatrix, cap: int | None = None) -> list[int]:
    """Twisted-power kernel dimensions until two consecutive values agree."""
    if not M.is_square():
        raise LinAlgError("twisted powers need a square matrix")
    cap = M.cols + 1 if cap is None else cap
    dims: list[int] = []
    N = M
    for r in range(1, cap + 1):
        if r > 1:
            N = N @ M.frobenius_entrywise(-(r - 1))
        dims.append(kernel_dim(N))
        if len(dims) >= 2 and dims[-1] == dims[-2]:
            return dims
        if dims[-1] == M.cols:
            dims.append(M.cols)
            return dims
    raise LinAlgError("kernel filtration failed to stabilize within cap")
