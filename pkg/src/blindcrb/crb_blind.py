"""Cramer-Rao bound for blind channel estimation from one received frame.

The parameter vector stacks the L+1 channel taps and the NM transmitted
symbols; both are unknown to a blind receiver. The model is invariant under
the scalar exchange (h / c, c s_N), so the Fisher information is singular
and the bound is computed under the constraint that one anchor tap h[d] is
known. Two routes to the same L x L bound over the remaining taps:

* crb_direct assembles the Fisher blocks, reduces the symbol block by a
  Schur complement, deletes the anchor row/column, and inverts:
  C = inv(E_d (J00 - J01 inv(J11) J01^H) E_d^H).
* crb_fast rewrites the Schur complement through the left null space of K:
  entry (i, k) of the reduced information D is
  v_i^H (I - K pinv(K)) v_k / sigma2 where v_k = K_k s_N is a lag-k
  window of the transmitted stream x_N = (I_N kron F) s_N. The orthogonal
  projector is applied through the Q factor of a reduced QR decomposition
  (I - K pinv(K) = I - Q Q^H = Utilde Utilde^H), so D accumulates from
  L+1 projected correlations without the full left-singular basis, the
  selection matrices, or the Hankel concatenation.

Both routes reject ill-conditioned inversions instead of returning noise,
so Monte Carlo callers can count and exclude pathological draws.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import numpy as np

from .crb_core import fix_column_phases, _hermitize
from .errors import IllConditioned, RankDeficient
from .model import Precoder, build_channel_toeplitz, _k_factors

COND_LIMIT = 1e12
RANK_RTOL = 1e-10

CRB_PATHS = ("direct", "fast", "zp_per_block")


def default_anchor(h: np.ndarray) -> int:
    """Anchor tap index: the strongest tap, lowest index on ties."""
    h = np.asarray(h)
    if h.ndim != 1 or h.size == 0:
        raise ValueError("channel taps must form a nonempty 1-D array")
    return int(np.argmax(np.abs(h) ** 2))


@dataclass(frozen=True, eq=False)
class FimBlocks:
    """Fisher information of (h, s_N) in block form.

    J00 is (L+1) x (L+1) over the taps, J01 is (L+1) x NM, J11 is NM x NM
    over the symbols; the full matrix is [[J00, J01], [J01^H, J11]].
    """

    J00: np.ndarray
    J01: np.ndarray
    J11: np.ndarray
    sigma2: float

    def assembled(self) -> np.ndarray:
        """The full (L+1+NM) x (L+1+NM) Fisher information matrix."""
        top = np.hstack([self.J00, self.J01])
        bottom = np.hstack([self.J01.conj().T, self.J11])
        return np.vstack([top, bottom])


@dataclass(frozen=True, eq=False)
class NullSpaceBasis:
    """Left null space of K and its zero-padded / Hankel rearrangements.

    utilde: (NP-L) x (N-1)L orthonormal basis with K^H utilde = 0.
    ghu: utilde zero-padded by L rows top and bottom ((NP+L) x (N-1)L).
    hankels, utilde_concat: filled by hankel_rearrange; hankels[j] is the
    PN x (L+1) Hankel matrix of ghu's column j, utilde_concat stacks their
    transposes side by side into (L+1) x PN(N-1)L.
    """

    utilde: np.ndarray
    ghu: np.ndarray
    hankels: list | None = None
    utilde_concat: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class CrbResult:
    """An L x L bound over the non-anchor taps.

    C is Hermitian positive semidefinite, trace its (real) trace, d the
    anchor index that was deleted, path one of CRB_PATHS.
    """

    C: np.ndarray
    trace: float
    d: int
    path: str


def fim_blocks(K: np.ndarray, K_list, sN: np.ndarray, sigma2: float) -> FimBlocks:
    """Fisher information blocks for the observation y = K s + noise.

    K must be sum_l h[l] K_list[l]; sN is the symbol frame the information
    is evaluated at. Entries: J00[i,j] = s^H K_i^H K_j s / sigma2,
    J01[i,:] = s^H K_i^H K / sigma2, J11 = K^H K / sigma2.
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    K = np.asarray(K, dtype=np.complex128)
    sN = np.asarray(sN, dtype=np.complex128)
    if sN.shape != (K.shape[1],):
        raise ValueError(f"expected {K.shape[1]} symbols, got shape {sN.shape}")
    # Row l holds (K_l s)^T; all blocks derive from it and K.
    W = np.array([Kl @ sN for Kl in K_list])
    J00 = (W.conj() @ W.T) / sigma2
    J01 = (W.conj() @ K) / sigma2
    J11 = (K.conj().T @ K) / sigma2
    return FimBlocks(J00=_hermitize(J00), J01=J01, J11=_hermitize(J11), sigma2=sigma2)


def _delete_anchor(D: np.ndarray, d: int) -> np.ndarray:
    if not 0 <= d < D.shape[0]:
        raise ValueError(f"anchor index {d} outside 0..{D.shape[0] - 1}")
    return np.delete(np.delete(D, d, axis=0), d, axis=1)


def _invert_reduced(D: np.ndarray, d: int, path: str) -> CrbResult:
    """Delete the anchor row/column of the reduced information and invert."""
    Dd = _delete_anchor(D, d)
    cond = np.linalg.cond(Dd)
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise IllConditioned("anchor-reduced information E_d D E_d^H", float(cond))
    C = _hermitize(np.linalg.inv(Dd))
    return CrbResult(C=C, trace=float(np.real(np.trace(C))), d=d, path=path)


def _schur_reduce(blocks: FimBlocks) -> np.ndarray:
    """J00 - J01 inv(J11) J01^H, rejecting ill-conditioned symbol blocks."""
    cond = np.linalg.cond(blocks.J11)
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise IllConditioned("symbol information block J11", float(cond))
    X = np.linalg.solve(blocks.J11, blocks.J01.conj().T)
    return _hermitize(blocks.J00 - blocks.J01 @ X)


def crb_direct(blocks: FimBlocks, d: int) -> CrbResult:
    """Bound over the non-anchor taps via the explicit Schur reduction."""
    return _invert_reduced(_schur_reduce(blocks), d, "direct")


def left_null_basis(K: np.ndarray, L: int) -> NullSpaceBasis:
    """Orthonormal basis of the left null space of K, with its padding.

    K must be tall with full column rank; the basis has
    rows(K) - cols(K) columns (which equals (N-1)L for the frame model),
    ordered by the SVD's descending singular values with column phases
    fixed as in crb_core. ghu pads L zero rows above and below, which is
    exactly G^H applied to the basis.
    """
    K = np.asarray(K, dtype=np.complex128)
    if K.ndim != 2 or K.shape[0] <= K.shape[1]:
        raise ValueError(f"K must be strictly tall, got shape {K.shape}")
    if L < 1:
        raise ValueError(f"channel order must be at least 1, got {L}")
    rows, cols = K.shape
    U, s, _ = np.linalg.svd(K, full_matrices=True)
    if s[cols - 1] <= RANK_RTOL * s[0]:
        raise RankDeficient(
            f"K is column-rank-deficient (sv ratio {s[cols - 1] / s[0]:.3e})"
        )
    utilde = fix_column_phases(U[:, cols:])
    ghu = np.zeros((rows + 2 * L, rows - cols), dtype=np.complex128)
    ghu[L: L + rows] = utilde
    return NullSpaceBasis(utilde=utilde, ghu=ghu)


def hankel_rearrange(basis: NullSpaceBasis, P: int, N: int, L: int) -> NullSpaceBasis:
    """Fill the Hankel rearrangements of the padded null-space columns.

    Column j of ghu (length NP+L) becomes the PN x (L+1) Hankel matrix
    with entry (r, c) = ghu[r + c, j]; every anti-diagonal is constant and
    all entries of the column are used. utilde_concat stacks the
    transposed Hankels left to right in ascending j.
    """
    PN = P * N
    if basis.ghu.shape[0] != PN + L:
        raise ValueError(
            f"padded basis has {basis.ghu.shape[0]} rows, expected {PN + L}"
        )
    idx = np.arange(PN)[:, None] + np.arange(L + 1)[None, :]
    stacked = basis.ghu[idx, :]
    hankels = [stacked[:, :, j] for j in range(basis.ghu.shape[1])]
    concat = (
        np.concatenate([Hj.T for Hj in hankels], axis=1)
        if hankels
        else np.zeros((L + 1, 0), dtype=np.complex128)
    )
    return replace(basis, hankels=hankels, utilde_concat=concat)


def _range_basis(K: np.ndarray) -> np.ndarray:
    """Orthonormal basis of range(K) from a reduced QR decomposition.

    The rank gate works on |diag(R)|: the smallest singular value of R
    never exceeds the smallest diagonal magnitude, so a collapsed diagonal
    proves rank deficiency. Draws that slip past it are still caught by
    the conditioning gate on the reduced information.
    """
    Q, R = np.linalg.qr(K, mode="reduced")
    diag = np.abs(np.diagonal(R))
    if diag.min() <= RANK_RTOL * diag.max():
        raise RankDeficient(
            f"K is column-rank-deficient (diag ratio {diag.min() / diag.max():.3e})"
        )
    return Q


def crb_fast(
    h: np.ndarray,
    sN: np.ndarray,
    precoder: Precoder,
    d: int,
    sigma2: float,
    N: int,
) -> CrbResult:
    """Bound over the non-anchor taps via the left-null-space route.

    Builds K for the frame and accumulates the reduced information from
    lag windows of the transmitted stream projected onto the orthogonal
    complement of range(K). Agrees with crb_direct to numerical precision
    at a fraction of the cost for long frames.
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    h = np.asarray(h, dtype=np.complex128)
    sN = np.asarray(sN, dtype=np.complex128)
    P, M = precoder.F.shape
    L = h.size - 1
    if P != M + L:
        raise ValueError(
            f"channel order {L} inconsistent with precoder shape {P}x{M}"
        )
    if sN.shape != (N * M,):
        raise ValueError(f"expected {N * M} symbols, got shape {sN.shape}")
    NP = N * P
    K, _ = _k_factors(precoder.F, h, N)
    Q = _range_basis(K)
    x = (sN.reshape(N, M) @ precoder.F.T).ravel()
    # Row k is v_k = K_k s_N, a lag-k window of the stream.
    V = np.stack([x[L - k: NP - k] for k in range(L + 1)])
    projected = V.T - Q @ (Q.conj().T @ V.T)
    D = _hermitize(V.conj() @ projected) / sigma2
    return _invert_reduced(D, d, "fast")


def crb_zp_per_block(
    h: np.ndarray,
    sN: np.ndarray,
    Ftilde: np.ndarray,
    d: int,
    sigma2: float,
    M: int,
    L: int,
    N: int,
) -> CrbResult:
    """Reference bound for zero padding keeping all NP received samples.

    Zero padding decouples the blocks, so the full observation is
    y(n) = T(h) Ftilde s(n) + noise with T(h) the tall P x M convolution
    matrix; nothing is discarded, unlike the frame model which drops the
    first L samples. The result is never above the frame bound in the
    positive semidefinite order. Callers must ensure the system actually
    uses zero padding; Ftilde is the square inner precoder only.
    """
    h = np.asarray(h, dtype=np.complex128)
    sN = np.asarray(sN, dtype=np.complex128)
    Ftilde = np.asarray(Ftilde, dtype=np.complex128)
    if h.size != L + 1:
        raise ValueError(f"expected {L + 1} taps, got {h.size}")
    if Ftilde.shape != (M, M):
        raise ValueError(
            f"inner precoder must be {M}x{M}, got {Ftilde.shape}; "
            "pass the square inner precoder, not the composite"
        )
    if sN.shape != (N * M,):
        raise ValueError(f"expected {N * M} symbols, got shape {sN.shape}")
    P = M + L
    T_list = [np.eye(P, M, k=-l) for l in range(L + 1)]
    eye_N = np.eye(N)
    T = build_channel_toeplitz(h, P, M)
    K = np.kron(eye_N, T @ Ftilde)
    K_list = [np.kron(eye_N, Tl @ Ftilde) for Tl in T_list]
    blocks = fim_blocks(K, K_list, sN, sigma2)
    return _invert_reduced(_schur_reduce(blocks), d, "zp_per_block")
