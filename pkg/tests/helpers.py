"""Shared builders for randomized test instances."""

import numpy as np

from blindcrb import (
    SystemConfig,
    generate_symbols,
    make_precoder,
)


def random_unit_channel(L, rng):
    h = (rng.standard_normal(L + 1) + 1j * rng.standard_normal(L + 1)) / np.sqrt(2)
    return h / np.linalg.norm(h)


def random_instance(
    rng,
    M=4,
    L=2,
    N=3,
    sigma2=0.5,
    redundancy_kind="cp",
    inner_kind="identity",
):
    """One complete (config, precoder, h, sN) draw."""
    config = SystemConfig(
        M=M,
        L=L,
        N=N,
        sigma2=sigma2,
        redundancy_kind=redundancy_kind,
        inner_kind=inner_kind,
    )
    precoder = make_precoder(config)
    h = random_unit_channel(L, rng)
    sN = generate_symbols("qpsk", M, N, rng).sN
    return config, precoder, h, sN


def random_psd(n, rng, rank=None):
    """Random Hermitian PSD matrix B^H B, optionally rank-limited."""
    r = n if rank is None else rank
    B = rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))
    return B.conj().T @ B


def assert_psd(A, scale_tol=1e-10, msg=""):
    """Eigenvalue floor check: min eig >= -scale_tol * max eig."""
    vals = np.linalg.eigvalsh(A)
    floor = -scale_tol * max(vals[-1], 1e-300)
    assert vals[0] >= floor, f"{msg} min eig {vals[0]:.3e} below {floor:.3e}"
