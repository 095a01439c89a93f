"""Numeric kernel: seeded complex Gaussians, matrix-free power iteration,
Cholesky log-det, Chebyshev-weighted quadrature, small dense solves and a
Jacobi eigenvalue oracle.

Everything here is a pure function of its inputs; randomness always comes in
through an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from rmtcap.errors import DecompositionError, ParameterError, SingularSystemError

_MASK64 = (1 << 64) - 1

# stream ids reserved by the library; trial streams use STREAM_TRIAL_BASE + t
STREAM_SCENARIO = 1
STREAM_KMEANS = 2
STREAM_TRIAL_BASE = 1 << 32


def rng_stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Philox counter-based generator keyed by ``(seed, stream_id)``.

    The 128-bit Philox key is the two 64-bit words side by side, so distinct
    pairs give independent streams and the same pair replays bit-identically.
    """
    key = (int(seed) & _MASK64) | ((int(stream_id) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    return rng_stream(seed, STREAM_TRIAL_BASE + int(trial))


def sample_complex_gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """i.i.d. CN(0, 1) entries: real and imaginary parts each N(0, 1/2)."""
    if rows < 1 or cols < 1:
        raise ParameterError(f"shape must be positive, got {rows}x{cols}")
    z = rng.standard_normal((rows, 2 * cols)).view(np.complex128)
    z *= math.sqrt(0.5)
    return z


def power_method_max_eig(B: np.ndarray, iters: int = 15,
                         rng: np.random.Generator | None = None) -> float:
    """Largest eigenvalue of ``B @ B^H`` by power iteration.

    Only products with ``B`` and ``B^H`` are used; the Gram matrix is never
    formed, so each iteration costs O(rows * cols). The returned value is the
    Rayleigh quotient of the final iterate and so never exceeds the true
    maximum eigenvalue.
    """
    if iters < 1:
        raise ParameterError("iters must be >= 1")
    B = np.asarray(B)
    rows = B.shape[0]
    if rng is None:
        x = np.ones(rows, dtype=np.complex128)
    else:
        x = sample_complex_gaussian(rng, 1, rows)[0]
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        return 0.0
    x /= nrm
    for _ in range(iters):
        # x^H B is the conjugate of B^H x; avoids materialising B^H
        w = (x.conj() @ B).conj()
        y = B @ w
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
    w = x.conj() @ B
    return float(np.vdot(w, w).real)


def hermitian_cholesky(M: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L^H == M``."""
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"matrix is not positive definite: {exc}") from exc


def logdet_i_plus_gram(B: np.ndarray) -> float:
    """Natural-log ``log det(I + B B^H)`` via Cholesky."""
    B = np.asarray(B)
    S = B @ B.conj().T
    S[np.diag_indices_from(S)] += 1.0
    try:
        L = hermitian_cholesky(S)
    except DecompositionError as exc:
        raise DecompositionError(
            f"I + BB^H not positive definite for B of shape {B.shape}, "
            f"max |B| = {np.max(np.abs(B)) if B.size else 0.0:.3e}") from exc
    return float(2.0 * np.sum(np.log(np.diagonal(L).real)))


def chebyshev_nodes(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Chebyshev nodes/weights of the second kind on [-1, 1]."""
    if nodes < 1:
        raise ParameterError("nodes must be >= 1")
    theta = np.arange(1, nodes + 1) * (math.pi / (nodes + 1))
    return np.cos(theta), (math.pi / (nodes + 1)) * np.sin(theta) ** 2


def chebyshev_weighted_integral(g, a: float, b: float, nodes: int = 256) -> float:
    """Approximate the integral of ``sqrt((b-x)(x-a)) * g(x)`` over [a, b].

    ``g`` is called once with the array of quadrature abscissae. The rule is
    exact when ``g`` is a polynomial of degree <= ``2*nodes - 1``.
    """
    if not a < b:
        raise ParameterError(f"need a < b, got a={a}, b={b}")
    t, w = chebyshev_nodes(nodes)
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * t
    return float(half * half * np.dot(w, g(x)))


def solve_dense(A: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve a small square system by LU with partial pivoting.

    Returns the solution and the residual ``||A x - rhs||_inf``. Raises
    SingularSystemError when a pivot falls below ``1e-14 * ||A||_inf``.
    """
    A = np.asarray(A, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or rhs.shape != (A.shape[0],):
        raise ParameterError(f"incompatible shapes {A.shape} and {rhs.shape}")
    norm_inf = np.max(np.sum(np.abs(A), axis=1))
    lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diagonal(lu))
    if norm_inf == 0.0 or np.min(pivots) < 1e-14 * norm_inf:
        raise SingularSystemError(
            f"smallest pivot {np.min(pivots):.3e} vs ||A||_inf {norm_inf:.3e}")
    x = scipy.linalg.lu_solve((lu, piv), rhs)
    return x, float(np.max(np.abs(A @ x - rhs)))


def eig_hermitian_small(M: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Sorted eigenvalues of a small Hermitian matrix by cyclic Jacobi.

    Written independently of LAPACK so it can serve as a test oracle for the
    Cholesky and power-iteration paths.
    """
    H = np.array(M, dtype=np.complex128)
    n = H.shape[0]
    if H.ndim != 2 or H.shape[1] != n:
        raise ParameterError(f"square matrix required, got {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H)))) if n else 1.0
    if n and np.max(np.abs(H - H.conj().T)) > 1e-12 * scale:
        raise ParameterError("matrix is not Hermitian")
    H = 0.5 * (H + H.conj().T)

    def off(mat):
        return math.sqrt(max(float(np.sum(np.abs(mat) ** 2) - np.sum(np.abs(np.diagonal(mat)) ** 2)), 0.0))

    off0 = off(H)
    if off0 == 0.0:
        return np.sort(np.diagonal(H).real)
    for _ in range(max_sweeps):
        if off(H) <= tol * off0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                h = H[p, q]
                mag = abs(h)
                if mag == 0.0:
                    continue
                phase = h / mag
                app, aqq = H[p, p].real, H[q, q].real
                theta = 0.5 * math.atan2(2.0 * mag, app - aqq)
                c, s = math.cos(theta), math.sin(theta)
                # unitary U = diag(1, conj(phase)) @ [[c, -s], [s, c]]
                U = np.array([[c, -s], [s * phase.conjugate(), c * phase.conjugate()]])
                cols = H[:, [p, q]] @ U
                H[:, p], H[:, q] = cols[:, 0], cols[:, 1]
                rows = U.conj().T @ H[[p, q], :]
                H[p, :], H[q, :] = rows[0], rows[1]
                H[p, q] = H[q, p] = 0.0
    else:
        raise DecompositionError("Jacobi iteration did not converge")
    return np.sort(np.diagonal(H).real)
