"""Small dense vector/matrix kernels shared by every engine.

Vectors are 1-D float64 numpy arrays (likelihood or belief vectors),
matrices are 2-D float64 arrays with entry (x, y) = Pr(child=y | parent=x).
All functions are pure; the optional OpCounter argument only accumulates
instrumentation counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InconsistentEvidenceError

# Below this max-entry threshold likelihood vectors / derived matrices are
# rescaled to max 1; beliefs are invariant under positive scaling.
UNDERFLOW_THRESHOLD = 1e-100


@dataclass
class OpCounter:
    """Instrumented operation counts; the testable form of complexity claims."""

    mat_vec: int = 0
    mat_mat: int = 0
    flops: int = 0

    def reset(self) -> None:
        self.mat_vec = 0
        self.mat_mat = 0
        self.flops = 0

    def snapshot(self) -> "OpCounter":
        return OpCounter(self.mat_vec, self.mat_mat, self.flops)

    def delta(self, before: "OpCounter") -> "OpCounter":
        return OpCounter(
            self.mat_vec - before.mat_vec,
            self.mat_mat - before.mat_mat,
            self.flops - before.flops,
        )


def as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {a.shape}")
    return a


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {a.shape}")
    return a


def hadamard(u, v, counter: OpCounter | None = None) -> np.ndarray:
    """Component-wise product of two equal-length vectors."""
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise DimensionError(f"hadamard length mismatch: {u.shape} vs {v.shape}")
    if counter is not None:
        counter.flops += u.size
    return u * v


def apply(m, v, counter: OpCounter | None = None) -> np.ndarray:
    """Matrix-vector product: result[x] = sum_y m[x, y] * v[y].

    Dispatches on factored matrices (anything exposing .mv) so the contraction
    and query code paths stay representation-agnostic.
    """
    if hasattr(m, "mv"):
        return m.mv(v, counter)
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise DimensionError(f"apply mismatch: {m.shape} vs {v.shape}")
    if counter is not None:
        counter.mat_vec += 1
        counter.flops += m.size
    return m @ v


def apply_transpose(m, v, counter: OpCounter | None = None) -> np.ndarray:
    """Product of a matrix's transpose with a vector (the D-alias application).

    Transposes are taken lazily here, never materialized or cached.
    """
    if hasattr(m, "mv_t"):
        return m.mv_t(v, counter)
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[0] != v.shape[0]:
        raise DimensionError(f"apply_transpose mismatch: {m.shape} vs {v.shape}")
    if counter is not None:
        counter.mat_vec += 1
        counter.flops += m.size
    return m.T @ v


def matmul(m, n, counter: OpCounter | None = None) -> np.ndarray:
    """Plain matrix product (naive cubic; matrices here are tiny)."""
    m = as_matrix(m)
    n = as_matrix(n)
    if m.shape[1] != n.shape[0]:
        raise DimensionError(f"matmul mismatch: {m.shape} vs {n.shape}")
    if counter is not None:
        counter.mat_mat += 1
        counter.flops += m.shape[0] * m.shape[1] * n.shape[1]
    return m @ n


def diag(v) -> np.ndarray:
    """Square diagonal matrix with v on the diagonal."""
    return np.diag(as_vector(v))


def normalize(v, counter: OpCounter | None = None) -> np.ndarray:
    """Scale a nonnegative vector to sum 1; zero total mass means the posted
    evidence has zero joint probability."""
    v = as_vector(v)
    s = float(v.sum())
    if s <= 0.0 or not np.isfinite(s):
        raise InconsistentEvidenceError("evidence has zero joint probability")
    if counter is not None:
        counter.flops += v.size
    return v / s


def rescale_if_tiny(v: np.ndarray) -> np.ndarray:
    """Underflow guard: rescale to max-entry 1 when the max drops below
    UNDERFLOW_THRESHOLD. No scale tracking; normalization absorbs it."""
    m = np.max(np.abs(v)) if v.size else 0.0
    if 0.0 < m < UNDERFLOW_THRESHOLD:
        return v / m
    return v


def _is_factored(m) -> bool:
    return hasattr(m, "left") and hasattr(m, "right")


def rake_compose(m_u, m_diag, m_pass, lam_e, counter: OpCounter | None = None):
    """The rake matrix equation: m_u . Diag(m_diag . lam_e) . m_pass.

    Evaluated strictly left-to-right so an incremental recomputation is
    bitwise identical to a from-scratch rebuild.  Dense operands count as one
    matrix-vector product (the diagonal vector) plus one matrix-matrix
    product; factored operands keep their factored shape (the left factor of
    m_u carries over untouched) and count every true product.
    """
    d = apply(m_diag, lam_e, counter)
    if _is_factored(m_u):
        core = m_u.right * d[np.newaxis, :]
        if counter is not None:
            counter.flops += core.size
        if _is_factored(m_pass):
            core = matmul(core, m_pass.left, counter)
            core = matmul(core, m_pass.right, counter)
        else:
            core = matmul(core, as_matrix(m_pass), counter)
        return type(m_u)(m_u.left, rescale_if_tiny(core))
    m_u = as_matrix(m_u)
    core = m_u * d[np.newaxis, :]
    if counter is not None:
        counter.flops += core.size
    if _is_factored(m_pass):
        core = matmul(core, m_pass.left, counter)
        core = matmul(core, m_pass.right, counter)
        return rescale_if_tiny(core)
    if counter is not None:
        counter.mat_mat += 1
        counter.flops += core.shape[0] * core.shape[1] * m_pass.shape[1]
    out = core @ as_matrix(m_pass)
    return rescale_if_tiny(out)
