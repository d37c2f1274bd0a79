"""Soft-margin SVM dual solver over precomputed Gram matrices.

``train`` runs sequential pairwise optimization on the dual

    max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
    s.t.   0 <= a_i <= C,  sum_i a_i y_i = 0,

selecting the maximal-KKT-violation pair each step (ties broken by lowest
index), which makes training deterministic.  ``brute_force_qp`` solves the
same dual by projected gradient and exists purely to cross-check ``train``.
Indefinite (shot-sampled) Gram inputs are accepted; convergence is then to a
stationary KKT point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DegenerateProblemError, StructuralError
from .kernel import GramMatrix

_ALPHA_SNAP = 1e-12


@dataclass(frozen=True)
class SvmModel:
    """Trained dual solution: coefficients, labels, bias, and support set."""

    dual_coeffs: np.ndarray
    labels: np.ndarray
    bias: float
    support_indices: np.ndarray
    box_bound: float

    @property
    def support_count(self) -> int:
        return int(self.support_indices.size)


def _as_matrix(gram) -> np.ndarray:
    if isinstance(gram, GramMatrix):
        return np.asarray(gram.entries, dtype=np.float64)
    matrix = np.asarray(gram, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise StructuralError("gram must be a square matrix")
    if not np.allclose(matrix, matrix.T, atol=1e-12, rtol=0.0):
        raise ContractViolationError("gram matrix must be symmetric")
    return matrix


def _check_labels(labels, size: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != (size,):
        raise StructuralError(f"expected {size} labels, got shape {labels.shape}")
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise StructuralError("labels must be +1 or -1")
    if np.all(labels == 1.0) or np.all(labels == -1.0):
        raise DegenerateProblemError("both classes must be present")
    return labels


def kkt_gap(gram, labels, alpha: np.ndarray, box_bound: float) -> float:
    """Largest KKT violation m(a) - M(a); <= 0 means the KKT conditions hold."""
    K = _as_matrix(gram)
    y = np.asarray(labels, dtype=np.float64)
    u = K @ (alpha * y)
    g = y - u
    up = ((y > 0) & (alpha < box_bound)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < box_bound))
    m_up = np.max(g[up]) if np.any(up) else -np.inf
    m_low = np.min(g[low]) if np.any(low) else np.inf
    return float(m_up - m_low)


def dual_objective(gram, labels, alpha: np.ndarray) -> float:
    K = _as_matrix(gram)
    y = np.asarray(labels, dtype=np.float64)
    v = alpha * y
    return float(np.sum(alpha) - 0.5 * v @ K @ v)


def train(
    gram,
    labels,
    box_bound: float = 1.0,
    tol: float = 1e-8,
    max_iterations: int | None = None,
    objective_history: list | None = None,
) -> SvmModel:
    """Solve the soft-margin dual by deterministic pairwise optimization.

    Terminates when every KKT violation is at most ``tol``.  If
    ``objective_history`` is a list, the dual objective after every pair
    update is appended to it (it is non-decreasing).
    """
    K = _as_matrix(gram)
    m = K.shape[0]
    y = _check_labels(labels, m)
    C = float(box_bound)
    if C <= 0.0:
        raise StructuralError("box bound must be positive")
    if max_iterations is None:
        max_iterations = max(2000, 400 * m)

    alpha = np.zeros(m)
    u = np.zeros(m)  # u_i = sum_j alpha_j y_j K_ij, maintained incrementally
    for _ in range(max_iterations):
        g = y - u
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not np.any(up) or not np.any(low):
            break
        g_up = np.where(up, g, -np.inf)
        g_low = np.where(low, g, np.inf)
        i = int(np.argmax(g_up))  # argmax/argmin take the lowest index on ties
        j = int(np.argmin(g_low))
        if g_up[i] - g_low[j] <= tol:
            break

        # Two-variable analytic step in (alpha_i, alpha_j).
        s = y[i] * y[j]
        if s < 0:
            lo, hi = max(0.0, alpha[j] - alpha[i]), min(C, C + alpha[j] - alpha[i])
        else:
            lo, hi = max(0.0, alpha[j] + alpha[i] - C), min(C, alpha[j] + alpha[i])
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        e_diff = (u[i] - y[i]) - (u[j] - y[j])
        if eta > 1e-15:
            aj_new = np.clip(alpha[j] + y[j] * e_diff / eta, lo, hi)
        else:
            # Indefinite direction: evaluate the restricted objective at both ends.
            aj_new = _endpoint_step(K, y, alpha, u, i, j, lo, hi)
        ai_new = alpha[i] + s * (alpha[j] - aj_new)
        di, dj = ai_new - alpha[i], aj_new - alpha[j]
        if abs(dj) < 1e-14 * (abs(aj_new) + abs(alpha[j]) + 1.0):
            break  # no representable progress on the worst pair
        alpha[i], alpha[j] = ai_new, aj_new
        u += di * y[i] * K[:, i] + dj * y[j] * K[:, j]
        if objective_history is not None:
            objective_history.append(float(np.sum(alpha) - 0.5 * (alpha * y) @ u))
    else:
        warnings.warn("pairwise solver hit the iteration cap before reaching tol")

    alpha[alpha < _ALPHA_SNAP] = 0.0
    alpha[alpha > C - _ALPHA_SNAP] = C
    u = K @ (alpha * y)
    bias = _compute_bias(alpha, y, u, C)
    support = np.flatnonzero(alpha > 0.0)
    return SvmModel(
        dual_coeffs=alpha,
        labels=y,
        bias=bias,
        support_indices=support,
        box_bound=C,
    )


def _endpoint_step(K, y, alpha, u, i, j, lo, hi) -> float:
    s = y[i] * y[j]
    best_val, best_aj = -np.inf, alpha[j]
    for aj in (lo, hi):
        dj = aj - alpha[j]
        di = -s * dj
        # Restricted dual objective change for the (i, j) move.
        delta = (
            di + dj
            - di * y[i] * u[i] - dj * y[j] * u[j]
            - 0.5 * (di * di * K[i, i] + dj * dj * K[j, j])
            - di * dj * y[i] * y[j] * K[i, j]
        )
        if delta > best_val + 1e-15:
            best_val, best_aj = delta, aj
    if best_val <= 0.0:
        return alpha[j]
    return best_aj


def _compute_bias(alpha, y, u, C) -> float:
    free = (alpha > 0.0) & (alpha < C)
    g = y - u
    if np.any(free):
        return float(np.mean(g[free]))
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    m_up = np.max(g[up]) if np.any(up) else 0.0
    m_low = np.min(g[low]) if np.any(low) else 0.0
    return float((m_up + m_low) / 2.0)


def decide(model: SvmModel, kernel_row) -> tuple[float, int]:
    """Decision score and label for one datum given its kernel row.

    ``kernel_row[i]`` is the kernel of the datum with training point i; the
    score is sum_i a_i y_i k_i + b and ties go to +1.
    """
    row = np.asarray(kernel_row, dtype=np.float64)
    if row.shape != model.dual_coeffs.shape:
        raise StructuralError(
            f"kernel row length {row.shape} does not match training size "
            f"{model.dual_coeffs.shape}"
        )
    score = float(np.dot(model.dual_coeffs * model.labels, row) + model.bias)
    return score, (1 if score >= 0.0 else -1)


def _project_box_hyperplane(beta: np.ndarray, y: np.ndarray, C: float) -> np.ndarray:
    """Project onto {0 <= a <= C, y . a = 0} by bisection on the multiplier."""
    span = float(np.max(np.abs(beta))) + C + 1.0

    def constraint(nu):
        return float(y @ np.clip(beta - nu * y, 0.0, C))

    lo, hi = -span, span
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if constraint(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return np.clip(beta - ((lo + hi) / 2.0) * y, 0.0, C)


def brute_force_qp(
    gram,
    labels,
    box_bound: float,
    tol: float = 1e-10,
    max_iterations: int = 500_000,
) -> SvmModel:
    """Dense projected-gradient solution of the same dual; validation oracle only.

    Deliberately slow and refused above m = 8.
    """
    K = _as_matrix(gram)
    m = K.shape[0]
    if m > 8:
        raise StructuralError("brute-force QP oracle is limited to m <= 8")
    y = _check_labels(labels, m)
    C = float(box_bound)
    if C < 0.0:
        raise StructuralError("box bound must be non-negative")
    if C == 0.0:
        warnings.warn("box bound 0 forces the degenerate all-zero dual solution")
        alpha = np.zeros(m)
        return SvmModel(alpha, y, 0.0, np.flatnonzero(alpha > 0), C)

    Q = np.outer(y, y) * K
    step = 1.0 / max(float(np.max(np.abs(np.linalg.eigvalsh(Q)))), 1e-12)
    alpha = np.zeros(m)
    for _ in range(max_iterations):
        grad = 1.0 - Q @ alpha
        alpha_new = _project_box_hyperplane(alpha + step * grad, y, C)
        alpha = alpha_new
        if kkt_gap(K, y, alpha, C) <= tol:
            break
    else:
        warnings.warn("projected gradient hit the iteration cap before reaching tol")

    alpha = alpha.copy()
    alpha[alpha < _ALPHA_SNAP] = 0.0
    alpha[alpha > C - _ALPHA_SNAP] = C
    u = K @ (alpha * y)
    bias = _compute_bias(alpha, y, u, C)
    return SvmModel(alpha, y, bias, np.flatnonzero(alpha > 0.0), C)
