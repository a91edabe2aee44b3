"""Convergence-rate constants and expectation bounds for the combined
algorithms, so experiments can be checked quantitatively.

Constants:

    alpha = 1 - sigma_min(A)^2 / ||A||_F^2        (RK / RGS rate)
    beta  = 1 - gamma * nu / (2 ||B||_F^2)        (regularized inner rate)
    rho   = max(alpha, beta)

nu is the admissibility constant of the Bregman-vs-residual inequality
D_{f,z}(x, x_star) <= (1/nu) ||B (x - x_star)||^2. It has a closed form
only for the quadratic objective (nu = 2 sigma_min(B^T)^2, smallest
nonzero singular value); for elastic-net it must be supplied by the user.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dense import DenseMatrix, sigma_min


@dataclass(frozen=True)
class RateConstants:
    alpha: float
    beta: float
    delta: float
    nu: float | None = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    @property
    def rho(self):
        return max(self.alpha, self.beta)


def alpha_of(A: DenseMatrix) -> float:
    """1 - sigma_min(A)^2 / ||A||_F^2; in [0, 1) for full column rank."""
    return 1.0 - sigma_min(A) ** 2 / A.frob_sq


def nu_quadratic(B: DenseMatrix) -> float:
    """Admissibility constant for f = 0.5||x||^2: nu = 2 sigma_min(B^T)^2.

    B is l x n with full row rank; sigma_min is the smallest nonzero
    singular value, computed on B^T. The induced beta equals the RK rate
    on B, 1 - sigma_min^2 / ||B||_F^2."""
    return 2.0 * sigma_min(B.transpose()) ** 2


def beta_of(B_frob_sq, gamma, nu) -> float:
    beta = 1.0 - gamma * nu / (2.0 * B_frob_sq)
    if beta < 0:
        import warnings
        warnings.warn(f"gamma*nu = {gamma * nu} exceeds 2||B||_F^2 = "
                      f"{2 * B_frob_sq}; beta = {beta} is negative")
    return beta


def default_delta(gamma, rho) -> float:
    """Midpoint of the admissible interval (0, gamma*(1/rho - 1))."""
    if not 0 < rho < 1:
        raise ValueError(f"need 0 < rho < 1, got {rho}")
    return 0.5 * gamma * (1.0 / rho - 1.0)


def theorem_bound(consts: RateConstants, D0, lhs_norm_sq, B_frob_sq,
                  gamma, k) -> float:
    """Exact finite-sum expectation bound on the Bregman distance after k
    combined steps:

        (1 + d/g)^k b^k D0
        + (d+g)g / (2 d ||B||_F^2) * lhs * sum_{i=0}^{k-1} a^{k-i} (1+d/g)^i b^i

    with a = alpha, b = beta, d = delta, g = gamma. For the consistent
    combination lhs = ||A^+ b||^2; for the inconsistent one lhs =
    ||A^+||^2 * ||A A^+ b||^2. No geometric-series shortcut, so the value
    is valid even when (1 + d/g) b >= 1.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    a, bta, d = consts.alpha, consts.beta, consts.delta
    growth = 1.0 + d / gamma
    total = growth ** k * bta ** k * D0
    coeff = (d + gamma) * gamma / (2.0 * d * B_frob_sq) * lhs_norm_sq
    acc = 0.0
    for i in range(k):
        acc += a ** (k - i) * growth ** i * bta ** i
    return total + coeff * acc


def simplified_bound(consts: RateConstants, D0, lhs_norm_sq, B_frob_sq,
                     gamma, k) -> float:
    """Single-rate envelope, valid when (1 + delta/gamma) * rho < 1:

        (1 + d/g)^k rho^k * (D0 + (d+g) g^2 / (2 d^2 ||B||_F^2) * lhs)

    Dominates theorem_bound pointwise on its admissible domain.
    """
    d = consts.delta
    rho = consts.rho
    growth = 1.0 + d / gamma
    if growth * rho >= 1.0:
        hi = gamma * (1.0 / rho - 1.0)
        raise ValueError(
            f"(1 + delta/gamma) * rho = {growth * rho} >= 1; "
            f"admissible delta range is (0, {hi})"
        )
    extra = (d + gamma) * gamma ** 2 / (2.0 * d ** 2 * B_frob_sq) * lhs_norm_sq
    return growth ** k * rho ** k * (D0 + extra)
