"""Strongly convex objectives f with closed-form conjugates.

Two kinds are shipped, both 1-strongly convex:

* quadratic:      f(x) = 0.5||x||^2,               grad f*(z) = z
* elastic-net L1: f(x) = 0.5||x||^2 + lam*||x||_1, grad f*(z) = S_lam(z)

where S_lam is componentwise soft shrinkage. The dual pairing z in df(x)
is maintained structurally: primal iterates are only ever produced through
x = grad f*(z), so no runtime membership check is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

QUADRATIC = "quadratic"
ELASTIC_NET_L1 = "l1"


def soft_shrinkage(x, lam):
    """Componentwise max(|x_i| - lam, 0) * sgn(x_i). Requires lam >= 0."""
    if lam < 0:
        raise ValueError(f"shrinkage parameter must be non-negative, got {lam}")
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


@dataclass(frozen=True)
class Regularizer:
    """A strongly convex objective packaged as (gamma, f, f*, grad f*)."""

    kind: str
    lam: float = 0.0
    gamma: float = 1.0  # strong-convexity modulus; 1 for both shipped kinds

    def __post_init__(self):
        if self.kind not in (QUADRATIC, ELASTIC_NET_L1):
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if self.kind == ELASTIC_NET_L1 and self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        if self.kind == QUADRATIC and self.lam != 0.0:
            raise ValueError("quadratic regularizer takes no lambda")

    @classmethod
    def quadratic(cls):
        return cls(QUADRATIC)

    @classmethod
    def elastic_net(cls, lam):
        return cls(ELASTIC_NET_L1, lam=float(lam))

    @property
    def is_quadratic(self):
        return self.kind == QUADRATIC

    def value(self, x):
        """f(x)."""
        x = np.asarray(x, dtype=np.float64)
        v = 0.5 * float(x @ x)
        if self.kind == ELASTIC_NET_L1:
            v += self.lam * float(np.abs(x).sum())
        return v

    def conjugate(self, z):
        """f*(z), in closed form."""
        x = self.grad_conjugate(z)
        return 0.5 * float(np.asarray(x) @ np.asarray(x))

    def grad_conjugate(self, z):
        """grad f*(z); the identity for quadratic, soft shrinkage for L1.

        For the quadratic kind the input array is returned as-is (no copy),
        so the dual and primal iterates alias; solver steps rely on this to
        reduce exactly to their unregularized counterparts.
        """
        if self.kind == QUADRATIC:
            return z
        return soft_shrinkage(z, self.lam)


def grad_conjugate(reg: Regularizer, z):
    return reg.grad_conjugate(z)


def bregman_distance(reg: Regularizer, z, target):
    """Bregman distance D_{f,z}(grad f*(z), target) = f(target) + f*(z) - <z, target>.

    Valid when z is the dual of the current primal; bounded below by
    (gamma/2) * ||grad f*(z) - target||^2.
    """
    z = np.asarray(z, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    return reg.value(target) + reg.conjugate(z) - float(z @ target)
