import numpy as np
import pytest

from matherlab.phase import TORUS, HamiltonianSystem


def quadratic_integrable_system(a=0.5, b=0.3, c=0.1):
    """H(q, p) = a*p1^2/2 + b*p2^2/2 + c*p1*p2 on T*T^2 (angle-free)."""

    def value(z):
        p1, p2 = z[..., 2], z[..., 3]
        return 0.5 * a * p1 ** 2 + 0.5 * b * p2 ** 2 + c * p1 * p2

    def grad(z):
        g = np.zeros_like(z)
        g[..., 2] = a * z[..., 2] + c * z[..., 3]
        g[..., 3] = b * z[..., 3] + c * z[..., 2]
        return g

    def h0_grad(p):
        g = np.empty_like(p)
        g[..., 0] = a * p[..., 0] + c * p[..., 1]
        g[..., 1] = b * p[..., 1] + c * p[..., 0]
        return g

    return HamiltonianSystem("quadratic", TORUS, 2, value, grad,
                             h0_grad=h0_grad,
                             v_value=lambda z: np.zeros(z.shape[:-1]),
                             v_grad=lambda z: np.zeros_like(z),
                             v_momentum_free=True)


@pytest.fixture
def quadratic_system():
    return quadratic_integrable_system()
