"""Mean-field predictions for the trapped-filament squared radius.

These are deliberately reimplemented here, from the closed forms, so the
figure pipeline can draw reference curves without importing the simulation
package. Agreement between the two implementations is checked through the
CSV columns, not through shared code.
"""

import math


def r_squared_2d(beta: float, mu: float, n_filaments: int) -> float:
    """Squared cloud radius when filaments are treated as rigid lines.

    Balance of the logarithmic pair repulsion against the quadratic
    confinement gives N*beta / (4*mu), independent of the stiffness.
    """
    if beta <= 0 or mu <= 0 or n_filaments < 1:
        raise ValueError("beta and mu must be positive and n_filaments >= 1")
    return n_filaments * beta / (4.0 * mu)


def r_squared_3d(beta: float, alpha: float, mu: float, n_filaments: int) -> float:
    """Squared cloud radius with internal filament fluctuations included.

    Positive root of the quadratic stationarity condition
    4*alpha*beta*mu*x**2 - alpha*beta**2*N*x - 8 = 0 in x = R**2.
    """
    if beta <= 0 or alpha <= 0 or mu <= 0 or n_filaments < 1:
        raise ValueError("beta, alpha, mu must be positive and n_filaments >= 1")
    b = beta * beta * alpha * n_filaments
    disc = b * b + 32.0 * alpha * beta * mu
    return (b + math.sqrt(disc)) / (8.0 * alpha * beta * mu)


def beta_turning_point(alpha: float, mu: float, n_filaments: int) -> float:
    """Inverse temperature where the predicted R**2 is smallest.

    Below this point thermal wiggling inflates the cloud faster than the
    repulsion shrinks it, so R**2(beta) turns around at
    (4*mu / (alpha*N**2))**(1/3).
    """
    if alpha <= 0 or mu <= 0 or n_filaments < 1:
        raise ValueError("alpha and mu must be positive and n_filaments >= 1")
    return (4.0 * mu / (alpha * n_filaments * n_filaments)) ** (1.0 / 3.0)
