"""Shared configuration generators for the test suite."""


def random_admissible_g1(rng, n):
    """Random (x1, x2) pairs split between the x1 < 0 and x1 >= 0 branches."""
    out = []
    for i in range(n):
        if i % 2 == 0:
            x1 = -rng.uniform(0.1, 3.0)
            x2 = x1 - rng.uniform(0.1, 3.0)
        else:
            x1 = rng.uniform(0.0, 2.0)
            x2 = -2.0 * x1 - rng.uniform(0.1, 3.0)
        out.append((x1, x2))
    return out


def theorem_admissible(x1, x2):
    """Exact admissibility rule for one interval."""
    return x1 < 0.0 or x2 < -2.0 * x1
