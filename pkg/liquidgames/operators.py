"""Collection of the scalar probability operators used throughout the code base."""

from typing import Callable, Iterable

# Absolute tolerance for comparisons against exact constants.
EPS = 1e-9

# Margin below which a utility change is treated as a tie.
TIE_TOL = 1e-12

# Accuracy of a coin toss, paid to agents trapped in a delegation cycle.
COIN = 0.5


def agreement(a: float, b: float) -> float:
    """Probability that two independent binary events agree.

    This single blend serves two roles: the proximity of two independent
    types (`a`, `b` are the marginals) and the effective accuracy of a
    delegation (`a` is the guru's accuracy, `b` the proximity).

    Args:
    ----
        a (float): First probability.
        b (float): Second probability.

    Returns:
    -------
        float: a * b + (1 - a) * (1 - b)

    Examples:
    --------
        >>> agreement(1.0, 0.25)
        0.25

    """
    return a * b + (1.0 - a) * (1.0 - b)


def composition_gap(x_k: float, x_i: float, x_s: float) -> float:
    """Error of composing two proximities through an intermediate agent.

    For independent marginals, p_{k,i} equals agreement(p_{k,s}, p_{s,i})
    plus this term.

    Args:
    ----
        x_k: Marginal of the first end point.
        x_i: Marginal of the second end point.
        x_s: Marginal of the intermediate agent.

    Returns:
    -------
        float: -2 (2 x_k - 1) (2 x_i - 1) (x_s - 1) x_s

    """
    return -2.0 * (2.0 * x_k - 1.0) * (2.0 * x_i - 1.0) * (x_s - 1.0) * x_s


def is_close(a: float, b: float, tol: float = EPS) -> bool:
    """Test if two floating point numbers are within `tol` of each other."""
    return abs(a - b) <= tol


def gt(a: float, b: float, tol: float = TIE_TOL) -> bool:
    """Strict comparison that ignores differences below `tol`.

    Args:
    ----
        a (float): Candidate value.
        b (float): Reference value.
        tol (float): Size of a difference that still counts as a tie.

    Returns:
    -------
        bool: True if a exceeds b by more than tol.

    """
    return a - b > tol


def in_unit(x: float) -> bool:
    """Check that x is a probability."""
    return 0.0 <= x <= 1.0


def mean(values: Iterable[float]) -> float:
    """Arithmetic mean, 0.0 for an empty iterable."""
    total = 0.0
    count = 0
    for v in values:
        total += v
        count += 1
    if count == 0:
        return 0.0
    return total / count


def argmax(keys: Iterable[int], score: Callable[[int], float]) -> int:
    """Return the key with the highest score, ties broken by the lowest key.

    Args:
    ----
        keys: Candidate keys, in any order.
        score: Function evaluated once per key.

    Returns:
    -------
        int: The winning key.

    Raises:
    ------
        ValueError: If `keys` is empty.

    """
    best = None
    best_score = 0.0
    for k in sorted(keys):
        s = score(k)
        if best is None or s > best_score:
            best, best_score = k, s
    if best is None:
        raise ValueError("argmax of an empty sequence")
    return best
