"""Small exact integer helpers shared by the certified computations."""

from fractions import Fraction


def iroot(x, k):
    """Return ``floor(x ** (1/k))`` for a nonnegative integer ``x``."""
    if x < 0:
        raise ValueError("iroot of a negative number")
    if k < 1:
        raise ValueError("root degree must be >= 1")
    if x < 2 or k == 1:
        return x
    # initial guess above the root, then integer Newton descent
    r = 1 << -(-x.bit_length() // k)
    while True:
        nxt = ((k - 1) * r + x // r ** (k - 1)) // k
        if nxt >= r:
            break
        r = nxt
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def ceil_div(a, b):
    return -(-a // b)


def floor_frac(q):
    q = Fraction(q)
    return q.numerator // q.denominator


def ceil_frac(q):
    q = Fraction(q)
    return -((-q.numerator) // q.denominator)


def dominated_by_geometric(values, C, num, den, guard_bits=64):
    """First ``n`` with ``values[n] > C * (num/den) ** n``, else ``None``.

    Runs a floored fixed-point chain ``b_n <= C (num/den)^n 2^g`` so each step
    is a small multiply; any apparent failure is confirmed with exact powers,
    and the chain is resynchronised when the confirmation clears it.
    """
    shift = guard_bits
    b = C << shift
    for n, x in enumerate(values):
        if n:
            b = b * num // den
        if (x << shift) > b:
            pn = num**n
            qn = den**n
            if x * qn > C * pn:
                return n
            b = (C * pn << shift) // qn
    return None
