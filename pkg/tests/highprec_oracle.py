"""Independent high-precision reference for the saddle-point capacity.

Used only by the test suite. Deliberately coded apart from the package:
mpmath arithmetic at 50 significant digits, and the stationarity condition
is solved by sign-change bisection on the division-free residual

    F(a) = a * (1/beta + q(t)/sqrt(a*beta)) - 1/beta,   t = -1/sqrt(a*beta),

where q(t) = -phi(t)/Q(t). F(1) < 0 for every beta and F(a) -> +inf, so a
bracket [1, hi] always exists and bisection pins the unique root. Expected
values frozen into the tests were produced by this module.
"""

from mpmath import erfc, exp, log, mp, mpf, pi, sqrt

mp.dps = 50

LN2 = log(mpf(2))


def q_tail(x):
    """Upper tail of the standard normal."""
    return erfc(x / sqrt(mpf(2))) / 2


def phi(x):
    return exp(-x * x / 2) / sqrt(2 * pi())


def tail_ratio(t):
    """-phi(t)/Q(t), the logarithmic derivative of Q."""
    return -phi(t) / q_tail(t)


def fixed_point_residual(a, beta):
    t = -1 / sqrt(a * beta)
    return a * (1 / beta + tail_ratio(t) / sqrt(a * beta)) - 1 / beta


def solve_a(beta, bisections=220):
    """Root of the stationarity condition, ~50 significant digits."""
    beta = mpf(beta)
    lo = mpf(1)
    hi = mpf(2)
    while fixed_point_residual(hi, beta) < 0:
        hi *= 2
    for _ in range(bisections):
        mid = (lo + hi) / 2
        if fixed_point_residual(mid, beta) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def rate_value(a, b, beta):
    """The exponent rate function, in nats."""
    a, b, beta = mpf(a), mpf(b), mpf(beta)
    t = (b - 1) / sqrt(a * beta)
    return (b - mpf(1) / 2 + (1 - b) ** 2 / (2 * a) + log(a) / 2) / beta + log(
        2 * q_tail(t)
    )


def capacity_bits(beta):
    a = solve_a(beta)
    return rate_value(a, 0, beta) / LN2


def saddle_summary(beta):
    """(a*, t*, capacity in nats, capacity in bits) at 50 digits."""
    beta = mpf(beta)
    a = solve_a(beta)
    t = -1 / sqrt(a * beta)
    nats = rate_value(a, 0, beta)
    return a, t, nats, nats / LN2


if __name__ == "__main__":
    for b in ("0.001", "0.05", "0.1", "0.5", "1", "2", "25/12", "10", "100"):
        beta = mpf(b) if "/" not in b else mpf(25) / mpf(12)
        a, t, nats, bits = saddle_summary(beta)
        print(f"beta={b:>6}: a*={mp.nstr(a, 20)}  t*={mp.nstr(t, 20)}")
        print(f"            C={mp.nstr(nats, 20)} nats = {mp.nstr(bits, 20)} bits")
    print()
    print("spot values:")
    print("  Q(-1)          =", mp.nstr(q_tail(mpf(-1)), 20))
    print("  q(0)           =", mp.nstr(tail_ratio(mpf(0)), 20))
    print("  q(-1)          =", mp.nstr(tail_ratio(mpf(-1)), 20))
    print("  g(1,0,0.1)     =", mp.nstr(rate_value(1, 0, mpf("0.1")), 20))
    print("  g(a*,0,1)      =", mp.nstr(rate_value(solve_a(1), 0, 1), 20))
    print("  dg/db(1,1,1)   =", mp.nstr(1 + tail_ratio(mpf(0)), 20))
