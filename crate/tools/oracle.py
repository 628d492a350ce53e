"""Reference values for the Rust tests, computed with mpmath at 40 digits.

Run: python3 tools/oracle.py
"""
from mpmath import mp, mpf, odefun, cos, sin, log

mp.dps = 40

TAU = mpf(1)


def q(s):
    return 1 / s


def h_rhs(s, y):
    h, hp, hpp = y
    qq = q(s)
    return [hp, hpp, hpp**2 / hp + hp * (2 * qq**2 * (1 + TAU * h**2 / hp) - 2 * TAU * hp)]


def psi_t(s, p):
    # rational+: (log Q)' = -1/s
    return -1 / (2 * s) - q(s) * cos(2 * p) / 2


def psi_s(s, p):
    return -q(s) * sin(2 * p) / 2


def main():
    h = odefun(h_rhs, 1, [mpf(0), mpf(1), mpf(0)])
    print("# rational+, tau_c = 1, H(1) = 0, H'(1) = 1, H''(1) = 0")
    for s in ["1.25", "1.5", "1.75", "2"]:
        y = h(mpf(s))
        e = TAU * q(mpf(s)) ** 2 / y[1]
        print(f"s={s}: H={mp.nstr(y[0], 20)} Hp={mp.nstr(y[1], 20)} Hpp={mp.nstr(y[2], 20)} E={mp.nstr(e, 20)}")

    print("# rational+, integrated psi from psi(1, 0) = 0.3")
    for s1, t1 in [("1.5", "0.5"), ("2", "1")]:
        edge = odefun(lambda t, p: psi_t(mpf(1), p), 0, mpf("0.3"))
        p1 = edge(mpf(t1))
        line = odefun(psi_s, 1, p1)
        print(f"psi({s1}, {t1}) = {mp.nstr(line(mpf(s1)), 20)}")


if __name__ == "__main__":
    main()
