"""Independent high-precision oracle for the frozen expected values in the C++ unit tests.

Run: python3 tests/oracles/frozen_values.py
Uses mpmath at 50 digits; none of the C++ code paths are involved.
"""
import mpmath as mp

mp.mp.dps = 50


def phi(x):
    if mp.isinf(x):
        return mp.mpf(0)
    return mp.npdf(x)


def Phi(x):
    return mp.ncdf(x)


def Phiinv(p):
    if p == 0:
        return -mp.inf
    if p == 1:
        return mp.inf
    return mp.sqrt(2) * mp.erfinv(2 * p - 1)


def chi2cdf(x, df):
    return mp.gammainc(mp.mpf(df) / 2, 0, mp.mpf(x) / 2, regularized=True)


def scores(pi):
    c = [mp.mpf(0)]
    for v in pi:
        c.append(c[-1] + v)
    c[-1] = mp.mpf(1)
    return [(phi(Phiinv(c[j])) - phi(Phiinv(c[j + 1]))) / pi[j] for j in range(len(pi))]


def probs_from_cuts(cuts, delta=0):
    b = [-mp.inf] + [mp.mpf(x) - delta for x in cuts] + [mp.inf]
    return [Phi(b[j + 1]) - Phi(b[j]) for j in range(len(b) - 1)]


def zhang(u):
    p = len(u)
    s = sorted(u)
    t = mp.mpf(0)
    for i, v in enumerate(s, start=1):
        if v >= (mp.mpf(i) - mp.mpf(3) / 4) / p:
            t += mp.log((1 / v - 1) / ((p - mp.mpf(1) / 2) / (i - mp.mpf(3) / 4) - 1)) ** 2
    return t


print("normal_pdf(0)", phi(0), "normal_pdf(-1)", phi(-1))
print("normal_cdf(-1)", Phi(-1), "normal_cdf(0.8)", Phi(mp.mpf("0.8")))
print("normal_quantile(0.975)", Phiinv(mp.mpf("0.975")))
print("logistic_quantile(0.9)", mp.log(9))
print("chi2(3.841459,1)", chi2cdf(mp.mpf("3.841459"), 1))
print("chi2(9.487729,4)", chi2cdf(mp.mpf("9.487729"), 4))
pi = probs_from_cuts([-1.0, 0.2, 0.8])
print("pi0(cuts)", [mp.nstr(v, 17) for v in pi])
a = scores(pi)
print("alpha(cuts)", [mp.nstr(v, 17) for v in a])
print("alpha(0.5,0.5)", [mp.nstr(v, 17) for v in scores([mp.mpf("0.5")] * 2)])
print("pi(delta=0.1)", [mp.nstr(v, 17) for v in probs_from_cuts([-1.0, 0.2, 0.8], mp.mpf("0.1"))])
quad = sum(pi[j] * a[j] ** 2 for j in range(4)) - sum(pi[j] * a[j] for j in range(4)) ** 2
n = [10, 40, 25, 25]
an = sum(a[j] * n[j] for j in range(4))
print("alpha.n", mp.nstr(an, 17), "aLa", mp.nstr(quad, 17), "R", mp.nstr(an ** 2 / (100 * quad), 17))
print("lrt nominal [60,40]", mp.nstr(2 * (60 * mp.log(mp.mpf("1.2")) + 40 * mp.log(mp.mpf("0.8"))), 17))
print("lrt nominal [100,0]", mp.nstr(200 * mp.log(2), 17))
A = 2 * (51 * mp.log(mp.mpf("1.02")) + 49 * mp.log(mp.mpf("0.98")))
print("smoothed [51,49]", mp.nstr(A, 17), "U", mp.nstr(chi2cdf(19 * A, 1), 17))
print("normalize(3.841459, df1, lam1)", mp.nstr(chi2cdf(mp.mpf("3.841459"), 1), 17))
print("zhang [0.5,0.9]", mp.nstr(zhang([mp.mpf("0.5"), mp.mpf("0.9")]), 17))
print("zhang [0.05,0.3,0.55,0.8]", zhang([mp.mpf(x) for x in ["0.05", "0.3", "0.55", "0.8"]]))
print("zhang [0.5]", zhang([mp.mpf("0.5")]))
