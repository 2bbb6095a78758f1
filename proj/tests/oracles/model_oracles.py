"""High-precision oracle values frozen into the C++ unit tests.

Independent of the C++ code path: closed forms where they exist, mpmath
quadrature and bisection otherwise. Run: python3 model_oracles.py
"""
import mpmath as mp

mp.mp.dps = 40


def tp_tail(x, a, th, s):
    return (1 + x / s) ** (-th) * mp.e ** (-a * x)


def tp_density(x, a, th, s):
    return mp.e ** (-a * x) * (a * (1 + x / s) ** (-th) + (th / s) * (1 + x / s) ** (-th - 1))


def tp_mgf(b, a, th, s):
    return mp.quad(lambda x: mp.e ** (b * x) * tp_density(x, a, th, s), [0, 1, 10, mp.inf])


def tp_mean(a, th, s):
    return mp.quad(lambda x: tp_tail(x, a, th, s), [0, 1, 10, mp.inf])


def bisect(f, lo, hi, n=200):
    flo = f(lo)
    for _ in range(n):
        mid = (lo + hi) / 2
        if (f(mid) > 0) == (flo > 0):
            lo, flo = mid, f(mid)
        else:
            hi = mid
    return (lo + hi) / 2


if __name__ == "__main__":
    print("M_TP(1,2,1)(1)      =", mp.nstr(tp_mgf(1, 1, 2, 1), 20))
    print("M_TP(1,2,1)(0.5)    =", mp.nstr(tp_mgf(mp.mpf('0.5'), 1, 2, 1), 20))
    print("M_TP(1,2,1)(-1)     =", mp.nstr(tp_mgf(-1, 1, 2, 1), 20))
    print("M_TP(1,2.5,1)(1)    =", mp.nstr(tp_mgf(1, 1, mp.mpf('2.5'), 1), 20))
    print("M_TP(1,3,1)(1)      =", mp.nstr(tp_mgf(1, 1, 3, 1), 20))
    for th in (2, mp.mpf('2.5'), 3):
        print("mu_F TP(1,%s,1)     =" % th, mp.nstr(tp_mean(1, th, 1), 20))
    # Exponential claims, lambda=1, p=2: psi(b) = b/(1-b) - 2b
    psi = lambda b: b / (1 - b) - 2 * b
    print("phi(0.75) Exp       =", mp.nstr(bisect(lambda b: psi(b) - mp.mpf('0.75'), -10, 0), 20))
    # no Lundberg root for lambda=1,p=0.5,Exp(1): grid scan
    psi2 = lambda b: b / (1 - b) - b / 2
    print("min psi2 on (0,1)   =", mp.nstr(min(psi2(mp.mpf(k) / 1000) for k in range(1, 1000)), 10))
    # TP(1,2,1), lambda=1, p=2: psi(1) = M(1)-1-2
    print("psi TP(1,2,1) p=2 a=1 =", mp.nstr(tp_mgf(1, 1, 2, 1) - 1 - 2, 20))
    # Sup mgf at infinity for TP(1,2,1), lambda=1, p=2, alpha=1
    mu = tp_mean(1, 2, 1)
    rho = mu / 2
    ghat = (tp_mgf(1, 1, 2, 1) - 1) / mu
    print("rho TP(1,2,1) p=2   =", mp.nstr(rho, 20))
    print("E e^{aXbar_inf}     =", mp.nstr((1 - rho) / (1 - rho * ghat), 20))
    # Cramer overshoot density at gamma=0 for Exp(1) claims, lambda=1,
    # alpha=0.25, p solving psi(alpha)=0: p = lambda (M(a)-1)/a = 1/(1-a)
    a = mp.mpf('0.25')
    p = 1 / (1 - a)
    dens0 = a * (1 / (p - 1)) * mp.quad(lambda y: mp.e ** (a * y) * mp.e ** (-y), [0, mp.inf])
    print("Cramer dens(0) Exp  =", mp.nstr(dens0, 20))
    # overshoot_law_infinite density for TP(1,2,1), lambda=1, p=2, alpha=1 at gamma=0.5
    g = mp.mpf('0.5')
    E = (1 - rho) / (1 - rho * ghat)
    inner = mp.quad(lambda y: mp.e ** (y) * tp_tail(y + g, 1, 2, 1), [0, 1, 10, mp.inf])
    print("ltW dens(0.5) TP    =", mp.nstr(mp.e ** (-g) / E + 1 / (2 - mu) * inner, 20))
