"""Independent reference values for the unit tests (mpmath, 30 digits).

Run: python3 tests/oracle/oracle.py
"""
import mpmath as mp

mp.mp.dps = 30


def gegenbauer(k, p, u):
    return mp.gegenbauer(k, p, u)


def weighted_phi(m, p):
    raw = lambda u: (1 - u * u) ** (p - mp.mpf(1) / 2) * gegenbauer(m, p, u)
    norm = mp.quad(lambda u: u**m * raw(u), [-1, 0, 1])
    return lambda u: raw(u) / norm if abs(u) < 1 else mp.mpf(0)


def bump(k):
    c = mp.quad(lambda u: (1 - u * u) ** (k + 1), [-1, 1])
    return lambda u: (1 - u * u) ** (k + 1) / c if abs(u) < 1 else mp.mpf(0)


def streamed(a, b, x, t):
    lo, hi = max(-1, x - t), min(1, x + t)
    if hi <= lo:
        return mp.mpf(0)
    return mp.quad(lambda y: a(y) * b((x - y) / t), [lo, 0, hi] if lo < 0 < hi else [lo, hi]) / t


def main():
    print("Phi_1(p=4)(0.5) =", mp.nstr(weighted_phi(1, 4)(mp.mpf("0.5")), 20))
    print("Phi_2(p=5)(0.3) =", mp.nstr(weighted_phi(2, 5)(mp.mpf("0.3")), 20))
    print("bump(1)(0.2) =", mp.nstr(bump(1)(mp.mpf("0.2")), 20))

    # m = 1 gegenbauer: net f = Phi_1(x1) b(x2) b(x3) * b(v1) b(v2) b(v3), b = bump(2)
    phi1, b2 = weighted_phi(1, 4), bump(2)
    t = mp.mpf(10)
    x = [mp.mpf(2), mp.mpf(1), mp.mpf(-1)]
    rho = streamed(phi1, b2, x[0], t) * streamed(b2, b2, x[1], t) * streamed(b2, b2, x[2], t)
    print("rho_m1(t=10, (2,1,-1)) =", mp.nstr(rho, 20))

    v = [mp.mpf("0.3"), mp.mpf("0.1"), mp.mpf("-0.2")]
    d1 = mp.diff(b2, v[0])
    print("rho_1inf_m1(0.3,0.1,-0.2) =", mp.nstr(-d1 * b2(v[1]) * b2(v[2]), 20))

    b3 = bump(3)
    d2 = mp.diff(b3, v[0], 2)
    print("rho_2inf_m2(0.3,0.1,-0.2) =", mp.nstr(d2 / 2 * b3(v[1]) * b3(v[2]), 20))

    # two softened charges
    src = [((0, 0, 0), mp.mpf(1)), ((1, 0, 0), mp.mpf("-0.5"))]
    eps = mp.mpf("0.1")
    tgt = (mp.mpf("0.3"), mp.mpf("0.4"), mp.mpf("0.2"))
    E = [mp.mpf(0)] * 3
    for pos, q in src:
        r = [tgt[i] - pos[i] for i in range(3)]
        d = (sum(c * c for c in r) + eps * eps) ** mp.mpf("1.5")
        for i in range(3):
            E[i] += q * r[i] / d / (4 * mp.pi)
    print("E_two_charges =", [mp.nstr(e, 20) for e in E])


if __name__ == "__main__":
    main()
