"""Independent high-precision oracle for the square -> Q_2 map.

Upper-half-plane Schwarz-Christoffel maps in mpmath, unrelated to the strip
implementation in the package. Run directly to print the frozen values.
"""

import mpmath as mp

mp.mp.dps = 30


def q2_oracle(z=mp.mpc(0.5, 0.5)):
    # target vertices 0, 1, 1+i (at infinity), 1/2+i, 1/2+2i, 2i
    def hprime(w, x3, x4, x5):
        return (w ** -0.5 * (w - 1) ** -0.5 * (w - x3) ** 0.5
                * (w - x4) ** -0.5 * (w - x5) ** -0.5)

    def length(a, b, x3, x4, x5):
        return mp.quad(lambda t: abs(hprime(mp.mpf(t), x3, x4, x5)), [a, b])

    def eqs(u3, u4, u5):
        x5 = -mp.exp(u5)
        x4 = x5 - mp.exp(u4)
        x3 = x4 - mp.exp(u3)
        base = length(0, 1, x3, x4, x5)
        return [mp.log(length(x3, x4, x3, x4, x5) / base),
                mp.log(length(x4, x5, x3, x4, x5) / base / 0.5),
                mp.log(length(x5, 0, x3, x4, x5) / base / 2)]

    u = mp.findroot(eqs, (mp.mpf(-1), mp.mpf(-1), mp.mpf(-1)))
    x5 = -mp.exp(u[2])
    x4 = x5 - mp.exp(u[1])
    x3 = x4 - mp.exp(u[0])
    C = 1 / mp.quad(lambda t: hprime(mp.mpf(t), x3, x4, x5), [0, 1])

    # unit square: prevertices 0, 1, infinity, t
    def gprime(w, t):
        return w ** -0.5 * (w - 1) ** -0.5 * (w - t) ** -0.5

    t = -mp.exp(mp.findroot(
        lambda s: mp.log(mp.quad(lambda x: abs(gprime(mp.mpf(x), -mp.exp(s))), [-mp.exp(s), 0])
                         / mp.quad(lambda x: abs(gprime(mp.mpf(x), -mp.exp(s))), [0, 1])),
        mp.mpf(0)))
    K = 1 / mp.quad(lambda x: gprime(mp.mpf(x), t), [0, 1])

    def g(w):
        return K * mp.quad(lambda s: gprime(s * w, t) * w, [0, 1])

    w = mp.findroot(lambda w: g(w) - z, mp.mpc(0.3, 0.8))
    fprime = C * hprime(w, x3, x4, x5) / (K * gprime(w, t))
    fval = C * mp.quad(lambda s: hprime(s * w, x3, x4, x5) * w, [0, 1])
    return {"f": complex(fval), "fprime": complex(fprime), "phi": complex(fprime ** 2),
            "t": float(t), "prevertices": [float(x3), float(x4), float(x5)]}


if __name__ == "__main__":
    print(q2_oracle())
