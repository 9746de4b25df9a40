"""Independent reference values for the unit tests.

Exact rational arithmetic (sympy / fractions) and arbitrary-precision
quadrature (mpmath). Prints C++ initializers that are pasted into the
tests; rerun after changing any reference case.
"""
from fractions import Fraction as F
import itertools

import mpmath as mp
import sympy as sp

mp.mp.dps = 30
x = sp.symbols("x")


def normalized_jacobi(n, a, b):
    p = sp.jacobi(n, a, b, x)
    return sp.expand(p / p.subs(x, 1))


def schedule_triples(a, b, n_max):
    """Solve pi_{n+1} = (A x + B) pi_n - C pi_{n-1} coefficientwise."""
    out = []
    for n in range(n_max + 1):
        A, B, C = sp.symbols("A B C")
        nxt = normalized_jacobi(n + 1, a, b)
        cur = normalized_jacobi(n, a, b)
        prv = normalized_jacobi(n - 1, a, b) if n > 0 else 0
        expr = sp.expand(nxt - ((A * x + B) * cur - C * prv))
        eqs = sp.Poly(expr, x).all_coeffs()
        unknowns = [A, B, C] if n > 0 else [A, B]
        sol = sp.solve(eqs, unknowns, dict=True)[0]
        out.append((sol[A], sol[B], sol.get(C, sp.Integer(0))))
    return out


def lattice_poly_field(coeffs, filt, dim):
    """sum_k coeffs[k] omega^{*k} as an exact dict offset -> Fraction."""
    total = {}
    power = {(0,) * dim: F(1)}
    for k, c in enumerate(coeffs):
        if k > 0:
            nxt = {}
            for v, w in power.items():
                for o, fw in filt.items():
                    key = tuple(a + b for a, b in zip(v, o))
                    nxt[key] = nxt.get(key, F(0)) + w * fw
            power = nxt
        for v, w in power.items():
            total[v] = total.get(v, F(0)) + F(str(c)) * w if not isinstance(c, F) else total.get(v, F(0)) + c * w
    return {v: w for v, w in total.items() if w != 0}


def poly_coeffs_fraction(p):
    coeffs = sp.Poly(p, x).all_coeffs()[::-1]
    return [F(int(sp.fraction(sp.nsimplify(c))[0]), int(sp.fraction(sp.nsimplify(c))[1])) for c in coeffs]


LAZY = {(-1,): F(1, 4), (0,): F(1, 2), (1,): F(1, 4)}
TRI = {(1, 0): F(1, 6), (-1, 0): F(1, 6), (0, 1): F(1, 6), (0, -1): F(1, 6), (1, 1): F(1, 6), (-1, -1): F(1, 6)}
STD2 = {(1, 0): F(1, 4), (-1, 0): F(1, 4), (0, 1): F(1, 4), (0, -1): F(1, 4)}


def show(title, value):
    print(f"{title} = {value}")


def main():
    print("// schedules: (alpha, beta), n -> a, b, c")
    for (a, b) in [(sp.Rational(1, 2), 0), (1, 0), (sp.Rational(3, 2), 0), (2, 0),
                   (sp.Rational(1, 4), 0), (1, sp.Rational(1, 2))]:
        for n, (A, B, C) in enumerate(schedule_triples(a, b, 3)):
            print(f"  {{{float(a)!r}, {float(b)!r}, {n}, {sp.N(A, 20)}, {sp.N(B, 20)}, {sp.N(C, 20)}}},  // {A}, {B}, {C}")

    print("// lazy 1-d Jacobi (1/2, 0) iterates, exact")
    for n in range(1, 5):
        coeffs = poly_coeffs_fraction(normalized_jacobi(n, sp.Rational(1, 2), 0))
        fld = lattice_poly_field(coeffs, LAZY, 1)
        print(f"  n={n}:", ", ".join(f"{{{v[0]}, {float(w)!r}}}" for v, w in sorted(fld.items())),
              " //", ", ".join(f"{v[0]}:{w}" for v, w in sorted(fld.items())))

    print("// triangular Jacobi (1, 0) x_2")
    coeffs = poly_coeffs_fraction(normalized_jacobi(2, 1, 0))
    fld = lattice_poly_field(coeffs, TRI, 2)
    for v, w in sorted(fld.items()):
        print(f"  {{{{{v[0]}, {v[1]}}}, {float(w)!r}}},  // {w}")

    print("// standard2 return probabilities by path enumeration")
    steps = list(STD2)
    for n in (3, 4):
        cnt = sum(1 for path in itertools.product(steps, repeat=n)
                  if tuple(map(sum, zip(*path))) == (0, 0))
        show(f"  P(return at n={n})", F(cnt, 4 ** n))

    print("// lazy 1-d Jacobi l2 at n=50, exact")
    coeffs = poly_coeffs_fraction(normalized_jacobi(50, sp.Rational(1, 2), 0))
    fld = lattice_poly_field(coeffs, LAZY, 1)
    l2 = sum(w * w for w in fld.values())
    show("  l2_50", mp.nstr(mp.mpf(l2.numerator) / l2.denominator, 20))
    show("  min value n<=50 negative", min(fld.values()) < 0)

    print("// Bessel J")
    for nu, z in [(0.5, 1.0), (1, 5.0), (1.5, 20.0), (2.5, 13.0), (0, 12.5), (3.7, 8.2), (1, 30.0), (2, 40.0), (0.25, 3.0)]:
        print(f"  {{{nu}, {z}, {mp.nstr(mp.besselj(nu, z), 20)}}},")

    print("// Jacobi P")
    for n, a, b, lam in [(5, 1, 0, 0.3), (10, 0.5, 0, -0.7), (7, 1.5, 0.5, 0.9), (200, 1, 0, 0.99), (3, 1, 0, -0.3), (3, 0, 1, 0.3)]:
        print(f"  {{{n}, {a}, {b}, {lam}, {mp.nstr(mp.jacobi(n, a, b, lam), 20)}}},")

    print("// heat kernel, triangular Q, t=3, y=(1,-2)")
    Q = mp.matrix([[mp.mpf(2) / 3, mp.mpf(1) / 3], [mp.mpf(1) / 3, mp.mpf(2) / 3]])
    y = mp.matrix([1, -2])
    t = 3
    qi = Q ** -1
    form = (y.T * qi * y)[0]
    heat = mp.exp(-form / (2 * t)) / (2 * mp.pi * t * mp.sqrt(mp.det(Q)))
    show("  heat", mp.nstr(heat, 20))

    print("// EPD density d=1, Q=1/2, t=5, y=1.3")
    for alpha in (1, 0.25, 2):
        a = mp.mpf(alpha)
        val = mp.gamma(a + 1) / (mp.sqrt(mp.pi) * mp.gamma(a + mp.mpf(1) / 2) * mp.sqrt(mp.mpf(1) / 2)) \
            * mp.mpf(5) ** (-2 * a) * (25 - 1.3 ** 2 / mp.mpf(0.5)) ** (a - mp.mpf(1) / 2)
        print(f"  alpha={alpha}: {mp.nstr(val, 20)}")
    print("// EPD density d=2, triangular Q, alpha=1.5, t=4, y=(1,-2)")
    a = mp.mpf(1.5)
    val = mp.gamma(a + 1) / (mp.pi * mp.gamma(a) * mp.sqrt(mp.det(Q))) * mp.mpf(4) ** (-2 * a) * (16 - form) ** (a - 1)
    show("  epd2", mp.nstr(val, 20))

    print("// band-limited EPD samples, d=1, alpha=1/2, Q=1/2, t=5")
    def lam_nu(nu, z):
        if z == 0:
            return mp.mpf(1)
        return mp.gamma(nu + 1) * (2 / z) ** nu * mp.besselj(nu, z)
    for v in (0, 1, 3, 4, 6):
        f = lambda s: lam_nu(mp.mpf(0.5), 5 * mp.sqrt(0.5) * s) * mp.cos(v * s)
        val = mp.quad(f, mp.linspace(0, mp.pi, 9)) / mp.pi
        print(f"  {{{v}, {mp.nstr(val, 20)}}},")
    print("// band-limited EPD samples, d=1, alpha=1/2, Q=1/2, t=20, v=0")
    f = lambda s: lam_nu(mp.mpf(0.5), 20 * mp.sqrt(0.5) * s)
    show("  t20 v0", mp.nstr(mp.quad(f, mp.linspace(0, mp.pi, 33)) / mp.pi, 20))

    print("// band-limited EPD samples, triangular Q, alpha=1, t=3")
    mp.mp.dps = 15
    for v in [(0, 0), (1, 2), (2, -1)]:
        def g(s1, s2):
            r = mp.sqrt(Q[0, 0] * s1 * s1 + 2 * Q[0, 1] * s1 * s2 + Q[1, 1] * s2 * s2)
            return lam_nu(mp.mpf(1), 3 * r) * mp.cos(s1 * v[0] + s2 * v[1])
        pts = mp.linspace(-mp.pi, mp.pi, 5)
        val = mp.quad(g, pts, pts) / (4 * mp.pi ** 2)
        print(f"  {{{{{v[0]}, {v[1]}}}, {mp.nstr(val, 14)}}},")
    mp.mp.dps = 30

    print("// sharp-rate constants")
    show("  triangular", mp.nstr(mp.gamma(2) / (mp.sqrt(mp.mpf(1) / 3) * mp.pi), 20))
    show("  lazy1d", mp.nstr(mp.gamma(mp.mpf(1.5)) / (mp.sqrt(mp.mpf(0.5)) * mp.sqrt(mp.pi)), 20))
    show("  standard2", mp.nstr(mp.gamma(2) / (mp.sqrt(mp.mpf(1) / 4) * mp.pi), 20))

    print("// aperiodicity margin, lazy 1-d, grid 256 on [-pi, pi)")
    m = min((1 - (mp.mpf(1) / 2 + mp.cos(xi) / 2)) / xi ** 2
            for xi in (-mp.pi + 2 * mp.pi * j / 256 for j in range(256)) if xi != 0)
    show("  margin", mp.nstr(m, 20))


if __name__ == "__main__":
    main()
