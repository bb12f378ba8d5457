#!/usr/bin/env python3
"""Reference run for the 1D worked example, composed from scalar closed forms.

Exact rational arithmetic; independent of the Rust implementation. Writes
paper_example.golden (one line per recorded quantity).

f = x^2/2, C = [0, 2], g(x, y) = 16y^2 + 9xy - 25x^2, S(x) = x/3, phi = 0,
lambda = 1/32, delta = 1/2, gamma = 1/3 each, beta_n = 1/2 + 1/(n+2),
alpha_{n,1} = 1/(4n), alpha_{n,i} = (1 - alpha_{n,1})/3 for i = 2, 3, 4.
x_1 = 5, anchor u = 1.
"""
from fractions import Fraction as F
import sys

LO, HI = F(0), F(2)
LAM = F(1, 32)


def clamp(t):
    return min(max(t, LO), HI)


def prox(bif_at, breg_at):
    # argmin_y lam*(16y^2 + 9*a*y) + (y - b)^2/2  ->  y = (b - 9 lam a)/(1 + 32 lam)
    return clamp((breg_at - 9 * LAM * bif_at) / (1 + 32 * LAM))


def step(n, x, u):
    a1 = F(1, 4 * n)
    a_rest = (1 - a1) / 3
    beta = F(1, 2) + F(1, n + 2)
    delta = F(1, 2)
    gam = F(1, 3)
    y = prox(x, x)
    z = prox(y, x)
    v = delta * clamp(x) + (1 - delta) * clamp(z)
    w = gam * v + gam * z + gam * (z / 3)
    un = clamp(w)
    k = beta * w + (1 - beta) * (w / 3)
    h = a1 * u + a_rest * x + a_rest * un + a_rest * k
    xn = clamp(h)
    return dict(x=x, y=y, z=z, v=v, w=w, u=un, k=k, h=h, x_next=xn)


def main(out):
    x = F(5)
    u = F(1)
    record = {1, 2, 10, 100}
    lines = []
    for n in range(1, 101):
        st = step(n, x, u)
        if n in record:
            for key in ["x", "y", "z", "v", "w", "u", "k", "h", "x_next"]:
                lines.append(f"{n} {key} {float(st[key]):.17e}")
        x = st["x_next"]
    with open(out, "w") as fh:
        fh.write("# n stage value\n")
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "paper_example.golden")
