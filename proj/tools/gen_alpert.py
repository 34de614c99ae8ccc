#!/usr/bin/env python3
"""Generate endpoint-corrected trapezoid rules (Alpert hybrid Gauss-trapezoid).

For a rule with j nodes x_k, weights w_k and gap a, the corrected trapezoid

    h * sum_k w_k f(x_k h) + h * sum_{i=a}^{m-b} f(i h) + (other end)

is exact for x^beta (beta < 2j) at a regular end, and for x^beta and
x^beta log x (beta < j) at a log-singular end. The moment equations are

    sum_k w_k x_k^beta          = -zeta(-beta, a)
    sum_k w_k x_k^beta log x_k  =  zeta'(-beta, a)

A randomized Levenberg-Marquardt search in double precision finds a root with
nodes in (0, a) and positive weights; mpmath then polishes it to 30 digits.

The order-10 log-end system (18 equations in 9 nodes and 9 weights) is too
ill-conditioned for that route, so log10 fixes n nodes on a quadratic grading
x_k = a ((k - 1/2) / n)^2 and takes the minimum-norm weights solving the
moment equations (linear in w). Some weights are negative; sum |w| stays small.

Usage: gen_alpert.py > include/pmlbie/alpert_tables.hpp
"""
import sys

import mpmath as mp
import numpy as np
from scipy.optimize import least_squares

mp.mp.dps = 40

# (name, nodes j, gap a, log end?)
RULES = [
    ("reg2", 1, 1, False),
    ("log2", 1, 1, True),
    ("reg6", 3, 3, False),
    ("log6", 5, 3, True),
    ("reg10", 5, 5, False),
]

# (name, moments m, gap a, fixed nodes n)
LINEAR_LOG_RULES = [
    ("log10", 9, 6, 30),
]


def equations(j, lg):
    if lg:
        return [(b, False) for b in range(j)] + [(b, True) for b in range(j)]
    return [(b, False) for b in range(2 * j)]


def rhs(eqs, a):
    return [mp.zeta(-b, a, 1) if l else -mp.zeta(-b, a) for b, l in eqs]


def search(j, a, lg, seed=1, tries=2000):
    eqs = equations(j, lg)
    t = np.array([float(v) for v in rhs(eqs, a)])
    sc = np.maximum(1.0, np.abs(t))

    def F(v):
        x = a / (1 + np.exp(-v[:j]))
        w = np.exp(v[j:])
        out = [np.sum(w * x**b * np.log(x)) if l else np.sum(w * x**b) for b, l in eqs]
        return (np.array(out) - t) / sc

    rng = np.random.default_rng(seed)
    for _ in range(tries):
        g = rng.uniform(1.5, 4.0)
        x0 = np.sort((np.arange(1, j + 1) / j) ** g * (a - rng.uniform(0.3, 1.2)) * np.exp(rng.normal(0, 0.15, j)))
        x0 = np.clip(x0, 1e-6, a - 1e-6)
        w0 = np.gradient(x0) + 0.05 if j > 1 else np.array([0.5])
        v0 = np.concatenate([np.log(x0 / (a - x0)), np.log(w0)])
        try:
            r = least_squares(F, v0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000, method="lm")
        except Exception:
            continue
        if np.max(np.abs(r.fun)) < 1e-11:
            x = a / (1 + np.exp(-r.x[:j]))
            w = np.exp(r.x[j:])
            o = np.argsort(x)
            return x[o], w[o]
    raise RuntimeError(f"no rule found for j={j} a={a} log={lg}")


def polish(j, a, lg, x, w):
    eqs = equations(j, lg)
    target = rhs(eqs, a)

    def F(*v):
        xs, ws = v[:j], v[j:]
        out = []
        for (b, l), tv in zip(eqs, target):
            if l:
                out.append(sum(ws[k] * xs[k] ** b * mp.log(xs[k]) for k in range(j)) - tv)
            else:
                out.append(sum(ws[k] * xs[k] ** b for k in range(j)) - tv)
        return out

    sol = mp.findroot(F, [mp.mpf(v) for v in x] + [mp.mpf(v) for v in w], tol=mp.mpf(10) ** -32)
    v = [sol[i] for i in range(2 * j)] if j > 1 else [sol[0], sol[1]]
    return v[:j], v[j:]


def linear_log_rule(m, a, n):
    eqs = [(b, False) for b in range(m)] + [(b, True) for b in range(m)]
    target = mp.matrix(rhs(eqs, a))
    x = [a * (mp.mpf(k) - mp.mpf(1) / 2) ** 2 / n**2 for k in range(1, n + 1)]
    A = mp.matrix(len(eqs), n)
    for r, (b, l) in enumerate(eqs):
        for k in range(n):
            A[r, k] = x[k] ** b * (mp.log(x[k]) if l else 1)
    w = A.T * mp.lu_solve(A * A.T, target)
    return x, [w[k] for k in range(n)]


def emit(out, name, a, x, w):
    j = len(x)
    out.write(f"\ninline constexpr int {name}_a = {a};\n")
    out.write(f"inline constexpr std::array<double, {j}> {name}_x = {{\n")
    out.write("".join(f"    {mp.nstr(v, 20, min_fixed=-1, max_fixed=-1)},\n" for v in x))
    out.write("};\n")
    out.write(f"inline constexpr std::array<double, {j}> {name}_w = {{\n")
    out.write("".join(f"    {mp.nstr(v, 20, min_fixed=-1, max_fixed=-1)},\n" for v in w))
    out.write("};\n")


def main():
    out = sys.stdout
    out.write("#pragma once\n")
    out.write("// Generated by tools/gen_alpert.py; do not edit.\n\n")
    out.write("#include <array>\n\nnamespace pmlbie::alpert {\n")
    for name, j, a, lg in RULES:
        x, w = search(j, a, lg)
        x, w = polish(j, a, lg, x, w)
        assert all(0 < float(v) < a for v in x) and all(float(v) > 0 for v in w)
        emit(out, name, a, x, w)
    for name, m, a, n in LINEAR_LOG_RULES:
        x, w = linear_log_rule(m, a, n)
        emit(out, name, a, x, w)
    out.write("\n}  // namespace pmlbie::alpert\n")


if __name__ == "__main__":
    main()
