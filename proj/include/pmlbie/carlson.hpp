#pragma once
/**
 * @file carlson.hpp
 * @brief Carlson symmetric elliptic integrals R_F, R_D, R_G for complex arguments.
 *
 * Duplication algorithm; arguments must lie off the closed negative real axis
 * (at most one may be zero).
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace pmlbie {

namespace detail {
inline double max_abs3(std::complex<double> a, std::complex<double> b, std::complex<double> c)
{
    return std::max({std::abs(a), std::abs(b), std::abs(c)});
}
}  // namespace detail

inline std::complex<double> carlson_rf(std::complex<double> x, std::complex<double> y, std::complex<double> z)
{
    using C = std::complex<double>;
    constexpr double tol = 1e-3;
    C A = (x + y + z) / 3.0;
    for (int it = 0; it < 100; ++it) {
        if (detail::max_abs3(A - x, A - y, A - z) <= tol * std::abs(A)) break;
        const C sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
        const C lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        A = (x + y + z) / 3.0;
    }
    const C X = (A - x) / A, Y = (A - y) / A, Z = -(X + Y);
    const C E2 = X * Y - Z * Z, E3 = X * Y * Z;
    return (1.0 - E2 / 10.0 + E3 / 14.0 + E2 * E2 / 24.0 - 3.0 * E2 * E3 / 44.0) / std::sqrt(A);
}

/// R_D(x, y, z): the third argument carries the power 3/2.
inline std::complex<double> carlson_rd(std::complex<double> x, std::complex<double> y, std::complex<double> z)
{
    using C = std::complex<double>;
    constexpr double tol = 1e-3;
    C sum = 0.0;
    double fac = 1.0;
    C A = (x + y + 3.0 * z) / 5.0;
    for (int it = 0; it < 100; ++it) {
        if (detail::max_abs3(A - x, A - y, A - z) <= tol * std::abs(A)) break;
        const C sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
        const C lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lam));
        fac *= 0.25;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        A = (x + y + 3.0 * z) / 5.0;
    }
    const C X = (A - x) / A, Y = (A - y) / A, Z = -(X + Y) / 3.0;
    const C ea = X * Y, eb = Z * Z, ec = ea - eb, ed = ea - 6.0 * eb, ee = ed + ec + ec;
    constexpr double C1 = 3.0 / 14.0, C2 = 1.0 / 6.0, C3 = 9.0 / 22.0, C4 = 3.0 / 26.0;
    constexpr double C5 = 0.25 * C3, C6 = 1.5 * C4;
    const C series = 1.0 + ed * (-C1 + C5 * ed - C6 * Z * ee) + Z * (C2 * ee + Z * (-C3 * ec + Z * C4 * ea));
    return 3.0 * sum + fac * series / (A * std::sqrt(A));
}

/**
 * @brief R_G(0, y, z) = (1/2)[w R_F(0, v, w) + w (v - w) R_D(0, v, w) / 3],
 *        with w the argument of smaller modulus.
 */
inline std::complex<double> carlson_rg0(std::complex<double> y, std::complex<double> z)
{
    std::complex<double> v = y, w = z;
    if (std::abs(w) > std::abs(v)) std::swap(v, w);
    return 0.5 * (w * carlson_rf(0.0, v, w) + w * (v - w) * carlson_rd(0.0, v, w) / 3.0);
}

}  // namespace pmlbie
