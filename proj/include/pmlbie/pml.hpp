#pragma once
/**
 * @file pml.hpp
 * @brief Cylindrical PML absorption profile and complex coordinate stretching.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>

#include <boost/math/quadrature/gauss.hpp>

namespace pmlbie {

using cplx = std::complex<double>;

/**
 * @brief Smooth step used both by the absorption profile and the graded mesh.
 *
 * For x in [-1, 1] returns f1^p / (f1^p + f2^p) with
 * f1 = (1/2 - 1/p) x^3 + x/p + 1/2 and f2 = 1 - f1. The value runs from 0 to 1
 * with its first p-1 derivatives vanishing at both ends.
 */
inline double grading_step(double x, int p)
{
    const double f1 = (0.5 - 1.0 / p) * x * x * x + x / p + 0.5;
    const double f2 = 1.0 - f1;
    const double a = std::pow(f1, p), b = std::pow(f2, p);
    return a / (a + b);
}

/// d/dx of grading_step.
inline double grading_step_derivative(double x, int p)
{
    const double f1 = (0.5 - 1.0 / p) * x * x * x + x / p + 0.5;
    const double f2 = 1.0 - f1;
    const double df1 = 3.0 * (0.5 - 1.0 / p) * x * x + 1.0 / p;
    const double a = std::pow(f1, p), b = std::pow(f2, p);
    const double den = a + b;
    return p * std::pow(f1, p - 1) * std::pow(f2, p - 1) * df1 / (den * den);
}

/// Absorption layer along one axis: zero below `start`, ramps over `thickness`.
struct AbsorbingLayer {
    double start = 2.0;
    double thickness = 2.0;
    double strength = 2.0;
    int order = 6;
};

/**
 * @brief PML parameters: radial layer (a1, T, S, p) and an optional vertical one.
 *
 * The vertical layer acts on |z| and stays disabled unless configured.
 */
struct PmlProfile {
    AbsorbingLayer radial;
    std::optional<AbsorbingLayer> vertical;

    double a1() const { return radial.start; }
    double outer_radius() const { return radial.start + radial.thickness; }
};

namespace detail {

inline double layer_sigma(const AbsorbingLayer& L, double x)
{
    x = std::abs(x);
    if (x <= L.start || L.strength == 0.0) return 0.0;
    if (x >= L.start + L.thickness) return L.strength;
    const double xbar = (x - L.start - L.thickness) / L.thickness;
    // grading_step is f1^p/(f1^p+f2^p); at xbar = 0 it equals 1/2
    return 2.0 * L.strength * grading_step(xbar, L.order);
}

/// Integral of sigma over [lo, hi] for 0 <= lo, hi; signed if hi < lo.
inline double layer_integral(const AbsorbingLayer& L, double lo, double hi)
{
    if (hi < lo) return -layer_integral(L, hi, lo);
    if (L.strength == 0.0) return 0.0;
    const double r0 = L.start, r1 = L.start + L.thickness;
    double acc = 0.0;
    const double a = std::max(lo, r0), b = std::min(hi, r1);
    if (b > a) {
        using GL = boost::math::quadrature::gauss<double, 32>;
        acc += GL::integrate([&](double x) { return layer_sigma(L, x); }, a, b);
    }
    const double c = std::max(lo, r1);
    if (hi > c) acc += L.strength * (hi - c);
    return acc;
}

/// Odd extension in x of the integral from 0.
inline double layer_primitive(const AbsorbingLayer& L, double x)
{
    return x >= 0 ? layer_integral(L, 0.0, x) : -layer_integral(L, 0.0, -x);
}

}  // namespace detail

/// sigma_1(rho); zero for |rho| <= a1, S beyond a1 + T.
inline double pml_sigma(const PmlProfile& prof, double rho)
{
    return detail::layer_sigma(prof.radial, rho);
}

/// sigma_2(z); identically zero when the vertical layer is disabled.
inline double pml_sigma_vertical(const PmlProfile& prof, double z)
{
    return prof.vertical ? detail::layer_sigma(*prof.vertical, z) : 0.0;
}

struct Stretch {
    cplx rho_t, z_t;
    cplx alpha_rho, alpha_z;
};

/// Complex stretching rho~ = rho + i int_0^rho sigma_1, z~ = z + i int_0^z sigma_2.
inline Stretch stretch(const PmlProfile& prof, double rho, double z)
{
    Stretch s;
    s.rho_t = {rho, detail::layer_integral(prof.radial, 0.0, rho)};
    s.alpha_rho = {1.0, pml_sigma(prof, rho)};
    if (prof.vertical) {
        s.z_t = {z, detail::layer_primitive(*prof.vertical, z)};
        s.alpha_z = {1.0, pml_sigma_vertical(prof, z)};
    } else {
        s.z_t = z;
        s.alpha_z = 1.0;
    }
    return s;
}

/**
 * @brief rho~(a) - rho~(b) without subtracting two large imaginary parts.
 */
inline cplx stretched_rho_difference(const PmlProfile& prof, double a, double b)
{
    return {a - b, detail::layer_integral(prof.radial, b, a)};
}

inline cplx stretched_z_difference(const PmlProfile& prof, double a, double b)
{
    if (!prof.vertical) return a - b;
    const auto& L = *prof.vertical;
    double im;
    if (a >= 0 && b >= 0)
        im = detail::layer_integral(L, b, a);
    else if (a <= 0 && b <= 0)
        im = -detail::layer_integral(L, -b, -a);
    else
        im = detail::layer_primitive(L, a) - detail::layer_primitive(L, b);
    return {a - b, im};
}

}  // namespace pmlbie
