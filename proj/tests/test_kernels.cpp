#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <pmlbie/kernels.hpp>

#include "oracles.hpp"

using namespace pmlbie;

namespace {

PmlProfile default_profile()
{
    PmlProfile p;
    p.radial = {2.0, 2.0, 2.0, 6};
    return p;
}

StretchedPoint pt(double rho, double z, double nr = 0.0, double nz = -1.0, const PmlProfile& prof = default_profile())
{
    const double n = std::hypot(nr, nz);
    return make_point(prof, rho, z, nr / n, nz / n);
}

double max_abs(const std::vector<cplx>& v)
{
    double m = 0.0;
    for (auto x : v) m = std::max(m, std::abs(x));
    return m;
}

double mode_error(const std::vector<cplx>& a, const std::vector<cplx>& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e / max_abs(b);
}

ModalKernelOptions options(int nmax)
{
    ModalKernelOptions o;
    o.nmax = nmax;
    o.h_len = 0.01;
    return o;
}

}  // namespace

TEST(ComplexDistance, EuclideanForPhysicalPoints)
{
    const StretchedPoint p = pt(0.7, -0.3), q = pt(1.4, 0.2);
    const ComplexDistance c = complex_distance(p, q, kPi, default_profile());
    // (0.7, 0, -0.3) and (-1.4, 0, 0.2)
    EXPECT_NEAR(c.full.real(), std::hypot(2.1, 0.5), 1e-15);
    EXPECT_EQ(c.full.imag(), 0.0);
    EXPECT_NEAR(c.meridian.real(), std::hypot(0.7, 0.5), 1e-15);
}

TEST(ComplexDistance, SamePointQuarterTurn)
{
    const StretchedPoint p = pt(3.1, 0.0);
    const ComplexDistance c = complex_distance(p, p, kPi / 2, default_profile());
    EXPECT_NEAR(std::abs(c.full - p.rho_t * std::sqrt(2.0)), 0.0, 1e-14);
    EXPECT_THROW(complex_distance(p, p, 0.0, default_profile()), NumericalError);
}

TEST(ComplexDistance, PmlPairSmallAngleAgainstExtendedPrecision)
{
    const PmlProfile prof = default_profile();
    const StretchedPoint p = pt(3.9, 0.0), q = pt(3.9 + 1e-7, 0.0);
    const oracle::Pair op = oracle::make_pair(p, q, prof);
    for (double dt : {1e-6, 1e-4, 1e-2}) {
        const cplx v = complex_distance(p, q, dt, prof).full;
        const std::complex<double> ref = oracle::distance(op, dt);
        EXPECT_LT(std::abs(v - ref) / std::abs(ref), 1e-12) << dt;
        EXPECT_GE(v.real(), 0.0);
    }
}

TEST(ComplexDistance, DecayingBranchInPml)
{
    const PmlProfile prof = default_profile();
    for (double r1 : {0.5, 2.5, 3.3, 4.0})
        for (double r2 : {1.0, 3.0, 4.0})
            for (double dt : {0.1, 1.0, 3.0}) {
                const cplx R = complex_distance(pt(r1, -0.2), pt(r2, 0.0), dt, prof).full;
                EXPECT_GE(R.real(), 0.0);
                EXPECT_GE((2 * kPi * R).imag(), -1e-14);
            }
}

TEST(KernelSplit, LaplaceLimit)
{
    const StretchedPoint p = pt(0.6, -0.4), q = pt(1.0, -1.0, 0.0, -1.0);
    const KernelSplit k = kernel_split(p, q, 0.8, 0.0, default_profile());
    EXPECT_EQ(k.H1, cplx(1.0));
    EXPECT_EQ(k.H2, cplx(0.0));
    EXPECT_EQ(k.H3, cplx(1.0));
    EXPECT_EQ(k.H4, cplx(0.0));
    EXPECT_NEAR(std::abs(k.Z - 1.0 / (4 * kPi * k.R)), 0.0, 1e-16);
}

TEST(KernelSplit, ReassemblyIdentities)
{
    const PmlProfile prof = default_profile();
    const double w = 2 * kPi;
    const std::vector<std::pair<StretchedPoint, StretchedPoint>> pairs{
        {pt(0.6, -0.4), pt(1.0, -0.7, 1.0, 0.0)},
        {pt(0.2, -1.0), pt(1.0, -0.2, 1.0, 0.0)},
        {pt(2.6, 0.0), pt(3.5, 0.0)},
        {pt(1.0, -0.5, 1.0, 0.0), pt(3.9, 0.0)},
    };
    for (const auto& [p, q] : pairs) {
        const oracle::Pair op = oracle::make_pair(p, q, prof);
        for (double dt : {0.0, 0.3, 2.0}) {
            const KernelSplit k = kernel_split(p, q, dt, w, prof);
            const std::complex<double> g(oracle::green(op, w, dt));
            const std::complex<double> gn(oracle::green_dn(op, w, dt));
            // inside the layer |H1| ~ |H2| >> |H1 + i H2|; the identity holds to the size of the parts
            const double sg = std::abs(k.Z) * (std::abs(k.H1) + std::abs(k.H2));
            const double sd = std::abs(k.D) * (std::abs(k.H3) + std::abs(k.H4));
            EXPECT_LE(std::abs(k.Z * (k.H1 + kI * k.H2) - g), 1e-12 * sg);
            EXPECT_LE(std::abs(k.D * (k.H3 + kI * k.H4) - gn), 1e-12 * sd);
        }
    }
}

TEST(KernelSplit, DerivativeMatchesFiniteDifference)
{
    // physical points: K~ is the ordinary normal derivative at the source
    const PmlProfile prof = default_profile();
    const double w = 2 * kPi, dt = 0.7, e = 1e-6;
    const double nr = 0.6, nz = -0.8;
    const StretchedPoint p = pt(0.5, -0.2), q = pt(1.1, -0.9, nr, nz);
    const KernelSplit k = kernel_split(p, q, dt, w, prof);
    auto G = [&](double rs, double zs) {
        const KernelSplit kk = kernel_split(p, pt(rs, zs), dt, w, prof);
        return kk.Z * (kk.H1 + kI * kk.H2);
    };
    const cplx fd = (G(1.1 + e * nr, -0.9 + e * nz) - G(1.1 - e * nr, -0.9 - e * nz)) / (2 * e);
    EXPECT_LT(std::abs(k.D * (k.H3 + kI * k.H4) - fd), 1e-7 * std::abs(fd));
}

TEST(KernelSplit, TrigonometricFactorsGrowInPml)
{
    // pairs with Im q = 3, 8, 12: H1 is cosh-sized while cH1 / e^{iq} only grows like a polynomial in q
    const double w = 2 * kPi;
    const StretchedPoint p = pt(4.0, 0.0), q = pt(4.0, 0.0);
    const PmlProfile prof = default_profile();
    const TaylorSubstitute ts = taylor_substitute(5);
    for (double target : {3.0, 8.0, 12.0}) {
        double dt = 0.5;
        KernelSplit k;
        for (int it = 0; it < 100; ++it) {
            k = kernel_split(p, q, dt, w, prof);
            const double f = k.q.imag() - target;
            if (std::abs(f) < 1e-12) break;
            const double e = 1e-7;
            const double df = (kernel_split(p, q, dt + e, w, prof).q.imag() - k.q.imag()) / e;
            dt -= f / df;
        }
        ASSERT_NEAR(k.q.imag(), target, 1e-9);
        const double eq = std::abs(std::exp(kI * k.q));
        EXPECT_GT(std::abs(k.H1), 0.4 * std::cosh(target));
        double poly = 0.0;
        for (int j = 0; j <= 5; ++j) poly += std::abs(ts.a[j]) * std::pow(std::abs(k.q), j);
        EXPECT_LE(std::abs(ts.cH1(k.q)) / eq, poly * (1 + 1e-12));
        if (target >= 12.0) EXPECT_LT(std::abs(ts.cH1(k.q)), 1e-2 * std::abs(k.H1));
    }
}

TEST(Taylor, CoefficientsMatchContourOracle)
{
    // Taylor coefficients of h(q) = H(q) e^{-iq} by the trapezoid rule on |q| = 1
    const int L = 10, M = 64;
    const TaylorSubstitute ts = taylor_substitute(L);
    auto h1 = [](cplx q) { return std::cos(q) * std::exp(-kI * q); };
    auto h3 = [](cplx q) { return (std::cos(q) + q * std::sin(q)) * std::exp(-kI * q); };
    for (int k = 0; k <= L; ++k) {
        cplx c1 = 0.0, c3 = 0.0;
        for (int j = 0; j < M; ++j) {
            const cplx z = std::polar(1.0, 2 * kPi * j / M);
            c1 += h1(z) * std::pow(z, -k);
            c3 += h3(z) * std::pow(z, -k);
        }
        c1 /= double(M);
        c3 /= double(M);
        EXPECT_LT(std::abs(ts.a[k] - c1), 1e-14) << k;
        EXPECT_LT(std::abs(ts.b[k] - c3), 1e-14) << k;
    }
    EXPECT_EQ(ts.a[0], cplx(1.0));
    double f = 1.0;
    for (int k = 1; k <= L; ++k) {
        f *= k;
        EXPECT_LT(std::abs(ts.a[k] - std::pow(cplx(0, -2), k) / (2 * f)), 1e-15);
    }
    EXPECT_EQ(taylor_substitute(5).L, 5);
    EXPECT_THROW(taylor_substitute(-1), ConfigError);
}

TEST(Taylor, ComplementsPreserveSums)
{
    const TaylorSubstitute ts = taylor_substitute(5);
    for (cplx q : {cplx(0.1, 0.0), cplx(2.0, 0.5), cplx(-1.3, 4.0), cplx(7.0, 12.0)}) {
        const cplx e = std::exp(kI * q);
        EXPECT_LT(std::abs(ts.cH1(q) + ts.complement1(q) - e), 1e-14 * std::max(1.0, std::abs(ts.cH1(q))));
        EXPECT_LT(std::abs(ts.cH3(q) + ts.complement3(q) - (1.0 - kI * q) * e),
                  1e-14 * std::max(1.0, std::abs(ts.cH3(q))));
    }
}

TEST(Taylor, TruncationResidual)
{
    for (int L : {3, 5, 8})
        for (double r : {0.05, 0.2, 0.5}) {
            const cplx q = std::polar(r, 0.7);
            const TaylorSubstitute ts = taylor_substitute(L);
            const double res = std::abs(ts.cH1(q) - std::cos(q));
            EXPECT_LT(res, 2.0 * std::pow(2 * r, L + 1) / std::tgamma(L + 2)) << L << " " << r;
        }
}

TEST(Laplace, ZeroModeAgainstQuadrature)
{
    const PmlProfile prof = default_profile();
    KernelWorkspace ws;
    const StretchedPoint p = pt(0.6, -0.4), q = pt(1.0, -0.75, 1.0, 0.0);
    const LaplaceModes lm = laplace_modal_kernels(p, q, 8, prof, ws);
    const oracle::Modes om = oracle::modal_kernels(p, q, 0.0, 8, prof);
    for (int n = 0; n <= 8; ++n) {
        EXPECT_LT(std::abs(lm.Z[n] - om.S[n]), 1e-12 * std::abs(om.S[0])) << n;
        EXPECT_LT(std::abs(lm.D[n] - om.K[n]), 1e-12 * max_abs(om.K)) << n;
    }
}

TEST(Laplace, GeometricDecayInMode)
{
    const PmlProfile prof = default_profile();
    KernelWorkspace ws;
    const StretchedPoint p = pt(0.8, -0.5), q = pt(1.0, -1.0);
    const LaplaceModes lm = laplace_modal_kernels(p, q, 40, prof, ws);
    const oracle::Modes om = oracle::modal_kernels(p, q, 0.0, 20, prof);
    const double ratio = std::abs(om.S[20] / om.S[19]);
    EXPECT_LT(ratio, 0.9);
    EXPECT_NEAR(std::abs(lm.Z[20] / lm.Z[19]), ratio, 1e-6);
    for (int n = 21; n <= 40; ++n) EXPECT_LT(std::abs(lm.Z[n]), std::abs(lm.Z[n - 1]));
}

TEST(Laplace, AxisymmetricLimit)
{
    const PmlProfile prof = default_profile();
    KernelWorkspace ws;
    const StretchedPoint p = pt(0.9, -0.3), q = pt(0.0, -1.0);
    const LaplaceModes lm = laplace_modal_kernels(p, q, 6, prof, ws);
    const double d = std::hypot(0.9, 0.7);
    EXPECT_NEAR(std::abs(lm.Z[0] - 2 * kPi / (4 * kPi * d) / kSqrt2Pi), 0.0, 1e-14);
    for (int n = 1; n <= 6; ++n) EXPECT_LT(std::abs(lm.Z[n]), 1e-14);
}

TEST(Laplace, RecurrenceBranchesAgree)
{
    // one pair on each side of the forward/backward switch, checked against the FFT route
    KernelWorkspace ws;
    const PmlProfile prof = default_profile();
    for (double sep : {0.02, 0.3, 1.2}) {
        const StretchedPoint p = pt(1.0, 0.0), q = pt(1.0 + sep, -sep);
        const PairGeometry g = pair_geometry(p, q, prof);
        const LaplaceModes a = laplace_modal_kernels(g, 30, ws);
        const LaplaceModes b = laplace_modes_fft(g, 30, ws);
        EXPECT_LT(mode_error(a.Z, b.Z), 1e-12) << sep;
        EXPECT_LT(mode_error(a.D, b.D), 1e-11) << sep;
    }
}

TEST(Laplace, PmlPairAgainstOracle)
{
    const PmlProfile prof = default_profile();
    KernelWorkspace ws;
    const StretchedPoint p = pt(3.2, 0.0), q = pt(3.5, 0.1, 0.3, -1.0);
    const LaplaceModes lm = laplace_modal_kernels(p, q, 12, prof, ws);
    const oracle::Modes om = oracle::modal_kernels(p, q, 0.0, 12, prof);
    EXPECT_LT(mode_error(lm.Z, om.S), 1e-12);
    EXPECT_LT(mode_error(lm.D, om.K), 1e-12);
}

TEST(Modal, FarPairPhysicalAgainstOracle)
{
    const PmlProfile prof = default_profile();
    KernelWorkspace ws;
    const TaylorSubstitute ts = taylor_substitute(5);
    const StretchedPoint p = pt(0.6, -0.4), q = pt(1.0, -0.9, 1.0, 0.0);
    const ModalKernels mk = modal_kernels(p, q, 2 * kPi, options(16), ts, prof, ws);
    EXPECT_FALSE(mk.near);
    const oracle::Modes om = oracle::modal_kernels(p, q, 2 * kPi, 16, prof);
    EXPECT_LT(mode_error(mk.S, om.S), 1e-10);
    EXPECT_LT(mode_error(mk.K, om.K), 1e-10);
    EXPECT_EQ(mk.single(-3), mk.single(3));
}

TEST(Modal, NearPairPhysicalAgainstOracle)
{
    const PmlProfile prof = default_profile();
    KernelWorkspace ws;
    const TaylorSubstitute ts = taylor_substitute(5);
    for (double sep : {0.05, 0.01, 0.002}) {
        const StretchedPoint p = pt(1.0, -0.5, 1.0, 0.0), q = pt(1.0, -0.5 - sep, 1.0, 0.0);
        const ModalKernels mk = modal_kernels(p, q, 2 * kPi, options(16), ts, prof, ws);
        EXPECT_TRUE(mk.near);
        const oracle::Modes om = oracle::modal_kernels(p, q, 2 * kPi, 16, prof);
        EXPECT_LT(mode_error(mk.S, om.S), 1e-9) << sep;
        EXPECT_LT(mode_error(mk.K, om.K), 1e-9) << sep;
    }
}

TEST(Modal, PmlPairSubstitutionVersusPlain)
{
    // a strong layer: Im q reaches about 26 across the azimuth and the plain
    // split loses everything to cancellation between H1 and i H2
    PmlProfile prof = default_profile();
    prof.radial.strength = 4.0;
    KernelWorkspace ws;
    const TaylorSubstitute ts = taylor_substitute(5);
    const StretchedPoint p = pt(3.9, 0.0, 0.0, -1.0, prof), q = pt(3.95, 0.02, 0.4, -1.0, prof);
    ModalKernelOptions sub = options(8), plain = options(8);
    plain.substitute = false;
    plain.near_fail = 1.0;
    const ModalKernels a = modal_kernels(p, q, 2 * kPi, sub, ts, prof, ws);
    const ModalKernels b = modal_kernels(p, q, 2 * kPi, plain, ts, prof, ws);
    ASSERT_TRUE(a.near);
    const oracle::Modes om = oracle::modal_kernels(p, q, 2 * kPi, 8, prof);
    EXPECT_LT(mode_error(a.S, om.S), 1e-8);
    EXPECT_LT(mode_error(a.K, om.K), 1e-8);
    EXPECT_GT(mode_error(b.S, om.S), 100 * mode_error(a.S, om.S));
    EXPECT_GT(mode_error(b.S, om.S), 1e-7);
}

TEST(Modal, DispatchContinuity)
{
    const PmlProfile prof = default_profile();
    KernelWorkspace ws;
    const TaylorSubstitute ts = taylor_substitute(5);
    const StretchedPoint p = pt(1.0, -0.5, 1.0, 0.0);
    const ModalKernelOptions o = options(16);
    const StretchedPoint q = pt(1.0, -0.5 - 0.2 * 1.0 * 0.999, 1.0, 0.0);
    const PairGeometry g = pair_geometry(p, q, prof);
    ASSERT_TRUE(is_near_pair(p, q, g, o));
    const ModalKernels a = modal_kernels_near(g, 2 * kPi, o, ts, ws);
    const ModalKernels b = modal_kernels_far(g, 2 * kPi, o, ws);
    EXPECT_LT(mode_error(a.S, b.S), 1e-9);
    EXPECT_LT(mode_error(a.K, b.K), 1e-9);
}

TEST(Modal, ReassemblyAtHeldOutAngles)
{
    const PmlProfile prof = default_profile();
    KernelWorkspace ws;
    const TaylorSubstitute ts = taylor_substitute(5);
    std::mt19937 rng(7);
    // well separated and within a couple of wavelengths of the axis, so 32 modes resolve the kernel
    std::uniform_real_distribution<double> ur(0.1, 0.8), uz(-1.5, 0.0), ua(0.0, kPi);
    int checked = 0;
    while (checked < 10) {
        const StretchedPoint p = pt(ur(rng), uz(rng)), q = pt(ur(rng), uz(rng), 0.6, -0.8);
        const PairGeometry g = pair_geometry(p, q, prof);
        if (std::sqrt(std::abs(g.d2)) < std::max(p.rho, q.rho)) continue;
        const ModalKernels mk = modal_kernels(p, q, 2 * kPi, options(32), ts, prof, ws);
        for (int i = 0; i < 3; ++i) {
            const double dt = ua(rng);
            cplx s = 0.0;
            for (int n = -32; n <= 32; ++n) s += mk.single(n) * std::exp(kI * double(n) * dt) / kSqrt2Pi;
            const KernelSplit k = kernel_split(g, dt, 2 * kPi);
            const cplx G = k.Z * (k.H1 + kI * k.H2);
            EXPECT_LT(std::abs(s - G), 1e-8 * std::abs(G));
        }
        ++checked;
    }
}
