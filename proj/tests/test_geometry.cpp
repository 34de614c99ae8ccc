#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <pmlbie/geometry.hpp>

using namespace pmlbie;

namespace {

PmlProfile default_profile()
{
    PmlProfile p;
    p.radial = {2.0, 2.0, 2.0, 6};
    return p;
}

GeneratingCurve example1()
{
    CurveSpec spec;
    spec.pieces.push_back(polyline_piece({{0, -1}, {1, -1}, {1, 0}, {4, 0}}));
    return build_generating_curve(spec, 4.0);
}

GeneratingCurve example2()
{
    CurveSpec spec;
    spec.pieces.push_back(analytic_piece(rippled_quarter_circle()));
    spec.extend_flat = true;
    return build_generating_curve(spec, 4.0);
}

}  // namespace

TEST(Pml, ProfileValues)
{
    const PmlProfile p = default_profile();
    EXPECT_EQ(pml_sigma(p, 0.0), 0.0);
    EXPECT_EQ(pml_sigma(p, 2.0), 0.0);
    EXPECT_NEAR(pml_sigma(p, 4.0), 2.0, 1e-14);
    EXPECT_EQ(pml_sigma(p, 7.5), 2.0);
    const double a = std::pow(0.375, 6), b = std::pow(0.625, 6);
    EXPECT_NEAR(pml_sigma(p, 3.0), 4.0 * a / (a + b), 1e-15);
    // quoted to six digits as 0.178303; the exact value rounds to 0.178305
    EXPECT_NEAR(pml_sigma(p, 3.0), 0.178303, 5e-6);
}

TEST(Pml, ProfileFlatAtStart)
{
    // first p - 1 derivatives vanish at a1: sigma(a1 + e) = O(e^p)
    const PmlProfile p = default_profile();
    const double s1 = pml_sigma(p, 2.0 + 1e-2), s2 = pml_sigma(p, 2.0 + 5e-3);
    EXPECT_NEAR(std::log2(s1 / s2), 6.0, 0.1);
    for (double r = 2.0; r <= 4.0; r += 0.01) EXPECT_GE(pml_sigma(p, r), 0.0);
}

TEST(Pml, StretchIntegral)
{
    const PmlProfile p = default_profile();
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    const double oracle = gk.integrate([&](double r) { return pml_sigma(p, r); }, 2.0, 4.0, 15, 1e-14);
    const Stretch s = stretch(p, 4.0, 0.3);
    EXPECT_NEAR(s.rho_t.imag(), oracle, 1e-13);
    // the ramp is not mean-S/2: int_{-1}^{0} of the step is about 0.1298, not 1/4
    EXPECT_NEAR(s.rho_t.imag(), 1.0383127767496838, 1e-12);
    EXPECT_EQ(s.rho_t.real(), 4.0);
    EXPECT_EQ(s.z_t, cplx(0.3));
    EXPECT_EQ(s.alpha_z, cplx(1.0));
    EXPECT_NEAR(s.alpha_rho.imag(), 2.0, 1e-14);

    const Stretch s5 = stretch(p, 5.0, 0.0);
    EXPECT_NEAR(s5.rho_t.imag(), oracle + 2.0, 1e-13);
    const Stretch s1 = stretch(p, 1.5, -0.7);
    EXPECT_EQ(s1.rho_t, cplx(1.5));
    EXPECT_EQ(s1.alpha_rho, cplx(1.0));
}

TEST(Pml, StretchMonotoneAndDifference)
{
    const PmlProfile p = default_profile();
    double prev = 0.0;
    for (double r = 2.05; r < 6.0; r += 0.05) {
        const double im = stretch(p, r, 0).rho_t.imag();
        EXPECT_GT(im, prev);
        prev = im;
    }
    const cplx d = stretched_rho_difference(p, 3.7, 3.2);
    const cplx ref = stretch(p, 3.7, 0).rho_t - stretch(p, 3.2, 0).rho_t;
    EXPECT_NEAR(std::abs(d - ref), 0.0, 1e-14);
}

TEST(Pml, VerticalLayer)
{
    PmlProfile p = default_profile();
    p.vertical = AbsorbingLayer{1.0, 1.0, 3.0, 4};
    const Stretch s = stretch(p, 0.5, -2.5);
    EXPECT_LT(s.z_t.imag(), 0.0);   // odd extension in z
    EXPECT_NEAR(s.alpha_z.imag(), 3.0, 1e-14);
    EXPECT_NEAR(std::abs(stretched_z_difference(p, -2.5, 1.7) - (s.z_t - stretch(p, 0.5, 1.7).z_t)), 0.0, 1e-13);
}

TEST(Mesh, GradedParamExamples)
{
    CurveSpec spec;
    spec.pieces.push_back(polyline_piece({{0, 0}, {1, 0}}));
    const GeneratingCurve c = build_generating_curve(spec, 1.0);
    const GradedMesh m(c, 5, 6, 1);
    const auto [s0, ds0] = graded_param(m, 0.0);
    EXPECT_EQ(s0, 0.0);
    EXPECT_EQ(ds0, 0.0);
    const auto [sm, dsm] = graded_param(m, 0.5);
    EXPECT_NEAR(sm, 0.5, 1e-15);
    EXPECT_GT(dsm, 0.0);
    const double a = std::pow(0.375, 6), b = std::pow(0.625, 6);
    EXPECT_NEAR(graded_param(m, 0.25).first, a / (a + b), 1e-15);
    EXPECT_NEAR(graded_param(m, 0.25).first, 0.0445759, 1e-6);
    EXPECT_EQ(graded_param(m, 1.0).first, 1.0);
}

TEST(Mesh, DerivativeMatchesFiniteDifference)
{
    const GeneratingCurve c = example1();
    const GradedMesh m(c, 200, 6, 10);
    for (double t : {0.013, 0.21, 0.37, 0.5, 0.77, 0.93}) {
        const int k = m.segment_of(t);
        const double e = 1e-5;
        const double fd = (m.param(t + e, k).first - m.param(t - e, k).first) / (2 * e);
        EXPECT_NEAR(m.param(t, k).second, fd, 1e-6 * std::max(1.0, fd));
    }
}

TEST(Mesh, CompositeLengthConverges)
{
    const GeneratingCurve c = example1();
    std::vector<double> err;
    for (int N : {161, 321, 641}) {
        const GradedMesh m(c, N, 6, 10);
        double sum = 0.0;
        for (int j = 0; j < N; ++j) sum += graded_param(m, m.t_node(j)).second * m.step();
        err.push_back(std::abs(sum - c.total_length) + 1e-16);
    }
    EXPECT_LT(err[2], 1e-11);
    EXPECT_GE(std::log2(err[0] / err[1]), 5.8);
    EXPECT_GE(std::log2(err[1] / err[2]), 5.8);
}

TEST(Mesh, StrictlyIncreasingAndCornerFlat)
{
    const GeneratingCurve c = example1();
    const GradedMesh m(c, 120, 6, 10);
    double prev = -1.0;
    for (int j = 0; j < m.size(); ++j) {
        const double s = graded_param(m, m.t_node(j)).first;
        EXPECT_GT(s, prev);
        prev = s;
    }
    for (int k = 0; k < m.segment_count(); ++k) {
        const double t0 = m.first_node(k) * m.step();
        EXPECT_LE(std::abs(m.param(t0, k).second), 1e-10 * c.total_length);
        EXPECT_NEAR(m.param(t0, k).first, c.segments[k].s0, 1e-14);
    }
}

TEST(Mesh, RejectsTooFewNodes)
{
    const GeneratingCurve c = example1();
    EXPECT_THROW(GradedMesh(c, 20, 6, 10), GeometryError);
    EXPECT_NO_THROW(GradedMesh(c, 31, 6, 10));
}

TEST(Curve, Example1Polyline)
{
    const GeneratingCurve c = example1();
    EXPECT_EQ(c.segments.size(), 3u);
    ASSERT_EQ(c.corners.size(), 2u);
    EXPECT_EQ(c.corners[0].rho, 1.0);
    EXPECT_EQ(c.corners[0].z, -1.0);
    EXPECT_EQ(c.corners[1].rho, 1.0);
    EXPECT_EQ(c.corners[1].z, 0.0);
    EXPECT_NEAR(c.total_length, 5.0, 1e-15);
}

TEST(Curve, FlatInterface)
{
    CurveSpec spec;
    spec.pieces.push_back(polyline_piece({{0, 0}, {4, 0}}));
    const GeneratingCurve c = build_generating_curve(spec, 4.0);
    EXPECT_EQ(c.segments.size(), 1u);
    EXPECT_TRUE(c.corners.empty());
    EXPECT_NEAR(c.total_length, 4.0, 1e-15);

    const GradedMesh m(c, 5, 6, 1);
    const DiscretizedBoundary bd(c, m, default_profile());
    for (const auto& q : bd.nodes()) {
        EXPECT_EQ(q.z, 0.0);
        EXPECT_NEAR(q.nu_rho, 0.0, 1e-15);
        EXPECT_NEAR(q.nu_z, -1.0, 1e-15);
    }
}

TEST(Curve, CollinearVerticesMerge)
{
    CurveSpec spec;
    spec.pieces.push_back(polyline_piece({{0, 0}, {1, 0}, {2.5, 0}, {4, 0}}));
    EXPECT_EQ(build_generating_curve(spec, 4.0).segments.size(), 1u);
}

TEST(Curve, Rejections)
{
    CurveSpec neg;
    neg.pieces.push_back(polyline_piece({{0, 0}, {-0.5, -1}, {4, 0}}));
    EXPECT_THROW(build_generating_curve(neg, 4.0), GeometryError);

    CurveSpec gap;
    gap.pieces.push_back(polyline_piece({{0, -1}, {1, -1}}));
    gap.pieces.push_back(polyline_piece({{1, -0.5}, {4, 0}}));
    EXPECT_THROW(build_generating_curve(gap, 4.0), GeometryError);

    CurveSpec end;
    end.pieces.push_back(polyline_piece({{0, -1}, {3, 0}}));
    EXPECT_THROW(build_generating_curve(end, 4.0), GeometryError);

    CurveSpec off;
    off.pieces.push_back(polyline_piece({{0.2, -1}, {4, 0}}));
    EXPECT_THROW(build_generating_curve(off, 4.0), GeometryError);
}

TEST(Curve, Example2Arclength)
{
    const GeneratingCurve c = example2();
    ASSERT_EQ(c.segments.size(), 2u);
    // dense composite Gauss-Kronrod on 400 sub-panels of the speed
    const AnalyticMap m = rippled_quarter_circle();
    boost::math::quadrature::gauss_kronrod<double, 31> gk;
    double L = 0.0;
    for (int i = 0; i < 400; ++i)
        L += gk.integrate([&](double u) { const Vec2 d = m.dr(u); return std::hypot(d.rho, d.z); },
                          i / 400.0, (i + 1) / 400.0, 0, 1e-15);
    EXPECT_NEAR(c.segments[0].length(), L, 1e-10);
    EXPECT_NEAR(c.total_length, L + 3.0, 1e-10);
}

TEST(Curve, ArclengthParametrizationHasUnitSpeed)
{
    const GeneratingCurve c = example2();
    const auto& seg = c.segments[0];
    for (int i = 1; i < 50; ++i) {
        const double s = seg.s0 + seg.length() * i / 50.0;
        const double e = 1e-6;
        const Vec2 a = seg.position(s - e), b = seg.position(s + e);
        const double speed = distance(a, b) / (2 * e);
        EXPECT_NEAR(speed, 1.0, 1e-8);
        const Vec2 t = seg.tangent(s);
        EXPECT_NEAR(std::hypot(t.rho, t.z), 1.0, 1e-12);
    }
}

TEST(Discretize, Example1CornerClustering)
{
    const GeneratingCurve c = example1();
    const int N = 200;
    const GradedMesh m(c, N, 6, 10);
    const DiscretizedBoundary bd(c, m, default_profile());
    ASSERT_EQ(bd.corners().size(), 2u);
    for (int j : bd.corners()) {
        const auto& q = bd[j];
        const bool on_corner = (std::abs(q.rho - 1.0) < 1e-14 && (std::abs(q.z + 1.0) < 1e-14 || std::abs(q.z) < 1e-14));
        EXPECT_TRUE(on_corner) << j;
        EXPECT_LT(bd[j + 1].s - bd[j].s, m.step() * c.total_length / 10);
        EXPECT_LT(bd[j].s - bd[j - 1].s, m.step() * c.total_length / 10);
    }
    EXPECT_EQ(bd[0].rho, 0.0);
    EXPECT_NEAR(bd[N - 1].rho, 4.0, 1e-14);
}

TEST(Discretize, PhysicalRegionUntouched)
{
    const GeneratingCurve c = example1();
    const GradedMesh m(c, 100, 6, 10);
    const DiscretizedBoundary bd(c, m, default_profile());
    for (const auto& q : bd.nodes()) {
        if (q.rho > 2.0) {
            EXPECT_GT(q.rho_t.imag(), 0.0);
            continue;
        }
        EXPECT_EQ(q.rho_t, cplx(q.rho));
        EXPECT_EQ(q.alpha_rho, cplx(1.0));
        EXPECT_NEAR(std::abs(q.nuc_rho - q.nu_rho), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(q.nuc_z - q.nu_z), 0.0, 1e-15);
    }
    // on the axis
    EXPECT_EQ(bd[0].nuc_z, cplx(-1.0));
}

TEST(Discretize, ZeroStrengthMatchesZeroThickness)
{
    const GeneratingCurve c = example1();
    const GradedMesh m(c, 80, 6, 10);
    PmlProfile p0 = default_profile();
    p0.radial.strength = 0.0;
    PmlProfile pt = default_profile();
    pt.radial.start = 4.0;
    pt.radial.thickness = 1e-300;
    const DiscretizedBoundary a(c, m, p0), b(c, m, pt);
    for (int j = 0; j < a.size(); ++j) {
        EXPECT_EQ(a[j].rho_t, b[j].rho_t);
        EXPECT_EQ(a[j].nuc_rho, b[j].nuc_rho);
    }
}

TEST(Locator, Example1Domains)
{
    const DomainLocator loc(example1());
    EXPECT_TRUE(loc.upper(0.5, -0.5));
    EXPECT_TRUE(loc.upper(0.5, 0.5));
    EXPECT_FALSE(loc.upper(0.5, -1.5));
    EXPECT_FALSE(loc.upper(1.5, -0.5));
    EXPECT_TRUE(loc.upper(2.5, 0.1));
    EXPECT_FALSE(loc.upper(5.0, -0.1));
    EXPECT_NEAR(loc.distance_to_curve(0.5, -0.8), 0.2, 1e-14);
}
