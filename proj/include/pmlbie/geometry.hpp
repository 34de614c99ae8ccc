#pragma once
/**
 * @file geometry.hpp
 * @brief Generating curve of the axisymmetric interface, graded mesh and the
 *        stretched Nystrom nodes.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "pml.hpp"

namespace pmlbie {

class GeometryError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

struct Vec2 {
    double rho = 0.0, z = 0.0;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.rho - b.rho, a.z - b.z); }

/**
 * @brief A smooth map u -> (rho(u), z(u)) on [u0, u1], with its derivative.
 */
struct AnalyticMap {
    std::function<Vec2(double)> r;
    std::function<Vec2(double)> dr;
    double u0 = 0.0, u1 = 1.0;
};

/**
 * @brief Arclength reparametrization of an AnalyticMap.
 *
 * Cumulative length is tabulated on uniform panels in u with 20-point
 * Gauss-Legendre; the inverse s -> u is a safeguarded Newton iteration.
 */
class ArclengthMap {
public:
    explicit ArclengthMap(AnalyticMap m, int panels = 64) : map_(std::move(m)), panels_(panels)
    {
        du_ = (map_.u1 - map_.u0) / panels_;
        cum_.assign(panels_ + 1, 0.0);
        for (int k = 0; k < panels_; ++k)
            cum_[k + 1] = cum_[k] + partial(k, map_.u0 + (k + 1) * du_);
    }

    double length() const { return cum_.back(); }

    /// Parameter u at arclength s from the start.
    double parameter(double s) const
    {
        if (s <= 0) return map_.u0;
        if (s >= length()) return map_.u1;
        int k = int(std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin()) - 1;
        k = std::clamp(k, 0, panels_ - 1);
        double lo = map_.u0 + k * du_, hi = lo + du_;
        double u = lo + du_ * (s - cum_[k]) / std::max(cum_[k + 1] - cum_[k], 1e-300);
        for (int it = 0; it < 60; ++it) {
            const double f = cum_[k] + partial(k, u) - s;
            if (f > 0) hi = u; else lo = u;
            const double sp = speed(u);
            double un = u - f / sp;
            if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
            if (std::abs(un - u) <= 1e-15 * (1.0 + std::abs(u))) return un;
            u = un;
        }
        return u;
    }

    Vec2 position_at(double u) const { return map_.r(u); }
    Vec2 tangent_at(double u) const
    {
        const Vec2 d = map_.dr(u);
        const double n = std::hypot(d.rho, d.z);
        return {d.rho / n, d.z / n};
    }
    const AnalyticMap& map() const { return map_; }

private:
    double speed(double u) const
    {
        const Vec2 d = map_.dr(u);
        return std::hypot(d.rho, d.z);
    }
    double partial(int k, double u) const
    {
        using GL = boost::math::quadrature::gauss<double, 20>;
        const double a = map_.u0 + k * du_;
        if (u <= a) return 0.0;
        return GL::integrate([this](double v) { return speed(v); }, a, u);
    }

    AnalyticMap map_;
    int panels_;
    double du_;
    std::vector<double> cum_;
};

/**
 * @brief One smooth piece of the generating curve, parametrized by global arclength.
 */
struct CurveSegment {
    enum class Kind { Line, Analytic };
    Kind kind = Kind::Line;
    double s0 = 0.0, s1 = 0.0;
    Vec2 p0, p1;                               // endpoints
    std::shared_ptr<const ArclengthMap> arc;   // Analytic only
    bool corner_start = false, corner_end = false;

    double length() const { return s1 - s0; }

    Vec2 position(double s) const
    {
        if (kind == Kind::Line) {
            const double f = (s - s0) / length();
            return {p0.rho + f * (p1.rho - p0.rho), p0.z + f * (p1.z - p0.z)};
        }
        if (s <= s0) return p0;
        if (s >= s1) return p1;
        return arc->position_at(arc->parameter(s - s0));
    }

    /// Unit tangent dr/ds.
    Vec2 tangent(double s) const
    {
        if (kind == Kind::Line) {
            const double L = length();
            return {(p1.rho - p0.rho) / L, (p1.z - p0.z) / L};
        }
        return arc->tangent_at(arc->parameter(std::clamp(s - s0, 0.0, length())));
    }
};

/**
 * @brief Piecewise-smooth meridian curve from A (on the axis) to B = (a1 + T, 0).
 */
struct GeneratingCurve {
    std::vector<CurveSegment> segments;
    double total_length = 0.0;
    std::vector<Vec2> corners;   // interior joints

    Vec2 start() const { return segments.front().p0; }
    Vec2 end() const { return segments.back().p1; }

    /// Dense polyline used for point-location queries.
    std::vector<Vec2> sample(int per_segment = 400) const
    {
        std::vector<Vec2> pts;
        for (const auto& seg : segments) {
            const int n = seg.kind == CurveSegment::Kind::Line ? 1 : per_segment;
            for (int i = 0; i < n; ++i)
                pts.push_back(seg.position(seg.s0 + seg.length() * i / n));
        }
        pts.push_back(end());
        return pts;
    }
};

/**
 * @brief Description of a generating curve as read from configuration.
 *
 * Pieces are chained in order; each must begin where the previous one ended.
 * With `extend_flat` set, a straight run along z = 0 is appended up to
 * rho = `end_radius` when the last piece stops short of it.
 */
struct CurveSpec {
    struct Piece {
        enum class Kind { Polyline, Analytic } kind = Kind::Polyline;
        std::vector<Vec2> vertices;   // Polyline
        AnalyticMap map;              // Analytic
    };
    std::vector<Piece> pieces;
    bool extend_flat = false;
};

inline CurveSpec::Piece polyline_piece(std::vector<Vec2> v)
{
    CurveSpec::Piece p;
    p.kind = CurveSpec::Piece::Kind::Polyline;
    p.vertices = std::move(v);
    return p;
}

inline CurveSpec::Piece analytic_piece(AnalyticMap m)
{
    CurveSpec::Piece p;
    p.kind = CurveSpec::Piece::Kind::Analytic;
    p.map = std::move(m);
    return p;
}

/// rho(u) = [1 - 0.1 sin(3 pi u)] sin(pi u / 2), z(u) = -[1 - 0.1 sin(3 pi u)] cos(pi u / 2).
inline AnalyticMap rippled_quarter_circle()
{
    constexpr double pi = std::numbers::pi;
    AnalyticMap m;
    m.r = [](double u) {
        const double a = 1.0 - 0.1 * std::sin(3 * pi * u);
        return Vec2{a * std::sin(pi * u / 2), -a * std::cos(pi * u / 2)};
    };
    m.dr = [](double u) {
        const double a = 1.0 - 0.1 * std::sin(3 * pi * u);
        const double da = -0.3 * pi * std::cos(3 * pi * u);
        return Vec2{da * std::sin(pi * u / 2) + a * (pi / 2) * std::cos(pi * u / 2),
                    -da * std::cos(pi * u / 2) + a * (pi / 2) * std::sin(pi * u / 2)};
    };
    m.u0 = 0.0;
    m.u1 = 1.0;
    return m;
}

inline GeneratingCurve build_generating_curve(const CurveSpec& spec, double end_radius, double tol = 1e-10)
{
    if (spec.pieces.empty()) throw GeometryError("curve: no pieces");
    GeneratingCurve c;
    double s = 0.0;
    auto push_line = [&](Vec2 a, Vec2 b) {
        const double L = distance(a, b);
        if (L <= tol) return;
        CurveSegment seg;
        seg.kind = CurveSegment::Kind::Line;
        seg.p0 = a;
        seg.p1 = b;
        seg.s0 = s;
        seg.s1 = s + L;
        s = seg.s1;
        c.segments.push_back(seg);
    };
    auto check_rho = [&](Vec2 v) {
        if (v.rho < -tol) throw GeometryError("curve: negative rho " + std::to_string(v.rho));
    };

    for (std::size_t k = 0; k < spec.pieces.size(); ++k) {
        const auto& pc = spec.pieces[k];
        Vec2 first;
        if (pc.kind == CurveSpec::Piece::Kind::Polyline) {
            if (pc.vertices.size() < 2) throw GeometryError("curve: polyline needs at least two vertices");
            first = pc.vertices.front();
        } else {
            first = pc.map.r(pc.map.u0);
        }
        if (!c.segments.empty() && distance(first, c.end()) > 1e-9)
            throw GeometryError("curve: piece " + std::to_string(k) + " does not start where the previous one ends");

        if (pc.kind == CurveSpec::Piece::Kind::Polyline) {
            for (auto v : pc.vertices) check_rho(v);
            for (std::size_t i = 0; i + 1 < pc.vertices.size(); ++i) push_line(pc.vertices[i], pc.vertices[i + 1]);
        } else {
            auto arc = std::make_shared<ArclengthMap>(pc.map);
            for (int i = 0; i <= 256; ++i) check_rho(pc.map.r(pc.map.u0 + (pc.map.u1 - pc.map.u0) * i / 256));
            CurveSegment seg;
            seg.kind = CurveSegment::Kind::Analytic;
            seg.arc = arc;
            seg.p0 = pc.map.r(pc.map.u0);
            seg.p1 = pc.map.r(pc.map.u1);
            seg.s0 = s;
            seg.s1 = s + arc->length();
            s = seg.s1;
            c.segments.push_back(seg);
        }
    }
    if (c.segments.empty()) throw GeometryError("curve: zero length");

    if (spec.extend_flat) {
        const Vec2 e = c.end();
        if (std::abs(e.z) <= tol && e.rho < end_radius - tol) push_line(e, {end_radius, 0.0});
    }

    if (std::abs(c.start().rho) > tol) throw GeometryError("curve: first point must lie on the axis (rho = 0)");
    const Vec2 e = c.end();
    if (std::abs(e.rho - end_radius) > 1e-9 || std::abs(e.z) > 1e-9)
        throw GeometryError("curve: last point must be (" + std::to_string(end_radius) + ", 0)");

    // merge consecutive collinear straight segments; they are one smooth piece
    std::vector<CurveSegment> merged;
    for (auto& seg : c.segments) {
        if (!merged.empty() && merged.back().kind == CurveSegment::Kind::Line && seg.kind == CurveSegment::Kind::Line) {
            const Vec2 t0 = merged.back().tangent(0), t1 = seg.tangent(0);
            if (std::abs(t0.rho * t1.z - t0.z * t1.rho) < 1e-12 && t0.rho * t1.rho + t0.z * t1.z > 0) {
                merged.back().p1 = seg.p1;
                merged.back().s1 = seg.s1;
                continue;
            }
        }
        merged.push_back(seg);
    }
    c.segments = std::move(merged);
    for (std::size_t k = 0; k < c.segments.size(); ++k) {
        c.segments[k].corner_start = true;
        c.segments[k].corner_end = true;
        if (k > 0) c.corners.push_back(c.segments[k].p0);
    }
    c.total_length = s;
    return c;
}

/**
 * @brief Uniform parameter grid t_j = j h on [0, 1] with a graded map per segment.
 *
 * Segment k occupies grid steps [first[k], first[k+1]]; every joint is a node.
 */
class GradedMesh {
public:
    GradedMesh(const GeneratingCurve& curve, int N, int p, int min_steps) : N_(N), p_(p)
    {
        const int K = int(curve.segments.size());
        if (N < 2) throw GeometryError("mesh: N must be at least 2");
        const int steps = N - 1;
        if (steps < K * min_steps)
            throw GeometryError("mesh: N = " + std::to_string(N) + " too small; need at least " +
                                std::to_string(K * min_steps + 1) + " nodes for " + std::to_string(K) + " segments");
        h_ = 1.0 / steps;
        // proportional apportionment with a floor, largest remainder for the rest
        std::vector<int> n(K, min_steps);
        int left = steps - K * min_steps;
        std::vector<double> want(K);
        double extra_len = 0.0;
        for (int k = 0; k < K; ++k) {
            want[k] = steps * curve.segments[k].length() / curve.total_length - min_steps;
            extra_len += std::max(want[k], 0.0);
        }
        std::vector<double> rem(K, 0.0);
        int given = 0;
        for (int k = 0; k < K; ++k) {
            const double share = extra_len > 0 ? left * std::max(want[k], 0.0) / extra_len : double(left) / K;
            const int f = int(std::floor(share));
            n[k] += f;
            given += f;
            rem[k] = share - f;
        }
        std::vector<int> order(K);
        for (int k = 0; k < K; ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
        for (int i = 0; given < left; ++i, ++given) ++n[order[i % K]];

        first_.assign(K + 1, 0);
        for (int k = 0; k < K; ++k) first_[k + 1] = first_[k] + n[k];
        for (const auto& seg : curve.segments) {
            s0_.push_back(seg.s0);
            s1_.push_back(seg.s1);
        }
    }

    int size() const { return N_; }
    int exponent() const { return p_; }
    double step() const { return h_; }
    int segment_count() const { return int(s0_.size()); }
    int first_node(int k) const { return first_[k]; }
    int last_node(int k) const { return first_[k + 1]; }
    double t_node(int j) const { return j == N_ - 1 ? 1.0 : j * h_; }

    /// Segment containing t; at a joint, `prefer_left` selects the earlier one.
    int segment_of(double t, bool prefer_left = false) const
    {
        const double x = t / h_;
        for (int k = 0; k < segment_count(); ++k) {
            const double a = first_[k], b = first_[k + 1];
            if (prefer_left ? (x > a - 1e-9 && x <= b + 1e-9) : (x >= a - 1e-9 && x < b - 1e-9)) return k;
        }
        return segment_count() - 1;
    }

    /// xi(t) and xi'(t) on segment k.
    std::pair<double, double> param(double t, int k) const
    {
        const double ta = first_[k] * h_, tb = first_[k + 1] * h_;
        const double x = std::clamp(2.0 * (t - ta) / (tb - ta) - 1.0, -1.0, 1.0);
        const double L = s1_[k] - s0_[k];
        if (x <= -1.0) return {s0_[k], p_ >= 2 ? 0.0 : L * grading_step_derivative(x, p_) * 2.0 / (tb - ta)};
        if (x >= 1.0) return {s1_[k], p_ >= 2 ? 0.0 : L * grading_step_derivative(x, p_) * 2.0 / (tb - ta)};
        return {s0_[k] + L * grading_step(x, p_), L * grading_step_derivative(x, p_) * 2.0 / (tb - ta)};
    }

private:
    int N_, p_;
    double h_;
    std::vector<int> first_;
    std::vector<double> s0_, s1_;
};

/// (s, ds/dt) at t in [0, 1].
inline std::pair<double, double> graded_param(const GradedMesh& mesh, double t)
{
    return mesh.param(t, mesh.segment_of(t));
}

struct StretchedPoint {
    double t = 0, s = 0, rho = 0, z = 0;
    cplx rho_t, z_t, alpha_rho{1.0}, alpha_z{1.0};
    double nu_rho = 0, nu_z = -1;
    cplx nuc_rho, nuc_z;
    double jac = 0;     // |r'(t)| = xi'(t)
    int segment = 0;
};

/// Fill stretched coordinates and the complexified normal for a meridian point.
inline StretchedPoint make_point(const PmlProfile& prof, double rho, double z, double nu_rho, double nu_z)
{
    StretchedPoint q;
    q.rho = rho;
    q.z = z;
    const Stretch st = stretch(prof, rho, z);
    q.rho_t = st.rho_t;
    q.z_t = st.z_t;
    q.alpha_rho = st.alpha_rho;
    q.alpha_z = st.alpha_z;
    q.nu_rho = nu_rho;
    q.nu_z = nu_z;
    const cplx ratio = rho < 1e-14 * prof.a1() ? st.alpha_rho : st.rho_t / rho;
    q.nuc_rho = nu_rho * ratio * st.alpha_z / st.alpha_rho;
    q.nuc_z = nu_z * ratio * st.alpha_rho / st.alpha_z;
    return q;
}

enum class Side { Upper, Lower };

/**
 * @brief Nystrom nodes on the generating curve plus exact off-grid evaluation.
 */
class DiscretizedBoundary {
public:
    DiscretizedBoundary(GeneratingCurve curve, GradedMesh mesh, PmlProfile prof, Side side = Side::Upper)
        : curve_(std::move(curve)), mesh_(std::move(mesh)), prof_(prof), side_(side)
    {
        const int N = mesh_.size();
        nodes_.resize(N);
        for (int j = 0; j < N; ++j) {
            const double t = mesh_.t_node(j);
            nodes_[j] = point(t, mesh_.segment_of(t));
        }
        for (int k = 1; k < mesh_.segment_count(); ++k) corners_.push_back(mesh_.first_node(k));
    }

    /// Exact point at parameter t, using the geometry of segment k.
    StretchedPoint point(double t, int k) const
    {
        const auto [s, ds] = mesh_.param(t, k);
        const auto& seg = curve_.segments[k];
        const Vec2 r = seg.position(s);
        const Vec2 tan = seg.tangent(s);
        StretchedPoint q = make_point(prof_, std::max(r.rho, 0.0), r.z, tan.z, -tan.rho);
        q.t = t;
        q.s = s;
        q.jac = ds;
        q.segment = k;
        return q;
    }

    int size() const { return int(nodes_.size()); }
    const StretchedPoint& operator[](int j) const { return nodes_[j]; }
    const std::vector<StretchedPoint>& nodes() const { return nodes_; }
    const std::vector<int>& corners() const { return corners_; }
    const GeneratingCurve& curve() const { return curve_; }
    const GradedMesh& mesh() const { return mesh_; }
    const PmlProfile& profile() const { return prof_; }
    Side side() const { return side_; }
    double step() const { return mesh_.step(); }

private:
    GeneratingCurve curve_;
    GradedMesh mesh_;
    PmlProfile prof_;
    Side side_;
    std::vector<StretchedPoint> nodes_;
    std::vector<int> corners_;
};

inline DiscretizedBoundary discretize(const GeneratingCurve& curve, const GradedMesh& mesh, const PmlProfile& prof,
                                      Side side = Side::Upper)
{
    return DiscretizedBoundary(curve, mesh, prof, side);
}

/**
 * @brief Which half-space a meridian point (rho >= 0, z) belongs to.
 *
 * Counts crossings of the generating curve by the downward vertical ray;
 * odd means the point lies above the interface.
 */
class DomainLocator {
public:
    explicit DomainLocator(const GeneratingCurve& c) : pts_(c.sample()), end_rho_(c.end().rho) {}

    bool upper(double rho, double z) const
    {
        if (rho >= end_rho_) return z > 0;
        int count = 0;
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
            const Vec2 a = pts_[i], b = pts_[i + 1];
            if ((a.rho <= rho) == (b.rho <= rho)) continue;
            const double zc = a.z + (rho - a.rho) * (b.z - a.z) / (b.rho - a.rho);
            if (zc < z) ++count;
        }
        return count % 2 == 1;
    }

    /// Distance from (rho, z) to the sampled curve.
    double distance_to_curve(double rho, double z) const
    {
        double best = 1e300;
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
            const Vec2 a = pts_[i], b = pts_[i + 1];
            const double ex = b.rho - a.rho, ez = b.z - a.z;
            const double L2 = ex * ex + ez * ez;
            double f = L2 > 0 ? ((rho - a.rho) * ex + (z - a.z) * ez) / L2 : 0.0;
            f = std::clamp(f, 0.0, 1.0);
            best = std::min(best, std::hypot(rho - a.rho - f * ex, z - a.z - f * ez));
        }
        return best;
    }

private:
    std::vector<Vec2> pts_;
    double end_rho_;
};

}  // namespace pmlbie
