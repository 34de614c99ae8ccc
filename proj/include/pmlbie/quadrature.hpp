#pragma once
/**
 * @file quadrature.hpp
 * @brief Hybrid Gauss-trapezoidal rules (Alpert) for log-singular integrands,
 *        periodic trapezoid and barycentric Lagrange stencils.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "alpert_tables.hpp"

namespace pmlbie {

/**
 * @brief End corrections for the trapezoid rule on [0, m h].
 *
 * The singular end carries nodes x_k h with weights w_k h and skips the first
 * `log_gap` grid points; the regular end does the same with its own table.
 */
struct AlpertRule {
    int order = 0;
    std::span<const double> log_nodes, log_weights;
    int log_gap = 0;
    std::span<const double> reg_nodes, reg_weights;
    int reg_gap = 0;

    int K1() const { return int(reg_nodes.size()); }
    int K2() const { return int(log_nodes.size()); }
    /// Fewest steps an interval needs before it is re-gridded.
    int min_steps() const { return log_gap + reg_gap; }
};

inline AlpertRule alpert_rule(int order)
{
    AlpertRule r;
    r.order = order;
    switch (order) {
    case 2:
        r.log_nodes = alpert::log2_x; r.log_weights = alpert::log2_w; r.log_gap = alpert::log2_a;
        r.reg_nodes = alpert::reg2_x; r.reg_weights = alpert::reg2_w; r.reg_gap = alpert::reg2_a;
        break;
    case 6:
        r.log_nodes = alpert::log6_x; r.log_weights = alpert::log6_w; r.log_gap = alpert::log6_a;
        r.reg_nodes = alpert::reg6_x; r.reg_weights = alpert::reg6_w; r.reg_gap = alpert::reg6_a;
        break;
    case 10:
        r.log_nodes = alpert::log10_x; r.log_weights = alpert::log10_w; r.log_gap = alpert::log10_a;
        r.reg_nodes = alpert::reg10_x; r.reg_weights = alpert::reg10_w; r.reg_gap = alpert::reg10_a;
        break;
    default:
        throw std::invalid_argument("alpert_rule: unsupported order " + std::to_string(order));
    }
    return r;
}

/// A quadrature abscissa in t with its weight; `grid` >= 0 when t is a mesh node.
struct QuadNode {
    double t;
    double w;
    int grid;
};

namespace detail {

/// Rule on [A, B] split into m steps, log singularity at A (or at B if !sing_at_a).
/// `grid_offset` is the mesh index of A when the steps coincide with the mesh.
inline void append_interval(std::vector<QuadNode>& out, const AlpertRule& r, double A, double B, int m,
                            int grid_offset, bool sing_at_a)
{
    if (m <= 0) return;
    bool on_grid = true;
    if (m < r.min_steps()) {
        m = r.min_steps();
        on_grid = false;
    }
    const double h = (B - A) / m;
    const int ga = sing_at_a ? r.log_gap : r.reg_gap;
    const int gb = sing_at_a ? r.reg_gap : r.log_gap;
    auto xa = sing_at_a ? r.log_nodes : r.reg_nodes;
    auto wa = sing_at_a ? r.log_weights : r.reg_weights;
    auto xb = sing_at_a ? r.reg_nodes : r.log_nodes;
    auto wb = sing_at_a ? r.reg_weights : r.log_weights;
    for (std::size_t k = 0; k < xa.size(); ++k) out.push_back({A + xa[k] * h, wa[k] * h, -1});
    for (int i = ga; i <= m - gb; ++i) out.push_back({i == m ? B : A + i * h, h, on_grid ? grid_offset + i : -1});
    for (std::size_t k = xb.size(); k-- > 0;) out.push_back({B - xb[k] * h, wb[k] * h, -1});
}

}  // namespace detail

/**
 * @brief Nodes of the split rule about the grid node t_l on the uniform grid of N points.
 *
 * [0, t_l] and [t_l, 1] are each integrated with the singular end at t_l.
 */
inline std::vector<QuadNode> split_nodes(int l, int N, const AlpertRule& r)
{
    if (l < 0 || l >= N) throw std::invalid_argument("split_nodes: singular index is not a grid node");
    const double h = 1.0 / (N - 1);
    const double tl = l == N - 1 ? 1.0 : l * h;
    std::vector<QuadNode> out;
    out.reserve(N + 4 * (r.K1() + r.K2()));
    detail::append_interval(out, r, 0.0, tl, l, 0, false);
    detail::append_interval(out, r, tl, 1.0, N - 1 - l, l, true);
    return out;
}

/// Integral over [0, 1] of f, log-singular at grid node l of an N-point grid.
template <class F>
auto integrate_split(F&& f, int l, int N, const AlpertRule& r)
{
    decltype(f(0.5)) acc{};
    for (const auto& q : split_nodes(l, N, r)) acc += q.w * f(q.t);
    return acc;
}

/**
 * @brief Barycentric Lagrange stencil on consecutive grid nodes.
 */
struct InterpolationStencil {
    int first = 0;                 // index of the first source node
    std::vector<double> weights;   // one per source node
    double target = 0.0;
};

/**
 * @brief Stencil of `order` consecutive nodes of the uniform grid t_j = j h,
 *        restricted to indices [lo, hi]; shifts inward near the ends.
 */
inline InterpolationStencil lagrange_stencil(double t, double h, int lo, int hi, int order)
{
    if (hi - lo + 1 < order)
        throw std::invalid_argument("lagrange_stencil: smooth piece has fewer nodes than the stencil order");
    const double x = t / h;
    if (x < lo - 1e-9 || x > hi + 1e-9) throw std::invalid_argument("lagrange_stencil: target outside its smooth piece");
    InterpolationStencil st;
    st.target = t;
    const int first = std::clamp(int(std::floor(x)) - (order - 1) / 2, lo, hi - order + 1);
    st.first = first;
    st.weights.assign(order, 0.0);
    for (int j = 0; j < order; ++j)
        if (std::abs(x - (first + j)) < 1e-13) {
            st.weights[j] = 1.0;
            return st;
        }
    // equispaced barycentric weights (-1)^j C(order-1, j)
    double c = 1.0, sum = 0.0;
    for (int j = 0; j < order; ++j) {
        if (j > 0) c = c * (order - j) / j;
        const double bw = (j % 2 ? -c : c) / (x - (first + j));
        st.weights[j] = bw;
        sum += bw;
    }
    for (auto& w : st.weights) w /= sum;
    return st;
}

/**
 * @brief Interpolation matrix from values on `grid` (one smooth piece, sorted,
 *        distinct abscissae) to `targets`, with `order`-point stencils.
 */
inline Eigen::SparseMatrix<double> interp_to_grid(std::span<const double> targets, std::span<const double> grid,
                                                  int order)
{
    const int n = int(grid.size());
    if (n < order) throw std::invalid_argument("interp_to_grid: fewer grid nodes than the stencil order");
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < int(targets.size()); ++r) {
        const double t = targets[r];
        if (t < grid.front() - 1e-12 || t > grid.back() + 1e-12)
            throw std::invalid_argument("interp_to_grid: target outside the smooth piece");
        const int k = int(std::upper_bound(grid.begin(), grid.end(), t) - grid.begin());
        const int first = std::clamp(k - order / 2, 0, n - order);
        int hit = -1;
        for (int j = 0; j < order; ++j)
            if (std::abs(grid[first + j] - t) <= 1e-14 * (1.0 + std::abs(t))) hit = first + j;
        if (hit >= 0) {
            trip.emplace_back(r, hit, 1.0);
            continue;
        }
        std::vector<double> bw(order);
        double sum = 0.0;
        for (int j = 0; j < order; ++j) {
            double w = 1.0;
            for (int m = 0; m < order; ++m)
                if (m != j) w /= (grid[first + j] - grid[first + m]);
            bw[j] = w / (t - grid[first + j]);
            sum += bw[j];
        }
        for (int j = 0; j < order; ++j) trip.emplace_back(r, first + j, bw[j] / sum);
    }
    Eigen::SparseMatrix<double> M(int(targets.size()), n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

/// Periodic trapezoid: mean of equispaced samples times the period.
template <class T>
T trapezoid_periodic(std::span<const T> samples, double period = 2.0 * std::numbers::pi)
{
    if (samples.size() < 2) throw std::invalid_argument("trapezoid_periodic: need at least two samples");
    T acc{};
    for (const auto& v : samples) acc += v;
    return acc * (period / double(samples.size()));
}

}  // namespace pmlbie
