#pragma once
/**
 * @file assembly.hpp
 * @brief Nystrom matrices of the modal single/double layer operators on the
 *        generating curve, the solid-angle diagonal and NtD matrices.
 *
 * Operators carry the factor-2 convention: for a density f on the curve
 *   (S_n f)(t_l) = 2 sqrt(2 pi) int S~_n(r_l, r(t)) f(t) rho(t) dt,
 *   (K_n u)(t_l) = 2 sqrt(2 pi) int K~_n(r_l, r(t)) u(t) rho(t) xi'(t) dt,
 * where f = |r'| d_nu u already contains the Jacobian.
 */

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "kernels.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace pmlbie {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct AssemblyOptions {
    int alpert_order = 10;
    int interp_order = 10;
    ModalKernelOptions kernel;
    int threads = 1;
};

struct LayerMatrices {
    int n = 0;
    double omega = 0.0;
    CMatrix S, K;
    int rule_order = 10, interp_order = 10;
};

/// Smallest segment step count the mesh must provide for a rule and stencil.
inline int min_segment_steps(const AssemblyOptions& opt)
{
    return std::max(alpert_rule(opt.alpert_order).min_steps(), opt.interp_order - 1);
}

namespace detail {

/// One quadrature abscissa of row l resolved to a source point and grid columns.
struct RowNode {
    StretchedPoint src;
    double w;
    int first;                      // first column of the stencil
    std::vector<double> coef;       // stencil weights (size 1 when on the grid)
};

/// Off-grid nodes next to a corner can round onto the corner itself (the
/// grading is flat there). Their weight times density is negligible.
inline bool coincident(const StretchedPoint& a, const StretchedPoint& b, double scale)
{
    return std::hypot(a.rho - b.rho, a.z - b.z) <= 1e-13 * scale;
}

inline std::vector<RowNode> row_nodes(const DiscretizedBoundary& bd, int l, const AlpertRule& rule, int order)
{
    const GradedMesh& mesh = bd.mesh();
    const int N = bd.size();
    const double L = bd.curve().total_length;
    std::vector<RowNode> out;
    for (const QuadNode& q : split_nodes(l, N, rule)) {
        RowNode r;
        r.w = q.w;
        if (q.grid >= 0) {
            r.src = bd[q.grid];
            r.first = q.grid;
            r.coef = {1.0};
        } else {
            const int k = mesh.segment_of(q.t);
            r.src = bd.point(q.t, k);
            const InterpolationStencil st =
                lagrange_stencil(q.t, mesh.step(), mesh.first_node(k), mesh.last_node(k), order);
            r.first = st.first;
            r.coef = st.weights;
            if (coincident(r.src, bd[l], L)) continue;
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace detail

/**
 * @brief S_n and K_n matrices for each requested mode, from one kernel pass.
 */
inline std::vector<LayerMatrices> assemble_layer_matrices(const DiscretizedBoundary& bd, double omega,
                                                          const std::vector<int>& modes, const AssemblyOptions& opt)
{
    const int N = bd.size();
    int nmax = 0;
    for (int n : modes) nmax = std::max(nmax, std::abs(n));
    ModalKernelOptions kopt = opt.kernel;
    kopt.nmax = nmax;
    kopt.h_len = bd.step() * bd.curve().total_length;
    const AlpertRule rule = alpert_rule(opt.alpert_order);
    const TaylorSubstitute ts = taylor_substitute(kopt.taylor_order);

    std::vector<LayerMatrices> out(modes.size());
    for (std::size_t m = 0; m < modes.size(); ++m) {
        out[m].n = modes[m];
        out[m].omega = omega;
        out[m].S = CMatrix::Zero(N, N);
        out[m].K = CMatrix::Zero(N, N);
        out[m].rule_order = opt.alpert_order;
        out[m].interp_order = opt.interp_order;
    }
    const int workers = std::max(1, opt.threads);
    std::vector<KernelWorkspace> ws(workers);
    const double c = 2.0 * kSqrt2Pi;

    parallel_for(N, workers, [&](int l, int w) {
        const StretchedPoint& tgt = bd[l];
        ws[w].near_hint = 0;   // rows must not depend on which worker ran before
        for (const auto& rn : detail::row_nodes(bd, l, rule, opt.interp_order)) {
            ModalKernels mk;
            try {
                mk = modal_kernels(tgt, rn.src, omega, kopt, ts, bd.profile(), ws[w]);
            } catch (const NumericalError& e) {
                throw NumericalError(std::string(e.what()) + " (row " + std::to_string(l) + ", t = " +
                                         std::to_string(rn.src.t) + ")",
                                     e.magnitude());
            }
            const double ws_ = c * rn.w * rn.src.rho;
            const double wk = ws_ * rn.src.jac;
            for (std::size_t m = 0; m < modes.size(); ++m) {
                const cplx sv = ws_ * mk.single(modes[m]);
                const cplx kv = wk * mk.dbl(modes[m]);
                auto& L = out[m];
                for (std::size_t j = 0; j < rn.coef.size(); ++j) {
                    L.S(l, rn.first + j) += sv * rn.coef[j];
                    L.K(l, rn.first + j) += kv * rn.coef[j];
                }
            }
        }
    });
    return out;
}

inline LayerMatrices assemble_layer_matrices(const DiscretizedBoundary& bd, double omega, int n,
                                             const AssemblyOptions& opt)
{
    return assemble_layer_matrices(bd, omega, std::vector<int>{n}, opt).front();
}

/**
 * @brief Normalized solid angle (1/2pi) of the surface closing the upper
 *        region over the disk of radius l in z = 0, seen from (rho, z).
 *
 * Below the plane this is the disk's own solid angle; above it the complement
 * to 4 pi; on the open disk it is exactly 1.
 */
inline double cone_correction(double rho, double z, double l)
{
    if (rho > l) throw ConfigError("cone_correction: apex outside the base cylinder");
    if (z == 0.0 && rho < l) return 1.0;
    if (rho >= l * (1.0 - 1e-13) && std::abs(z) <= 1e-14 * l)
        throw ConfigError("cone_correction: apex on the base circle");
    const double az = std::abs(z);
    auto integrand = [&](double th) {
        const double s = std::sin(th), c = std::cos(th);
        const double R = -rho * c + std::sqrt(l * l - rho * rho * s * s);
        return 1.0 - az / std::sqrt(az * az + R * R);
    };
    // smooth and periodic: trapezoid with doubling
    int M = 16;
    double prev = 0.0;
    for (int i = 0; i < M; ++i) prev += integrand(2 * kPi * i / M);
    prev /= M;
    double val = prev;
    for (int it = 0; it < 20; ++it) {
        double add = 0.0;
        for (int i = 0; i < M; ++i) add += integrand(2 * kPi * (i + 0.5) / M);
        val = 0.5 * (prev + add / M);
        M *= 2;
        if (std::abs(val - prev) < 1e-13) break;
        prev = val;
    }
    return z < 0 ? val : 2.0 - val;
}

/**
 * @brief Diagonal d_j of the boundary identity for the upper domain.
 *
 * d = -(K0_AB 1) + cone, with K0_AB the n = 0 Laplace double layer of the
 * unstretched curve. The lower domain uses 2 - d.
 */
struct DiagonalJump {
    std::vector<double> d;          // upper-domain diagonal
    std::vector<double> k_ab;       // K0_AB 1 at each node
    std::vector<double> cone;       // cone term at each node
    std::vector<double> expected;   // local geometric value: 1 smooth, wedge/pi at edges

    double upper(int j) const { return d[j]; }
    double lower(int j) const { return 2.0 - d[j]; }
};

/// Interior opening angle (of the upper domain) at every node, divided by pi.
inline std::vector<double> opening_fraction(const DiscretizedBoundary& bd)
{
    std::vector<double> f(bd.size(), 1.0);
    const auto& segs = bd.curve().segments;
    const auto& mesh = bd.mesh();
    for (int k = 1; k < mesh.segment_count(); ++k) {
        const Vec2 tin = segs[k - 1].tangent(segs[k - 1].s1);
        const Vec2 tout = segs[k].tangent(segs[k].s0);
        // upper domain lies to the left of the direction of travel
        const double turn = std::atan2(tin.rho * tout.z - tin.z * tout.rho, tin.rho * tout.rho + tin.z * tout.z);
        f[mesh.first_node(k)] = (kPi - turn) / kPi;
    }
    // B sits on the flat run; the interface continues past it
    f.back() = 1.0;
    // on the axis the generating curve closes a cone with half angle phi0
    const Vec2 t0 = segs.front().tangent(segs.front().s0);
    const double phi0 = std::atan2(t0.rho, t0.z);
    f.front() = 1.0 - std::cos(phi0);
    return f;
}

inline DiagonalJump diagonal_jump(const DiscretizedBoundary& bd, const AssemblyOptions& opt)
{
    PmlProfile plain = bd.profile();
    plain.radial.strength = 0.0;
    plain.vertical.reset();
    const DiscretizedBoundary pb(bd.curve(), bd.mesh(), plain, bd.side());
    const int N = pb.size();
    const double l = bd.curve().end().rho;
    const AlpertRule rule = alpert_rule(opt.alpert_order);
    DiagonalJump dj;
    dj.d.assign(N, 0.0);
    dj.k_ab.assign(N, 0.0);
    dj.cone.assign(N, 0.0);
    dj.expected = opening_fraction(pb);
    const int workers = std::max(1, opt.threads);
    std::vector<KernelWorkspace> ws(workers);
    const double c = 2.0 * kSqrt2Pi;
    parallel_for(N, workers, [&](int j, int w) {
        const StretchedPoint& tgt = pb[j];
        double acc = 0.0;
        for (const QuadNode& q : split_nodes(j, N, rule)) {
            const StretchedPoint src = q.grid >= 0 ? pb[q.grid] : pb.point(q.t, pb.mesh().segment_of(q.t));
            if (src.rho == 0.0 || src.jac == 0.0 || detail::coincident(src, tgt, bd.curve().total_length)) continue;
            const LaplaceModes lm = laplace_modal_kernels(pair_geometry(tgt, src, plain), 0, ws[w]);
            acc += c * q.w * src.rho * src.jac * lm.D[0].real();
        }
        dj.k_ab[j] = acc;
        // at B the cone degenerates; take the limit along the flat run
        dj.cone[j] = j == N - 1 ? 1.0 : cone_correction(tgt.rho, tgt.z, l);
        dj.d[j] = dj.cone[j] - acc;
    });
    return dj;
}

struct NtDMatrix {
    int n = 0;
    Side side = Side::Upper;
    CMatrix N;
    double condition = 0.0;
};

/**
 * @brief N = (K + d)^{-1} S for the upper domain, (K - (2 - d))^{-1} S for the lower.
 */
inline NtDMatrix ntd_matrix(const LayerMatrices& mats, const DiagonalJump& diag, Side side, double max_condition = 1e12)
{
    const int N = int(mats.S.rows());
    CMatrix A = mats.K;
    for (int j = 0; j < N; ++j) A(j, j) += side == Side::Upper ? diag.upper(j) : -diag.lower(j);
    Eigen::PartialPivLU<CMatrix> lu(A);
    NtDMatrix out;
    out.n = mats.n;
    out.side = side;
    out.condition = 1.0 / lu.rcond();
    if (!(out.condition <= max_condition))
        throw NumericalError("ntd_matrix: mode " + std::to_string(mats.n) + " condition estimate " +
                                 std::to_string(out.condition) + " exceeds limit",
                             out.condition);
    out.N = lu.solve(mats.S);
    return out;
}

}  // namespace pmlbie
