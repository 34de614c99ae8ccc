#pragma once
/**
 * @file runner.hpp
 * @brief Problem setup, per-mode solve and field sampling shared by the CLI
 *        and the test programs.
 */

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "scattering.hpp"

namespace pmlbie {

struct GeometrySpec {
    std::string preset = "example1";    // example1 | example2 | example3 | polyline
    std::vector<Vec2> vertices;         // polyline only; starts on the axis, ends on z = 0
};

/// Perturbation part of the generating curve; the flat run is appended out to a1 + T.
inline CurveSpec curve_spec(const GeometrySpec& g)
{
    CurveSpec c;
    c.extend_flat = true;
    if (g.preset == "example1") {
        c.pieces.push_back(polyline_piece({{0, -1}, {1, -1}, {1, 0}}));
    } else if (g.preset == "example2") {
        c.pieces.push_back(analytic_piece(rippled_quarter_circle()));
    } else if (g.preset == "example3") {
        c.pieces.push_back(polyline_piece(
            {{0, -0.5}, {0.5, -0.5}, {0.5, -0.7}, {0.25, -0.7}, {0.25, -1}, {1, -1}, {1, 0}}));
    } else if (g.preset == "polyline") {
        if (g.vertices.size() < 2) throw ConfigError("geometry.vertices: need at least two vertices");
        c.pieces.push_back(polyline_piece(g.vertices));
    } else {
        throw ConfigError("geometry.preset: unknown preset '" + g.preset + "'");
    }
    return c;
}

/// Meridian evaluation grid, swept over a list of azimuths.
struct GridSpec {
    double rho_min = 0.05, rho_max = 1.95;
    int n_rho = 20;
    double z_min = -1.95, z_max = 1.95;
    int n_z = 20;
    std::vector<double> thetas{kPi / 4, 3 * kPi / 4, 5 * kPi / 4, 7 * kPi / 4};

    std::vector<std::array<double, 2>> points() const
    {
        if (n_rho < 1 || n_z < 1) throw ConfigError("grid: point counts must be positive");
        std::vector<std::array<double, 2>> out;
        for (int i = 0; i < n_rho; ++i)
            for (int k = 0; k < n_z; ++k)
                out.push_back({n_rho == 1 ? rho_min : rho_min + (rho_max - rho_min) * i / (n_rho - 1),
                               n_z == 1 ? z_min : z_min + (z_max - z_min) * k / (n_z - 1)});
        return out;
    }
};

struct ProblemConfig {
    double omega1 = 2 * kPi, omega2 = 2.4 * kPi;
    GeometrySpec geometry;
    double a1 = 2.0, T = 2.0, S = 2.0;
    int p = 6;
    double a2 = std::numeric_limits<double>::infinity();   // recorded only
    int N = 400;
    int alpert_order = 10, interp_order = 10;
    int nf = -1;                  // -1: 20 for point sources, 30 for plane waves
    int taylor_L = 5;
    bool substitute = true;
    IncidentConfig incidence;
    GridSpec grid;
    int threads = 1;
    double max_condition = 1e12;

    int modes() const { return nf >= 0 ? nf : (incidence.kind == IncidentConfig::Kind::Point ? 20 : 30); }

    void validate() const
    {
        if (!(omega1 > 0) || !(omega2 > 0)) throw ConfigError("omega1/omega2: must be positive");
        if (!(a1 > 0)) throw ConfigError("pml.a1: must be positive");
        if (!(T > 0)) throw ConfigError("pml.T: must be positive");
        if (!(S >= 0)) throw ConfigError("pml.S: must be non-negative");
        if (p < 1) throw ConfigError("pml.p: must be at least 1");
        if (N < 10) throw ConfigError("discretization.N: must be at least 10");
        if (nf > 256) throw ConfigError("modes.nf: at most 256");
        if (taylor_L < 0) throw ConfigError("stabilization.L: must be non-negative");
        if (threads < 1) throw ConfigError("threads: must be positive");
    }
};

inline PmlProfile make_profile(const ProblemConfig& c)
{
    PmlProfile prof;
    prof.radial = {c.a1, c.T, c.S, c.p};
    return prof;
}

inline AssemblyOptions make_assembly_options(const ProblemConfig& c)
{
    AssemblyOptions o;
    o.alpert_order = c.alpert_order;
    o.interp_order = c.interp_order;
    o.kernel.taylor_order = c.taylor_L;
    o.kernel.substitute = c.substitute;
    o.threads = c.threads;
    return o;
}

inline DiscretizedBoundary make_boundary(const ProblemConfig& c)
{
    const GeneratingCurve curve = build_generating_curve(curve_spec(c.geometry), c.a1 + c.T);
    if (curve.segments.back().p0.rho > c.a1)
        throw ConfigError("geometry: the perturbation must lie inside rho <= a1");
    const GradedMesh mesh(curve, c.N, c.p, min_segment_steps(make_assembly_options(c)));
    return DiscretizedBoundary(curve, mesh, make_profile(c));
}

inline ReferenceField make_reference(const ProblemConfig& c)
{
    if (c.incidence.kind == IncidentConfig::Kind::Plane) return reference_plane(c.omega1, c.omega2, c.incidence.phi);
    return reference_point(c.omega1, c.incidence.source, c.a1);
}

inline double elapsed(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// NtD matrices of both domains for modes 0..nmax (the kernels are even in n).
struct Operators {
    DiscretizedBoundary boundary;
    DiagonalJump diag;
    std::vector<NtDMatrix> upper, lower;
    double seconds = 0.0;
};

inline Operators build_operators(const ProblemConfig& c, int nmax)
{
    const auto t0 = std::chrono::steady_clock::now();
    const AssemblyOptions opt = make_assembly_options(c);
    Operators ops{make_boundary(c), {}, {}, {}, 0.0};
    ops.diag = diagonal_jump(ops.boundary, opt);
    std::vector<int> modes(nmax + 1);
    for (int n = 0; n <= nmax; ++n) modes[n] = n;
    for (Side side : {Side::Upper, Side::Lower}) {
        const double om = side == Side::Upper ? c.omega1 : c.omega2;
        std::vector<LayerMatrices> mats = assemble_layer_matrices(ops.boundary, om, modes, opt);
        auto& dst = side == Side::Upper ? ops.upper : ops.lower;
        for (auto& m : mats) {
            dst.push_back(ntd_matrix(m, ops.diag, side, c.max_condition));
            m = LayerMatrices{};
        }
    }
    ops.seconds = elapsed(t0);
    return ops;
}

struct ModeReport {
    int n = 0;
    double cond_upper = 0, cond_lower = 0, residual_u = 0, residual_phi = 0;
};

struct ProblemSolution {
    int nf = 0;
    std::vector<ModalSolution> modes;             // index n + nf
    std::vector<ModeReport> reports;
    std::vector<MeridianTarget> targets;
    std::vector<std::vector<cplx>> field_modes;   // [target][n + nf]
    double solve_seconds = 0, field_seconds = 0;
};

inline ProblemSolution solve_problem(const ProblemConfig& c, const Operators& ops)
{
    const int nf = c.modes();
    if (int(ops.upper.size()) <= nf) throw ConfigError("solve_problem: operators built for fewer modes");
    const ReferenceField ref = make_reference(c);
    ProblemSolution out;
    out.nf = nf;
    auto t0 = std::chrono::steady_clock::now();
    const std::vector<ModalJumps> jumps = modal_jumps(ref, ops.boundary, nf);
    out.modes.resize(2 * nf + 1);
    out.reports.resize(2 * nf + 1);
    parallel_for(2 * nf + 1, c.threads, [&](int i, int) {
        const int n = i - nf;
        const NtDMatrix& N1 = ops.upper[std::abs(n)];
        const NtDMatrix& N2 = ops.lower[std::abs(n)];
        out.modes[i] = transmission_solve(N1, N2, jumps[i], c.max_condition);
        out.reports[i] = {n, N1.condition, N2.condition, out.modes[i].residual_u, out.modes[i].residual_phi};
    });
    out.solve_seconds = elapsed(t0);
    t0 = std::chrono::steady_clock::now();
    out.targets = classify_targets(c.grid.points(), ops.boundary);
    out.field_modes =
        evaluate_field_modes(out.modes, ops.boundary, out.targets, {c.omega1, c.omega2}, make_assembly_options(c));
    out.field_seconds = elapsed(t0);
    return out;
}

inline std::string target_tag(const MeridianTarget& t)
{
    if (t.in_pml) return "pml";
    if (t.near) return "near";
    return t.domain == 1 ? "upper" : "lower";
}

struct FieldSample {
    double x = 0, y = 0, z = 0;
    cplx scattered, total;
    std::string tag;
};

/// Scattered and total field on the grid, mode sums truncated to |n| <= keep.
inline std::vector<FieldSample> sample_field(const ProblemConfig& c, const ProblemSolution& sol, int keep = -1)
{
    const ReferenceField ref = make_reference(c);
    const PmlProfile prof = make_profile(c);
    std::vector<FieldSample> out;
    for (std::size_t i = 0; i < sol.targets.size(); ++i) {
        const MeridianTarget& t = sol.targets[i];
        const StretchedPoint sp = make_point(prof, t.rho, t.z, 0.0, 0.0);
        for (double th : c.grid.thetas) {
            FieldSample f;
            f.x = t.rho * std::cos(th);
            f.y = t.rho * std::sin(th);
            f.z = t.z;
            f.scattered = synthesize(sol.field_modes[i], th, keep);
            f.total = f.scattered + ref.eval(t.domain, meridian_to_cartesian(sp.rho_t, sp.z_t, th)).u;
            f.tag = target_tag(t);
            out.push_back(f);
        }
    }
    return out;
}

/// Discrete l2 relative difference over samples outside the PML.
inline double relative_l2(const std::vector<FieldSample>& a, const std::vector<FieldSample>& ref, bool total = true)
{
    if (a.size() != ref.size()) throw ConfigError("relative_l2: grids differ");
    double e = 0, r = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (ref[i].tag == "pml") continue;
        const cplx x = total ? a[i].total : a[i].scattered, y = total ? ref[i].total : ref[i].scattered;
        e += std::norm(x - y);
        r += std::norm(y);
    }
    return r > 0 ? std::sqrt(e / r) : std::sqrt(e);
}

/**
 * @brief Modal traces (u_n, |r'| d_nu_c u_n) at the nodes of u = G~(., r_p),
 *        the field of a point source at the meridian point r_p.
 */
struct PointTraces {
    CVector u, phi;
};

inline PointTraces point_source_traces(const DiscretizedBoundary& bd, const StretchedPoint& rp, double omega,
                                       int n, ModalKernelOptions ko = {})
{
    ko.nmax = std::abs(n);
    ko.h_len = bd.step() * bd.curve().total_length;
    const TaylorSubstitute ts = taylor_substitute(ko.taylor_order);
    KernelWorkspace ws;
    PointTraces t{CVector(bd.size()), CVector(bd.size())};
    for (int j = 0; j < bd.size(); ++j) {
        // the source plays the target so that K differentiates at the node
        const ModalKernels mk = modal_kernels(rp, bd[j], omega, ko, ts, bd.profile(), ws);
        t.u[j] = mk.single(n);
        t.phi[j] = bd[j].jac * mk.dbl(n);
    }
    return t;
}

/// Setup of the NtD accuracy experiment: a source below the interface, upper-domain map.
struct NtdValidation {
    double omega = 2 * kPi;
    int n = 1;
    double a1 = 2.0, T = 2.0, S = 2.0;
    int p = 6;
    double rho_p = 0.5, z_p = -1.3;
    int threads = 1;
};

struct NtdError {
    int N = 0, L = 0;
    bool substitute = true;
    double abs = 0, rel = 0, condition = 0, seconds = 0;
};

/// e = ||u_n - N_n phi_n||_2 for the upper-domain NtD matrix.
inline NtdError ntd_point_source_error(const NtdValidation& v, int N, int L, bool substitute)
{
    const auto t0 = std::chrono::steady_clock::now();
    ProblemConfig c;
    c.omega1 = c.omega2 = v.omega;
    c.a1 = v.a1;
    c.T = v.T;
    c.S = v.S;
    c.p = v.p;
    c.N = N;
    c.taylor_L = L;
    c.substitute = substitute;
    c.threads = v.threads;
    const DiscretizedBoundary bd = make_boundary(c);
    AssemblyOptions opt = make_assembly_options(c);
    // small L leaves the split factors unresolved; measure that error instead of failing
    opt.kernel.near_fail = std::numeric_limits<double>::infinity();
    const DiagonalJump dj = diagonal_jump(bd, opt);
    const LayerMatrices m = assemble_layer_matrices(bd, v.omega, v.n, opt);
    const NtDMatrix nt = ntd_matrix(m, dj, Side::Upper);
    const PointTraces tr =
        point_source_traces(bd, make_point(bd.profile(), v.rho_p, v.z_p, 0.0, 0.0), v.omega, v.n, opt.kernel);
    NtdError e;
    e.N = N;
    e.L = L;
    e.substitute = substitute;
    e.abs = (tr.u - nt.N * tr.phi).norm();
    e.rel = e.abs / tr.u.norm();
    e.condition = nt.condition;
    e.seconds = elapsed(t0);
    return e;
}

}  // namespace pmlbie
