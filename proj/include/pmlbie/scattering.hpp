#pragma once
/**
 * @file scattering.hpp
 * @brief Reference fields, modal transmission jumps, the per-mode transmission
 *        solve and field evaluation by the representation formula.
 */

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "assembly.hpp"

namespace pmlbie {

/// Complexified Cartesian point (x~, y~, z~).
struct CPoint3 {
    cplx x, y, z;
};

inline CPoint3 meridian_to_cartesian(cplx rho, cplx z, double theta)
{
    return {rho * std::cos(theta), rho * std::sin(theta), z};
}

/// Value of a field and its Cartesian gradient at a (possibly complex) point.
struct FieldValue {
    cplx u;
    std::array<cplx, 3> grad;
};

/// Free-space Helmholtz Green's function e^{i w R} / (4 pi R) and its gradient in r.
inline FieldValue green3d(const CPoint3& r, const std::array<double, 3>& src, double omega)
{
    const cplx dx = r.x - src[0], dy = r.y - src[1], dz = r.z - src[2];
    const cplx R = std::sqrt(dx * dx + dy * dy + dz * dz);
    const cplx e = std::exp(kI * omega * R);
    FieldValue f;
    f.u = e / (4.0 * kPi * R);
    const cplx dR = f.u * (kI * omega - 1.0 / R) / R;   // (dG/dR) / R
    f.grad = {dR * dx, dR * dy, dR * dz};
    return f;
}

struct IncidentConfig {
    enum class Kind { Plane, Point };
    Kind kind = Kind::Point;
    double phi = std::numbers::pi / 3;              // plane: polar incidence angle
    std::array<double, 3> source{0.3, 0.0, 0.5};    // point: source location
};

/**
 * @brief Total field of the flat-interface problem, u^{tot,0}, in each half-space.
 */
class ReferenceField {
public:
    static ReferenceField plane(double omega1, double omega2, double phi)
    {
        if (!(phi >= 0.0 && phi < std::numbers::pi / 2))
            throw ConfigError("reference_plane: incidence angle must lie in [0, pi/2)");
        ReferenceField r;
        r.kind_ = IncidentConfig::Kind::Plane;
        r.w1_ = omega1;
        r.w2_ = omega2;
        r.phi_ = phi;
        const double kx = omega1 * std::sin(phi);
        r.kstar_ = omega2 > std::abs(kx) ? cplx(std::sqrt(omega2 * omega2 - kx * kx), 0.0)
                                         : cplx(0.0, std::sqrt(kx * kx - omega2 * omega2));
        r.R_ = 2.0 / (1.0 + r.kstar_ / (omega1 * std::cos(phi))) - 1.0;
        return r;
    }

    static ReferenceField point(double omega1, const std::array<double, 3>& src, double a1)
    {
        if (!(src[2] > 0.0)) throw ConfigError("reference_point: source must lie above the interface (z > 0)");
        if (!(std::hypot(src[0], src[1]) < a1)) throw ConfigError("reference_point: source must lie inside rho < a1");
        ReferenceField r;
        r.kind_ = IncidentConfig::Kind::Point;
        r.w1_ = omega1;
        r.src_ = src;
        return r;
    }

    IncidentConfig::Kind kind() const { return kind_; }
    cplx reflection() const { return R_; }
    cplx kstar() const { return kstar_; }
    const std::array<double, 3>& source() const { return src_; }

    /// u^{tot,0} of half-space 1 (upper) or 2 (lower), continued to complex points.
    FieldValue eval(int domain, const CPoint3& r) const
    {
        if (kind_ == IncidentConfig::Kind::Point) {
            if (domain == 2) return {0.0, {0.0, 0.0, 0.0}};
            return green3d(r, src_, w1_);
        }
        const double s = std::sin(phi_), c = std::cos(phi_);
        FieldValue f;
        if (domain == 1) {
            const cplx ei = std::exp(kI * w1_ * (-r.x * s - r.z * c));
            const cplx er = R_ * std::exp(kI * w1_ * (-r.x * s + r.z * c));
            f.u = ei + er;
            f.grad = {-kI * w1_ * s * (ei + er), 0.0, kI * w1_ * c * (er - ei)};
        } else {
            const cplx et = (1.0 + R_) * std::exp(-kI * w1_ * s * r.x - kI * kstar_ * r.z);
            f.u = et;
            f.grad = {-kI * w1_ * s * et, 0.0, -kI * kstar_ * et};
        }
        return f;
    }

    /// Incident field alone (used to report the total field).
    cplx incident(const CPoint3& r) const
    {
        if (kind_ == IncidentConfig::Kind::Point) return green3d(r, src_, w1_).u;
        return std::exp(kI * w1_ * (-r.x * std::sin(phi_) - r.z * std::cos(phi_)));
    }

private:
    IncidentConfig::Kind kind_ = IncidentConfig::Kind::Point;
    double w1_ = 0, w2_ = 0, phi_ = 0;
    cplx kstar_, R_;
    std::array<double, 3> src_{};
};

inline ReferenceField reference_plane(double omega1, double omega2, double phi)
{
    return ReferenceField::plane(omega1, omega2, phi);
}
inline ReferenceField reference_point(double omega1, const std::array<double, 3>& src, double a1)
{
    return ReferenceField::point(omega1, src, a1);
}

/// Flux along nu_c of a field, in stretched coordinates at azimuth theta.
inline cplx conormal_flux(const FieldValue& f, const StretchedPoint& p, double theta)
{
    const cplx d_rho = std::cos(theta) * f.grad[0] + std::sin(theta) * f.grad[1];
    return p.nuc_rho * d_rho + p.nuc_z * f.grad[2];
}

struct ModalJumps {
    int n = 0;
    CVector b1, b2;
};

/**
 * @brief b1_n = -[u^{tot,0}]_n and b2_n = -|r'| [d_nu_c u^{tot,0}]_n for |n| <= nf.
 *
 * Result index is n + nf. Azimuthal sampling doubles until the spectrum tail
 * of every node is below `tol` relative.
 */
inline std::vector<ModalJumps> modal_jumps(const ReferenceField& ref, const DiscretizedBoundary& bd, int nf,
                                           double tol = 1e-13, int M_max = 4096)
{
    const int N = bd.size();
    std::vector<ModalJumps> out(2 * nf + 1);
    for (int n = -nf; n <= nf; ++n) {
        out[n + nf].n = n;
        out[n + nf].b1 = CVector::Zero(N);
        out[n + nf].b2 = CVector::Zero(N);
    }
    KernelWorkspace ws;
    std::vector<cplx> us, fs, uc, fc;
    for (int j = 0; j < N; ++j) {
        const StretchedPoint& p = bd[j];
        int M = std::max(64, detail::pow2_at_least(4 * nf + 4));
        for (;;) {
            us.resize(M);
            fs.resize(M);
            for (int k = 0; k < M; ++k) {
                const double th = 2.0 * kPi * k / M;
                const CPoint3 r = meridian_to_cartesian(p.rho_t, p.z_t, th);
                const FieldValue a = ref.eval(1, r), b = ref.eval(2, r);
                us[k] = a.u - b.u;
                fs[k] = conormal_flux(a, p, th) - conormal_flux(b, p, th);
            }
            ws.modes(us, uc);
            ws.modes(fs, fc);
            if (std::max(detail::tail_ratio(uc), detail::tail_ratio(fc)) < tol || M >= M_max) break;
            M *= 2;
        }
        for (int n = -nf; n <= nf; ++n) {
            const int idx = n < 0 ? M + n : n;
            out[n + nf].b1[j] = -uc[idx];
            out[n + nf].b2[j] = -p.jac * fc[idx];
        }
    }
    return out;
}

struct ModalSolution {
    int n = 0;
    CVector phi1, phi2, u1, u2;
    double residual_u = 0.0, residual_phi = 0.0;
};

inline ModalSolution transmission_solve(const NtDMatrix& N1, const NtDMatrix& N2, const ModalJumps& jumps,
                                        double max_condition = 1e12)
{
    ModalSolution s;
    s.n = jumps.n;
    CMatrix A = N1.N - N2.N;
    CVector rhs = jumps.b1 - N2.N * jumps.b2;
    // for n != 0 the row of a node on the axis vanishes; every mode n != 0 of a
    // smooth field is zero there, so pin the density
    for (int j = 0; j < A.rows(); ++j)
        if (A.row(j).isZero(0.0)) {
            A(j, j) = 1.0;
            rhs[j] = 0.0;
        }
    Eigen::PartialPivLU<CMatrix> lu(A);
    const double cond = 1.0 / lu.rcond();
    if (!(cond <= max_condition))
        throw NumericalError("transmission_solve: mode " + std::to_string(jumps.n) +
                                 " difference matrix is near singular; try other PML parameters",
                             cond);
    s.phi1 = lu.solve(rhs);
    s.phi2 = s.phi1 - jumps.b2;
    s.u1 = N1.N * s.phi1;
    s.u2 = N2.N * s.phi2;
    const double nb1 = std::max(jumps.b1.norm(), 1e-300), nb2 = std::max(jumps.b2.norm(), 1e-300);
    s.residual_u = (s.u1 - s.u2 - jumps.b1).norm() / nb1;
    s.residual_phi = (s.phi1 - s.phi2 - jumps.b2).norm() / nb2;
    return s;
}

/// A meridian evaluation point and where it sits.
struct MeridianTarget {
    double rho = 0, z = 0;
    int domain = 1;         // 1 upper, 2 lower
    bool in_pml = false;
    bool near = false;      // closer than two node spacings to the curve
};

inline std::vector<MeridianTarget> classify_targets(const std::vector<std::array<double, 2>>& pts,
                                                    const DiscretizedBoundary& bd)
{
    const DomainLocator loc(bd.curve());
    const double guard = 2.0 * bd.step() * bd.curve().total_length;
    std::vector<MeridianTarget> out;
    for (const auto& p : pts) {
        MeridianTarget t;
        t.rho = p[0];
        t.z = p[1];
        if (t.rho < 0) throw ConfigError("field target with negative rho");
        const double dist = loc.distance_to_curve(t.rho, t.z);
        if (dist < 1e-12)
            throw ConfigError("field target (" + std::to_string(t.rho) + ", " + std::to_string(t.z) +
                              ") lies on the interface");
        t.domain = loc.upper(t.rho, t.z) ? 1 : 2;
        t.in_pml = t.rho > bd.profile().a1();
        t.near = dist < guard;
        out.push_back(t);
    }
    return out;
}

/**
 * @brief Scattered-field modes u_n (|n| <= nf) at meridian targets.
 *
 * Upper domain:  u_n(x) =  sqrt(2 pi) sum_l h_l rho_l [G_n(x, r_l) phi_l - K_n(x, r_l) xi'_l u_l],
 * lower domain:  the same with the opposite sign and the lower-domain solution.
 * `sols` holds modes -nf..nf at index n + nf; `omega` is {omega1, omega2}.
 */
inline std::vector<std::vector<cplx>> evaluate_field_modes(const std::vector<ModalSolution>& sols,
                                                           const DiscretizedBoundary& bd,
                                                           const std::vector<MeridianTarget>& targets,
                                                           std::array<double, 2> omega, const AssemblyOptions& opt)
{
    const int nf = (int(sols.size()) - 1) / 2;
    const int N = bd.size();
    ModalKernelOptions kopt = opt.kernel;
    kopt.nmax = nf;
    kopt.h_len = bd.step() * bd.curve().total_length;
    const TaylorSubstitute ts = taylor_substitute(kopt.taylor_order);
    std::vector<std::vector<cplx>> out(targets.size(), std::vector<cplx>(2 * nf + 1, 0.0));
    const int workers = std::max(1, opt.threads);
    std::vector<KernelWorkspace> ws(workers);
    parallel_for(int(targets.size()), workers, [&](int i, int w) {
        const MeridianTarget& t = targets[i];
        const StretchedPoint x = make_point(bd.profile(), t.rho, t.z, 0.0, 0.0);
        const double om = omega[t.domain - 1];
        const double sign = t.domain == 1 ? 1.0 : -1.0;
        ws[w].near_hint = 0;
        auto& acc = out[i];
        for (int l = 0; l < N; ++l) {
            const StretchedPoint& src = bd[l];
            if (src.rho == 0.0) continue;
            const double hl = (l == 0 || l == N - 1) ? 0.5 * bd.step() : bd.step();
            const ModalKernels mk = modal_kernels(x, src, om, kopt, ts, bd.profile(), ws[w]);
            for (int n = -nf; n <= nf; ++n) {
                const ModalSolution& s = sols[n + nf];
                const cplx phi = t.domain == 1 ? s.phi1[l] : s.phi2[l];
                const cplx u = t.domain == 1 ? s.u1[l] : s.u2[l];
                acc[n + nf] += hl * src.rho * (mk.single(n) * phi - mk.dbl(n) * src.jac * u);
            }
        }
        for (auto& v : acc) v *= sign * kSqrt2Pi;
    });
    return out;
}

/// Mode sum sum_{|n| <= keep} u_n e^{i n theta} / sqrt(2 pi).
inline cplx synthesize(const std::vector<cplx>& modes, double theta, int keep = -1)
{
    const int nf = (int(modes.size()) - 1) / 2;
    if (keep < 0 || keep > nf) keep = nf;
    cplx acc = 0.0;
    for (int n = -keep; n <= keep; ++n) acc += modes[n + nf] * std::exp(kI * double(n) * theta);
    return acc / kSqrt2Pi;
}

}  // namespace pmlbie
