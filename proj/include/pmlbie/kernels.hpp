#pragma once
/**
 * @file kernels.hpp
 * @brief PML-transformed Helmholtz and Laplace kernels, their split forms and
 *        azimuthal modal kernels.
 *
 * Fourier convention: f_n = (1/sqrt(2 pi)) int_{-pi}^{pi} e^{-i n D} f(D) dD,
 * f(D) = sum_n f_n e^{i n D} / sqrt(2 pi). All kernels here are even in D, so
 * only n >= 0 is stored.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "carlson.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace pmlbie {

inline constexpr double kPi = std::numbers::pi;
inline const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);
inline constexpr cplx kI{0.0, 1.0};

/**
 * @brief Target/source quantities shared by every azimuthal angle.
 *
 * Differences are source minus target and avoid cancellation inside the PML.
 */
struct PairGeometry {
    cplx rho_t, rho_s;      // rho~ of target and source
    cplx drho, dz;          // rho~' - rho~, z~' - z~
    cplx d2;                // meridian distance squared
    cplx nuc_rho, nuc_z;    // source complexified normal
    cplx c1;                // nuc_rho drho + nuc_z dz
};

inline PairGeometry pair_geometry(const StretchedPoint& tgt, const StretchedPoint& src, const PmlProfile& prof)
{
    PairGeometry g;
    g.rho_t = tgt.rho_t;
    g.rho_s = src.rho_t;
    const bool pml = std::max(tgt.rho, src.rho) > prof.a1();
    g.drho = pml && std::abs(src.rho - tgt.rho) < 0.5 ? stretched_rho_difference(prof, src.rho, tgt.rho)
                                                      : src.rho_t - tgt.rho_t;
    g.dz = prof.vertical ? stretched_z_difference(prof, src.z, tgt.z) : cplx(src.z - tgt.z);
    g.d2 = g.drho * g.drho + g.dz * g.dz;
    g.nuc_rho = src.nuc_rho;
    g.nuc_z = src.nuc_z;
    g.c1 = g.nuc_rho * g.drho + g.nuc_z * g.dz;
    return g;
}

struct ComplexDistance {
    cplx meridian;    // |r~ - r~'| in the meridian plane
    cplx azimuthal;   // 4 rho~ rho~' sin^2(D/2)
    cplx full;        // 3D complexified distance
};

inline ComplexDistance complex_distance(const PairGeometry& g, double dtheta)
{
    const double s = std::sin(0.5 * dtheta);
    ComplexDistance c;
    c.meridian = std::sqrt(g.d2);
    c.azimuthal = 4.0 * g.rho_t * g.rho_s * (s * s);
    const cplx w = g.d2 + c.azimuthal;
    if (w == cplx(0.0)) throw NumericalError("complex_distance: coincident points");
    c.full = std::sqrt(w);
    return c;
}

inline ComplexDistance complex_distance(const StretchedPoint& p, const StretchedPoint& q, double dtheta,
                                        const PmlProfile& prof)
{
    return complex_distance(pair_geometry(p, q, prof), dtheta);
}

/**
 * @brief G~ = Z (H1 + i H2) and the source-normal derivative D (H3 + i H4).
 */
struct KernelSplit {
    cplx Z, D, H1, H2, H3, H4;
    cplx R, q;
};

inline KernelSplit kernel_split(const PairGeometry& g, double dtheta, double omega)
{
    const double s = std::sin(0.5 * dtheta);
    const cplx s2 = s * s;
    const ComplexDistance c = complex_distance(g, dtheta);
    KernelSplit k;
    k.R = c.full;
    k.q = omega * k.R;
    k.Z = 1.0 / (4.0 * kPi * k.R);
    k.D = -(g.c1 + 2.0 * g.nuc_rho * g.rho_t * s2) / (4.0 * kPi * k.R * k.R * k.R);
    const cplx cq = std::cos(k.q), sq = std::sin(k.q);
    k.H1 = cq;
    k.H2 = sq;
    k.H3 = cq + k.q * sq;
    k.H4 = sq - k.q * cq;
    return k;
}

inline KernelSplit kernel_split(const StretchedPoint& p, const StretchedPoint& q, double dtheta, double omega,
                                const PmlProfile& prof)
{
    return kernel_split(pair_geometry(p, q, prof), dtheta, omega);
}

/**
 * @brief Truncated Taylor polynomials of H1 e^{-iq} and H3 e^{-iq}.
 *
 * H1 e^{-iq} = 1/2 + e^{-2iq}/2 and
 * H3 e^{-iq} = 1/2 + e^{-2iq}/2 - (iq/2)(1 - e^{-2iq}).
 */
struct TaylorSubstitute {
    int L = 5;
    std::vector<cplx> a;      // H1 coefficients, k = 0..L
    std::vector<cplx> b;      // H3 coefficients
    std::vector<cplx> rest1;  // 1 - sum a_k q^k
    std::vector<cplx> rest3;  // (1 - iq) - sum b_k q^k

    static cplx horner(const std::vector<cplx>& c, cplx q)
    {
        cplx acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * q + *it;
        return acc;
    }
    /// cH1(q, L) = e^{iq} P_L(q)
    cplx cH1(cplx q) const { return std::exp(kI * q) * horner(a, q); }
    cplx cH3(cplx q) const { return std::exp(kI * q) * horner(b, q); }
    /// e^{iq} - cH1, evaluated without cancellation.
    cplx complement1(cplx q) const { return std::exp(kI * q) * horner(rest1, q); }
    /// (1 - iq) e^{iq} - cH3.
    cplx complement3(cplx q) const { return std::exp(kI * q) * horner(rest3, q); }
};

inline TaylorSubstitute taylor_substitute(int L)
{
    if (L < 0) throw ConfigError("taylor_substitute: L must be non-negative");
    TaylorSubstitute t;
    t.L = L;
    t.a.resize(L + 1);
    t.b.resize(L + 1);
    cplx pw = 1.0;   // (-2i)^k / k!
    cplx prev = 0.0; // (-2i)^{k-1} / (k-1)!
    for (int k = 0; k <= L; ++k) {
        if (k > 0) {
            prev = pw;
            pw *= cplx(0.0, -2.0) / double(k);
        }
        t.a[k] = k == 0 ? cplx(1.0) : 0.5 * pw;
        t.b[k] = k == 0 ? cplx(1.0) : 0.5 * pw + 0.5 * kI * prev - (k == 1 ? 0.5 * kI : cplx(0.0));
    }
    t.rest1.assign(L + 1, 0.0);
    t.rest3.assign(std::max(L, 1) + 1, 0.0);
    for (int k = 1; k <= L; ++k) t.rest1[k] = -t.a[k];
    t.rest3[1] = -kI;
    for (int k = 0; k <= L; ++k) t.rest3[k] -= t.b[k];
    t.rest3[0] += 1.0;
    return t;
}

/// Modes n = 0..nmax of the Laplace factors Z and D.
struct LaplaceModes {
    std::vector<cplx> Z, D;
};

struct KernelWorkspace {
    Eigen::FFT<double> fft;
    std::vector<cplx> buf_in, buf_out;
    std::vector<std::vector<cplx>> spectra;
    int near_hint = 0;   // starting sample count for the next near pair (0: none)

    /// Modes of an even, 2 pi-periodic function given at D_j = 2 pi j / M.
    void modes(const std::vector<cplx>& samples, std::vector<cplx>& out)
    {
        fft.fwd(out, samples);
        const double scale = kSqrt2Pi / double(samples.size());
        for (auto& v : out) v *= scale;
    }
};

namespace detail {

/// Fill samples of an even function at D_j = 2 pi j / M, evaluating j <= M/2 only.
template <class F>
void sample_even(int M, std::vector<cplx>& out, F&& f)
{
    out.resize(M);
    for (int j = 0; j <= M / 2; ++j) out[j] = f(2.0 * kPi * j / M);
    for (int j = M / 2 + 1; j < M; ++j) out[j] = out[M - j];
}

/// Half-period samples f(D_j), j = 0..M/2, of K even functions. When `half`
/// already holds samples for M/2 they are reused as the even-indexed ones.
template <std::size_t K, class F>
void refine_half(int M, std::array<std::vector<cplx>, K>& half, F&& f)
{
    const int n = M / 2 + 1;
    const bool reuse = !half[0].empty() && 2 * (int(half[0].size()) - 1) == M / 2;
    std::array<std::vector<cplx>, K> next;
    for (auto& v : next) v.resize(n);
    for (int j = 0; j < n; ++j) {
        if (reuse && j % 2 == 0) {
            for (std::size_t k = 0; k < K; ++k) next[k][j] = half[k][j / 2];
            continue;
        }
        const std::array<cplx, K> v = f(2.0 * kPi * j / M);
        for (std::size_t k = 0; k < K; ++k) next[k][j] = v[k];
    }
    half = std::move(next);
}

/// Full-period even extension of half-period samples.
inline void mirror(const std::vector<cplx>& half, int M, std::vector<cplx>& full)
{
    full.resize(M);
    for (int j = 0; j <= M / 2; ++j) full[j] = half[j];
    for (int j = M / 2 + 1; j < M; ++j) full[j] = half[M - j];
}

/// Largest |c_k| over the top eighth of resolved frequencies relative to max |c_k|.
inline double tail_ratio(const std::vector<cplx>& c)
{
    const int M = int(c.size());
    double peak = 0.0, tail = 0.0;
    for (int k = 0; k <= M / 2; ++k) {
        const double a = std::abs(c[k]);
        peak = std::max(peak, a);
        if (k > 3 * M / 8) tail = std::max(tail, a);
    }
    return peak > 0 ? tail / peak : 0.0;
}

inline int pow2_at_least(int m)
{
    int p = 1;
    while (p < m) p <<= 1;
    return p;
}

}  // namespace detail

/**
 * @brief I_n = int_0^pi cos(nD) (A - B cos D)^{-1/2} dD for n = 0..nmax,
 *        with A = d^2 + B, B = 2 rho~ rho~'.
 *
 * I_0, I_1 from Carlson integrals; higher orders from the Legendre
 * Q_{n-1/2}(chi) recurrence, forward when it is mildly unstable and by Miller's
 * backward algorithm otherwise.
 */
inline std::vector<cplx> toroidal_integrals(cplx d2, cplx B, int nmax)
{
    const cplx dp2 = d2 + 2.0 * B;
    const cplx I0 = 2.0 * carlson_rf(0.0, d2, dp2);
    std::vector<cplx> I(std::max(nmax, 1) + 1);
    I[0] = I0;
    I[1] = I0 + (d2 * I0 - 4.0 * carlson_rg0(d2, dp2)) / B;
    const cplx e = d2 / B;   // chi - 1, kept separately: it underflows chi for close pairs
    const cplx chi = 1.0 + e;
    cplx lam = chi + std::sqrt(e) * std::sqrt(chi + 1.0);
    if (std::abs(lam) < 1.0) lam = 1.0 / lam;
    const double lnl = std::log(std::abs(lam));
    if (nmax <= 1) {
        I.resize(nmax + 1);
        return I;
    }
    if (nmax * lnl <= std::log(1e3)) {
        for (int n = 1; n < nmax; ++n) I[n + 1] = (2.0 * n * chi * I[n] - (n - 0.5) * I[n - 1]) / (n + 0.5);
        return I;
    }
    const int top = nmax + int(std::ceil(std::log(1e17) / std::max(lnl, 1e-3))) + 2;
    std::vector<cplx> y(top + 2);
    y[top + 1] = 0.0;
    y[top] = 1e-200;
    for (int n = top; n >= 1; --n) {
        // (n - 1/2) y_{n-1} = 2 n chi y_n - (n + 1/2) y_{n+1}
        y[n - 1] = (2.0 * n * chi * y[n] - (n + 0.5) * y[n + 1]) / (n - 0.5);
        if (std::abs(y[n - 1]) > 1e200)
            for (int m = n - 1; m <= top + 1; ++m) y[m] *= 1e-200;
    }
    const cplx scale = I0 / y[0];
    for (int n = 2; n <= nmax; ++n) I[n] = y[n] * scale;
    return I;
}

/// Direct FFT synthesis of the Laplace factors, for widely separated pairs.
inline LaplaceModes laplace_modes_fft(const PairGeometry& g, int nmax, KernelWorkspace& ws)
{
    LaplaceModes out;
    int M = std::max(64, detail::pow2_at_least(4 * nmax + 4));
    std::vector<cplx> zs, ds, zc, dc;
    for (;;) {
        detail::sample_even(M, zs, [&](double t) {
            const double s = std::sin(0.5 * t);
            return 1.0 / (4.0 * kPi * std::sqrt(g.d2 + 4.0 * g.rho_t * g.rho_s * (s * s)));
        });
        detail::sample_even(M, ds, [&](double t) {
            const double s = std::sin(0.5 * t);
            const cplx R = std::sqrt(g.d2 + 4.0 * g.rho_t * g.rho_s * (s * s));
            return -(g.c1 + 2.0 * g.nuc_rho * g.rho_t * (s * s)) / (4.0 * kPi * R * R * R);
        });
        ws.modes(zs, zc);
        ws.modes(ds, dc);
        if (std::max(detail::tail_ratio(zc), detail::tail_ratio(dc)) < 1e-14 || M >= 8192) break;
        M *= 2;
    }
    out.Z.resize(nmax + 1);
    out.D.resize(nmax + 1);
    for (int n = 0; n <= nmax; ++n) {
        out.Z[n] = n < M / 2 ? zc[n] : cplx(0.0);
        out.D[n] = n < M / 2 ? dc[n] : cplx(0.0);
    }
    return out;
}

/**
 * @brief Modes of Z = 1/(4 pi R) and D for one target/source pair.
 *
 * With J_n = int_0^pi cos(nD) w^{-3/2} dD:
 *   Z_n = I_n / (2 pi sqrt(2 pi)),
 *   D_n = -[c1 J_n + nuc_rho (I_n - d^2 J_n) / (2 rho~')] / (2 pi sqrt(2 pi)).
 */
inline LaplaceModes laplace_modal_kernels(const PairGeometry& g, int nmax, KernelWorkspace& ws)
{
    const cplx B = 2.0 * g.rho_t * g.rho_s;
    if (std::abs(g.d2) < 1e-28 * (1.0 + std::abs(B)))
        throw NumericalError("laplace_modal_kernels: coincident meridian points");
    if (std::abs(B) < 0.125 * std::abs(g.d2)) return laplace_modes_fft(g, nmax, ws);

    const std::vector<cplx> I = toroidal_integrals(g.d2, B, nmax + 1);
    const cplx e = g.d2 / B;
    const cplx denom = e * (2.0 + e);
    LaplaceModes out;
    out.Z.resize(nmax + 1);
    out.D.resize(nmax + 1);
    const double c = 1.0 / (2.0 * kPi * kSqrt2Pi);
    for (int n = 0; n <= nmax; ++n) {
        const cplx Im1 = n == 0 ? I[1] : I[n - 1];
        const cplx J = -(2.0 / B) * (n - 0.5) * (e * I[n] + (I[n] - Im1)) / denom;
        out.Z[n] = c * I[n];
        out.D[n] = -c * (g.c1 * J + g.nuc_rho * (I[n] - g.d2 * J) / (2.0 * g.rho_s));
    }
    return out;
}

inline LaplaceModes laplace_modal_kernels(const StretchedPoint& p, const StretchedPoint& q, int nmax,
                                          const PmlProfile& prof, KernelWorkspace& ws)
{
    return laplace_modal_kernels(pair_geometry(p, q, prof), nmax, ws);
}

struct ModalKernelOptions {
    int nmax = 20;
    bool substitute = true;      // Taylor-substituted trigonometric factors
    int taylor_order = 5;
    double separation = 0.2;     // far if |d| >= separation * max(rho, rho', h L)
    double h_len = 0.0;          // h * L_AB of the mesh
    int M_min = 64;
    int M_max = 4096;
    double far_tol = 1e-13;      // FFT tail target, full kernels
    double near_tol = 1e-12;     // FFT tail target, split factors
    double near_fail = 1e-6;     // tail above this at M_max is an error
    double conv_tol = 1e-14;     // convolution truncation
};

/// S~_n and K~_n (derivative at the source along nu_c) for n = 0..nmax.
struct ModalKernels {
    std::vector<cplx> S, K;
    int samples = 0;
    bool near = false;
    double tail = 0.0;

    cplx single(int n) const { return S[std::abs(n)]; }
    cplx dbl(int n) const { return K[std::abs(n)]; }
};

inline bool is_near_pair(const StretchedPoint& p, const StretchedPoint& q, const PairGeometry& g,
                         const ModalKernelOptions& opt)
{
    const double scale = std::max({p.rho, q.rho, opt.h_len});
    return std::sqrt(std::abs(g.d2)) < opt.separation * scale;
}

/// Far path: FFT of the full kernels.
inline ModalKernels modal_kernels_far(const PairGeometry& g, double omega, const ModalKernelOptions& opt,
                                      KernelWorkspace& ws)
{
    ModalKernels mk;
    int M = std::max(opt.M_min, detail::pow2_at_least(4 * opt.nmax));
    std::vector<cplx> ss, ks, sc, kc;
    std::array<std::vector<cplx>, 2> half;
    double tail = 0.0;
    for (;;) {
        detail::refine_half(M, half, [&](double t) {
            const double s = std::sin(0.5 * t);
            const cplx s2 = s * s;
            const cplx R = std::sqrt(g.d2 + 4.0 * g.rho_t * g.rho_s * s2);
            const cplx q = omega * R;
            const cplx e = std::exp(kI * q);
            return std::array<cplx, 2>{e / (4.0 * kPi * R),
                                       -(g.c1 + 2.0 * g.nuc_rho * g.rho_t * s2) / (4.0 * kPi * R * R * R) * e *
                                           (1.0 - kI * q)};
        });
        detail::mirror(half[0], M, ss);
        detail::mirror(half[1], M, ks);
        ws.modes(ss, sc);
        ws.modes(ks, kc);
        tail = std::max(detail::tail_ratio(sc), detail::tail_ratio(kc));
        if (tail < opt.far_tol || M >= opt.M_max) break;
        M *= 2;
    }
    mk.samples = M;
    mk.tail = tail;
    mk.S.resize(opt.nmax + 1);
    mk.K.resize(opt.nmax + 1);
    for (int n = 0; n <= opt.nmax; ++n) {
        mk.S[n] = sc[n];
        mk.K[n] = kc[n];
    }
    return mk;
}

/**
 * @brief Near path: Z and D modes convolved with the modes of the bounded
 *        trigonometric factors, plus FFT of the smooth remainders.
 *
 * Substituted: G~ = Z cH1 + Z (e^{iq} - cH1), dG~ = D cH3 + D ((1 - iq) e^{iq} - cH3).
 * Plain:       G~ = Z H1 + Z i H2,          dG~ = D H3 + D i H4.
 */
inline ModalKernels modal_kernels_near(const PairGeometry& g, double omega, const ModalKernelOptions& opt,
                                       const TaylorSubstitute& ts, KernelWorkspace& ws)
{
    ModalKernels mk;
    mk.near = true;
    int M = std::max({opt.M_min, detail::pow2_at_least(4 * opt.nmax), ws.near_hint});
    std::vector<cplx> h1s, h3s, r1s, r3s, h1, h3, r1, r3;
    std::array<std::vector<cplx>, 4> half;
    double tail = 0.0;
    for (;;) {
        detail::refine_half(M, half, [&](double t) {
            const double s = std::sin(0.5 * t);
            const cplx s2 = s * s;
            const cplx R = std::sqrt(g.d2 + 4.0 * g.rho_t * g.rho_s * s2);
            const cplx q = omega * R;
            const cplx Z = 1.0 / (4.0 * kPi * R);
            const cplx D = -(g.c1 + 2.0 * g.nuc_rho * g.rho_t * s2) / (4.0 * kPi * R * R * R);
            if (opt.substitute)
                return std::array<cplx, 4>{ts.cH1(q), ts.cH3(q), Z * ts.complement1(q), D * ts.complement3(q)};
            const cplx cq = std::cos(q), sq = std::sin(q);
            // sin q - q cos q = q^3/3 - q^5/30 + ... for small q
            const cplx h4 = std::abs(q) < 0.05 ? q * q * q * (1.0 / 3.0 - q * q / 30.0) : sq - q * cq;
            return std::array<cplx, 4>{cq, cq + q * sq, kI * Z * sq, kI * D * h4};
        });
        detail::mirror(half[0], M, h1s);
        detail::mirror(half[1], M, h3s);
        detail::mirror(half[2], M, r1s);
        detail::mirror(half[3], M, r3s);
        ws.modes(h1s, h1);
        ws.modes(h3s, h3);
        ws.modes(r1s, r1);
        ws.modes(r3s, r3);
        tail = std::max({detail::tail_ratio(h1), detail::tail_ratio(h3), detail::tail_ratio(r1),
                         detail::tail_ratio(r3)});
        if (tail < opt.near_tol || M >= opt.M_max) break;
        M *= 2;
    }
    if (tail > opt.near_fail)
        throw NumericalError("modal_kernels: azimuthal spectrum not resolved at M = " + std::to_string(M), tail);
    mk.samples = M;
    mk.tail = tail;
    ws.near_hint = M / 2;

    // truncate the convolution where both trigonometric spectra are negligible
    double peak = 0.0;
    for (int k = 0; k <= M / 2; ++k) peak = std::max({peak, std::abs(h1[k]), std::abs(h3[k])});
    int Kc = 0;
    for (int k = 0; k < M / 2; ++k)
        if (std::abs(h1[k]) > opt.conv_tol * peak || std::abs(h3[k]) > opt.conv_tol * peak) Kc = k;

    const LaplaceModes lm = laplace_modal_kernels(g, opt.nmax + Kc, ws);
    mk.S.assign(opt.nmax + 1, 0.0);
    mk.K.assign(opt.nmax + 1, 0.0);
    const double c = 1.0 / kSqrt2Pi;
    for (int n = 0; n <= opt.nmax; ++n) {
        cplx s = 0.0, k = 0.0;
        for (int m = -Kc; m <= Kc; ++m) {
            const int idx = m < 0 ? M + m : m;
            const int j = std::abs(n - m);
            s += h1[idx] * lm.Z[j];
            k += h3[idx] * lm.D[j];
        }
        mk.S[n] = c * s + r1[n];
        mk.K[n] = c * k + r3[n];
    }
    return mk;
}

inline ModalKernels modal_kernels(const StretchedPoint& tgt, const StretchedPoint& src, double omega,
                                  const ModalKernelOptions& opt, const TaylorSubstitute& ts, const PmlProfile& prof,
                                  KernelWorkspace& ws)
{
    const PairGeometry g = pair_geometry(tgt, src, prof);
    if (is_near_pair(tgt, src, g, opt)) return modal_kernels_near(g, omega, opt, ts, ws);
    return modal_kernels_far(g, omega, opt, ws);
}

}  // namespace pmlbie
