#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "csk/correlation.hpp"
#include "csk/dictionary.hpp"
#include "csk/error.hpp"
#include "csk/sparse_code.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// Dense per-atom coefficient maps, one "same"-size map per atom.
using CoefMaps = std::vector<Tensor>;

inline CoefMaps zero_maps(const Shape& sample_shape, std::size_t atom_count) {
    return CoefMaps(atom_count, Tensor::zeros(sample_shape));
}

inline CoefMaps code_to_maps(const SparseCode& code) {
    CoefMaps maps;
    maps.reserve(code.atom_count());
    for (std::size_t k = 0; k < code.atom_count(); ++k) maps.push_back(code.dense_map(k));
    return maps;
}

inline SparseCode maps_to_code(const CoefMaps& maps, const Shape& atom_shape) {
    if (maps.empty()) throw ValueError("maps_to_code: no maps");
    SparseCode code(maps.front().shape(), atom_shape, maps.size());
    for (std::size_t k = 0; k < maps.size(); ++k)
        for (std::size_t t = 0; t < maps[k].size(); ++t)
            if (maps[k][t] != 0.0) code.append_ordered(k, t, maps[k][t]);
    return code;
}

/// Reconstruction sum_k a_k * x_k cropped to the sample frame.
inline Tensor conv_reconstruct(const Dictionary& dict, const CoefMaps& maps,
                               CorrMode mode = CorrMode::Auto) {
    if (maps.size() != dict.size())
        throw ValueError("conv_reconstruct: map count != atom count");
    Tensor recon = Tensor::zeros(maps.front().shape());
    for (std::size_t k = 0; k < dict.size(); ++k) {
        const Tensor c = conv_map(maps[k], dict.atom(k), mode);
        for (std::size_t i = 0; i < recon.size(); ++i) recon[i] += c[i];
    }
    return recon;
}

/// (1/2)||y - sum_k a_k * x_k||^2 + lambda sum_k ||x_k||_1
inline double conv_objective(const Tensor& y, const Dictionary& dict, const CoefMaps& maps,
                             double lambda, CorrMode mode = CorrMode::Auto) {
    const Tensor recon = conv_reconstruct(dict, maps, mode);
    double data = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - recon[i];
        data += r * r;
    }
    double l1 = 0.0;
    for (const auto& m : maps) l1 += l1_norm(m);
    return 0.5 * data + lambda * l1;
}

/// Heuristic lambda: 0.1 * max absolute correlation of y with any shifted
/// atom; the code is all-zero for lambda at or above 10x this value.
inline double conv_bpdn_auto_lambda(const Tensor& y, const Dictionary& dict,
                                    CorrMode mode = CorrMode::Auto) {
    double peak = 0.0;
    for (std::size_t k = 0; k < dict.size(); ++k) {
        const Tensor c = corr_map(y, dict.atom(k), mode);
        for (std::size_t t = 0; t < c.size(); ++t) peak = std::max(peak, std::abs(c[t]));
    }
    return 0.1 * peak;
}

struct ConvBpdnResult {
    SparseCode code;
    std::vector<double> objectives;  // F(x_0), then one entry per iteration
    std::size_t iterations = 0;
    bool converged = false;
    double lambda = 0.0;
};

namespace detail {

struct ConvOps {
    const Tensor& y;
    const Dictionary& dict;
    bool fft;
    FftCorrPlan plan;
    std::vector<FftCorrPlan::Spectrum> conv_spectra;  // plain atom spectra
    std::vector<FftCorrPlan::Spectrum> corr_spectra;  // reversed atom spectra

    ConvOps(const Tensor& y_, const Dictionary& dict_, CorrMode mode)
        : y(y_), dict(dict_),
          fft(use_fft(disp_shape(y_.shape(), dict_.atom_shape()), mode)),
          plan(y_.shape(), dict_.atom_shape()) {
        if (fft) {
            for (std::size_t k = 0; k < dict.size(); ++k) {
                conv_spectra.push_back(plan.kernel_spectrum_conv(dict.atom(k)));
                corr_spectra.push_back(plan.kernel_spectrum(dict.atom(k)));
            }
        }
    }

    Tensor reconstruct(const CoefMaps& maps) const {
        if (!fft) return conv_reconstruct(dict, maps, CorrMode::Naive);
        FftCorrPlan::Spectrum acc(Tensor::count(plan.padded_shape()), Complex{0.0, 0.0});
        for (std::size_t k = 0; k < dict.size(); ++k)
            FftCorrPlan::accumulate_product(acc, plan.signal_spectrum(maps[k]), conv_spectra[k]);
        const Tensor disp = plan.to_disp_array(std::move(acc));
        Offsets lo(y.rank());
        for (std::size_t a = 0; a < y.rank(); ++a)
            lo[a] = -(static_cast<std::ptrdiff_t>(dict.atom_shape()[a]) - 1);
        return slice_disp(disp, dict.atom_shape(), lo, y.shape());
    }

    /// Residual r = y - reconstruct(maps); also returns 0.5||r||^2.
    std::pair<Tensor, double> residual(const CoefMaps& maps) const {
        Tensor r = reconstruct(maps);
        double e = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = y[i] - r[i];
            e += r[i] * r[i];
        }
        return {std::move(r), 0.5 * e};
    }

    /// Gradient of the data term w.r.t. map k is -corr_map(r, a_k).
    CoefMaps gradient(const Tensor& r) const {
        CoefMaps g;
        g.reserve(dict.size());
        if (!fft) {
            for (std::size_t k = 0; k < dict.size(); ++k) {
                Tensor gk = corr_map(r, dict.atom(k), CorrMode::Naive);
                for (std::size_t i = 0; i < gk.size(); ++i) gk[i] = -gk[i];
                g.push_back(std::move(gk));
            }
            return g;
        }
        const FftCorrPlan::Spectrum rs = plan.signal_spectrum(r);
        for (std::size_t k = 0; k < dict.size(); ++k) {
            const Tensor disp = plan.correlate(rs, corr_spectra[k]);
            Tensor gk = slice_disp(disp, dict.atom_shape(), Offsets(y.rank(), 0), y.shape());
            for (std::size_t i = 0; i < gk.size(); ++i) gk[i] = -gk[i];
            g.push_back(std::move(gk));
        }
        return g;
    }
};

inline double maps_sq_dist(const CoefMaps& a, const CoefMaps& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t i = 0; i < a[k].size(); ++i) {
            const double d = a[k][i] - b[k][i];
            s += d * d;
        }
    return s;
}

inline double maps_l1(const CoefMaps& m) {
    double s = 0.0;
    for (const auto& t : m) s += l1_norm(t);
    return s;
}

}  // namespace detail

/// Accelerated proximal-gradient solve of the l1 convolutional coding
/// problem with step-size backtracking and a monotone safeguard: the
/// objective sequence never increases. Soft-thresholding produces exact
/// zeros, so the returned code stores only true nonzeros.
inline ConvBpdnResult conv_bpdn_detailed(const Tensor& y, const Dictionary& dict, double lambda,
                                         std::size_t max_iters = 200, double tol = 1e-6,
                                         CorrMode mode = CorrMode::Auto) {
    dict.require_normalized("conv_bpdn");
    if (lambda <= 0.0) throw ValueError("conv_bpdn: lambda must be positive");
    if (max_iters == 0) throw ValueError("conv_bpdn: max_iters must be positive");
    for (std::size_t a = 0; a < y.rank(); ++a)
        if (dict.atom_shape().size() != y.rank() || dict.atom_shape()[a] > y.extent(a))
            throw ShapeError("conv_bpdn: atom " + shape_to_string(dict.atom_shape()) +
                             " does not fit in sample " + shape_to_string(y.shape()));

    const detail::ConvOps ops(y, dict, mode);
    const std::size_t K = dict.size();

    CoefMaps x = zero_maps(y.shape(), K);       // accepted iterate
    CoefMaps v = x;                             // extrapolated point
    auto [rx, fx] = ops.residual(x);
    double Fx = fx + lambda * detail::maps_l1(x);

    ConvBpdnResult result;
    result.lambda = lambda;
    result.objectives.push_back(Fx);

    double L = 1.0;
    double t_k = 1.0;

    for (std::size_t iter = 1; iter <= max_iters; ++iter) {
        auto [rv, fv] = ops.residual(v);
        const CoefMaps gv = ops.gradient(rv);

        CoefMaps z;
        double fz = 0.0;
        for (;;) {
            // prox step from v at step size 1/L, then the descent check
            // f(z) <= f(v) + <g, z-v> + (L/2)||z-v||^2.
            z = v;
            const double thr = lambda / L;
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t i = 0; i < z[k].size(); ++i) {
                    const double g = z[k][i] - gv[k][i] / L;
                    z[k][i] = g > thr ? g - thr : (g < -thr ? g + thr : 0.0);
                }
            fz = ops.residual(z).second;
            double lin = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t i = 0; i < z[k].size(); ++i)
                    lin += gv[k][i] * (z[k][i] - v[k][i]);
            const double quad = 0.5 * L * detail::maps_sq_dist(z, v);
            if (fz <= fv + lin + quad + 1e-12 * (1.0 + std::abs(fv))) break;
            L *= 2.0;
            if (L > 1e18) throw NumericError("conv_bpdn: backtracking step underflow");
        }

        const double Fz = fz + lambda * detail::maps_l1(z);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));

        // Monotone safeguard: keep the better of the candidate and the
        // current iterate.
        const bool accepted = Fz <= Fx;
        CoefMaps x_new = accepted ? z : x;
        const double Fx_new = accepted ? Fz : Fx;

        // Extrapolate from the candidate z even when it was rejected
        // (monotone accelerated-gradient recipe).
        CoefMaps v_new = x_new;
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i < v_new[k].size(); ++i)
                v_new[k][i] += (t_k / t_next) * (z[k][i] - x_new[k][i]) +
                               ((t_k - 1.0) / t_next) * (x_new[k][i] - x[k][i]);

        v = std::move(v_new);
        const double F_prev = Fx;
        x = std::move(x_new);
        Fx = Fx_new;
        t_k = t_next;
        result.objectives.push_back(Fx);
        result.iterations = iter;

        // A rejected candidate leaves the objective unchanged; that is not
        // convergence, so only accepted steps may terminate the loop.
        const double rel = std::abs(F_prev - Fx) / std::max(F_prev, 1e-300);
        if (accepted && rel < tol) {
            result.converged = true;
            break;
        }
    }

    result.code = maps_to_code(x, dict.atom_shape());
    return result;
}

inline SparseCode conv_bpdn(const Tensor& y, const Dictionary& dict, double lambda,
                            std::size_t max_iters = 200, double tol = 1e-6,
                            CorrMode mode = CorrMode::Auto) {
    return conv_bpdn_detailed(y, dict, lambda, max_iters, tol, mode).code;
}

}  // namespace csk
