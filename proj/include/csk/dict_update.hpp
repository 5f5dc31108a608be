#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "csk/conv_bpdn.hpp"
#include "csk/correlation.hpp"
#include "csk/dictionary.hpp"
#include "csk/error.hpp"
#include "csk/sparse_code.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// Copy the window of y with corner at `offset` and the given shape.
inline Tensor window_at(const Tensor& y, const Offsets& offset, const Shape& shape) {
    if (offset.size() != y.rank() || shape.size() != y.rank())
        throw ShapeError("window_at: rank mismatch");
    for (std::size_t a = 0; a < y.rank(); ++a) {
        if (offset[a] < 0 || static_cast<std::size_t>(offset[a]) + shape[a] > y.extent(a))
            throw ShapeError("window_at: window exceeds tensor bounds");
    }
    Tensor w = Tensor::zeros(shape);
    if (y.rank() == 1) {
        for (std::size_t i = 0; i < shape[0]; ++i)
            w[i] = y[static_cast<std::size_t>(offset[0]) + i];
    } else {
        for (std::size_t i = 0; i < shape[0]; ++i)
            for (std::size_t j = 0; j < shape[1]; ++j)
                w(i, j) = y(static_cast<std::size_t>(offset[0]) + i,
                            static_cast<std::size_t>(offset[1]) + j);
    }
    return w;
}

/// Fully-inside window of maximal l2 energy; ties take the lexicographically
/// smallest corner. Used to seed and re-seed convolutional atoms.
inline std::pair<Offsets, double> max_energy_window(const Tensor& y, const Shape& shape) {
    for (std::size_t a = 0; a < y.rank(); ++a)
        if (shape.size() != y.rank() || shape[a] > y.extent(a))
            throw ShapeError("max_energy_window: window " + shape_to_string(shape) +
                             " exceeds tensor " + shape_to_string(y.shape()));
    Offsets best(y.rank(), 0);
    double best_e = -1.0;
    const std::size_t s0 = y.extent(0) - shape[0] + 1;
    const std::size_t s1 = y.rank() == 2 ? y.extent(1) - shape[1] + 1 : 1;
    for (std::size_t i = 0; i < s0; ++i)
        for (std::size_t j = 0; j < s1; ++j) {
            Offsets off = y.rank() == 1
                              ? Offsets{static_cast<std::ptrdiff_t>(i)}
                              : Offsets{static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)};
            const Tensor w = window_at(y, off, shape);
            const double e = dot(w, w);
            if (e > best_e) {
                best_e = e;
                best = off;
            }
        }
    return {best, best_e};
}

/// Method of Optimal Directions: A = Y X^T (X X^T + 1e-8 I)^-1 over the
/// atoms that appear in some code with a nonzero coefficient; unused atoms
/// pass through unchanged. Solved atoms are re-normalized.
inline Dictionary mod_update(const std::vector<Tensor>& samples,
                             const std::vector<SparseCode>& codes, const Dictionary& dict) {
    if (samples.empty()) throw ValueError("mod_update: no samples");
    if (codes.size() != samples.size())
        throw ValueError("mod_update: sample/code count mismatch");
    const std::size_t m = Tensor::count(dict.atom_shape());
    const std::size_t K = dict.size();
    const std::size_t N = samples.size();

    std::vector<std::vector<double>> xcols(N);
    std::vector<char> used(K, 0);
    for (std::size_t i = 0; i < N; ++i) {
        if (samples[i].shape() != dict.atom_shape())
            throw ShapeError("mod_update: sample shape != atom shape");
        if (codes[i].atom_count() != K)
            throw ValueError("mod_update: code atom count != dictionary size");
        xcols[i] = codes[i].dense_vector();  // throws on convolutional codes
        for (std::size_t k = 0; k < K; ++k)
            if (xcols[i][k] != 0.0) used[k] = 1;
    }

    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < K; ++k)
        if (used[k]) active.push_back(k);
    if (active.empty()) return dict;

    const std::size_t Ku = active.size();
    Eigen::MatrixXd Y(m, N), X(Ku, N);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t r = 0; r < m; ++r) Y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = samples[i][r];
        for (std::size_t j = 0; j < Ku; ++j)
            X(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = xcols[i][active[j]];
    }
    Eigen::MatrixXd G = X * X.transpose();
    G.diagonal().array() += 1e-8;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    if (ldlt.info() != Eigen::Success)
        throw NumericError("mod_update: singular Gram matrix beyond regularization");
    const Eigen::MatrixXd A = ldlt.solve(X * Y.transpose()).transpose();  // m x Ku
    if (!A.allFinite())
        throw NumericError("mod_update: singular Gram matrix beyond regularization");

    std::vector<Tensor> atoms = dict.atoms();
    for (std::size_t j = 0; j < Ku; ++j) {
        Tensor a = Tensor::zeros(dict.atom_shape());
        for (std::size_t r = 0; r < m; ++r) a[r] = A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        const double n = l2_norm(a);
        if (n == 0.0) throw NumericError("mod_update: solved atom is all-zero");
        for (std::size_t r = 0; r < m; ++r) a[r] /= n;
        atoms[active[j]] = std::move(a);
    }
    Dictionary out(std::move(atoms));
    if (dict.is_normalized()) out.normalize();
    return out;
}

struct MosaResult {
    Dictionary dictionary;
    std::size_t skipped = 0;   // matches with |c| <= eps, excluded from averages
    std::size_t reseeded = 0;  // atoms with no usable samples, re-initialized
};

/// Method of Optimal Subdirections on Average. Each assigned sample yields
/// its single-sample least-squares atom (window at the matched offset divided
/// by the coefficient); per atom these are averaged, then normalized.
/// `weighted` switches to the pooled least-squares variant
/// sum(c_i w_i) / sum(c_i^2) instead of the uniform average of w_i / c_i.
/// Atoms with no usable samples re-seed from the max-energy window of the
/// highest-residual unclaimed sample.
inline MosaResult mosa_update(const std::vector<Tensor>& samples,
                              const std::vector<AtomMatch>& matches, const Dictionary& dict,
                              bool weighted = false) {
    constexpr double kEps = 1e-12;
    if (samples.empty()) throw ValueError("mosa_update: no samples");
    if (matches.size() != samples.size())
        throw ValueError("mosa_update: sample/match count mismatch");
    const std::size_t K = dict.size();
    const Shape& ashape = dict.atom_shape();

    std::vector<Tensor> acc(K, Tensor::zeros(ashape));
    std::vector<double> wsum(K, 0.0);  // count (uniform) or sum c^2 (weighted)
    std::size_t skipped = 0;

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const AtomMatch& mt = matches[i];
        if (mt.atom_index >= K) throw ValueError("mosa_update: match atom index out of range");
        if (std::abs(mt.coeff) <= kEps) {
            ++skipped;
            continue;
        }
        const Tensor w = window_at(samples[i], mt.offset, ashape);
        if (weighted) {
            for (std::size_t r = 0; r < w.size(); ++r) acc[mt.atom_index][r] += mt.coeff * w[r];
            wsum[mt.atom_index] += mt.coeff * mt.coeff;
        } else {
            for (std::size_t r = 0; r < w.size(); ++r) acc[mt.atom_index][r] += w[r] / mt.coeff;
            wsum[mt.atom_index] += 1.0;
        }
    }

    // Highest-residual samples first for re-seeding; ties keep input order.
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return matches[a].residual_energy > matches[b].residual_energy;
    });

    std::vector<Tensor> atoms = dict.atoms();
    std::size_t reseeded = 0;
    std::size_t next_seed = 0;
    for (std::size_t k = 0; k < K; ++k) {
        if (wsum[k] > 0.0) {
            Tensor a = acc[k];
            for (std::size_t r = 0; r < a.size(); ++r) a[r] /= wsum[k];
            const double n = l2_norm(a);
            if (n == 0.0) continue;  // cancelled average; keep the old atom
            for (std::size_t r = 0; r < a.size(); ++r) a[r] /= n;
            atoms[k] = std::move(a);
        } else {
            while (next_seed < order.size()) {
                auto [off, energy] = max_energy_window(samples[order[next_seed]], ashape);
                ++next_seed;
                if (energy > 0.0) {
                    Tensor a = window_at(samples[order[next_seed - 1]], off, ashape);
                    const double n = l2_norm(a);
                    for (std::size_t r = 0; r < a.size(); ++r) a[r] /= n;
                    atoms[k] = std::move(a);
                    ++reseeded;
                    break;
                }
            }
        }
    }
    Dictionary out(std::move(atoms));
    out.normalize();
    return {std::move(out), skipped, reseeded};
}

namespace detail {

inline std::vector<CoefMaps> codes_to_dense(const std::vector<Tensor>& samples,
                                            const std::vector<SparseCode>& codes,
                                            const Dictionary& dict) {
    if (codes.size() != samples.size())
        throw ValueError("cdl: sample/code count mismatch");
    std::vector<CoefMaps> maps(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (codes[i].atom_count() != dict.size())
            throw ValueError("cdl: code atom count != dictionary size");
        if (codes[i].sample_shape() != samples[i].shape())
            throw ShapeError("cdl: code map grid != sample shape");
        maps[i] = code_to_maps(codes[i]);
    }
    return maps;
}

}  // namespace detail

/// sum_i ||y_i - sum_k a_k * x_ik||^2 with the codes held fixed.
inline double cdl_objective(const std::vector<Tensor>& samples,
                            const std::vector<SparseCode>& codes, const Dictionary& dict,
                            CorrMode mode = CorrMode::Auto) {
    const auto maps = detail::codes_to_dense(samples, codes, dict);
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Tensor recon = conv_reconstruct(dict, maps[i], mode);
        for (std::size_t r = 0; r < recon.size(); ++r) {
            const double d = samples[i][r] - recon[r];
            total += d * d;
        }
    }
    return total;
}

/// Exact gradient of cdl_objective w.r.t. each atom:
/// d/da_k(u) = -2 sum_i sum_t x_ik(t) r_i(t + u), u over the atom support.
inline std::vector<Tensor> cdl_gradient(const std::vector<Tensor>& samples,
                                        const std::vector<SparseCode>& codes,
                                        const Dictionary& dict, CorrMode mode = CorrMode::Auto) {
    const auto maps = detail::codes_to_dense(samples, codes, dict);
    std::vector<Tensor> grad(dict.size(), Tensor::zeros(dict.atom_shape()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Tensor r = conv_reconstruct(dict, maps[i], mode);
        for (std::size_t v = 0; v < r.size(); ++v) r[v] = samples[i][v] - r[v];
        for (std::size_t k = 0; k < dict.size(); ++k) {
            const Tensor g = corr_lags(r, maps[i][k], dict.atom_shape(), mode);
            for (std::size_t u = 0; u < g.size(); ++u) grad[k][u] -= 2.0 * g[u];
        }
    }
    return grad;
}

/// Convolutional dictionary update with the codes fixed: projected gradient
/// on the atoms (gradient step, then unit-norm projection), accepting only
/// non-increasing objectives via step halving. Stops when the relative
/// objective decrease falls below tol, the projected gradient vanishes, or
/// max_iters is reached.
inline Dictionary cdl_dict_update(const std::vector<Tensor>& samples,
                                  const std::vector<SparseCode>& codes, const Dictionary& dict,
                                  std::size_t max_iters = 20, double tol = 1e-6,
                                  CorrMode mode = CorrMode::Auto) {
    dict.require_normalized("cdl_dict_update");
    if (max_iters == 0) throw ValueError("cdl_dict_update: max_iters must be positive");
    const auto maps = detail::codes_to_dense(samples, codes, dict);
    const std::size_t K = dict.size();

    // Codes are fixed for the whole update, so cache their plain spectra once
    // and evaluate every candidate dictionary with K + N transforms instead
    // of 2 N K. Falls back to direct evaluation when the cache would be huge.
    const bool fft = detail::use_fft(
        detail::disp_shape(samples.front().shape(), dict.atom_shape()), mode);
    FftCorrPlan plan(samples.front().shape(), dict.atom_shape());
    const std::size_t cache_cells = samples.size() * K * Tensor::count(plan.padded_shape());
    const bool cache = fft && cache_cells <= (1u << 25);
    std::vector<std::vector<FftCorrPlan::Spectrum>> map_spectra;
    if (cache) {
        map_spectra.resize(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
            for (std::size_t k = 0; k < K; ++k)
                map_spectra[i].push_back(plan.signal_spectrum(maps[i][k]));
    }

    Offsets crop_lo(samples.front().rank());
    for (std::size_t a = 0; a < crop_lo.size(); ++a)
        crop_lo[a] = -(static_cast<std::ptrdiff_t>(dict.atom_shape()[a]) - 1);

    auto objective = [&](const Dictionary& d) {
        if (!cache) return cdl_objective(samples, codes, d, mode);
        std::vector<FftCorrPlan::Spectrum> atom_spectra;
        atom_spectra.reserve(K);
        for (std::size_t k = 0; k < K; ++k)
            atom_spectra.push_back(plan.kernel_spectrum_conv(d.atom(k)));
        double total = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            FftCorrPlan::Spectrum acc(Tensor::count(plan.padded_shape()),
                                      detail::Complex{0.0, 0.0});
            for (std::size_t k = 0; k < K; ++k)
                FftCorrPlan::accumulate_product(acc, map_spectra[i][k], atom_spectra[k]);
            const Tensor disp = plan.to_disp_array(std::move(acc));
            const Tensor recon =
                detail::slice_disp(disp, dict.atom_shape(), crop_lo, samples[i].shape());
            for (std::size_t v = 0; v < recon.size(); ++v) {
                const double dd = samples[i][v] - recon[v];
                total += dd * dd;
            }
        }
        return total;
    };

    Dictionary cur = dict;
    double g_cur = objective(cur);
    if (!std::isfinite(g_cur)) throw NumericError("cdl_dict_update: non-finite objective");
    double eta = 1.0;

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        const std::vector<Tensor> grad = cdl_gradient(samples, codes, cur, mode);
        double gmax = 0.0;
        for (const auto& g : grad)
            for (std::size_t u = 0; u < g.size(); ++u) gmax = std::max(gmax, std::abs(g[u]));
        if (gmax <= 1e-12 * (1.0 + g_cur)) break;  // stationary

        bool stepped = false;
        while (!stepped) {
            std::vector<Tensor> atoms(K, Tensor::zeros(dict.atom_shape()));
            bool degenerate = false;
            for (std::size_t k = 0; k < K; ++k) {
                Tensor a = cur.atom(k);
                for (std::size_t u = 0; u < a.size(); ++u) a[u] -= eta * grad[k][u];
                const double n = l2_norm(a);
                if (n == 0.0) {
                    degenerate = true;
                    break;
                }
                for (std::size_t u = 0; u < a.size(); ++u) a[u] /= n;
                atoms[k] = std::move(a);
            }
            if (!degenerate) {
                Dictionary cand(std::move(atoms));
                cand.normalize();
                const double g_cand = objective(cand);
                if (std::isfinite(g_cand) && g_cand <= g_cur) {
                    const double rel = (g_cur - g_cand) / std::max(g_cur, 1e-300);
                    cur = std::move(cand);
                    g_cur = g_cand;
                    stepped = true;
                    eta *= 2.0;  // optimistic growth, re-shrunk by backtracking
                    if (rel < tol) return cur;
                    break;
                }
            }
            eta *= 0.5;
            if (eta < 1e-18)
                throw NumericError("cdl_dict_update: step-size underflow in backtracking");
        }
    }
    return cur;
}

}  // namespace csk
