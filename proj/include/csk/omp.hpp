#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

#include "csk/dictionary.hpp"
#include "csk/error.hpp"
#include "csk/parallel.hpp"
#include "csk/sparse_code.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// Orthogonal Matching Pursuit over a vectorized dictionary. Greedy pick by
/// max |<atom, residual>| (ties: lowest index), full least-squares refit of
/// the selected set each step, so the residual stays orthogonal to it.
/// Stops early once the residual is numerically zero.
inline SparseCode omp(const Tensor& y, const Dictionary& dict, std::size_t sparsity) {
    dict.require_normalized("omp");
    if (sparsity == 0) throw ValueError("omp: sparsity must be positive");
    if (sparsity > dict.size())
        throw ValueError("omp: sparsity " + std::to_string(sparsity) + " exceeds atom count " +
                         std::to_string(dict.size()));
    if (y.shape() != dict.atom_shape())
        throw ShapeError("omp: signal shape " + shape_to_string(y.shape()) +
                         " != atom shape " + shape_to_string(dict.atom_shape()));

    const std::size_t m = y.size();
    const std::size_t K = dict.size();
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(m));
    Eigen::MatrixXd D(m, K);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < m; ++i)
            D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = dict.atom(k)[i];

    const double stop = 1e-13 * (1.0 + yv.norm());
    Eigen::VectorXd r = yv;
    std::vector<std::size_t> selected;
    std::vector<char> used(K, 0);
    Eigen::VectorXd coeffs;

    for (std::size_t step = 0; step < sparsity; ++step) {
        if (r.norm() <= stop) break;
        std::size_t best = K;
        double best_abs = -1.0;
        for (std::size_t k = 0; k < K; ++k) {
            if (used[k]) continue;
            const double a = std::abs(D.col(static_cast<Eigen::Index>(k)).dot(r));
            if (a > best_abs) {
                best_abs = a;
                best = k;
            }
        }
        if (best == K) break;
        used[best] = 1;
        selected.push_back(best);

        Eigen::MatrixXd S(m, selected.size());
        for (std::size_t j = 0; j < selected.size(); ++j)
            S.col(static_cast<Eigen::Index>(j)) = D.col(static_cast<Eigen::Index>(selected[j]));
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S);
        if (qr.rank() < static_cast<Eigen::Index>(selected.size()))
            throw NumericError("omp: selected atoms are rank-deficient (duplicate atoms?)");
        coeffs = qr.solve(yv);
        r = yv - S * coeffs;
    }

    SparseCode code(y.shape(), dict.atom_shape(), K);
    for (std::size_t j = 0; j < selected.size(); ++j) code.add(selected[j], 0, coeffs[static_cast<Eigen::Index>(j)]);
    code.sort_entries();
    return code;
}

/// Residual y - sum of selected atoms times coefficients.
inline Tensor omp_residual(const Tensor& y, const Dictionary& dict, const SparseCode& code) {
    Tensor r = y;
    for (const auto& e : code.entries()) {
        const Tensor& a = dict.atom(e.atom);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= e.coeff * a[i];
    }
    return r;
}

inline std::vector<SparseCode> omp_batch(const std::vector<Tensor>& samples,
                                         const Dictionary& dict, std::size_t sparsity) {
    std::vector<SparseCode> codes(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) { codes[i] = omp(samples[i], dict, sparsity); });
    return codes;
}

}  // namespace csk
