#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "csk/error.hpp"

namespace csk {

/// Maximum-weight one-to-one matching between rows and columns of a
/// rectangular weight matrix (row-major, rows x cols). Unmatched rows map to
/// npos when rows > cols. Potentials-based O(n^3) assignment on the square
/// zero-padded matrix.
struct MatchingResult {
    std::vector<std::size_t> row_to_col;  // npos for unmatched rows
    double total_weight = 0.0;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

inline MatchingResult hungarian_max_weight(const std::vector<double>& weights, std::size_t rows,
                                           std::size_t cols) {
    if (rows == 0 || cols == 0) throw ValueError("hungarian_max_weight: empty matrix");
    if (weights.size() != rows * cols)
        throw ValueError("hungarian_max_weight: weight count != rows*cols");
    const std::size_t n = rows > cols ? rows : cols;
    const double inf = std::numeric_limits<double>::infinity();

    // Minimize cost = -weight over the padded square matrix.
    auto cost = [&](std::size_t i, std::size_t j) -> double {
        return (i < rows && j < cols) ? -weights[i * cols + j] : 0.0;
    };

    // 1-indexed potentials; p[j] = row matched to column j (0 = none yet).
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    MatchingResult result;
    result.row_to_col.assign(rows, MatchingResult::npos);
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t i = p[j];
        if (i >= 1 && i <= rows && j <= cols) {
            result.row_to_col[i - 1] = j - 1;
            result.total_weight += weights[(i - 1) * cols + (j - 1)];
        }
    }
    return result;
}

}  // namespace csk
