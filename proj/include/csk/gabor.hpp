#pragma once

#include <cmath>
#include <vector>

#include "csk/error.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// Real Gabor kernel on a size x size grid centered at the middle pixel:
///   g(x, y) = exp(-(x'^2 + gamma^2 y'^2) / (2 sigma^2)) * cos(2 pi x' / lambda)
/// with (x', y') the (col, row) coordinates rotated by theta. The kernel is
/// made zero-mean, then unit-norm.
inline Tensor gabor_kernel(std::size_t size, double theta, double lambda, double sigma,
                           double gamma) {
    if (size % 2 == 0) throw ValueError("gabor_kernel: size must be odd");
    if (lambda <= 0.0 || sigma <= 0.0) throw ValueError("gabor_kernel: lambda and sigma must be positive");
    const double c = (static_cast<double>(size) - 1.0) / 2.0;
    Tensor g = Tensor::zeros({size, size});
    const double ct = std::cos(theta), st = std::sin(theta);
    for (std::size_t i = 0; i < size; ++i) {
        const double y = static_cast<double>(i) - c;
        for (std::size_t j = 0; j < size; ++j) {
            const double x = static_cast<double>(j) - c;
            const double xr = x * ct + y * st;
            const double yr = -x * st + y * ct;
            g(i, j) = std::exp(-(xr * xr + gamma * gamma * yr * yr) / (2.0 * sigma * sigma)) *
                      std::cos(2.0 * M_PI * xr / lambda);
        }
    }
    double mean = 0.0;
    for (std::size_t v = 0; v < g.size(); ++v) mean += g[v];
    mean /= static_cast<double>(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) g[v] -= mean;
    const double n = l2_norm(g);
    if (n < 1e-12) throw NumericError("gabor_kernel: degenerate parameters (zero kernel)");
    for (std::size_t v = 0; v < g.size(); ++v) g[v] /= n;
    return g;
}

/// Oriented multi-scale bank, scale-major order: scale s has wavelength
/// lambda_s = 4 * 2^(s/2) and sigma_s = 0.56 lambda_s; orientation o is
/// theta_o = o pi / orientations, restricted to [0, pi) since theta and
/// theta + pi give the same real kernel. Aspect gamma = 0.5 throughout.
inline std::vector<Tensor> gabor_bank(std::size_t scales = 3, std::size_t orientations = 5,
                                      std::size_t size = 11) {
    if (scales == 0 || orientations == 0) throw ValueError("gabor_bank: need >= 1 scale and orientation");
    std::vector<Tensor> bank;
    bank.reserve(scales * orientations);
    for (std::size_t s = 0; s < scales; ++s) {
        const double lambda = 4.0 * std::pow(2.0, static_cast<double>(s) / 2.0);
        const double sigma = 0.56 * lambda;
        for (std::size_t o = 0; o < orientations; ++o) {
            const double theta = static_cast<double>(o) * M_PI / static_cast<double>(orientations);
            bank.push_back(gabor_kernel(size, theta, lambda, sigma, 0.5));
        }
    }
    return bank;
}

}  // namespace csk
