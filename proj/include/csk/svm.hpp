#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "csk/error.hpp"
#include "csk/features.hpp"
#include "csk/parallel.hpp"
#include "csk/rng.hpp"
#include "csk/serialize.hpp"

namespace csk {

struct SvmConfig {
    double lambda = 1e-2;  // step schedule is 1/(lambda t): smaller values need many epochs
    std::size_t epochs = 20;
};

/// One-vs-rest linear classifier with the standardization captured at fit
/// time; scale entries are always positive (constant dims get scale 1).
struct LinearModel {
    std::vector<int> classes;             // sorted ascending
    std::size_t dim = 0;
    std::vector<double> weights;          // classes.size() x dim, row-major
    std::vector<double> biases;
    std::vector<double> mean;
    std::vector<double> scale;
    std::vector<std::vector<double>> objective_trace;  // per class, per epoch
};

namespace detail {

inline double svm_objective(const std::vector<double>& w, double b, double lambda,
                            const FeatureMatrix& z, const std::vector<double>& y) {
    double reg = 0.0;
    for (double v : w) reg += v * v;
    double hinge = 0.0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        double s = b;
        const double* row = z.row(i);
        for (std::size_t j = 0; j < z.dim; ++j) s += w[j] * row[j];
        hinge += std::max(0.0, 1.0 - y[i] * s);
    }
    return 0.5 * lambda * reg + hinge / static_cast<double>(z.rows);
}

}  // namespace detail

inline LinearModel svm_fit(const FeatureMatrix& features, const std::vector<int>& labels,
                           const SvmConfig& cfg, Rng& rng) {
    if (features.rows != labels.size())
        throw ValueError("svm_fit: " + std::to_string(features.rows) + " rows vs " +
                         std::to_string(labels.size()) + " labels");
    if (features.rows == 0) throw ValueError("svm_fit: no samples");
    for (double v : features.data)
        if (!std::isfinite(v)) throw ValueError("svm_fit: features must be finite");

    LinearModel model;
    model.classes = labels;
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                        model.classes.end());
    if (model.classes.size() < 2) throw ValueError("svm_fit: need >= 2 classes");

    const std::size_t n = features.rows, d = features.dim, C = model.classes.size();
    model.dim = d;
    model.mean.assign(d, 0.0);
    model.scale.assign(d, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += features.row(i)[j];
    for (double& v : model.mean) v /= static_cast<double>(n);
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = features.row(i)[j] - model.mean[j];
            var[j] += c * c;
        }
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / static_cast<double>(n));
        model.scale[j] = sd > 0.0 ? sd : 1.0;
    }

    FeatureMatrix z;
    z.rows = n;
    z.dim = d;
    z.data.assign(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            z.row(i)[j] = (features.row(i)[j] - model.mean[j]) / model.scale[j];

    model.weights.assign(C * d, 0.0);
    model.biases.assign(C, 0.0);
    model.objective_trace.assign(C, {});

    // Per-class seeds drawn up front so parallel class training stays
    // deterministic for any worker count.
    std::vector<std::uint64_t> seeds(C);
    for (auto& s : seeds) s = rng.next_u64();

    const double lambda = cfg.lambda;
    parallel_for(C, [&](std::size_t c) {
        Rng crng(seeds[c]);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = labels[i] == model.classes[c] ? 1.0 : -1.0;

        std::vector<double> w(d, 0.0), avg_w(d, 0.0), best_w(d, 0.0);
        double b = 0.0, avg_b = 0.0, best_b = 0.0;
        double best_obj = detail::svm_objective(avg_w, avg_b, lambda, z, y);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);

        const double t0 = 1.0 / lambda;  // tames the first few steps
        std::size_t t = 0;
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            crng.shuffle(order);
            for (std::size_t idx : order) {
                ++t;
                const double eta = 1.0 / (lambda * (static_cast<double>(t) + t0));
                const double* x = z.row(idx);
                double s = b;
                for (std::size_t j = 0; j < d; ++j) s += w[j] * x[j];
                const double shrink = 1.0 - eta * lambda;
                double nrm2 = 0.0;
                if (y[idx] * s < 1.0) {
                    for (std::size_t j = 0; j < d; ++j) {
                        w[j] = shrink * w[j] + eta * y[idx] * x[j];
                        nrm2 += w[j] * w[j];
                    }
                    b += eta * y[idx];
                } else {
                    for (std::size_t j = 0; j < d; ++j) {
                        w[j] *= shrink;
                        nrm2 += w[j] * w[j];
                    }
                }
                // Project onto the 1/sqrt(lambda) ball. The optimum lies
                // inside it, and without the projection the first large
                // steps swamp the average for the whole run.
                if (nrm2 * lambda > 1.0) {
                    const double f = 1.0 / std::sqrt(nrm2 * lambda);
                    for (std::size_t j = 0; j < d; ++j) w[j] *= f;
                    b *= f;
                }
                const double inv_t = 1.0 / static_cast<double>(t);
                for (std::size_t j = 0; j < d; ++j) avg_w[j] += (w[j] - avg_w[j]) * inv_t;
                avg_b += (b - avg_b) * inv_t;
            }
            // Keep the averaged iterate with the best full-batch objective so
            // far; the reported trace is non-increasing by construction.
            const double obj = detail::svm_objective(avg_w, avg_b, lambda, z, y);
            if (obj < best_obj) {
                best_obj = obj;
                best_w = avg_w;
                best_b = avg_b;
            }
            model.objective_trace[c].push_back(best_obj);
        }
        std::copy(best_w.begin(), best_w.end(), model.weights.begin() + c * d);
        model.biases[c] = best_b;
    });
    return model;
}

/// Per-class scores for one already-validated feature row; standardization is
/// applied exactly once here.
inline std::vector<double> svm_scores(const LinearModel& model, const double* x) {
    std::vector<double> scores(model.classes.size());
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        double s = model.biases[c];
        const double* w = model.weights.data() + c * model.dim;
        for (std::size_t j = 0; j < model.dim; ++j)
            s += w[j] * (x[j] - model.mean[j]) / model.scale[j];
        scores[c] = s;
    }
    return scores;
}

inline std::vector<int> svm_predict(const LinearModel& model, const FeatureMatrix& features) {
    if (features.dim != model.dim)
        throw ValueError("svm_predict: feature dim " + std::to_string(features.dim) +
                         " != model dim " + std::to_string(model.dim));
    std::vector<int> out(features.rows);
    parallel_for(features.rows, [&](std::size_t i) {
        const std::vector<double> scores = svm_scores(model, features.row(i));
        std::size_t best = 0;
        for (std::size_t c = 1; c < scores.size(); ++c)
            if (scores[c] > scores[best]) best = c;  // ties keep the lowest class
        out[i] = model.classes[best];
    });
    return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw ValueError("accuracy: size mismatch or empty");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

inline void write_model(std::ostream& os, const LinearModel& m) {
    os.write("CSKM", 4);
    detail::put_u64(os, m.classes.size());
    for (int c : m.classes) detail::put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
    detail::put_u64(os, m.dim);
    for (double v : m.weights) detail::put_f64(os, v);
    for (double v : m.biases) detail::put_f64(os, v);
    for (double v : m.mean) detail::put_f64(os, v);
    for (double v : m.scale) detail::put_f64(os, v);
    if (!os) throw IoError("write_model: stream failure");
}

inline LinearModel read_model(std::istream& is) {
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "CSKM") throw IoError("read_model: bad magic");
    LinearModel m;
    const std::uint64_t C = detail::get_u64(is);
    if (C < 2) throw IoError("read_model: fewer than 2 classes");
    m.classes.resize(C);
    for (auto& c : m.classes)
        c = static_cast<int>(static_cast<std::int64_t>(detail::get_u64(is)));
    m.dim = detail::get_u64(is);
    m.weights.resize(C * m.dim);
    for (auto& v : m.weights) v = detail::get_f64(is);
    m.biases.resize(C);
    for (auto& v : m.biases) v = detail::get_f64(is);
    m.mean.resize(m.dim);
    for (auto& v : m.mean) v = detail::get_f64(is);
    m.scale.resize(m.dim);
    for (auto& v : m.scale) {
        v = detail::get_f64(is);
        if (!(v > 0.0)) throw IoError("read_model: non-positive scale entry");
    }
    if (!is) throw IoError("read_model: stream truncated");
    return m;
}

inline void save_model(const std::string& path, const LinearModel& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_model: cannot open " + path);
    write_model(os, m);
}

inline LinearModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_model: cannot open " + path);
    return read_model(is);
}

}  // namespace csk
