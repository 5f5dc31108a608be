#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csk/conv_bpdn.hpp"
#include "csk/correlation.hpp"
#include "csk/dict_update.hpp"
#include "csk/dictionary.hpp"
#include "csk/error.hpp"
#include "csk/gabor.hpp"
#include "csk/omp.hpp"
#include "csk/parallel.hpp"
#include "csk/patches.hpp"
#include "csk/pooling.hpp"
#include "csk/rng.hpp"
#include "csk/serialize.hpp"
#include "csk/tensor.hpp"

namespace csk {

enum class FeatureKind { DL, PDL, CDL, GFE, PCA };

inline std::string feature_kind_name(FeatureKind k) {
    switch (k) {
        case FeatureKind::DL: return "DL";
        case FeatureKind::PDL: return "PDL";
        case FeatureKind::CDL: return "CDL";
        case FeatureKind::GFE: return "GFE";
        case FeatureKind::PCA: return "PCA";
    }
    return "?";
}

inline FeatureKind feature_kind_from_name(const std::string& s) {
    if (s == "DL") return FeatureKind::DL;
    if (s == "PDL") return FeatureKind::PDL;
    if (s == "CDL") return FeatureKind::CDL;
    if (s == "GFE") return FeatureKind::GFE;
    if (s == "PCA") return FeatureKind::PCA;
    throw ValueError("unknown feature extractor: " + s);
}

/// Hyperparameters for all extractor kinds; empty shapes resolve at fit time
/// to rank-matched defaults (2D: 11x11 patches/kernels, 2x2 pooling cells).
struct FeatureConfig {
    std::size_t dl_atoms = 360;
    std::size_t pdl_atoms = 360;
    std::size_t cdl_atoms = 15;
    std::size_t omp_sparsity = 5;
    std::size_t pca_dims = 100;
    Shape pdl_patch;            // patch shape for PDL
    std::size_t pdl_stride = 0; // transform stride; 0 -> patch extent (non-overlap)
    Shape cdl_kernel;       // CDL atom shape
    Shape pool_cell;        // CDL max / GFE average pooling cell
    std::size_t gabor_scales = 3;
    std::size_t gabor_orientations = 5;
    std::size_t gabor_size = 11;
    std::size_t fit_iters = 10;          // coding/update alternations
    std::size_t max_fit_patches = 20000; // PDL training-patch cap (seeded subsample)
    double cdl_lambda = 0.0;             // <= 0: per-sample auto
    std::size_t bpdn_iters = 100;
    double bpdn_tol = 1e-4;
    CorrMode mode = CorrMode::Auto;
};

/// Fitted extractor; produced by fit_feature_extractor, consumed by transform.
struct FeatureExtractor {
    FeatureKind kind = FeatureKind::DL;
    Shape sample_shape;
    std::size_t output_dim = 0;

    std::vector<Tensor> atoms;        // DL/PDL/CDL dictionary atoms, GFE bank
    bool atoms_normalized = false;
    std::size_t patch_stride = 1;     // PDL
    Shape pool_cell;                  // CDL, GFE
    std::size_t omp_sparsity = 5;     // DL, PDL
    double cdl_lambda = 0.0;
    std::size_t bpdn_iters = 100;
    double bpdn_tol = 1e-4;
    CorrMode mode = CorrMode::Auto;

    std::vector<double> pca_mean;     // PCA: length m
    std::vector<double> pca_axes;     // PCA: row-major d x m

    Dictionary dictionary() const {
        Dictionary d(atoms);
        if (atoms_normalized) d.normalize();
        return d;
    }
};

/// Row-major feature matrix, one sample per row.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    double* row(std::size_t i) { return data.data() + i * dim; }
    const double* row(std::size_t i) const { return data.data() + i * dim; }
};

namespace detail {

inline void check_samples(const std::vector<Tensor>& samples) {
    if (samples.empty()) throw ValueError("feature fit: no samples");
    for (std::size_t i = 1; i < samples.size(); ++i)
        require_same_shape(samples[0], samples[i], "feature fit");
}

inline Shape default_for_rank(const Shape& configured, std::size_t rank, std::size_t ext2d,
                              std::size_t ext1d) {
    if (!configured.empty()) {
        if (configured.size() != rank)
            throw ShapeError("feature config shape " + shape_to_string(configured) +
                             " has wrong rank for samples of rank " + std::to_string(rank));
        return configured;
    }
    return rank == 2 ? Shape{ext2d, ext2d} : Shape{ext1d};
}

/// Dictionary seeded from distinct nonzero training vectors, topped up with
/// random unit atoms when the data cannot fill it.
inline Dictionary init_dict_from_data(const std::vector<Tensor>& data, std::size_t count,
                                      Rng& rng) {
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<Tensor> atoms;
    atoms.reserve(count);
    for (std::size_t i = 0; i < order.size() && atoms.size() < count; ++i)
        if (l2_norm(data[order[i]]) > 0.0) atoms.push_back(data[order[i]]);
    while (atoms.size() < count) {
        Tensor a = Tensor::zeros(data[0].shape());
        for (std::size_t v = 0; v < a.size(); ++v) a[v] = rng.normal();
        atoms.push_back(std::move(a));
    }
    Dictionary d(std::move(atoms));
    d.normalize();
    return d;
}

/// Alternate OMP coding and MOD updates; returns the fitted dictionary.
inline Dictionary fit_dl(const std::vector<Tensor>& data, std::size_t atom_count,
                         std::size_t sparsity, std::size_t iters, Rng& rng) {
    Dictionary dict = init_dict_from_data(data, atom_count, rng);
    const std::size_t s = std::min(sparsity, dict.size());
    for (std::size_t it = 0; it < iters; ++it) {
        const std::vector<SparseCode> codes = omp_batch(data, dict, s);
        dict = mod_update(data, codes, dict);
    }
    return dict;
}

/// Convolutional dictionary init: the max-energy window of each shuffled
/// sample, topped up with random unit atoms. Random starts tend to stall in
/// poor alternation optima; data windows start near an actual motif.
inline Dictionary init_conv_dict(const std::vector<Tensor>& samples, const Shape& kshape,
                                 std::size_t count, Rng& rng) {
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<Tensor> atoms;
    for (std::size_t oi = 0; oi < order.size() && atoms.size() < count; ++oi) {
        const Tensor& y = samples[order[oi]];
        const std::size_t rows = y.rank() == 2 ? y.extent(0) - kshape[0] + 1 : 1;
        const std::size_t cols = y.rank() == 2 ? y.extent(1) - kshape[1] + 1
                                               : y.extent(0) - kshape[0] + 1;
        double best_e = 0.0;
        std::size_t best_r = 0, best_c = 0;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                double e = 0.0;
                if (y.rank() == 2) {
                    for (std::size_t a = 0; a < kshape[0]; ++a)
                        for (std::size_t b = 0; b < kshape[1]; ++b) {
                            const double v = y.values()[(r + a) * y.extent(1) + (c + b)];
                            e += v * v;
                        }
                } else {
                    for (std::size_t a = 0; a < kshape[0]; ++a) {
                        const double v = y[c + a];
                        e += v * v;
                    }
                }
                if (e > best_e) {
                    best_e = e;
                    best_r = r;
                    best_c = c;
                }
            }
        if (best_e <= 0.0) continue;  // blank sample contributes nothing
        Tensor atom = Tensor::zeros(kshape);
        if (y.rank() == 2) {
            for (std::size_t a = 0; a < kshape[0]; ++a)
                for (std::size_t b = 0; b < kshape[1]; ++b)
                    atom[a * kshape[1] + b] =
                        y.values()[(best_r + a) * y.extent(1) + (best_c + b)];
        } else {
            for (std::size_t a = 0; a < kshape[0]; ++a) atom[a] = y[best_c + a];
        }
        atoms.push_back(std::move(atom));
    }
    while (atoms.size() < count) {
        Tensor a = Tensor::zeros(kshape);
        for (std::size_t v = 0; v < a.size(); ++v) a[v] = rng.normal();
        atoms.push_back(std::move(a));
    }
    Dictionary d(std::move(atoms));
    d.normalize();
    return d;
}

inline double bpdn_lambda(const Tensor& y, const Dictionary& dict, double configured,
                          CorrMode mode) {
    if (configured > 0.0) return configured;
    const double auto_l = conv_bpdn_auto_lambda(y, dict, mode);
    // All-zero samples give lambda 0; any positive value keeps the solver's
    // validation happy and the empty code is its immediate fixed point.
    return auto_l > 0.0 ? auto_l : 1.0;
}

}  // namespace detail

inline std::vector<double> transform(const FeatureExtractor& fx, const Tensor& sample);

inline FeatureExtractor fit_feature_extractor(FeatureKind kind,
                                              const std::vector<Tensor>& samples,
                                              const FeatureConfig& cfg, Rng& rng) {
    detail::check_samples(samples);
    const Shape& sshape = samples[0].shape();
    const std::size_t rank = sshape.size();

    FeatureExtractor fx;
    fx.kind = kind;
    fx.sample_shape = sshape;
    fx.omp_sparsity = cfg.omp_sparsity;
    fx.cdl_lambda = cfg.cdl_lambda;
    fx.bpdn_iters = cfg.bpdn_iters;
    fx.bpdn_tol = cfg.bpdn_tol;
    fx.mode = cfg.mode;

    switch (kind) {
        case FeatureKind::DL: {
            const Dictionary d =
                detail::fit_dl(samples, cfg.dl_atoms, cfg.omp_sparsity, cfg.fit_iters, rng);
            fx.atoms = d.atoms();
            fx.atoms_normalized = true;
            fx.output_dim = d.size();
            break;
        }
        case FeatureKind::PDL: {
            const Shape patch = detail::default_for_rank(cfg.pdl_patch, rank, 11, 16);
            fx.patch_stride = cfg.pdl_stride > 0 ? cfg.pdl_stride : patch[0];
            std::vector<Tensor> pool;
            for (const Tensor& y : samples) {
                std::vector<Tensor> ps = extract_patches(y, patch, 1);
                for (auto& p : ps) pool.push_back(std::move(p));
            }
            if (pool.size() > cfg.max_fit_patches) {
                std::vector<std::size_t> keep =
                    rng.sample_indices(pool.size(), cfg.max_fit_patches);
                std::sort(keep.begin(), keep.end());
                std::vector<Tensor> kept;
                kept.reserve(keep.size());
                for (std::size_t i : keep) kept.push_back(std::move(pool[i]));
                pool = std::move(kept);
            }
            const Dictionary d =
                detail::fit_dl(pool, cfg.pdl_atoms, cfg.omp_sparsity, cfg.fit_iters, rng);
            fx.atoms = d.atoms();
            fx.atoms_normalized = true;
            const std::size_t n_patches =
                extract_patches(samples[0], patch, fx.patch_stride).size();
            fx.output_dim = n_patches * d.size();
            break;
        }
        case FeatureKind::CDL: {
            const Shape kshape = detail::default_for_rank(cfg.cdl_kernel, rank, 11, 16);
            for (std::size_t a = 0; a < rank; ++a)
                if (kshape[a] > sshape[a])
                    throw ShapeError("CDL kernel " + shape_to_string(kshape) +
                                     " exceeds sample " + shape_to_string(sshape));
            fx.pool_cell = detail::default_for_rank(cfg.pool_cell, rank, 2, 2);
            Dictionary dict = detail::init_conv_dict(samples, kshape, cfg.cdl_atoms, rng);
            for (std::size_t it = 0; it < cfg.fit_iters; ++it) {
                std::vector<SparseCode> codes(samples.size(),
                                              SparseCode(sshape, kshape, dict.size()));
                parallel_for(samples.size(), [&](std::size_t i) {
                    const double lam =
                        detail::bpdn_lambda(samples[i], dict, cfg.cdl_lambda, cfg.mode);
                    codes[i] = conv_bpdn(samples[i], dict, lam, cfg.bpdn_iters, cfg.bpdn_tol,
                                         cfg.mode);
                });
                dict = cdl_dict_update(samples, codes, dict, 20, 1e-6, cfg.mode);
            }
            fx.atoms = dict.atoms();
            fx.atoms_normalized = true;
            std::size_t pooled = 1;
            for (std::size_t a = 0; a < rank; ++a)
                pooled *= (sshape[a] + fx.pool_cell[a] - 1) / fx.pool_cell[a];
            fx.output_dim = dict.size() * pooled;
            break;
        }
        case FeatureKind::GFE: {
            if (rank != 2) throw ShapeError("GFE requires 2D samples");
            fx.atoms = gabor_bank(cfg.gabor_scales, cfg.gabor_orientations, cfg.gabor_size);
            fx.atoms_normalized = false;  // analytic bank, not a learned dictionary
            fx.pool_cell = detail::default_for_rank(cfg.pool_cell, rank, 2, 2);
            std::size_t pooled = 1;
            for (std::size_t a = 0; a < rank; ++a)
                pooled *= (sshape[a] + fx.pool_cell[a] - 1) / fx.pool_cell[a];
            fx.output_dim = fx.atoms.size() * pooled;
            break;
        }
        case FeatureKind::PCA: {
            const std::size_t m = samples[0].size();
            const std::size_t d = std::min(cfg.pca_dims, m);
            if (samples.size() < d)
                throw ValueError("PCA: " + std::to_string(samples.size()) +
                                 " samples cannot support " + std::to_string(d) + " dims");
            fx.pca_mean.assign(m, 0.0);
            for (const Tensor& y : samples)
                for (std::size_t v = 0; v < m; ++v) fx.pca_mean[v] += y[v];
            for (double& v : fx.pca_mean) v /= static_cast<double>(samples.size());

            Eigen::MatrixXd X(samples.size(), m);
            for (std::size_t i = 0; i < samples.size(); ++i)
                for (std::size_t v = 0; v < m; ++v)
                    X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)) =
                        samples[i][v] - fx.pca_mean[v];
            const Eigen::MatrixXd cov =
                (X.transpose() * X) / static_cast<double>(samples.size());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
            if (eig.info() != Eigen::Success)
                throw NumericError("PCA: eigendecomposition failed");
            // Eigen orders eigenvalues ascending; take the top d, sign-fixed so
            // refits are reproducible.
            fx.pca_axes.assign(d * m, 0.0);
            for (std::size_t a = 0; a < d; ++a) {
                Eigen::VectorXd axis = eig.eigenvectors().col(
                    static_cast<Eigen::Index>(m - 1 - a));
                Eigen::Index lead = 0;
                axis.cwiseAbs().maxCoeff(&lead);
                if (axis(lead) < 0.0) axis = -axis;
                for (std::size_t v = 0; v < m; ++v)
                    fx.pca_axes[a * m + v] = axis(static_cast<Eigen::Index>(v));
            }
            fx.output_dim = d;
            break;
        }
    }
    return fx;
}

inline std::vector<double> transform(const FeatureExtractor& fx, const Tensor& sample) {
    if (sample.shape() != fx.sample_shape)
        throw ShapeError("transform: sample " + shape_to_string(sample.shape()) +
                         " does not match fitted shape " + shape_to_string(fx.sample_shape));
    std::vector<double> out;
    out.reserve(fx.output_dim);

    switch (fx.kind) {
        case FeatureKind::DL: {
            const Dictionary dict = fx.dictionary();
            const SparseCode code = omp(sample, dict, std::min(fx.omp_sparsity, dict.size()));
            out = code.dense_vector();
            break;
        }
        case FeatureKind::PDL: {
            const Dictionary dict = fx.dictionary();
            const Shape patch = dict.atom_shape();
            const std::vector<Tensor> patches =
                extract_patches(sample, patch, fx.patch_stride);
            for (const Tensor& p : patches) {
                const SparseCode code = omp(p, dict, std::min(fx.omp_sparsity, dict.size()));
                const std::vector<double> v = code.dense_vector();
                out.insert(out.end(), v.begin(), v.end());
            }
            break;
        }
        case FeatureKind::CDL: {
            const Dictionary dict = fx.dictionary();
            const double lam = detail::bpdn_lambda(sample, dict, fx.cdl_lambda, fx.mode);
            const SparseCode code =
                conv_bpdn(sample, dict, lam, fx.bpdn_iters, fx.bpdn_tol, fx.mode);
            const CoefMaps maps = code_to_maps(code);
            for (const Tensor& m : maps) {
                const Tensor pooled = pool(absolute(m), fx.pool_cell, PoolKind::Max);
                out.insert(out.end(), pooled.values().begin(), pooled.values().end());
            }
            break;
        }
        case FeatureKind::GFE: {
            for (const Tensor& kernel : fx.atoms) {
                const Tensor resp = corr_centered(sample, kernel, fx.mode);
                const Tensor pooled = pool(absolute(resp), fx.pool_cell, PoolKind::Average);
                out.insert(out.end(), pooled.values().begin(), pooled.values().end());
            }
            break;
        }
        case FeatureKind::PCA: {
            const std::size_t m = fx.pca_mean.size();
            const std::size_t d = fx.output_dim;
            out.assign(d, 0.0);
            for (std::size_t a = 0; a < d; ++a) {
                double s = 0.0;
                for (std::size_t v = 0; v < m; ++v)
                    s += fx.pca_axes[a * m + v] * (sample[v] - fx.pca_mean[v]);
                out[a] = s;
            }
            break;
        }
    }
    if (out.size() != fx.output_dim)
        throw NumericError("transform: produced " + std::to_string(out.size()) +
                           " values, expected " + std::to_string(fx.output_dim));
    return out;
}

inline FeatureMatrix transform_all(const FeatureExtractor& fx,
                                   const std::vector<Tensor>& samples) {
    FeatureMatrix fm;
    fm.rows = samples.size();
    fm.dim = fx.output_dim;
    fm.data.assign(fm.rows * fm.dim, 0.0);
    parallel_for(samples.size(), [&](std::size_t i) {
        const std::vector<double> v = transform(fx, samples[i]);
        std::copy(v.begin(), v.end(), fm.row(i));
    });
    return fm;
}

/// Feature-matrix persistence: the core binary tensor holds the rows x dim
/// payload, and the CSV option writes one sample per row with the label last.
inline void save_features(const std::string& path, const FeatureMatrix& fm) {
    save_tensor(path, Tensor::from_data({fm.rows, fm.dim}, fm.data));
}

inline FeatureMatrix load_features(const std::string& path) {
    const Tensor t = load_tensor(path);
    if (t.rank() != 2) throw IoError("feature matrix must be rank 2");
    FeatureMatrix fm;
    fm.rows = t.extent(0);
    fm.dim = t.extent(1);
    fm.data = t.values();
    return fm;
}

inline void save_features_csv(const std::string& path, const FeatureMatrix& fm,
                              const std::vector<int>& labels) {
    if (labels.size() != fm.rows)
        throw ValueError("save_features_csv: label count mismatch");
    std::ofstream out(path);
    if (!out) throw IoError("save_features_csv: cannot open " + path);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < fm.rows; ++i) {
        for (std::size_t j = 0; j < fm.dim; ++j) out << fm.row(i)[j] << ",";
        out << labels[i] << "\n";
    }
    if (!out) throw IoError("save_features_csv: stream failure");
}

}  // namespace csk
