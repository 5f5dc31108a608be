#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csk/atom_match.hpp"
#include "csk/correlation.hpp"
#include "csk/dict_update.hpp"
#include "csk/dictionary.hpp"
#include "csk/distances.hpp"
#include "csk/error.hpp"
#include "csk/hungarian.hpp"
#include "csk/parallel.hpp"
#include "csk/rng.hpp"
#include "csk/sparse_code.hpp"
#include "csk/tensor.hpp"

namespace csk {

struct ClusteringResult {
    std::vector<std::size_t> assignments;     // per-sample cluster in [0, k)
    Dictionary centroids;
    std::vector<double> objective_trace;      // one value per assignment phase
    std::size_t iterations_run = 0;
};

namespace detail {

/// Best-match assignment engine: one correlation plan per run, sample
/// spectra cached across iterations when they fit in memory. Falls back to
/// exact naive correlation on small shapes (Auto) or on request.
class SiAssignEngine {
public:
    SiAssignEngine(const std::vector<Tensor>& samples, const Shape& atom_shape, CorrMode mode)
        : samples_(samples),
          atom_shape_(atom_shape),
          plan_(samples.front().shape(), atom_shape),
          fft_(use_fft(disp_shape(samples.front().shape(), atom_shape), mode)) {
        energies_.resize(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
            energies_[i] = dot(samples[i], samples[i]);
        const Shape& ss = samples.front().shape();
        valid_shape_.resize(ss.size());
        for (std::size_t a = 0; a < ss.size(); ++a)
            valid_shape_[a] = ss[a] - atom_shape[a] + 1;
        if (fft_) {
            const std::size_t cells = samples.size() * Tensor::count(plan_.padded_shape());
            if (cells <= (std::size_t{1} << 25)) {
                spectra_.resize(samples.size());
                parallel_for(samples.size(), [&](std::size_t i) {
                    spectra_[i] = plan_.signal_spectrum(samples_[i]);
                });
            }
        }
    }

    double sample_energy(std::size_t i) const { return energies_[i]; }

    std::vector<AtomMatch> assign(const Dictionary& dict) const {
        std::vector<AtomMatch> matches(samples_.size());
        if (!fft_) {
            parallel_for(samples_.size(), [&](std::size_t i) {
                matches[i] = best_atom_match(samples_[i], dict, CorrMode::Naive);
            });
            return matches;
        }
        std::vector<FftCorrPlan::Spectrum> atom_spectra;
        atom_spectra.reserve(dict.size());
        for (std::size_t k = 0; k < dict.size(); ++k)
            atom_spectra.push_back(plan_.kernel_spectrum(dict.atom(k)));
        parallel_for(samples_.size(), [&](std::size_t i) {
            FftCorrPlan::Spectrum local;
            if (spectra_.empty()) local = plan_.signal_spectrum(samples_[i]);
            const FftCorrPlan::Spectrum& spec = spectra_.empty() ? local : spectra_[i];
            AtomMatch best;
            double best_sq = -1.0;
            for (std::size_t k = 0; k < dict.size(); ++k) {
                const Tensor disp = plan_.correlate(spec, atom_spectra[k]);
                const Tensor corr =
                    slice_disp(disp, atom_shape_, Offsets(atom_shape_.size(), 0), valid_shape_);
                for (std::size_t t = 0; t < corr.size(); ++t) {
                    const double c = corr[t];
                    if (c * c > best_sq) {
                        best_sq = c * c;
                        best.atom_index = k;
                        best.coeff = c;
                        best.offset = corr.rank() == 1
                                          ? Offsets{static_cast<std::ptrdiff_t>(t)}
                                          : Offsets{static_cast<std::ptrdiff_t>(t / corr.extent(1)),
                                                    static_cast<std::ptrdiff_t>(t % corr.extent(1))};
                    }
                }
            }
            best.residual_energy = std::max(0.0, energies_[i] - best.coeff * best.coeff);
            matches[i] = best;
        });
        return matches;
    }

private:
    const std::vector<Tensor>& samples_;
    Shape atom_shape_, valid_shape_;
    FftCorrPlan plan_;
    bool fft_;
    std::vector<double> energies_;
    std::vector<FftCorrPlan::Spectrum> spectra_;
};

inline void check_cluster_args(std::size_t n, std::size_t k, std::size_t max_iters) {
    if (k == 0) throw ValueError("clustering: k must be positive");
    if (k > n) throw ValueError("clustering: k exceeds sample count");
    if (max_iters == 0) throw ValueError("clustering: max_iters must be positive");
}

}  // namespace detail

/// Sum of best-match residual energies: the shift-invariant k-means
/// objective for fixed centroids.
inline double si_objective(const std::vector<AtomMatch>& matches) {
    double s = 0.0;
    for (const auto& m : matches) s += m.residual_energy;
    return s;
}

/// Lloyd's k-means. Assignment by squared Euclidean distance (ties to the
/// lowest centroid index), update by cluster means, empty clusters re-seeded
/// from the farthest samples. Stops when assignments repeat.
inline ClusteringResult kmeans(const std::vector<Tensor>& samples, std::size_t k,
                               std::size_t max_iters, Rng& rng) {
    detail::check_cluster_args(samples.size(), k, max_iters);
    const std::size_t n = samples.size();
    for (std::size_t i = 1; i < n; ++i)
        require_same_shape(samples[0], samples[i], "kmeans");

    std::vector<Tensor> centroids;
    for (std::size_t idx : rng.sample_indices(n, k)) centroids.push_back(samples[idx]);

    std::vector<std::size_t> assign(n, 0), prev;
    std::vector<double> dist2(n, 0.0);
    std::vector<double> trace;
    std::size_t iters = 0;

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        parallel_for(n, [&](std::size_t i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = euclidean_distance(samples[i], centroids[c]);
                if (d * d < best_d) {
                    best_d = d * d;
                    best = c;
                }
            }
            assign[i] = best;
            dist2[i] = best_d;
        });
        trace.push_back(std::accumulate(dist2.begin(), dist2.end(), 0.0));
        ++iters;
        if (assign == prev) break;
        prev = assign;

        std::vector<Tensor> means(k, Tensor::zeros(samples[0].shape()));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t v = 0; v < samples[i].size(); ++v) means[assign[i]][v] += samples[i][v];
            ++counts[assign[i]];
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return dist2[a] > dist2[b]; });
        std::size_t next_seed = 0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t v = 0; v < means[c].size(); ++v)
                    means[c][v] /= static_cast<double>(counts[c]);
            } else if (next_seed < n) {
                means[c] = samples[order[next_seed++]];
            }
        }
        centroids = std::move(means);
    }

    std::vector<Tensor> atoms;
    for (auto& c : centroids) {
        if (l2_norm(c) == 0.0)
            throw NumericError("kmeans: degenerate all-zero centroid (all-zero cluster)");
        atoms.push_back(std::move(c));
    }
    return ClusteringResult{std::move(assign), Dictionary(std::move(atoms)), std::move(trace),
                            iters};
}

/// Shift-invariant k-means: assignment by best convolutional atom match,
/// centroid update by MOSA. Alternation is heuristic, so the best-objective
/// iterate (dictionary + assignments) is what the result reports; the trace
/// records every assignment phase as-is.
inline ClusteringResult kmeans_shift_invariant(const std::vector<Tensor>& samples, std::size_t k,
                                               const Shape& atom_shape, std::size_t max_iters,
                                               Rng& rng, bool weighted_mosa = false,
                                               CorrMode mode = CorrMode::Auto) {
    detail::check_cluster_args(samples.size(), k, max_iters);
    const std::size_t n = samples.size();
    for (std::size_t i = 1; i < n; ++i)
        require_same_shape(samples[0], samples[i], "kmeans_shift_invariant");
    for (std::size_t a = 0; a < samples[0].rank(); ++a)
        if (atom_shape.size() != samples[0].rank() || atom_shape[a] > samples[0].extent(a))
            throw ShapeError("kmeans_shift_invariant: atom shape " + shape_to_string(atom_shape) +
                             " exceeds sample shape " + shape_to_string(samples[0].shape()));

    // Init: max-energy windows of random distinct samples, skipping samples
    // that are all-zero inside every window.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<Tensor> atoms;
    for (std::size_t idx : order) {
        if (atoms.size() == k) break;
        auto [off, energy] = max_energy_window(samples[idx], atom_shape);
        if (energy <= 0.0) continue;
        atoms.push_back(window_at(samples[idx], off, atom_shape));
    }
    if (atoms.size() < k)
        throw ValueError("kmeans_shift_invariant: fewer nonzero samples than clusters");
    Dictionary dict(std::move(atoms));
    dict.normalize();

    const detail::SiAssignEngine engine(samples, atom_shape, mode);

    std::vector<double> trace;
    std::vector<std::size_t> assign, prev;
    std::size_t iters = 0;
    double best_obj = std::numeric_limits<double>::infinity();
    Dictionary best_dict = dict;
    std::vector<std::size_t> best_assign;

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        const std::vector<AtomMatch> matches = engine.assign(dict);
        assign.resize(n);
        for (std::size_t i = 0; i < n; ++i) assign[i] = matches[i].atom_index;
        const double obj = si_objective(matches);
        trace.push_back(obj);
        ++iters;
        if (obj < best_obj) {
            best_obj = obj;
            best_dict = dict;
            best_assign = assign;
        }
        if (assign == prev) break;
        prev = assign;
        dict = mosa_update(samples, matches, dict, weighted_mosa).dictionary;
    }

    return ClusteringResult{std::move(best_assign), std::move(best_dict), std::move(trace),
                            iters};
}

/// Fraction of samples explained by the best one-to-one cluster-to-class
/// matching of the contingency table (Hungarian algorithm).
inline double clustering_accuracy(const std::vector<std::size_t>& assignments,
                                  const std::vector<int>& labels) {
    if (assignments.size() != labels.size())
        throw ValueError("clustering_accuracy: length mismatch");
    if (assignments.empty()) throw ValueError("clustering_accuracy: empty input");

    std::unordered_map<std::size_t, std::size_t> cid;
    std::unordered_map<int, std::size_t> lid;
    for (std::size_t a : assignments)
        if (!cid.count(a)) {
            const std::size_t next = cid.size();
            cid[a] = next;
        }
    for (int l : labels)
        if (!lid.count(l)) {
            const std::size_t next = lid.size();
            lid[l] = next;
        }
    const std::size_t R = cid.size(), C = lid.size();
    std::vector<double> table(R * C, 0.0);
    for (std::size_t i = 0; i < assignments.size(); ++i)
        table[cid[assignments[i]] * C + lid[labels[i]]] += 1.0;
    const MatchingResult m = hungarian_max_weight(table, R, C);
    return m.total_weight / static_cast<double>(assignments.size());
}

}  // namespace csk
