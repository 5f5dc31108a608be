#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include "csk/datasets.hpp"
#include "csk/rng.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// Seven-segment digit imagery and banked 1D motifs: deterministic generators
/// producing datasets with the structure the benchmarks need (translatable
/// glyph classes, phase-shifted waveform classes) from a seed alone.

struct SynthDigitsConfig {
    double rot_max = 0.12;        // radians, uniform in [-rot_max, rot_max]
    double scale_min = 0.90;
    double scale_max = 1.10;
    std::int64_t max_translate = 2;  // integer px, per axis
    double seg_min = 0.70;        // per-segment amplitude
    double seg_max = 1.00;
    double gain_min = 0.85;       // whole-glyph intensity
    double gain_max = 1.15;
    double noise = 0.04;          // additive Gaussian sigma, clamped to [0, 1]
};

namespace detail {

// Segment letters: A top bar, G middle, D bottom; F/B upper left/right
// verticals, E/C lower left/right.
inline const char* digit_segments(int digit) {
    static const std::array<const char*, 10> table = {
        "ABCDEF", "BC", "ABGED", "ABGCD", "FGBC",
        "AFGCD", "AFGECD", "ABC", "ABCDEFG", "ABCDFG"};
    return table[static_cast<std::size_t>(digit)];
}

inline void paint_bar(std::vector<double>& img, std::size_t r0, std::size_t r1,
                      std::size_t c0, std::size_t c1, double amp) {
    for (std::size_t i = r0; i <= r1; ++i)
        for (std::size_t j = c0; j <= c1; ++j)
            img[i * 28 + j] = std::max(img[i * 28 + j], amp);
}

inline void paint_segment(std::vector<double>& img, char seg, double amp) {
    switch (seg) {
        case 'A': paint_bar(img, 5, 6, 9, 18, amp); break;
        case 'G': paint_bar(img, 13, 14, 9, 18, amp); break;
        case 'D': paint_bar(img, 21, 22, 9, 18, amp); break;
        case 'F': paint_bar(img, 5, 14, 8, 9, amp); break;
        case 'B': paint_bar(img, 5, 14, 18, 19, amp); break;
        case 'E': paint_bar(img, 13, 22, 8, 9, amp); break;
        case 'C': paint_bar(img, 13, 22, 18, 19, amp); break;
        default: break;
    }
}

inline double bilinear28(const std::vector<double>& img, double r, double c) {
    if (r < 0.0 || c < 0.0 || r > 27.0 || c > 27.0) return 0.0;
    const std::size_t r0 = static_cast<std::size_t>(r), c0 = static_cast<std::size_t>(c);
    const std::size_t r1 = std::min<std::size_t>(r0 + 1, 27), c1 = std::min<std::size_t>(c0 + 1, 27);
    const double fr = r - static_cast<double>(r0), fc = c - static_cast<double>(c0);
    return img[r0 * 28 + c0] * (1 - fr) * (1 - fc) + img[r0 * 28 + c1] * (1 - fr) * fc +
           img[r1 * 28 + c0] * fr * (1 - fc) + img[r1 * 28 + c1] * fr * fc;
}

}  // namespace detail

/// `count` 28x28 digit images, label i % 10, drawn as seven-segment glyphs
/// with per-sample rotation, scale, +-2 px translation, per-segment and
/// global intensity variation, and clamped additive noise.
inline LabeledDataset synth_digits(std::size_t count, Rng& rng,
                                   const SynthDigitsConfig& cfg = {}) {
    LabeledDataset data;
    data.name = "synth-digits";
    data.source = "generated";
    data.seed = rng.seed();
    data.samples.reserve(count);
    data.labels.reserve(count);

    for (std::size_t i = 0; i < count; ++i) {
        const int digit = static_cast<int>(i % 10);
        const double theta = rng.uniform(-cfg.rot_max, cfg.rot_max);
        const double s = rng.uniform(cfg.scale_min, cfg.scale_max);
        const double tr = static_cast<double>(rng.uniform_int(-cfg.max_translate, cfg.max_translate));
        const double tc = static_cast<double>(rng.uniform_int(-cfg.max_translate, cfg.max_translate));

        std::vector<double> clean(28 * 28, 0.0);
        for (const char* p = detail::digit_segments(digit); *p; ++p)
            detail::paint_segment(clean, *p, rng.uniform(cfg.seg_min, cfg.seg_max));

        const double gain = rng.uniform(cfg.gain_min, cfg.gain_max);
        const double ct = std::cos(-theta), st = std::sin(-theta);
        const double mid = 13.5;
        std::vector<double> px(28 * 28);
        for (std::size_t r = 0; r < 28; ++r)
            for (std::size_t c = 0; c < 28; ++c) {
                // Inverse map: undo translation, then scale, then rotation.
                const double yr = (static_cast<double>(r) - mid - tr) / s;
                const double xc = (static_cast<double>(c) - mid - tc) / s;
                const double sr = ct * yr - st * xc + mid;
                const double sc = st * yr + ct * xc + mid;
                double v = gain * detail::bilinear28(clean, sr, sc) + cfg.noise * rng.normal();
                px[r * 28 + c] = std::min(1.0, std::max(0.0, v));
            }
        data.samples.push_back(Tensor::from_data({28, 28}, std::move(px)));
        data.labels.push_back(digit);
    }
    return data;
}

struct SynthSeriesConfig {
    std::size_t classes = 7;
    std::size_t length = 96;
    std::size_t motif_len = 24;
    double amp_min = 0.8;
    double amp_max = 1.2;
    double noise = 0.05;
    std::uint64_t motif_seed = 0x5EED5000;  // class motifs fixed across calls
};

namespace detail {

/// Per-class motif: three random harmonics under a Hann window, unit-norm.
/// Derived from the class index alone so train and test share generators.
inline std::vector<double> series_motif(std::size_t cls, const SynthSeriesConfig& cfg) {
    Rng mrng(cfg.motif_seed + cls);
    const std::size_t m = cfg.motif_len;
    std::vector<double> w(m, 0.0);
    for (int h = 1; h <= 3; ++h) {
        const double a = mrng.uniform(0.5, 1.0);
        const double phi = mrng.uniform(0.0, 2.0 * M_PI);
        for (std::size_t t = 0; t < m; ++t)
            w[t] += a * std::sin(2.0 * M_PI * h * static_cast<double>(t) /
                                     static_cast<double>(m) + phi);
    }
    double norm = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(t) /
                                                 static_cast<double>(m - 1));
        w[t] *= hann;
        norm += w[t] * w[t];
    }
    norm = std::sqrt(norm);
    for (auto& v : w) v /= norm;
    return w;
}

}  // namespace detail

/// `count` 1D series, label i % classes; each sample carries its class motif
/// at a uniformly random phase with amplitude jitter plus background noise.
inline LabeledDataset synth_series(std::size_t count, Rng& rng,
                                   const SynthSeriesConfig& cfg = {}) {
    if (cfg.motif_len > cfg.length) throw ValueError("synth_series: motif exceeds length");
    std::vector<std::vector<double>> motifs;
    for (std::size_t c = 0; c < cfg.classes; ++c)
        motifs.push_back(detail::series_motif(c, cfg));

    LabeledDataset data;
    data.name = "synth-series";
    data.source = "generated";
    data.seed = rng.seed();
    data.samples.reserve(count);
    data.labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t cls = i % cfg.classes;
        const auto phase = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(cfg.length - cfg.motif_len)));
        const double amp = rng.uniform(cfg.amp_min, cfg.amp_max);
        std::vector<double> v(cfg.length, 0.0);
        for (std::size_t t = 0; t < cfg.motif_len; ++t) v[phase + t] = amp * motifs[cls][t];
        for (auto& x : v) x += cfg.noise * rng.normal();
        data.samples.push_back(Tensor::from_data({cfg.length}, std::move(v)));
        data.labels.push_back(static_cast<int>(cls));
    }
    return data;
}

/// Write a dataset of 1D series as delimiter-separated rows, label first,
/// in the layout load_csv_series ingests.
inline void write_series_csv(const std::string& path, const LabeledDataset& data,
                             char delimiter = ',') {
    data.validate();
    std::ofstream out(path);
    if (!out) throw IoError("write_series_csv: cannot open " + path);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.samples[i].rank() != 1)
            throw ShapeError("write_series_csv: samples must be 1D");
        out << data.labels[i];
        for (std::size_t t = 0; t < data.samples[i].size(); ++t)
            out << delimiter << data.samples[i][t];
        out << "\n";
    }
    if (!out) throw IoError("write_series_csv: stream failure");
}

}  // namespace csk
