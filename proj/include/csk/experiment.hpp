#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "csk/clustering.hpp"
#include "csk/configfile.hpp"
#include "csk/datasets.hpp"
#include "csk/error.hpp"
#include "csk/features.hpp"
#include "csk/svm.hpp"
#include "csk/synth.hpp"

namespace csk {

/// Everything a runner needs, resolved from defaults, config file, and CLI
/// overrides. The canonical text of this struct (not the raw file) is what
/// gets hashed into result rows, so overrides participate in the hash.
struct ExperimentConfig {
    std::string kind = "cluster-shifted";
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    double scale = 1.0;  // multiplies per_class / train sizes / test size

    // dataset
    std::string dataset = "synth-digits";  // synth-digits | synth-series | idx | csv | cskd
    std::string train_path, train_labels_path;
    std::string test_path, test_labels_path;
    std::size_t csv_length = 96;
    std::size_t csv_label_col = 0;
    std::string csv_delimiter = ",";
    std::size_t per_class = 100;
    std::size_t train_size = 2000;
    std::size_t test_size = 2000;
    std::size_t synth_classes = 10;  // synth-series uses 7

    // cluster-shifted
    std::vector<std::size_t> frames = {28, 32, 36, 44, 56};
    std::size_t cluster_iters = 50;
    Shape atom_shape;  // empty -> base sample shape

    // classify / sweep-patch
    std::vector<std::string> methods = {"DL", "PDL", "CDL", "GFE", "PCA"};
    std::vector<std::size_t> train_sizes;  // empty -> {train_size}
    std::vector<std::size_t> patch_sizes = {2, 4, 16, 24};
    std::size_t fit_cap = 1500;  // samples used to fit extractors
    FeatureConfig features;
    std::size_t fit_bpdn_iters = 50;  // conv coding budget inside CDL fitting
    SvmConfig svm;

    std::string hash;  // filled by finalize()
};

namespace detail {

inline std::string shape_text(const Shape& s) {
    std::ostringstream os;
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    return os.str();
}

inline Shape parse_shape_text(const std::string& s, const std::string& what) {
    Shape out;
    std::istringstream ss(s);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(part, &pos);
            if (pos != part.size() || v <= 0) throw std::invalid_argument("bad");
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ConfigError(what + ": bad shape \"" + s + "\" (want e.g. 28x28 or 16)");
        }
    }
    if (out.empty() || out.size() > 2)
        throw ConfigError(what + ": bad shape \"" + s + "\"");
    return out;
}

inline std::string list_text(const std::vector<std::size_t>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

inline std::string list_text(const std::vector<std::string>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

inline double wall_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

inline std::string fmt6(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

}  // namespace detail

/// Deterministic rendering of every field that affects results; hashed into
/// rows and written next to them for reruns.
inline std::string effective_config_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[experiment]\n"
       << "kind = " << c.kind << "\nseed = " << c.seed << "\nout_dir = " << c.out_dir
       << "\nscale = " << c.scale << "\n[dataset]\nkind = " << c.dataset
       << "\ntrain_path = " << c.train_path << "\ntrain_labels_path = " << c.train_labels_path
       << "\ntest_path = " << c.test_path << "\ntest_labels_path = " << c.test_labels_path
       << "\ncsv_length = " << c.csv_length << "\ncsv_label_col = " << c.csv_label_col
       << "\ncsv_delimiter = " << c.csv_delimiter << "\nper_class = " << c.per_class
       << "\ntrain_size = " << c.train_size << "\ntest_size = " << c.test_size
       << "\nsynth_classes = " << c.synth_classes << "\n[cluster]\nframes = "
       << detail::list_text(c.frames) << "\niters = " << c.cluster_iters << "\natom = "
       << (c.atom_shape.empty() ? std::string("auto") : detail::shape_text(c.atom_shape))
       << "\n[methods]\nlist = " << detail::list_text(c.methods)
       << "\n[classify]\ntrain_sizes = " << detail::list_text(c.train_sizes)
       << "\n[sweep]\npatch_sizes = " << detail::list_text(c.patch_sizes)
       << "\n[features]\ndl_atoms = " << c.features.dl_atoms
       << "\npdl_atoms = " << c.features.pdl_atoms << "\ncdl_atoms = " << c.features.cdl_atoms
       << "\nomp_sparsity = " << c.features.omp_sparsity << "\npca_dims = " << c.features.pca_dims
       << "\npdl_patch = "
       << (c.features.pdl_patch.empty() ? std::string("auto")
                                        : detail::shape_text(c.features.pdl_patch))
       << "\npdl_stride = " << c.features.pdl_stride << "\ncdl_kernel = "
       << (c.features.cdl_kernel.empty() ? std::string("auto")
                                         : detail::shape_text(c.features.cdl_kernel))
       << "\npool = "
       << (c.features.pool_cell.empty() ? std::string("auto")
                                        : detail::shape_text(c.features.pool_cell))
       << "\nfit_iters = " << c.features.fit_iters
       << "\nmax_fit_patches = " << c.features.max_fit_patches
       << "\ncdl_lambda = " << c.features.cdl_lambda << "\nbpdn_iters = " << c.features.bpdn_iters
       << "\nbpdn_tol = " << c.features.bpdn_tol << "\nfit_bpdn_iters = " << c.fit_bpdn_iters
       << "\nfit_cap = " << c.fit_cap << "\n[svm]\nlambda = " << c.svm.lambda
       << "\nepochs = " << c.svm.epochs << "\n";
    return os.str();
}

inline void finalize(ExperimentConfig& c) {
    if (c.scale <= 0.0) throw ConfigError("scale must be positive");
    auto scaled = [&](std::size_t v) {
        return static_cast<std::size_t>(std::llround(static_cast<double>(v) * c.scale));
    };
    if (c.scale != 1.0) {
        c.per_class = std::max<std::size_t>(1, scaled(c.per_class));
        c.train_size = std::max<std::size_t>(1, scaled(c.train_size));
        c.test_size = std::max<std::size_t>(1, scaled(c.test_size));
        for (auto& t : c.train_sizes) t = std::max<std::size_t>(1, scaled(t));
        c.scale = 1.0;  // sizes are now absolute; the hash sees the result
    }
    if (c.train_sizes.empty()) c.train_sizes = {c.train_size};

    const std::string text = effective_config_text(c);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    c.hash = os.str();
}

/// Strict-schema binding of a parsed config file; unknown sections/keys fail
/// with their line numbers.
inline ExperimentConfig experiment_config_from_file(const ConfigFile& f) {
    static const std::vector<std::string> known_sections = {
        "", "experiment", "dataset", "cluster", "methods", "classify", "sweep",
        "features", "svm"};
    for (const std::string& s : f.section_names()) {
        bool ok = false;
        for (const auto& k : known_sections) ok = ok || k == s;
        if (!ok) throw ConfigError(f.origin() + ": unknown section [" + s + "]");
    }
    f.check_known("", {});
    f.check_known("experiment", {"kind", "seed", "out_dir", "scale"});
    f.check_known("dataset",
                  {"kind", "train_path", "train_labels_path", "test_path", "test_labels_path",
                   "csv_length", "csv_label_col", "csv_delimiter", "per_class", "train_size",
                   "test_size", "synth_classes"});
    f.check_known("cluster", {"frames", "iters", "atom"});
    f.check_known("methods", {"list"});
    f.check_known("classify", {"train_sizes"});
    f.check_known("sweep", {"patch_sizes"});
    f.check_known("features",
                  {"dl_atoms", "pdl_atoms", "cdl_atoms", "omp_sparsity", "pca_dims",
                   "pdl_patch", "pdl_stride", "cdl_kernel", "pool", "fit_iters",
                   "max_fit_patches", "cdl_lambda", "bpdn_iters", "bpdn_tol",
                   "fit_bpdn_iters", "fit_cap"});
    f.check_known("svm", {"lambda", "epochs"});

    ExperimentConfig c;
    c.kind = f.get_string("experiment", "kind", c.kind);
    if (c.kind != "cluster-shifted" && c.kind != "classify" && c.kind != "sweep-patch" &&
        c.kind != "dist")
        throw ConfigError(f.origin() + ": unknown experiment kind \"" + c.kind + "\"");
    c.seed = static_cast<std::uint64_t>(f.get_int("experiment", "seed", 1));
    c.out_dir = f.get_string("experiment", "out_dir", c.out_dir);
    c.scale = f.get_double("experiment", "scale", 1.0);

    c.dataset = f.get_string("dataset", "kind", c.dataset);
    if (c.dataset != "synth-digits" && c.dataset != "synth-series" && c.dataset != "idx" &&
        c.dataset != "csv" && c.dataset != "cskd")
        throw ConfigError(f.origin() + ": unknown dataset kind \"" + c.dataset + "\"");
    c.train_path = f.get_string("dataset", "train_path", "");
    c.train_labels_path = f.get_string("dataset", "train_labels_path", "");
    c.test_path = f.get_string("dataset", "test_path", "");
    c.test_labels_path = f.get_string("dataset", "test_labels_path", "");
    c.csv_length = f.get_size("dataset", "csv_length", c.csv_length);
    c.csv_label_col = f.get_size("dataset", "csv_label_col", c.csv_label_col);
    c.csv_delimiter = f.get_string("dataset", "csv_delimiter", c.csv_delimiter);
    if (c.csv_delimiter == "tab") c.csv_delimiter = "\t";
    if (c.csv_delimiter.size() != 1)
        throw ConfigError(f.origin() + ": csv_delimiter must be one character or \"tab\"");
    c.per_class = f.get_size("dataset", "per_class", c.per_class);
    c.train_size = f.get_size("dataset", "train_size", c.train_size);
    c.test_size = f.get_size("dataset", "test_size", c.test_size);
    c.synth_classes = f.get_size("dataset", "synth_classes", c.synth_classes);

    if (f.has("cluster", "frames")) {
        c.frames.clear();
        for (const auto& s : f.get_list("cluster", "frames", {}))
            c.frames.push_back(static_cast<std::size_t>(std::stoll(s)));
    }
    c.cluster_iters = f.get_size("cluster", "iters", c.cluster_iters);
    if (f.has("cluster", "atom"))
        c.atom_shape = detail::parse_shape_text(f.require_string("cluster", "atom"),
                                                f.origin() + ": [cluster] atom");

    if (f.has("methods", "list")) c.methods = f.get_list("methods", "list", c.methods);
    for (const auto& m : c.methods) feature_kind_from_name(m);  // validates names

    if (f.has("classify", "train_sizes")) {
        c.train_sizes.clear();
        for (const auto& s : f.get_list("classify", "train_sizes", {}))
            c.train_sizes.push_back(static_cast<std::size_t>(std::stoll(s)));
    }
    if (f.has("sweep", "patch_sizes")) {
        c.patch_sizes.clear();
        for (const auto& s : f.get_list("sweep", "patch_sizes", {}))
            c.patch_sizes.push_back(static_cast<std::size_t>(std::stoll(s)));
    }

    c.features.dl_atoms = f.get_size("features", "dl_atoms", c.features.dl_atoms);
    c.features.pdl_atoms = f.get_size("features", "pdl_atoms", c.features.pdl_atoms);
    c.features.cdl_atoms = f.get_size("features", "cdl_atoms", c.features.cdl_atoms);
    c.features.omp_sparsity = f.get_size("features", "omp_sparsity", c.features.omp_sparsity);
    c.features.pca_dims = f.get_size("features", "pca_dims", c.features.pca_dims);
    if (f.has("features", "pdl_patch"))
        c.features.pdl_patch = detail::parse_shape_text(
            f.require_string("features", "pdl_patch"), f.origin() + ": pdl_patch");
    c.features.pdl_stride = f.get_size("features", "pdl_stride", c.features.pdl_stride);
    if (f.has("features", "cdl_kernel"))
        c.features.cdl_kernel = detail::parse_shape_text(
            f.require_string("features", "cdl_kernel"), f.origin() + ": cdl_kernel");
    if (f.has("features", "pool"))
        c.features.pool_cell = detail::parse_shape_text(f.require_string("features", "pool"),
                                                        f.origin() + ": pool");
    c.features.fit_iters = f.get_size("features", "fit_iters", c.features.fit_iters);
    c.features.max_fit_patches =
        f.get_size("features", "max_fit_patches", c.features.max_fit_patches);
    c.features.cdl_lambda = f.get_double("features", "cdl_lambda", c.features.cdl_lambda);
    c.features.bpdn_iters = f.get_size("features", "bpdn_iters", c.features.bpdn_iters);
    c.features.bpdn_tol = f.get_double("features", "bpdn_tol", c.features.bpdn_tol);
    c.fit_bpdn_iters = f.get_size("features", "fit_bpdn_iters", c.fit_bpdn_iters);
    c.fit_cap = f.get_size("features", "fit_cap", c.fit_cap);

    c.svm.lambda = f.get_double("svm", "lambda", c.svm.lambda);
    c.svm.epochs = f.get_size("svm", "epochs", c.svm.epochs);
    return c;
}

// result cells returned by runners; the CSVs are views of these

struct ClusterCell {
    std::string method;
    std::size_t frame = 0;
    double mean_shift = 0.0;
    double accuracy = 0.0;
    double runtime_s = 0.0;
};

struct ClassifyCell {
    std::string method;
    std::size_t train_size = 0;
    double accuracy = 0.0;
    std::size_t feature_dim = 0;
    double runtime_s = 0.0;
};

struct SweepCell {
    std::string method;
    std::size_t patch = 0;
    double accuracy = 0.0;
    std::size_t feature_dim = 0;
    double runtime_s = 0.0;
};

namespace detail {

inline void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    return out;
}

inline std::string num_text(double v) {
    std::ostringstream os;
    os << v;  // default formatting: "2" for 2.0, "1.5" for 1.5
    return os.str();
}

/// Figure-style pivot: one x column, one column per non-empty series; empty
/// series are dropped and reported back so the manifest can note them.
inline std::vector<std::string> write_plot_csv(
    const std::string& path, const std::string& x_name,
    const std::vector<std::string>& x_keys,
    const std::vector<std::pair<std::string, std::map<std::string, double>>>& series) {
    std::vector<std::string> omitted;
    std::ofstream out = open_out(path);
    out << x_name;
    for (const auto& [name, values] : series) {
        if (values.empty()) {
            omitted.push_back(name);
            continue;
        }
        out << "," << name;
    }
    out << "\n";
    for (const std::string& x : x_keys) {
        out << x;
        for (const auto& [name, values] : series) {
            if (values.empty()) continue;
            const auto it = values.find(x);
            out << ",";
            if (it != values.end()) out << fmt6(it->second);
        }
        out << "\n";
    }
    if (!out) throw IoError("write failure: " + path);
    return omitted;
}

inline LabeledDataset base_digits(const ExperimentConfig& cfg, std::size_t count, Rng rng) {
    if (cfg.dataset == "synth-digits") return synth_digits(count, rng);
    LabeledDataset full;
    if (cfg.dataset == "idx") full = load_idx(cfg.train_path, cfg.train_labels_path);
    else if (cfg.dataset == "cskd") full = load_dataset(cfg.train_path);
    else throw ConfigError("dataset kind \"" + cfg.dataset + "\" cannot serve this experiment");
    const std::size_t classes = full.class_count();
    const std::size_t per = std::max<std::size_t>(1, count / std::max<std::size_t>(1, classes));
    return subset_per_class(full, per, rng);
}

inline std::pair<LabeledDataset, LabeledDataset> classify_data(const ExperimentConfig& cfg,
                                                               std::size_t max_train) {
    if (cfg.dataset == "synth-digits") {
        Rng tr(cfg.seed * 0x9E3779B97F4A7C15ull + 1);
        Rng te(cfg.seed * 0x9E3779B97F4A7C15ull + 2);
        return {synth_digits(max_train, tr), synth_digits(cfg.test_size, te)};
    }
    if (cfg.dataset == "synth-series") {
        SynthSeriesConfig sc;
        sc.classes = cfg.synth_classes == 10 ? 7 : cfg.synth_classes;
        sc.length = cfg.csv_length;
        Rng tr(cfg.seed * 0x9E3779B97F4A7C15ull + 1);
        Rng te(cfg.seed * 0x9E3779B97F4A7C15ull + 2);
        return {synth_series(max_train, tr, sc), synth_series(cfg.test_size, te, sc)};
    }
    LabeledDataset train, test;
    const char delim = cfg.csv_delimiter[0];
    if (cfg.dataset == "csv") {
        train = load_csv_series(cfg.train_path, cfg.csv_length, cfg.csv_label_col, delim);
        test = load_csv_series(cfg.test_path, cfg.csv_length, cfg.csv_label_col, delim);
    } else if (cfg.dataset == "idx") {
        train = load_idx(cfg.train_path, cfg.train_labels_path);
        test = load_idx(cfg.test_path, cfg.test_labels_path);
    } else if (cfg.dataset == "cskd") {
        train = load_dataset(cfg.train_path);
        test = load_dataset(cfg.test_path);
    } else {
        throw ConfigError("dataset kind \"" + cfg.dataset + "\" cannot serve this experiment");
    }
    if (train.size() > max_train) {
        Rng sr(cfg.seed * 0x9E3779B97F4A7C15ull + 3);
        const std::size_t classes = train.class_count();
        const std::size_t per =
            std::max<std::size_t>(1, max_train / std::max<std::size_t>(1, classes));
        train = subset_per_class(train, per, sr);
    }
    if (test.size() > cfg.test_size) {
        Rng sr(cfg.seed * 0x9E3779B97F4A7C15ull + 4);
        const std::size_t classes = test.class_count();
        const std::size_t per =
            std::max<std::size_t>(1, cfg.test_size / std::max<std::size_t>(1, classes));
        test = subset_per_class(test, per, sr);
    }
    return {train, test};
}

inline double classify_one(const ExperimentConfig& cfg, FeatureKind kind,
                           const std::vector<Tensor>& train, const std::vector<int>& train_y,
                           const std::vector<Tensor>& test, const std::vector<int>& test_y,
                           std::size_t& feature_dim_out) {
    FeatureConfig fc = cfg.features;
    Rng frng(cfg.seed * 0x517CC1B727220A95ull + static_cast<std::uint64_t>(kind));

    std::vector<Tensor> fit_set = train;
    std::vector<int> fit_y = train_y;
    if (fit_set.size() > cfg.fit_cap) {
        Rng cap_rng(cfg.seed * 0x517CC1B727220A95ull + 77);
        std::vector<std::size_t> keep = cap_rng.sample_indices(fit_set.size(), cfg.fit_cap);
        std::sort(keep.begin(), keep.end());
        std::vector<Tensor> fs;
        std::vector<int> fy;
        for (std::size_t i : keep) {
            fs.push_back(fit_set[i]);
            fy.push_back(fit_y[i]);
        }
        fit_set = std::move(fs);
        fit_y = std::move(fy);
    }

    FeatureExtractor fx;
    if (kind == FeatureKind::CDL) {
        // looser coding budget while alternating, full budget at transform
        FeatureConfig fit_fc = fc;
        fit_fc.bpdn_iters = cfg.fit_bpdn_iters;
        fx = fit_feature_extractor(kind, fit_set, fit_fc, frng);
        fx.bpdn_iters = fc.bpdn_iters;
        fx.bpdn_tol = fc.bpdn_tol;
    } else {
        fx = fit_feature_extractor(kind, fit_set, fc, frng);
    }
    feature_dim_out = fx.output_dim;

    const FeatureMatrix ftr = transform_all(fx, train);
    const FeatureMatrix fte = transform_all(fx, test);
    Rng srng(cfg.seed * 0x2545F4914F6CDD1Dull + static_cast<std::uint64_t>(kind));
    const LinearModel model = svm_fit(ftr, train_y, cfg.svm, srng);
    return accuracy(svm_predict(model, fte), test_y);
}

}  // namespace detail

inline std::vector<ClusterCell> run_cluster_shifted(const ExperimentConfig& cfg) {
    detail::ensure_out_dir(cfg.out_dir);
    Rng data_rng(cfg.seed * 0x9E3779B97F4A7C15ull + 11);
    const LabeledDataset base =
        detail::base_digits(cfg, cfg.per_class * 10, data_rng);
    base.validate();
    if (base.size() == 0) throw ValueError("cluster-shifted: empty dataset");
    const std::size_t k = base.class_count();
    const std::size_t base_extent = base.samples[0].extent(0);
    const Shape atom = cfg.atom_shape.empty() ? base.samples[0].shape() : cfg.atom_shape;

    std::vector<ClusterCell> cells;
    for (std::size_t frame : cfg.frames) {
        const double mean_shift = (static_cast<double>(frame) -
                                   static_cast<double>(base_extent)) / 2.0;
        Rng shift_rng(cfg.seed * 0x06C45D6965ull + frame);
        const LabeledDataset shifted = make_shifted(base, frame, shift_rng);

        {
            const double t0 = detail::wall_seconds();
            Rng km_rng(cfg.seed * 0xD1342543DE82EF95ull + frame * 4 + 1);
            const ClusteringResult km =
                kmeans(shifted.samples, k, cfg.cluster_iters, km_rng);
            cells.push_back({"KM", frame, mean_shift,
                             clustering_accuracy(km.assignments, shifted.labels),
                             detail::wall_seconds() - t0});
        }
        {
            const double t0 = detail::wall_seconds();
            Rng si_rng(cfg.seed * 0xD1342543DE82EF95ull + frame * 4 + 2);
            const ClusteringResult si = kmeans_shift_invariant(
                shifted.samples, k, atom, cfg.cluster_iters, si_rng);
            cells.push_back({"KM_si", frame, mean_shift,
                             clustering_accuracy(si.assignments, shifted.labels),
                             detail::wall_seconds() - t0});
        }
        {
            const double t0 = detail::wall_seconds();
            Rng r_rng(cfg.seed * 0xD1342543DE82EF95ull + frame * 4 + 3);
            std::vector<std::size_t> assign(shifted.size());
            for (auto& a : assign)
                a = static_cast<std::size_t>(
                    r_rng.uniform_int(0, static_cast<std::int64_t>(k) - 1));
            cells.push_back({"RAND", frame, mean_shift,
                             clustering_accuracy(assign, shifted.labels),
                             detail::wall_seconds() - t0});
        }
    }

    // results table
    {
        std::ofstream out = detail::open_out(cfg.out_dir + "/results_cluster.csv");
        out << "method,frame,mean_shift,accuracy,seed,config_hash\n";
        for (const auto& c : cells)
            out << c.method << "," << c.frame << "," << detail::fmt6(c.mean_shift) << ","
                << detail::fmt6(c.accuracy) << "," << cfg.seed << "," << cfg.hash << "\n";
    }
    // figure-style pivot over the mean shift each frame induces
    std::vector<std::pair<std::string, std::map<std::string, double>>> series{
        {"KM", {}}, {"KM_si", {}}, {"RAND", {}}};
    std::vector<std::string> xs;
    for (const auto& c : cells) {
        const std::string key = detail::num_text(c.mean_shift);
        if (xs.empty() || xs.back() != key) xs.push_back(key);
        for (auto& [name, values] : series)
            if (name == c.method) values[key] = c.accuracy;
    }
    const std::vector<std::string> omitted = detail::write_plot_csv(
        cfg.out_dir + "/plot_cluster.csv", "mean_shift", xs, series);

    nlohmann::json manifest;
    manifest["kind"] = cfg.kind;
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = cfg.hash;
    manifest["dataset"] = base.name;
    manifest["files"] = {"results_cluster.csv", "plot_cluster.csv", "config_used.ini"};
    manifest["omitted_series"] = omitted;
    nlohmann::json runtimes = nlohmann::json::array();
    for (const auto& c : cells)
        runtimes.push_back({{"method", c.method}, {"frame", c.frame},
                            {"runtime_s", c.runtime_s}});
    manifest["runtimes"] = runtimes;
    detail::open_out(cfg.out_dir + "/manifest.json") << manifest.dump(2) << "\n";
    detail::open_out(cfg.out_dir + "/config_used.ini") << effective_config_text(cfg);
    return cells;
}

inline std::vector<ClassifyCell> run_classify(const ExperimentConfig& cfg) {
    detail::ensure_out_dir(cfg.out_dir);
    std::size_t max_train = 0;
    for (std::size_t t : cfg.train_sizes) max_train = std::max(max_train, t);
    auto [train, test] = detail::classify_data(cfg, max_train);
    train.validate();
    test.validate();
    if (train.size() == 0 || test.size() == 0)
        throw ValueError("classify: empty train or test set");

    std::vector<ClassifyCell> cells;
    for (std::size_t tsize : cfg.train_sizes) {
        const std::size_t n = std::min(tsize, train.size());
        std::vector<Tensor> tr(train.samples.begin(), train.samples.begin() +
                               static_cast<std::ptrdiff_t>(n));
        std::vector<int> try_(train.labels.begin(), train.labels.begin() +
                              static_cast<std::ptrdiff_t>(n));
        for (const std::string& m : cfg.methods) {
            const double t0 = detail::wall_seconds();
            std::size_t dim = 0;
            const double acc =
                detail::classify_one(cfg, feature_kind_from_name(m), tr, try_, test.samples,
                                     test.labels, dim);
            cells.push_back({m, n, acc, dim, detail::wall_seconds() - t0});
        }
    }

    {
        std::ofstream out = detail::open_out(cfg.out_dir + "/results_classify.csv");
        out << "method,train_size,accuracy,feature_dim,seed,config_hash\n";
        for (const auto& c : cells)
            out << c.method << "," << c.train_size << "," << detail::fmt6(c.accuracy) << ","
                << c.feature_dim << "," << cfg.seed << "," << cfg.hash << "\n";
    }
    std::vector<std::pair<std::string, std::map<std::string, double>>> series;
    for (const std::string& m : cfg.methods) series.push_back({m, {}});
    std::vector<std::size_t> sizes;
    for (const auto& c : cells) {
        sizes.push_back(c.train_size);
        for (auto& [name, values] : series)
            if (name == c.method) values[std::to_string(c.train_size)] = c.accuracy;
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    std::vector<std::string> xs;
    for (std::size_t s : sizes) xs.push_back(std::to_string(s));
    const std::vector<std::string> omitted =
        detail::write_plot_csv(cfg.out_dir + "/plot_classify.csv", "train_size", xs, series);

    nlohmann::json manifest;
    manifest["kind"] = cfg.kind;
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = cfg.hash;
    manifest["dataset"] = train.name;
    manifest["files"] = {"results_classify.csv", "plot_classify.csv", "config_used.ini"};
    manifest["omitted_series"] = omitted;
    nlohmann::json runtimes = nlohmann::json::array();
    for (const auto& c : cells)
        runtimes.push_back({{"method", c.method}, {"train_size", c.train_size},
                            {"runtime_s", c.runtime_s}});
    manifest["runtimes"] = runtimes;
    detail::open_out(cfg.out_dir + "/manifest.json") << manifest.dump(2) << "\n";
    detail::open_out(cfg.out_dir + "/config_used.ini") << effective_config_text(cfg);
    return cells;
}

inline std::vector<SweepCell> run_sweep_patch(const ExperimentConfig& cfg) {
    detail::ensure_out_dir(cfg.out_dir);
    auto [train, test] = detail::classify_data(cfg, cfg.train_size);
    train.validate();
    test.validate();
    if (train.size() == 0 || test.size() == 0)
        throw ValueError("sweep-patch: empty train or test set");
    const std::size_t rank = train.samples[0].rank();
    for (std::size_t p : cfg.patch_sizes)
        for (std::size_t a = 0; a < rank; ++a)
            if (p > train.samples[0].extent(a))
                throw ConfigError("patch size " + std::to_string(p) + " exceeds signal " +
                                  shape_to_string(train.samples[0].shape()));

    std::vector<SweepCell> cells;
    // DL is the patch-independent baseline: computed once, reported per x.
    {
        const double t0 = detail::wall_seconds();
        std::size_t dim = 0;
        const double acc =
            detail::classify_one(cfg, FeatureKind::DL, train.samples, train.labels,
                                 test.samples, test.labels, dim);
        const double rt = detail::wall_seconds() - t0;
        for (std::size_t p : cfg.patch_sizes) cells.push_back({"DL", p, acc, dim, rt});
    }
    for (std::size_t p : cfg.patch_sizes) {
        ExperimentConfig pc = cfg;
        pc.features.pdl_patch = Shape(rank, p);
        pc.features.cdl_kernel = Shape(rank, p);
        for (const std::string& m : cfg.methods) {
            if (m == "DL") continue;
            const FeatureKind kind = feature_kind_from_name(m);
            if (kind != FeatureKind::PDL && kind != FeatureKind::CDL) continue;
            const double t0 = detail::wall_seconds();
            std::size_t dim = 0;
            const double acc = detail::classify_one(pc, kind, train.samples, train.labels,
                                                    test.samples, test.labels, dim);
            cells.push_back({m, p, acc, dim, detail::wall_seconds() - t0});
        }
    }

    {
        std::ofstream out = detail::open_out(cfg.out_dir + "/results_sweep.csv");
        out << "method,patch_size,accuracy,feature_dim,seed,config_hash\n";
        for (const auto& c : cells)
            out << c.method << "," << c.patch << "," << detail::fmt6(c.accuracy) << ","
                << c.feature_dim << "," << cfg.seed << "," << cfg.hash << "\n";
    }
    std::vector<std::pair<std::string, std::map<std::string, double>>> series{
        {"DL", {}}, {"PDL", {}}, {"CDL", {}}};
    for (const auto& c : cells)
        for (auto& [name, values] : series)
            if (name == c.method) values[std::to_string(c.patch)] = c.accuracy;
    std::vector<std::size_t> sizes = cfg.patch_sizes;
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    std::vector<std::string> xs;
    for (std::size_t s : sizes) xs.push_back(std::to_string(s));
    const std::vector<std::string> omitted =
        detail::write_plot_csv(cfg.out_dir + "/plot_sweep.csv", "patch_size", xs, series);

    nlohmann::json manifest;
    manifest["kind"] = cfg.kind;
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = cfg.hash;
    manifest["dataset"] = train.name;
    manifest["files"] = {"results_sweep.csv", "plot_sweep.csv", "config_used.ini"};
    manifest["omitted_series"] = omitted;
    nlohmann::json runtimes = nlohmann::json::array();
    for (const auto& c : cells)
        runtimes.push_back({{"method", c.method}, {"patch_size", c.patch},
                            {"runtime_s", c.runtime_s}});
    manifest["runtimes"] = runtimes;
    detail::open_out(cfg.out_dir + "/manifest.json") << manifest.dump(2) << "\n";
    detail::open_out(cfg.out_dir + "/config_used.ini") << effective_config_text(cfg);
    return cells;
}

}  // namespace csk
