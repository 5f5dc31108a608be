#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "csk/csk.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;   // negative: keep the config value
    double scale = 0.0;    // non-positive: keep the config value
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "experiment config file");
    cmd->add_option("--seed", f.seed, "seed override");
    cmd->add_option("--out", f.out_dir, "output directory override");
    cmd->add_option("--scale", f.scale, "workload scale override (multiplies sizes)");
}

csk::ExperimentConfig build_config(const CommonFlags& f, const std::string& kind) {
    csk::ExperimentConfig cfg;
    if (!f.config_path.empty())
        cfg = csk::experiment_config_from_file(csk::ConfigFile::parse_file(f.config_path));
    cfg.kind = kind;  // the subcommand decides what runs
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.scale > 0.0) cfg.scale = f.scale;
    csk::finalize(cfg);
    return cfg;
}

int run_dist(const std::string& path_a, const std::string& path_b, const std::string& mode_name) {
    const csk::Tensor a = csk::load_tensor(path_a);
    const csk::Tensor b = csk::load_tensor(path_b);
    csk::CorrMode mode = csk::CorrMode::Auto;
    if (mode_name == "naive") mode = csk::CorrMode::Naive;
    else if (mode_name == "fft") mode = csk::CorrMode::Fft;
    else if (mode_name != "auto")
        throw csk::ConfigError("unknown mode \"" + mode_name + "\" (want auto|naive|fft)");

    std::printf("euclidean %.12g\n", csk::euclidean_distance(a, b));
    const csk::ShiftMinResult sm = csk::shift_min_distance(a, b);
    std::printf("shift_min %.12g at", sm.distance);
    for (auto s : sm.shift) std::printf(" %td", s);
    std::printf("\n");
    std::printf("xcorr %.12g\n", csk::xcorr_distance(a, b, false, mode));
    std::printf("xcorr_normalized %.12g\n", csk::xcorr_distance(a, b, true, mode));
    return 0;
}

int run_gen_shifted(const CommonFlags& f) {
    csk::ExperimentConfig cfg = build_config(f, "cluster-shifted");
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec)
        throw csk::IoError("cannot create output directory " + cfg.out_dir + ": " + ec.message());

    csk::Rng data_rng(cfg.seed * 0x9E3779B97F4A7C15ull + 11);
    csk::LabeledDataset base;
    if (cfg.dataset == "synth-digits") {
        base = csk::synth_digits(cfg.per_class * 10, data_rng);
    } else if (cfg.dataset == "idx") {
        base = csk::subset_per_class(csk::load_idx(cfg.train_path, cfg.train_labels_path),
                                     cfg.per_class, data_rng);
    } else if (cfg.dataset == "cskd") {
        base = csk::subset_per_class(csk::load_dataset(cfg.train_path), cfg.per_class, data_rng);
    } else {
        throw csk::ConfigError("gen-shifted needs an image dataset (synth-digits, idx, cskd)");
    }

    for (std::size_t frame : cfg.frames) {
        csk::Rng shift_rng(cfg.seed * 0x06C45D6965ull + frame);
        const csk::LabeledDataset shifted = csk::make_shifted(base, frame, shift_rng);
        const std::string path = cfg.out_dir + "/shifted_f" + std::to_string(frame) + ".cskd";
        csk::save_dataset(path, shifted);
        std::printf("wrote %s (%zu samples, frame %zu)\n", path.c_str(), shifted.size(), frame);
    }
    return 0;
}

int run_export_atoms(const std::string& dict_path, const std::string& out_dir,
                     std::size_t columns) {
    const csk::Dictionary dict = csk::load_dictionary(dict_path);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw csk::IoError("cannot create output directory " + out_dir + ": " + ec.message());
    const std::string out = out_dir + "/atoms.pgm";
    csk::export_atoms_pgm(out, dict, columns);
    std::printf("wrote %s (%zu atoms of %s)\n", out.c_str(), dict.size(),
                csk::shape_to_string(dict.atom_shape()).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shift-invariant clustering and convolutional dictionary learning toolkit"};
    app.require_subcommand(1);

    CommonFlags cluster_flags, classify_flags, sweep_flags, gen_flags;

    CLI::App* cluster = app.add_subcommand(
        "cluster-shifted", "clustering accuracy vs translation magnitude");
    add_common(cluster, cluster_flags);

    CLI::App* classify = app.add_subcommand(
        "classify", "feature extraction + linear SVM accuracy grid");
    add_common(classify, classify_flags);

    CLI::App* sweep = app.add_subcommand(
        "sweep-patch", "accuracy as a function of patch/kernel size");
    add_common(sweep, sweep_flags);

    CLI::App* gen = app.add_subcommand(
        "gen-shifted", "write shifted dataset containers for each configured frame");
    add_common(gen, gen_flags);

    std::string dist_a, dist_b, dist_mode = "auto";
    CLI::App* dist = app.add_subcommand("dist", "distances between two stored tensors");
    dist->add_option("a", dist_a, "first tensor file")->required();
    dist->add_option("b", dist_b, "second tensor file")->required();
    dist->add_option("--mode", dist_mode, "correlation engine: auto|naive|fft");

    std::string atoms_path, atoms_out = "out";
    std::size_t atoms_columns = 0;
    CLI::App* exp_atoms = app.add_subcommand("export-atoms", "render a dictionary as a PGM sheet");
    exp_atoms->add_option("dictionary", atoms_path, "dictionary file")->required();
    exp_atoms->add_option("--out", atoms_out, "output directory");
    exp_atoms->add_option("--columns", atoms_columns, "atoms per row (0: near-square)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cluster->parsed()) {
            const csk::ExperimentConfig cfg = build_config(cluster_flags, "cluster-shifted");
            for (const csk::ClusterCell& c : csk::run_cluster_shifted(cfg))
                std::printf("%-6s frame %3zu shift %5.1f accuracy %.4f\n", c.method.c_str(),
                            c.frame, c.mean_shift, c.accuracy);
            std::printf("results in %s\n", cfg.out_dir.c_str());
        } else if (classify->parsed()) {
            const csk::ExperimentConfig cfg = build_config(classify_flags, "classify");
            for (const csk::ClassifyCell& c : csk::run_classify(cfg))
                std::printf("%-4s train %6zu dim %6zu accuracy %.4f\n", c.method.c_str(),
                            c.train_size, c.feature_dim, c.accuracy);
            std::printf("results in %s\n", cfg.out_dir.c_str());
        } else if (sweep->parsed()) {
            const csk::ExperimentConfig cfg = build_config(sweep_flags, "sweep-patch");
            for (const csk::SweepCell& c : csk::run_sweep_patch(cfg))
                std::printf("%-4s patch %4zu dim %6zu accuracy %.4f\n", c.method.c_str(),
                            c.patch, c.feature_dim, c.accuracy);
            std::printf("results in %s\n", cfg.out_dir.c_str());
        } else if (gen->parsed()) {
            return run_gen_shifted(gen_flags);
        } else if (dist->parsed()) {
            return run_dist(dist_a, dist_b, dist_mode);
        } else if (exp_atoms->parsed()) {
            return run_export_atoms(atoms_path, atoms_out, atoms_columns);
        }
        return 0;
    } catch (const csk::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const csk::NumericError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    } catch (const csk::IoError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const csk::ShapeError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const csk::ValueError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
