#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "csk/experiment.hpp"

using namespace csk;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ExperimentConfig tiny_cluster_config(const std::string& out) {
    ExperimentConfig cfg;
    cfg.kind = "cluster-shifted";
    cfg.seed = 3;
    cfg.out_dir = out;
    cfg.per_class = 2;
    cfg.frames = {28, 32};
    cfg.cluster_iters = 3;
    finalize(cfg);
    return cfg;
}

ExperimentConfig tiny_classify_config(const std::string& out) {
    ExperimentConfig cfg;
    cfg.kind = "classify";
    cfg.seed = 3;
    cfg.out_dir = out;
    cfg.train_size = 20;
    cfg.test_size = 20;
    cfg.methods = {"PCA", "DL"};
    cfg.features.pca_dims = 5;
    cfg.features.dl_atoms = 8;
    cfg.features.fit_iters = 1;
    cfg.svm.epochs = 3;
    finalize(cfg);
    return cfg;
}

ExperimentConfig tiny_sweep_config(const std::string& out) {
    ExperimentConfig cfg;
    cfg.kind = "sweep-patch";
    cfg.seed = 3;
    cfg.out_dir = out;
    cfg.dataset = "synth-series";
    cfg.train_size = 21;
    cfg.test_size = 21;
    cfg.methods = {"DL", "PDL", "CDL"};
    cfg.patch_sizes = {4, 8};
    cfg.features.dl_atoms = 6;
    cfg.features.pdl_atoms = 6;
    cfg.features.cdl_atoms = 2;
    cfg.features.omp_sparsity = 2;
    cfg.features.fit_iters = 1;
    cfg.features.bpdn_iters = 10;
    cfg.fit_bpdn_iters = 10;
    cfg.svm.epochs = 3;
    finalize(cfg);
    return cfg;
}

}  // namespace

TEST_CASE("config files bind with strict schema", "[experiment]") {
    {
        std::ofstream os("tmp_exp.ini");
        os << "[experiment]\nkind = classify\nseed = 9\nout_dir = somewhere\n"
           << "[dataset]\nkind = synth-digits\ntrain_size = 50\ntest_size = 40\n"
           << "[methods]\nlist = DL, PCA\n"
           << "[classify]\ntrain_sizes = 10, 50\n"
           << "[features]\ndl_atoms = 12\npdl_patch = 7x7\n"
           << "[svm]\nepochs = 4\n";
    }
    ExperimentConfig cfg = experiment_config_from_file(ConfigFile::parse_file("tmp_exp.ini"));
    finalize(cfg);
    std::remove("tmp_exp.ini");

    REQUIRE(cfg.kind == "classify");
    REQUIRE(cfg.seed == 9);
    REQUIRE(cfg.out_dir == "somewhere");
    REQUIRE(cfg.train_size == 50);
    REQUIRE(cfg.methods == std::vector<std::string>{"DL", "PCA"});
    REQUIRE(cfg.train_sizes == std::vector<std::size_t>{10, 50});
    REQUIRE(cfg.features.dl_atoms == 12);
    REQUIRE(cfg.features.pdl_patch == Shape{7, 7});
    REQUIRE(cfg.svm.epochs == 4);
    REQUIRE_FALSE(cfg.hash.empty());

    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return experiment_config_from_file(ConfigFile::parse_stream(in, "x.ini"));
    };
    REQUIRE_THROWS_AS(parse("[nosuch]\na = 1\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[experiment]\nbogus = 1\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[experiment]\nkind = frobnicate\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[dataset]\nkind = imagenet\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[features]\npdl_patch = 0x3\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[dataset]\ncsv_delimiter = ,,\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[methods]\nlist = DL, HOG\n"), ValueError);
}

TEST_CASE("scale multiplies workload sizes before hashing", "[experiment]") {
    ExperimentConfig cfg;
    cfg.per_class = 100;
    cfg.train_size = 2000;
    cfg.test_size = 1000;
    cfg.train_sizes = {500, 2000};
    cfg.scale = 0.1;
    finalize(cfg);
    REQUIRE(cfg.per_class == 10);
    REQUIRE(cfg.train_size == 200);
    REQUIRE(cfg.test_size == 100);
    REQUIRE(cfg.train_sizes == std::vector<std::size_t>{50, 200});

    ExperimentConfig a, b;
    a.seed = 1;
    b.seed = 1;
    finalize(a);
    finalize(b);
    REQUIRE(a.hash == b.hash);
    ExperimentConfig c;
    c.seed = 2;
    finalize(c);
    REQUIRE(a.hash != c.hash);

    ExperimentConfig bad;
    bad.scale = 0.0;
    REQUIRE_THROWS_AS(finalize(bad), ConfigError);
}

TEST_CASE("cluster runner emits deterministic artifacts", "[experiment]") {
    namespace fs = std::filesystem;
    const ExperimentConfig cfg = tiny_cluster_config("tmp_out_cluster_a");
    const std::vector<ClusterCell> cells = run_cluster_shifted(cfg);

    REQUIRE(cells.size() == 6);  // 2 frames x {KM, KM_si, RAND}
    for (const auto& c : cells) {
        REQUIRE(c.accuracy >= 0.0);
        REQUIRE(c.accuracy <= 1.0);
    }
    REQUIRE(cells[0].mean_shift == 0.0);
    REQUIRE(cells[3].mean_shift == 2.0);

    const std::string results = slurp("tmp_out_cluster_a/results_cluster.csv");
    REQUIRE(results.find("method,frame,mean_shift,accuracy,seed,config_hash") == 0);
    REQUIRE(results.find("KM_si,32,") != std::string::npos);
    REQUIRE(results.find("," + cfg.hash) != std::string::npos);
    REQUIRE(results.find(",3," + cfg.hash) != std::string::npos);  // seed column

    const std::string plot = slurp("tmp_out_cluster_a/plot_cluster.csv");
    REQUIRE(plot.rfind("mean_shift,KM,KM_si,RAND\n", 0) == 0);
    REQUIRE(plot.find("\n0,") != std::string::npos);
    REQUIRE(plot.find("\n2,") != std::string::npos);

    const nlohmann::json manifest =
        nlohmann::json::parse(slurp("tmp_out_cluster_a/manifest.json"));
    for (const auto& f : manifest.at("files"))
        REQUIRE(fs::exists("tmp_out_cluster_a/" + f.get<std::string>()));
    REQUIRE(manifest.at("config_hash") == cfg.hash);

    // reruns with the same seed and config are byte-identical
    ExperimentConfig again = cfg;
    again.out_dir = "tmp_out_cluster_b";
    run_cluster_shifted(again);
    REQUIRE(slurp("tmp_out_cluster_b/results_cluster.csv") == results);
    REQUIRE(slurp("tmp_out_cluster_b/plot_cluster.csv") == plot);

    fs::remove_all("tmp_out_cluster_a");
    fs::remove_all("tmp_out_cluster_b");
}

TEST_CASE("classify runner emits grid rows and plot", "[experiment]") {
    namespace fs = std::filesystem;
    const ExperimentConfig cfg = tiny_classify_config("tmp_out_classify_a");
    const std::vector<ClassifyCell> cells = run_classify(cfg);

    REQUIRE(cells.size() == 2);
    for (const auto& c : cells) {
        REQUIRE(c.train_size == 20);
        REQUIRE(c.feature_dim > 0);
        REQUIRE(c.accuracy >= 0.0);
        REQUIRE(c.accuracy <= 1.0);
    }

    const std::string results = slurp("tmp_out_classify_a/results_classify.csv");
    REQUIRE(results.find("method,train_size,accuracy,feature_dim,seed,config_hash") == 0);
    REQUIRE(results.find("PCA,20,") != std::string::npos);
    REQUIRE(results.find("DL,20,") != std::string::npos);

    const std::string plot = slurp("tmp_out_classify_a/plot_classify.csv");
    REQUIRE(plot.rfind("train_size,PCA,DL\n", 0) == 0);

    const nlohmann::json manifest =
        nlohmann::json::parse(slurp("tmp_out_classify_a/manifest.json"));
    for (const auto& f : manifest.at("files"))
        REQUIRE(fs::exists("tmp_out_classify_a/" + f.get<std::string>()));

    ExperimentConfig again = cfg;
    again.out_dir = "tmp_out_classify_b";
    run_classify(again);
    REQUIRE(slurp("tmp_out_classify_b/results_classify.csv") == results);

    fs::remove_all("tmp_out_classify_a");
    fs::remove_all("tmp_out_classify_b");
}

TEST_CASE("sweep runner covers the patch grid with a flat DL baseline", "[experiment]") {
    namespace fs = std::filesystem;
    const ExperimentConfig cfg = tiny_sweep_config("tmp_out_sweep_a");
    const std::vector<SweepCell> cells = run_sweep_patch(cfg);

    // DL appears at every patch size with one shared accuracy
    double dl_acc = -1.0;
    std::size_t dl_rows = 0, pdl_rows = 0, cdl_rows = 0;
    for (const auto& c : cells) {
        if (c.method == "DL") {
            if (dl_acc < 0.0) dl_acc = c.accuracy;
            REQUIRE(c.accuracy == dl_acc);
            ++dl_rows;
        }
        if (c.method == "PDL") ++pdl_rows;
        if (c.method == "CDL") ++cdl_rows;
    }
    REQUIRE(dl_rows == 2);
    REQUIRE(pdl_rows == 2);
    REQUIRE(cdl_rows == 2);

    const std::string plot = slurp("tmp_out_sweep_a/plot_sweep.csv");
    REQUIRE(plot.rfind("patch_size,DL,PDL,CDL\n", 0) == 0);
    REQUIRE(plot.find("\n4,") != std::string::npos);
    REQUIRE(plot.find("\n8,") != std::string::npos);

    fs::remove_all("tmp_out_sweep_a");
}

TEST_CASE("plot omits empty method columns and notes them", "[experiment]") {
    namespace fs = std::filesystem;
    ExperimentConfig cfg = tiny_sweep_config("tmp_out_sweep_note");
    cfg.methods = {"DL", "PDL"};  // CDL never runs
    finalize(cfg);
    run_sweep_patch(cfg);

    const std::string plot = slurp("tmp_out_sweep_note/plot_sweep.csv");
    REQUIRE(plot.rfind("patch_size,DL,PDL\n", 0) == 0);
    REQUIRE(plot.find("CDL") == std::string::npos);

    const nlohmann::json manifest =
        nlohmann::json::parse(slurp("tmp_out_sweep_note/manifest.json"));
    bool noted = false;
    for (const auto& s : manifest.at("omitted_series")) noted = noted || s == "CDL";
    REQUIRE(noted);

    fs::remove_all("tmp_out_sweep_note");
}

TEST_CASE("patch sizes larger than the signal are rejected", "[experiment]") {
    ExperimentConfig cfg = tiny_sweep_config("tmp_out_sweep_bad");
    cfg.patch_sizes = {4, 200};
    finalize(cfg);
    REQUIRE_THROWS_AS(run_sweep_patch(cfg), ConfigError);
    std::filesystem::remove_all("tmp_out_sweep_bad");
}
