#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "csk/features.hpp"
#include "csk/gabor.hpp"
#include "csk/pooling.hpp"
#include "csk/rng.hpp"

using namespace csk;

namespace {

Tensor random_image(const Shape& shape, Rng& rng) {
    Tensor t = Tensor::zeros(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform01();
    return t;
}

// motif dropped into a zero frame at the given corner
Tensor place_motif(const Shape& frame, const Tensor& motif, const Offsets& at) {
    Tensor t = Tensor::zeros(frame);
    if (motif.rank() == 1) {
        for (std::size_t i = 0; i < motif.extent(0); ++i) t[at[0] + i] = motif[i];
        return t;
    }
    for (std::size_t r = 0; r < motif.extent(0); ++r)
        for (std::size_t c = 0; c < motif.extent(1); ++c)
            t[(at[0] + r) * frame[1] + (at[1] + c)] = motif.values()[r * motif.extent(1) + c];
    return t;
}

}  // namespace

TEST_CASE("gabor bank has 15 zero-mean unit kernels", "[features]") {
    const std::vector<Tensor> bank = gabor_bank();
    REQUIRE(bank.size() == 15);
    for (const Tensor& k : bank) {
        REQUIRE(k.shape() == Shape{11, 11});
        double sum = 0.0;
        for (std::size_t i = 0; i < k.size(); ++i) sum += k[i];
        REQUIRE(std::abs(sum) < 1e-10);
        REQUIRE(std::abs(l2_norm(k) - 1.0) < 1e-12);
    }
}

TEST_CASE("gabor kernel symmetry and validation", "[features]") {
    const Tensor a = gabor_kernel(11, 0.7, 5.0, 2.8, 0.5);
    const Tensor b = gabor_kernel(11, 0.7 + 3.14159265358979323846, 5.0, 2.8, 0.5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        REQUIRE(a[i] == Catch::Approx(b[i]).margin(1e-12));

    REQUIRE_THROWS_AS(gabor_kernel(10, 0.0, 5.0, 2.8, 0.5), ValueError);
    REQUIRE_THROWS_AS(gabor_kernel(11, 0.0, -1.0, 2.8, 0.5), ValueError);
}

TEST_CASE("pooling hand cases with ragged edges", "[features]") {
    const Tensor line = Tensor::vector({1.0, -2.0, 3.0, 4.0, 5.0});
    const Tensor mx = pool(line, {2}, PoolKind::Max);
    REQUIRE(mx.shape() == Shape{3});
    REQUIRE(mx[0] == 1.0);   // max(1, -2)
    REQUIRE(mx[1] == 4.0);
    REQUIRE(mx[2] == 5.0);   // edge cell covers one value

    const Tensor av = pool(line, {2}, PoolKind::Average);
    REQUIRE(av[0] == Catch::Approx(-0.5));
    REQUIRE(av[1] == Catch::Approx(3.5));
    REQUIRE(av[2] == Catch::Approx(5.0));  // edge averages over actual coverage

    const Tensor img = Tensor::from_data({3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    const Tensor m2 = pool(img, {2, 2}, PoolKind::Max);
    REQUIRE(m2.shape() == Shape{2, 2});
    REQUIRE(m2.values() == std::vector<double>{5, 6, 8, 9});
    const Tensor a2 = pool(img, {2, 2}, PoolKind::Average);
    REQUIRE(a2[0] == Catch::Approx(3.0));    // (1+2+4+5)/4
    REQUIRE(a2[1] == Catch::Approx(4.5));    // (3+6)/2
    REQUIRE(a2[2] == Catch::Approx(7.5));    // (7+8)/2
    REQUIRE(a2[3] == Catch::Approx(9.0));

    const Tensor ab = absolute(Tensor::vector({-1.5, 2.0, -0.0}));
    REQUIRE(ab.values() == std::vector<double>{1.5, 2.0, 0.0});

    REQUIRE_THROWS_AS(pool(line, {2, 2}, PoolKind::Max), ShapeError);
    REQUIRE_THROWS_AS(pool(img, {0, 2}, PoolKind::Max), ValueError);
}

TEST_CASE("feature kind names round trip", "[features]") {
    for (FeatureKind k : {FeatureKind::DL, FeatureKind::PDL, FeatureKind::CDL,
                          FeatureKind::GFE, FeatureKind::PCA})
        REQUIRE(feature_kind_from_name(feature_kind_name(k)) == k);
    REQUIRE_THROWS_AS(feature_kind_from_name("HOG"), ValueError);
}

TEST_CASE("transform length equals output_dim for every kind", "[features]") {
    Rng rng(401);
    std::vector<Tensor> samples;
    for (int i = 0; i < 24; ++i) samples.push_back(random_image({10, 10}, rng));

    FeatureConfig cfg;
    cfg.dl_atoms = 12;
    cfg.pdl_atoms = 8;
    cfg.cdl_atoms = 3;
    cfg.pca_dims = 6;
    cfg.pdl_patch = {5, 5};
    cfg.cdl_kernel = {5, 5};
    cfg.omp_sparsity = 3;
    cfg.fit_iters = 2;
    cfg.bpdn_iters = 15;

    for (FeatureKind k : {FeatureKind::DL, FeatureKind::PDL, FeatureKind::CDL,
                          FeatureKind::GFE, FeatureKind::PCA}) {
        Rng fit_rng(7);
        const FeatureExtractor fx = fit_feature_extractor(k, samples, cfg, fit_rng);
        const std::vector<double> v = transform(fx, samples[0]);
        INFO(feature_kind_name(k));
        REQUIRE(v.size() == fx.output_dim);
        const FeatureMatrix fm = transform_all(fx, samples);
        REQUIRE(fm.rows == samples.size());
        REQUIRE(fm.dim == fx.output_dim);
        for (std::size_t j = 0; j < fm.dim; ++j) REQUIRE(fm.row(0)[j] == v[j]);
    }
}

TEST_CASE("CDL output dimension on 28x28 with 15 atoms is 2940", "[features]") {
    Rng rng(402);
    std::vector<Tensor> samples;
    for (int i = 0; i < 3; ++i) samples.push_back(random_image({28, 28}, rng));
    FeatureConfig cfg;
    cfg.fit_iters = 1;
    cfg.bpdn_iters = 4;
    Rng fit_rng(5);
    const FeatureExtractor fx = fit_feature_extractor(FeatureKind::CDL, samples, cfg, fit_rng);
    REQUIRE(fx.atoms.size() == 15);
    REQUIRE(fx.output_dim == 2940);  // 15 maps, 2x2 max pool of 28x28 -> 14x14
    REQUIRE(transform(fx, samples[0]).size() == 2940);
}

TEST_CASE("GFE maps the zero image to the zero vector", "[features]") {
    Rng rng(403);
    std::vector<Tensor> samples;
    for (int i = 0; i < 4; ++i) samples.push_back(random_image({16, 16}, rng));
    Rng fit_rng(5);
    const FeatureExtractor fx =
        fit_feature_extractor(FeatureKind::GFE, samples, FeatureConfig{}, fit_rng);
    REQUIRE(fx.atoms.size() == 15);
    const std::vector<double> v = transform(fx, Tensor::zeros({16, 16}));
    for (double x : v) REQUIRE(x == 0.0);

    REQUIRE_THROWS_AS(
        fit_feature_extractor(FeatureKind::GFE,
                              std::vector<Tensor>{Tensor::vector({1.0, 2.0})},
                              FeatureConfig{}, fit_rng),
        ShapeError);
}

TEST_CASE("PCA recovers a planar subspace exactly", "[features]") {
    Rng rng(404);
    // two fixed directions in R^6, samples = mean + a*u + b*w
    std::vector<double> u(6), w(6), mean(6);
    for (std::size_t i = 0; i < 6; ++i) {
        u[i] = rng.normal();
        w[i] = rng.normal();
        mean[i] = rng.normal();
    }
    std::vector<Tensor> samples;
    for (int i = 0; i < 40; ++i) {
        const double a = rng.normal(), b = rng.normal();
        std::vector<double> v(6);
        for (std::size_t j = 0; j < 6; ++j) v[j] = mean[j] + a * u[j] + b * w[j];
        samples.push_back(Tensor::vector(std::move(v)));
    }
    FeatureConfig cfg;
    cfg.pca_dims = 2;
    Rng fit_rng(5);
    const FeatureExtractor fx = fit_feature_extractor(FeatureKind::PCA, samples, cfg, fit_rng);
    REQUIRE(fx.output_dim == 2);

    for (const Tensor& s : samples) {
        const std::vector<double> z = transform(fx, s);
        // reconstruct from the two axes; planar data reconstructs exactly
        for (std::size_t j = 0; j < 6; ++j) {
            double rec = fx.pca_mean[j];
            for (std::size_t a = 0; a < 2; ++a) rec += z[a] * fx.pca_axes[a * 6 + j];
            REQUIRE(rec == Catch::Approx(s[j]).margin(1e-9));
        }
    }

    const Tensor mean_t = Tensor::vector(std::vector<double>(fx.pca_mean));
    for (double z : transform(fx, mean_t)) REQUIRE(std::abs(z) < 1e-9);

    FeatureConfig wide;
    wide.pca_dims = 100;  // 6-dim data clamps to 6; 5 samples cannot support it
    std::vector<Tensor> few(samples.begin(), samples.begin() + 5);
    REQUIRE_THROWS_AS(fit_feature_extractor(FeatureKind::PCA, few, wide, fit_rng), ValueError);
}

TEST_CASE("PDL with patch equal to the sample degenerates to DL", "[features]") {
    Rng rng(405);
    std::vector<Tensor> samples;
    for (int i = 0; i < 20; ++i) samples.push_back(random_image({6, 6}, rng));
    FeatureConfig cfg;
    cfg.dl_atoms = 10;
    cfg.omp_sparsity = 3;
    cfg.fit_iters = 3;
    Rng fit_rng(5);
    const FeatureExtractor dl = fit_feature_extractor(FeatureKind::DL, samples, cfg, fit_rng);

    FeatureExtractor pdl = dl;  // same dictionary, reinterpreted patch-wise
    pdl.kind = FeatureKind::PDL;
    pdl.patch_stride = 6;

    for (const Tensor& s : samples) {
        const std::vector<double> a = transform(dl, s);
        const std::vector<double> b = transform(pdl, s);
        REQUIRE(a == b);
    }
}

TEST_CASE("CDL top pooled activation is invariant to even translations", "[features]") {
    Rng rng(406);
    Tensor motif = Tensor::zeros({5, 5});
    for (std::size_t i = 0; i < motif.size(); ++i) motif[i] = rng.normal();
    motif = scale(motif, 1.0 / l2_norm(motif));

    FeatureExtractor fx;
    fx.kind = FeatureKind::CDL;
    fx.sample_shape = {16, 16};
    fx.atoms = {motif};
    fx.atoms_normalized = true;
    fx.pool_cell = {2, 2};
    fx.cdl_lambda = 0.05;
    fx.bpdn_iters = 300;
    fx.bpdn_tol = 1e-10;
    fx.output_dim = 64;

    const std::vector<double> va = transform(fx, place_motif({16, 16}, motif, {3, 4}));
    const std::vector<double> vb = transform(fx, place_motif({16, 16}, motif, {5, 8}));
    const double ta = *std::max_element(va.begin(), va.end());
    const double tb = *std::max_element(vb.begin(), vb.end());
    REQUIRE(ta > 0.5);  // the motif is actually detected
    REQUIRE(std::abs(ta - tb) < 1e-6);
}

TEST_CASE("CDL fit recovers a planted convolutional generator", "[features]") {
    Rng rng(407);
    Tensor gen = Tensor::zeros({8});
    for (std::size_t i = 0; i < 8; ++i) gen[i] = rng.normal();
    gen = scale(gen, 1.0 / l2_norm(gen));

    std::vector<Tensor> samples;
    for (int i = 0; i < 30; ++i) {
        Tensor y = Tensor::zeros({32});
        for (int spike = 0; spike < 2; ++spike) {
            const std::size_t at = static_cast<std::size_t>(rng.uniform_int(0, 24));
            const double amp = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.uniform01());
            for (std::size_t j = 0; j < 8; ++j) y[at + j] += amp * gen[j];
        }
        samples.push_back(std::move(y));
    }

    FeatureConfig cfg;
    cfg.cdl_atoms = 2;
    cfg.cdl_kernel = {8};
    cfg.pool_cell = {2};
    cfg.fit_iters = 8;
    cfg.bpdn_iters = 60;
    cfg.bpdn_tol = 1e-6;
    Rng fit_rng(11);
    const FeatureExtractor fx = fit_feature_extractor(FeatureKind::CDL, samples, cfg, fit_rng);

    double best = 0.0;
    for (const Tensor& atom : fx.atoms) best = std::max(best, std::abs(dot(atom, gen)));
    REQUIRE(best > 0.9);
}

TEST_CASE("transform rejects mismatched sample shapes", "[features]") {
    Rng rng(408);
    std::vector<Tensor> samples;
    for (int i = 0; i < 8; ++i) samples.push_back(random_image({6, 6}, rng));
    FeatureConfig cfg;
    cfg.dl_atoms = 4;
    cfg.fit_iters = 1;
    Rng fit_rng(5);
    const FeatureExtractor fx = fit_feature_extractor(FeatureKind::DL, samples, cfg, fit_rng);
    REQUIRE_THROWS_AS(transform(fx, Tensor::zeros({5, 6})), ShapeError);
}

TEST_CASE("feature matrices persist through binary and CSV forms", "[features]") {
    FeatureMatrix fm;
    fm.rows = 3;
    fm.dim = 2;
    fm.data = {0.125, -7.5, 1e-17, 3.0, 2.5, 0.0};

    const std::string bin = "tmp_features.cskt";
    save_features(bin, fm);
    const FeatureMatrix back = load_features(bin);
    REQUIRE(back.rows == 3);
    REQUIRE(back.dim == 2);
    REQUIRE(back.data == fm.data);
    std::remove(bin.c_str());

    const std::string csv = "tmp_features.csv";
    save_features_csv(csv, fm, {4, 5, 6});
    std::ifstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "0.125,-7.5,4");
    REQUIRE(std::getline(in, line));
    REQUIRE(line.back() == '5');
    in.close();
    std::remove(csv.c_str());

    REQUIRE_THROWS_AS(save_features_csv(csv, fm, {1, 2}), ValueError);
}
