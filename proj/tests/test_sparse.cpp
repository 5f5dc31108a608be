#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "csk/atom_match.hpp"
#include "csk/conv_bpdn.hpp"
#include "csk/dictionary.hpp"
#include "csk/omp.hpp"
#include "csk/patches.hpp"
#include "csk/rng.hpp"

using namespace csk;

namespace {

Tensor random_tensor(const Shape& shape, Rng& rng) {
    Tensor t = Tensor::zeros(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

Dictionary random_dictionary(const Shape& atom_shape, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    return Dictionary::random_unit(atom_shape, count, rng);
}

// Reference OMP: same greedy rule, least squares by normal equations with a
// full-pivot LU solve. Returns per-atom coefficients (offset 0).
std::vector<double> reference_omp(const Tensor& y, const Dictionary& dict, std::size_t sparsity) {
    const std::size_t m = y.size(), K = dict.size();
    Eigen::VectorXd yv(m);
    for (std::size_t i = 0; i < m; ++i) yv[i] = y[i];
    Eigen::MatrixXd D(m, K);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < m; ++i) D(i, k) = dict.atom(k)[i];

    std::vector<std::size_t> sel;
    std::vector<char> used(K, 0);
    Eigen::VectorXd r = yv, coef;
    for (std::size_t s = 0; s < sparsity; ++s) {
        if (r.norm() <= 1e-13 * (1.0 + yv.norm())) break;
        std::size_t best = K;
        double best_abs = -1.0;
        for (std::size_t k = 0; k < K; ++k) {
            if (used[k]) continue;
            const double v = std::abs(D.col(k).dot(r));
            if (v > best_abs) {
                best_abs = v;
                best = k;
            }
        }
        sel.push_back(best);
        used[best] = 1;
        Eigen::MatrixXd S(m, sel.size());
        for (std::size_t j = 0; j < sel.size(); ++j) S.col(j) = D.col(sel[j]);
        coef = (S.transpose() * S).fullPivLu().solve(S.transpose() * yv);
        r = yv - S * coef;
    }
    std::vector<double> out(K, 0.0);
    for (std::size_t j = 0; j < sel.size(); ++j) out[sel[j]] = coef[j];
    return out;
}

}  // namespace

TEST_CASE("extract_patches counts and contents", "[sparse]") {
    Rng rng(1);
    const Tensor img = random_tensor({28, 28}, rng);
    const auto patches = extract_patches(img, {11, 11}, 1);
    REQUIRE(patches.size() == 324);  // (28-11+1)^2
    // First patch is the (0,0) window, row-major traversal.
    for (std::size_t i = 0; i < 11; ++i)
        for (std::size_t j = 0; j < 11; ++j) REQUIRE(patches[0](i, j) == img(i, j));
    // Second patch starts one column over.
    CHECK(patches[1](0, 0) == img(0, 1));

    CHECK(extract_patches(img, {11, 11}, 2).size() == 81);

    const auto whole = extract_patches(img, {28, 28}, 1);
    REQUIRE(whole.size() == 1);
    CHECK(whole[0] == img);

    const Tensor series = random_tensor({96}, rng);
    CHECK(extract_patches(series, {8}, 1).size() == 89);

    CHECK_THROWS_AS(extract_patches(series, {97}, 1), ShapeError);
    CHECK_THROWS_AS(extract_patches(series, {8}, 0), ValueError);
}

TEST_CASE("omp on the identity basis picks the active coordinate", "[sparse]") {
    Dictionary eye(std::vector<Tensor>{Tensor::vector({1, 0, 0}), Tensor::vector({0, 1, 0}),
                                       Tensor::vector({0, 0, 1})});
    eye.normalize();
    const SparseCode code = omp(Tensor::vector({0, 5, 0}), eye, 1);
    REQUIRE(code.entries().size() == 1);
    CHECK(code.entries()[0].atom == 1);  // the second atom
    CHECK(code.entries()[0].offset == 0);
    CHECK(code.entries()[0].coeff == Catch::Approx(5.0));
}

TEST_CASE("omp recovers an exact one-atom signal", "[sparse]") {
    const Dictionary dict = random_dictionary({9}, 4, 99);
    const Tensor y = scale(dict.atom(2), 2.0);
    const SparseCode code = omp(y, dict, 1);
    REQUIRE(code.entries().size() == 1);
    CHECK(code.entries()[0].atom == 2);
    CHECK(code.entries()[0].coeff == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(l2_norm(omp_residual(y, dict, code)) < 1e-12);
}

TEST_CASE("omp agrees with an independent implementation", "[sparse]") {
    Rng rng(314159);
    const Dictionary dict = random_dictionary({8}, 16, 7);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor y = random_tensor({8}, rng);
        const SparseCode c3 = omp(y, dict, 3);
        const auto ref = reference_omp(y, dict, 3);
        auto dense = c3.dense_vector();
        for (std::size_t k = 0; k < dict.size(); ++k)
            CHECK(dense[k] == Catch::Approx(ref[k]).margin(1e-8));

        const double r3 = l2_norm(omp_residual(y, dict, c3));
        const double r2 = l2_norm(omp_residual(y, dict, omp(y, dict, 2)));
        CHECK(r3 <= r2 + 1e-12);
    }
}

TEST_CASE("omp residual is orthogonal to the selected atoms", "[sparse]") {
    Rng rng(2718);
    const Dictionary dict = random_dictionary({10}, 12, 11);
    const Tensor y = random_tensor({10}, rng);
    const SparseCode code = omp(y, dict, 4);
    const Tensor r = omp_residual(y, dict, code);
    for (const auto& e : code.entries())
        CHECK(std::abs(dot(r, dict.atom(e.atom))) < 1e-8);
}

TEST_CASE("omp with full sparsity inverts a square dictionary", "[sparse]") {
    const Dictionary dict = random_dictionary({6}, 6, 123);
    Rng rng(55);
    const Tensor y = random_tensor({6}, rng);
    const SparseCode code = omp(y, dict, 6);
    CHECK(l2_norm(omp_residual(y, dict, code)) < 1e-8);
}

TEST_CASE("omp flags a rank-deficient selection", "[sparse]") {
    // Two identical atoms; a residual component forces the second pick.
    Tensor a = Tensor::vector({1, 0, 0, 0});
    Dictionary dict(std::vector<Tensor>{a, a});
    dict.normalize();
    const Tensor y = Tensor::vector({1, 0.1, 0, 0});
    CHECK_THROWS_AS(omp(y, dict, 2), NumericError);
}

TEST_CASE("omp validates arguments", "[sparse]") {
    const Dictionary dict = random_dictionary({4}, 3, 1);
    CHECK_THROWS_AS(omp(Tensor::zeros({4}), dict, 0), ValueError);
    CHECK_THROWS_AS(omp(Tensor::zeros({4}), dict, 4), ValueError);
    CHECK_THROWS_AS(omp(Tensor::zeros({5}), dict, 1), ShapeError);
    Dictionary un(std::vector<Tensor>{Tensor::vector({2, 0})});
    CHECK_THROWS_AS(omp(Tensor::zeros({2}), un, 1), ValueError);
}

TEST_CASE("best_atom_match finds an exact placement", "[sparse]") {
    const Dictionary dict = random_dictionary({5, 5}, 3, 777);
    Tensor y = Tensor::zeros({12, 12});
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) y(2 + i, 3 + j) = dict.atom(1)(i, j);

    const AtomMatch m = best_atom_match(y, dict, CorrMode::Naive);
    CHECK(m.atom_index == 1);
    CHECK(m.offset == Offsets{2, 3});
    CHECK(m.coeff == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(m.residual_energy < 1e-10);
}

TEST_CASE("best_atom_match admits negative coefficients", "[sparse]") {
    const Dictionary dict = random_dictionary({6}, 3, 42);
    const Tensor y = scale(dict.atom(2), -4.0);
    const AtomMatch m = best_atom_match(y, dict, CorrMode::Naive);
    CHECK(m.atom_index == 2);
    CHECK(m.offset == Offsets{0});
    CHECK(m.coeff == Catch::Approx(-4.0).epsilon(1e-10));
}

TEST_CASE("best_atom_match equals brute-force enumeration", "[sparse]") {
    Rng rng(31415);
    const Dictionary dict = random_dictionary({5, 5}, 3, 8);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor y = random_tensor({12, 12}, rng);
        const AtomMatch m = best_atom_match(y, dict, CorrMode::Naive);

        double best_sq = -1.0;
        std::size_t bk = 0, bi = 0, bj = 0;
        double bc = 0.0;
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t i = 0; i + 5 <= 12; ++i)
                for (std::size_t j = 0; j + 5 <= 12; ++j) {
                    double c = 0.0;
                    for (std::size_t u = 0; u < 5; ++u)
                        for (std::size_t v = 0; v < 5; ++v)
                            c += dict.atom(k)(u, v) * y(i + u, j + v);
                    if (c * c > best_sq) {
                        best_sq = c * c;
                        bk = k;
                        bi = i;
                        bj = j;
                        bc = c;
                    }
                }
        CHECK(m.atom_index == bk);
        CHECK(m.offset == Offsets{static_cast<std::ptrdiff_t>(bi),
                                  static_cast<std::ptrdiff_t>(bj)});
        CHECK(m.coeff == Catch::Approx(bc).epsilon(1e-12));
        CHECK(m.residual_energy ==
              Catch::Approx(std::max(0.0, dot(y, y) - bc * bc)).epsilon(1e-12));
    }
}

TEST_CASE("best_atom_match is shift-equivariant", "[sparse]") {
    const Dictionary dict = random_dictionary({4, 4}, 2, 5);
    Rng rng(6);
    Tensor motif = random_tensor({4, 4}, rng);
    auto place = [&](std::size_t r, std::size_t c) {
        Tensor y = Tensor::zeros({11, 11});
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) y(r + i, c + j) = motif(i, j);
        return y;
    };
    const AtomMatch m1 = best_atom_match(place(1, 2), dict, CorrMode::Naive);
    const AtomMatch m2 = best_atom_match(place(4, 6), dict, CorrMode::Naive);
    CHECK(m1.atom_index == m2.atom_index);
    CHECK(m1.coeff == Catch::Approx(m2.coeff).epsilon(1e-10));
    CHECK(m2.offset[0] - m1.offset[0] == 3);
    CHECK(m2.offset[1] - m1.offset[1] == 4);
}

TEST_CASE("best_atom_match ties break to lowest atom then offset", "[sparse]") {
    // Two identical atoms: index 0 must win; flat frame: offset (0,0) wins.
    Tensor a = Tensor::zeros({2, 2});
    a(0, 0) = 1.0;
    Dictionary dict(std::vector<Tensor>{a, a});
    dict.normalize();
    Tensor y = Tensor::zeros({4, 4});
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) y(i, j) = 1.0;
    const AtomMatch m = best_atom_match(y, dict, CorrMode::Naive);
    CHECK(m.atom_index == 0);
    CHECK(m.offset == Offsets{0, 0});
}

TEST_CASE("global_code_index interleaves positions and atoms", "[sparse]") {
    const Dictionary dict2 = random_dictionary({2}, 2, 17);
    AtomMatch m;
    m.atom_index = 0;
    m.offset = Offsets{0};
    CHECK(global_code_index(m, dict2, {4}) == 0);

    m.atom_index = 1;
    m.offset = Offsets{2};
    const std::size_t j = global_code_index(m, dict2, {4});
    CHECK(j == 5);  // flat(t)*K + k = 2*2 + 1
    CHECK(j % dict2.size() == m.atom_index);

    // Build the equivalent global dictionary explicitly: column j must be
    // atom k placed at offset t inside the zero frame.
    std::vector<Tensor> columns;
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t k = 0; k < 2; ++k) {
            Tensor col = Tensor::zeros({4});
            for (std::size_t u = 0; u < 2 && t + u < 4; ++u) col[t + u] = dict2.atom(k)[u];
            columns.push_back(col);
        }
    Tensor placed = Tensor::zeros({4});
    for (std::size_t u = 0; u < 2; ++u) placed[2 + u] = dict2.atom(1)[u];
    CHECK(columns[j] == placed);
}

TEST_CASE("code index round trip over all valid placements", "[sparse]") {
    const Dictionary dict = random_dictionary({3, 2}, 3, 23);
    const Shape frame{6, 6};
    for (std::ptrdiff_t i = 0; i + 3 <= 6; ++i)
        for (std::ptrdiff_t j = 0; j + 2 <= 6; ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                AtomMatch m;
                m.atom_index = k;
                m.offset = Offsets{i, j};
                const auto [k2, t2] = decode_code_index(global_code_index(m, dict, frame), dict,
                                                        frame);
                REQUIRE(k2 == k);
                REQUIRE(t2 == m.offset);
            }
    AtomMatch bad;
    bad.atom_index = 0;
    bad.offset = Offsets{5, 5};  // atom would stick out
    CHECK_THROWS_AS(global_code_index(bad, dict, frame), ValueError);
}

TEST_CASE("conv_bpdn returns the zero code under a dominant penalty", "[sparse]") {
    const Dictionary dict = random_dictionary({4}, 2, 3);
    Rng rng(8);
    const Tensor y = random_tensor({16}, rng);
    const double lam_max = conv_bpdn_auto_lambda(y, dict, CorrMode::Naive) * 10.0;
    const auto res = conv_bpdn_detailed(y, dict, lam_max * 1.0001, 50, 1e-10, CorrMode::Naive);
    CHECK(res.code.entries().empty());
    CHECK(res.converged);
}

TEST_CASE("conv_bpdn recovers a single spike", "[sparse]") {
    const Dictionary dict = random_dictionary({4}, 1, 21);
    Tensor x = Tensor::zeros({16});
    x[5] = 1.0;
    const Tensor y = conv_map(x, dict.atom(0), CorrMode::Naive);
    const auto res = conv_bpdn_detailed(y, dict, 1e-6, 500, 1e-12, CorrMode::Naive);
    double at5 = 0.0;
    double biggest = 0.0;
    for (const auto& e : res.code.entries()) {
        if (e.offset == 5) at5 = e.coeff;
        biggest = std::max(biggest, std::abs(e.coeff));
    }
    CHECK(at5 == Catch::Approx(1.0).margin(1e-2));
    CHECK(biggest == Catch::Approx(std::abs(at5)).epsilon(1e-9));
}

TEST_CASE("conv_bpdn objective is monotone and beats coordinate descent", "[sparse]") {
    Rng rng(99);
    const Dictionary dict = random_dictionary({4}, 2, 31);
    const Tensor y = random_tensor({16}, rng);
    const double lambda = conv_bpdn_auto_lambda(y, dict, CorrMode::Naive);

    const auto res = conv_bpdn_detailed(y, dict, lambda, 2000, 1e-13, CorrMode::Naive);
    for (std::size_t i = 1; i < res.objectives.size(); ++i)
        REQUIRE(res.objectives[i] <= res.objectives[i - 1]);

    const double f_zero = conv_objective(y, dict, zero_maps(y.shape(), 2), lambda);
    CHECK(res.objectives.back() <= f_zero);

    // Coordinate-descent oracle over columns (k, t) with truncated supports.
    const std::size_t n = 16, p = 4, K = 2;
    std::vector<std::vector<double>> cols(K * n, std::vector<double>(n, 0.0));
    std::vector<double> colsq(K * n, 0.0);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t u = 0; u < p && t + u < n; ++u) {
                cols[k * n + t][t + u] = dict.atom(k)[u];
                colsq[k * n + t] += dict.atom(k)[u] * dict.atom(k)[u];
            }
    std::vector<double> xcd(K * n, 0.0), resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i];
    for (int sweep = 0; sweep < 4000; ++sweep) {
        for (std::size_t c = 0; c < K * n; ++c) {
            if (colsq[c] == 0.0) continue;
            double g = 0.0;
            for (std::size_t i = 0; i < n; ++i) g += cols[c][i] * resid[i];
            g += colsq[c] * xcd[c];
            const double next =
                g > lambda ? (g - lambda) / colsq[c] : (g < -lambda ? (g + lambda) / colsq[c] : 0.0);
            const double delta = next - xcd[c];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) resid[i] -= delta * cols[c][i];
                xcd[c] = next;
            }
        }
    }
    double f_cd = 0.0;
    for (std::size_t i = 0; i < n; ++i) f_cd += resid[i] * resid[i];
    f_cd *= 0.5;
    for (std::size_t c = 0; c < K * n; ++c) f_cd += lambda * std::abs(xcd[c]);

    CHECK(res.objectives.back() <= f_cd + 1e-6);
}

TEST_CASE("conv_bpdn solutions satisfy the soft-threshold fixed point", "[sparse]") {
    Rng rng(404);
    const Dictionary dict = random_dictionary({3}, 2, 61);
    const Tensor y = random_tensor({12}, rng);
    const double lambda = 0.05;
    const auto res = conv_bpdn_detailed(y, dict, lambda, 5000, 1e-14, CorrMode::Naive);

    // Optimality: for nonzero x, gradient = -lambda*sign(x); for zero x,
    // |gradient| <= lambda (within 1e-6).
    CoefMaps maps = code_to_maps(res.code);
    Tensor recon = conv_reconstruct(dict, maps, CorrMode::Naive);
    Tensor r = subtract(y, recon);
    for (std::size_t k = 0; k < dict.size(); ++k) {
        const Tensor g = corr_map(r, dict.atom(k), CorrMode::Naive);  // = -grad of 0.5||r||^2
        for (std::size_t t = 0; t < 12; ++t) {
            const double x = maps[k][t];
            if (x != 0.0) {
                CHECK(g[t] == Catch::Approx(lambda * (x > 0 ? 1.0 : -1.0)).margin(1e-6));
            } else {
                CHECK(std::abs(g[t]) <= lambda + 1e-6);
            }
        }
    }
}

TEST_CASE("conv_bpdn validates arguments", "[sparse]") {
    const Dictionary dict = random_dictionary({4}, 2, 3);
    CHECK_THROWS_AS(conv_bpdn(Tensor::zeros({8}), dict, 0.0), ValueError);
    CHECK_THROWS_AS(conv_bpdn(Tensor::zeros({2}), dict, 0.1), ShapeError);
    CHECK_THROWS_AS(conv_bpdn(Tensor::zeros({8}), dict, 0.1, 0), ValueError);
}

TEST_CASE("sparse code containers enforce their invariants", "[sparse]") {
    SparseCode code({4, 4}, {2, 2}, 3);
    code.add(1, 5, 2.0);
    CHECK_THROWS_AS(code.add(1, 5, 1.0), ValueError);  // duplicate (k, t)
    CHECK_THROWS_AS(code.add(3, 0, 1.0), ValueError);  // atom out of range
    CHECK_THROWS_AS(code.add(0, 16, 1.0), ValueError);  // offset outside grid
    code.add(0, 3, -1.0);
    code.sort_entries();
    CHECK(code.entries()[0].atom == 0);
    const Tensor m = code.dense_map(1);
    CHECK(m(1, 1) == 2.0);

    SparseCode ordered({4}, {2}, 2);
    ordered.append_ordered(0, 1, 1.0);
    CHECK_THROWS_AS(ordered.append_ordered(0, 1, 1.0), ValueError);
    ordered.append_ordered(1, 0, 1.0);
    CHECK(ordered.entries().size() == 2);
}
