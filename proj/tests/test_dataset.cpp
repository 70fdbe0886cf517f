#include <doctest.h>

#include <cmath>
#include <random>

#include "lmvsc/dataset.hpp"
#include "lmvsc/errors.hpp"
#include "test_util.hpp"

using namespace lmvsc;
using lmvsc::testing::temp_dir;
using lmvsc::testing::write_text;

TEST_SUITE("dataset") {

TEST_CASE("csv rows become sample columns") {
    const auto dir = temp_dir("csv_basic");
    write_text(dir / "zeros.csv", "0,0\n0,0\n0,0\n");
    const ViewMatrix zeros = load_view_csv(dir / "zeros.csv");
    CHECK(zeros.features() == 2);
    CHECK(zeros.samples() == 3);
    CHECK(zeros.data().isZero(0));

    write_text(dir / "small.csv", "1,2\n3,4");
    const ViewMatrix v = load_view_csv(dir / "small.csv");
    CHECK(v.data().col(0) == Eigen::Vector2d(1, 2));
    CHECK(v.data().col(1) == Eigen::Vector2d(3, 4));

    write_text(dir / "header.csv", "a,b\n1,2\n");
    CHECK(load_view_csv(dir / "header.csv", true).samples() == 1);
}

TEST_CASE("csv error paths") {
    const auto dir = temp_dir("csv_errors");
    write_text(dir / "abc.csv", "1,2\nabc,4\n");
    CHECK_THROWS_AS(load_view_csv(dir / "abc.csv"), ParseError);
    write_text(dir / "ragged.csv", "1,2\n3\n");
    CHECK_THROWS_AS(load_view_csv(dir / "ragged.csv"), ParseError);
    write_text(dir / "nan.csv", "1,nan\n");
    CHECK_THROWS_AS(load_view_csv(dir / "nan.csv"), ValueError);
    write_text(dir / "inf.csv", "1,inf\n");
    CHECK_THROWS_AS(load_view_csv(dir / "inf.csv"), ValueError);
    CHECK_THROWS_AS(load_view_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("rescale flag maps pixel data onto [0,1]") {
    const auto dir = temp_dir("csv_rescale");
    write_text(dir / "px.csv", "0,255\n51,102\n");
    LoadOptions opt;
    opt.rescale_255 = true;
    const ViewMatrix v = load_view_csv(dir / "px.csv", opt);
    CHECK(v.data()(1, 0) == doctest::Approx(1.0));
    CHECK(v.data()(0, 1) == doctest::Approx(0.2));
}

TEST_CASE("matrix market array and coordinate views") {
    const auto dir = temp_dir("mtx");
    // 3 samples x 2 features, column-major entries.
    write_text(dir / "a.mtx", "%%MatrixMarket matrix array real general\n% comment\n3 2\n1\n2\n3\n4\n5\n6\n");
    const ViewMatrix a = load_view(dir / "a.mtx");
    CHECK(a.features() == 2);
    CHECK(a.samples() == 3);
    CHECK(a.data()(0, 2) == 3.0);
    CHECK(a.data()(1, 0) == 4.0);

    write_text(dir / "c.mtx", "%%MatrixMarket matrix coordinate real general\n2 3 2\n1 1 7.5\n2 3 -1\n");
    const ViewMatrix c = load_view(dir / "c.mtx");
    CHECK(c.features() == 3);
    CHECK(c.data()(0, 0) == 7.5);
    CHECK(c.data()(2, 1) == -1.0);
    CHECK(c.data()(1, 1) == 0.0);

    write_text(dir / "bad.mtx", "%%MatrixMarket matrix coordinate real symmetric\n1 1 0\n");
    CHECK_THROWS_AS(load_view(dir / "bad.mtx"), ParseError);
}

TEST_CASE("write then reload is exact (property over random matrices)") {
    std::mt19937_64 rng(7);
    const auto dir = temp_dir("roundtrip");
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd m = lmvsc::testing::random_matrix(1 + trial % 4, 3 + trial, rng, 1e3);
        const ViewMatrix v(m);
        write_view_csv(dir / "v.csv", v);
        write_view_mtx(dir / "v.mtx", v);
        CHECK(load_view_csv(dir / "v.csv").data() == m);
        CHECK(load_view(dir / "v.mtx").data() == m);
    }
}

TEST_CASE("manifest loading") {
    const auto dir = temp_dir("manifest");
    write_text(dir / "v5.csv", "1\n2\n3\n4\n5\n");
    write_text(dir / "v6.csv", "1\n2\n3\n4\n5\n6\n");
    write_text(dir / "l5.txt", "3\n3\n7\n7\n9\n");
    write_text(dir / "one.txt", "# comment\nview = v5.csv\nlabels = l5.txt\n");
    const MultiViewDataset one = load_multiview(dir / "one.txt");
    CHECK(one.num_views() == 1);
    CHECK(one.samples() == 5);
    REQUIRE(one.labels());
    CHECK(one.labels()->labels() == std::vector<int>{0, 0, 1, 1, 2});
    CHECK(one.labels()->num_classes() == 3);

    write_text(dir / "two.txt", "view = v5.csv\nview = v6.csv\n");
    CHECK_THROWS_AS(load_multiview(dir / "two.txt"), DimensionMismatch);

    write_text(dir / "nolabels.txt", "view = v5.csv\nview=v5.csv\n");
    const MultiViewDataset nl = load_multiview(dir / "nolabels.txt");
    CHECK(nl.num_views() == 2);
    CHECK_FALSE(nl.labels());

    write_text(dir / "badkey.txt", "vue = v5.csv\n");
    CHECK_THROWS_AS(load_multiview(dir / "badkey.txt"), ParseError);
    write_text(dir / "missing.txt", "view = nope.csv\n");
    CHECK_THROWS_AS(load_multiview(dir / "missing.txt"), IoError);

    write_text(dir / "l6.txt", "0\n1\n0\n1\n0\n1\n");
    write_text(dir / "mismatch.txt", "view = v5.csv\nlabels = l6.txt\n");
    CHECK_THROWS_AS(load_multiview(dir / "mismatch.txt"), DimensionMismatch);
}

TEST_CASE("label vectors") {
    CHECK_THROWS_AS(LabelVector({0, 3}, 3), ValueError);
    CHECK_THROWS_AS(LabelVector(std::vector<int>{0, -1}), ValueError);
    const LabelVector sparse({0, 2}, 3);
    CHECK_FALSE(sparse.is_dense());
    CHECK(sparse.distinct() == 2);
    CHECK(LabelVector::compact({10, -4, 10}).labels() == std::vector<int>{1, 0, 1});
}

TEST_CASE("standardize") {
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 5, 5, 5;
    const ViewMatrix v(m);
    CHECK(standardize(v, StandardizeMode::none).data() == m);

    const ViewMatrix z = standardize(v, StandardizeMode::zscore);
    // (x - 2) / sqrt(2/3)
    CHECK(z.data()(0, 0) == doctest::Approx(-1.2247448713915890).epsilon(1e-12));
    CHECK(z.data()(0, 1) == doctest::Approx(0.0));
    CHECK(z.data()(0, 2) == doctest::Approx(1.2247448713915890).epsilon(1e-12));
    CHECK(z.data().row(1).isZero(0));

    const ViewMatrix u = standardize(v, StandardizeMode::unit_range);
    CHECK(u.data()(0, 0) == 0.0);
    CHECK(u.data()(0, 1) == doctest::Approx(0.5));
    CHECK(u.data()(0, 2) == 1.0);
    CHECK(u.data().row(1).isZero(0));

    CHECK(parse_standardize_mode("zscore") == StandardizeMode::zscore);
    CHECK_THROWS_AS(parse_standardize_mode("l2"), ValueError);
}

TEST_CASE("synthetic subspaces") {
    SynthSpec spec;
    spec.n = 10;
    spec.k = 1;
    spec.v = 1;
    spec.dims = {6};
    spec.subspace_dim = 2;
    spec.noise_sigma = 0.0;
    spec.seed = 3;
    const auto [data, labels] = synth_multiview(spec);
    // All ten points lie in one 2-dim subspace: rank 2 with residual 0.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(data.view(0).data(), Eigen::ComputeThinU);
    const Eigen::MatrixXd basis = svd.matrixU().leftCols(2);
    const Eigen::MatrixXd resid = data.view(0).data() - basis * (basis.transpose() * data.view(0).data());
    CHECK(resid.norm() <= 1e-10);

    const auto again = synth_multiview(spec);
    CHECK(again.first.view(0).data() == data.view(0).data());
    CHECK(again.second == labels);
}

TEST_CASE("noiseless synthetic clusters stay on their subspaces") {
    SynthSpec spec;
    spec.n = 60;
    spec.k = 3;
    spec.v = 2;
    spec.dims = {8, 5};
    spec.subspace_dim = 2;
    spec.seed = 11;
    const auto [data, labels] = synth_multiview(spec);
    CHECK(labels.distinct() == 3);
    for (std::size_t v = 0; v < 2; ++v) {
        for (int c = 0; c < 3; ++c) {
            std::vector<Eigen::Index> idx;
            for (std::size_t j = 0; j < labels.size(); ++j)
                if (labels[j] == c) idx.push_back(static_cast<Eigen::Index>(j));
            CHECK(idx.size() == 20);
            Eigen::MatrixXd pts(data.view(v).features(), static_cast<Eigen::Index>(idx.size()));
            for (std::size_t t = 0; t < idx.size(); ++t) pts.col(static_cast<Eigen::Index>(t)) = data.view(v).data().col(idx[t]);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(pts, Eigen::ComputeThinU);
            const Eigen::MatrixXd b = svd.matrixU().leftCols(2);
            const double worst = (pts - b * (b.transpose() * pts)).colwise().norm().maxCoeff();
            CHECK(worst <= 1e-10);
        }
    }
}

TEST_CASE("synth preconditions") {
    SynthSpec spec;
    spec.n = 3;
    spec.k = 4;
    spec.dims = {5};
    CHECK_THROWS_AS(synth_multiview(spec), ValueError);
    spec.k = 2;
    spec.subspace_dim = 6;
    CHECK_THROWS_AS(synth_multiview(spec), ValueError);
    spec.subspace_dim = 2;
    spec.v = 2;
    spec.dims = {5, 5, 5};
    CHECK_THROWS_AS(synth_multiview(spec), ValueError);
}

TEST_CASE("noise models") {
    std::mt19937_64 rng(5);
    const ViewMatrix base(lmvsc::testing::random_uniform(100, 100, rng));

    const ViewMatrix tiny = add_noise(base, {NoiseKind::gaussian, 1e-12, 1});
    CHECK((tiny.data() - base.data()).cwiseAbs().maxCoeff() <= 1e-5);

    // Binomial(10000, 0.2): mean 2000, sigma 40.
    const ViewMatrix sp = add_noise(base, {NoiseKind::salt_pepper, 0.2, 2});
    const auto binary = ((sp.data().array() == 0.0) || (sp.data().array() == 1.0)).count();
    CHECK(std::abs(static_cast<double>(binary) - 2000.0) <= 160.0);

    const ViewMatrix zero(Eigen::MatrixXd::Zero(10, 10));
    CHECK(add_noise(zero, {NoiseKind::speckle, 0.15, 3}).data().isZero(0));

    const ViewMatrix speck = add_noise(base, {NoiseKind::speckle, 0.15, 4});
    CHECK(speck.data().minCoeff() >= 0.0);
    CHECK(speck.data().maxCoeff() <= 1.0);

    CHECK(add_noise(base, {NoiseKind::gaussian, 0.01, 9}).data() ==
          add_noise(base, {NoiseKind::gaussian, 0.01, 9}).data());
    CHECK(add_noise(base, {NoiseKind::gaussian, 0.01, 9}).data() !=
          add_noise(base, {NoiseKind::gaussian, 0.01, 10}).data());

    CHECK_THROWS_AS(add_noise(base, {NoiseKind::gaussian, 0.0, 1}), ValueError);
    CHECK_THROWS_AS(add_noise(base, {NoiseKind::salt_pepper, 1.0, 1}), ValueError);
    CHECK_THROWS_AS(add_noise(base, {NoiseKind::speckle, -0.1, 1}), ValueError);
}

TEST_CASE("noise spec parsing accepts the robustness-study levels") {
    for (const char* s : {"gaussian:0.01", "gaussian:0.03", "gaussian:0.05", "salt_pepper:0.05",
                          "salt_pepper:0.1", "salt_pepper:0.2", "speckle:0.05", "speckle:0.1",
                          "speckle:0.15"})
        CHECK_NOTHROW(parse_noise_spec(s));
    CHECK(parse_noise_spec("speckle:0.1").kind == NoiseKind::speckle);
    CHECK_THROWS_AS(parse_noise_spec("poisson:0.1"), ValueError);
    CHECK_THROWS_AS(parse_noise_spec("gaussian"), ValueError);
    CHECK_THROWS_AS(parse_noise_spec("gaussian:abc"), ValueError);
}

TEST_CASE("noisy views share labels") {
    std::mt19937_64 rng(1);
    const ViewMatrix base(lmvsc::testing::random_uniform(4, 12, rng));
    const auto data = noisy_views(base,
                                  {{NoiseKind::gaussian, 0.01, 1},
                                   {NoiseKind::salt_pepper, 0.1, 2},
                                   {NoiseKind::speckle, 0.05, 3}},
                                  LabelVector(std::vector<int>(12, 0)));
    CHECK(data.num_views() == 3);
    CHECK(data.view(2).view_id() == 2);
}

}
