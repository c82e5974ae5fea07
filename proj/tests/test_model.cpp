#include <cmath>
#include <vector>

#include "doctest.h"

#include "plca/plca.hpp"
#include "test_helpers.hpp"

using namespace plca;

TEST_CASE("joint_prob collapses to the single component for K=1, N=1") {
    PlcaModel model({1.0}, Matrix::from_rows({{1.0}}), Matrix::from_rows({{0.3}, {0.7}}));
    CHECK(joint_prob(model, 0, 0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(joint_prob(model, 1, 0) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("uniform components make every event equally likely within a group") {
    const std::size_t m = 5;
    Matrix components(m, 2, 1.0 / m);
    PlcaModel model({0.25, 0.75}, Matrix::from_rows({{0.6, 0.1}, {0.4, 0.9}}),
                    components);
    for (std::size_t e = 0; e < m; ++e) {
        for (std::size_t g = 0; g < 2; ++g) {
            CHECK(joint_prob(model, e, g) ==
                  doctest::Approx(model.group_prior()[g] / m).epsilon(1e-14));
        }
    }
}

TEST_CASE("hand 2x2x2 instance: joint and conditional") {
    const PlcaModel model = testing::hand_model_2x2x2();
    // group 1 uses class 1 exclusively, so the cell mass is 0.5 * 0.2
    CHECK(joint_prob(model, 0, 1) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(conditional_e_given_g(model, 0, 1) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("index checks") {
    const PlcaModel model = testing::hand_model_2x2x2();
    CHECK_THROWS_AS(joint_prob(model, 2, 0), IndexError);
    CHECK_THROWS_AS(joint_prob(model, 0, 2), IndexError);
    CHECK_THROWS_AS(conditional_e_given_g(model, 5, 0), IndexError);
}

TEST_CASE("conditional is a distribution over events and K=1 ignores the group") {
    SeededRng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const PlcaModel model = testing::random_model(rng, 4, 3, 2);
        for (std::size_t g = 0; g < model.groups(); ++g) {
            double sum = 0.0;
            for (std::size_t e = 0; e < model.events(); ++e) {
                sum += conditional_e_given_g(model, e, g);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        }
    }

    const PlcaModel single = testing::random_model(rng, 6, 4, 1);
    for (std::size_t e = 0; e < single.events(); ++e) {
        for (std::size_t g = 0; g < single.groups(); ++g) {
            CHECK(conditional_e_given_g(single, e, g) == single.components()(e, 0));
        }
    }
}

TEST_CASE("joint mass sums to one") {
    SeededRng rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const PlcaModel model = testing::random_model(rng, 5, 4, 3);
        double total = 0.0;
        for (std::size_t e = 0; e < model.events(); ++e) {
            for (std::size_t g = 0; g < model.groups(); ++g) {
                total += joint_prob(model, e, g);
            }
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("joint equals prior times conditional bit-for-bit") {
    SeededRng rng(13);
    const PlcaModel model = testing::random_model(rng, 7, 5, 3);
    for (std::size_t e = 0; e < model.events(); ++e) {
        for (std::size_t g = 0; g < model.groups(); ++g) {
            CHECK(joint_prob(model, e, g) ==
                  model.group_prior()[g] * conditional_e_given_g(model, e, g));
        }
    }
}

TEST_CASE("posterior: single class puts all responsibility on class 0") {
    SeededRng rng(14);
    const PlcaModel model = testing::random_model(rng, 4, 3, 1);
    const PosteriorTable post = posterior(model);
    for (std::size_t e = 0; e < 4; ++e) {
        for (std::size_t g = 0; g < 3; ++g) {
            CHECK(post.at(0, e, g) == 1.0);
        }
    }
    CHECK_FALSE(post.any_degenerate());
}

TEST_CASE("posterior: symmetric cell splits evenly") {
    PlcaModel model({1.0}, Matrix::from_rows({{0.5}, {0.5}}),
                    Matrix::from_rows({{0.4, 0.4}, {0.6, 0.6}}));
    const PosteriorTable post = posterior(model);
    CHECK(post.at(0, 0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(post.at(1, 0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("posterior: hand values") {
    // P(z|g) column [0.25, 0.75], P(e=0|.) = [0.8, 0.4]:
    // numerators 0.2 and 0.3, so responsibilities are 0.4 and 0.6
    PlcaModel model({1.0}, Matrix::from_rows({{0.25}, {0.75}}),
                    Matrix::from_rows({{0.8, 0.4}, {0.2, 0.6}}));
    const PosteriorTable post = posterior(model);
    CHECK(post.at(0, 0, 0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(post.at(1, 0, 0) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("posterior rows sum to one") {
    SeededRng rng(15);
    for (int rep = 0; rep < 10; ++rep) {
        const PlcaModel model = testing::random_model(rng, 5, 4, 3);
        const PosteriorTable post = posterior(model);
        for (std::size_t e = 0; e < 5; ++e) {
            for (std::size_t g = 0; g < 4; ++g) {
                double sum = 0.0;
                for (std::size_t z = 0; z < 3; ++z) {
                    sum += post.at(z, e, g);
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("posterior degenerate cell: zero mixture mass yields uniform and a flag") {
    // event 1 has zero probability under both classes
    PlcaModel model({1.0}, Matrix::from_rows({{0.5}, {0.5}}),
                    Matrix::from_rows({{0.6, 0.4}, {0.0, 0.0}, {0.4, 0.6}}));
    const PosteriorTable post = posterior(model);
    CHECK(post.degenerate(1, 0));
    CHECK(post.at(0, 1, 0) == 0.5);
    CHECK(post.at(1, 1, 0) == 0.5);
    CHECK_FALSE(post.degenerate(0, 0));
    CHECK(post.any_degenerate());
}

TEST_CASE("posterior is invariant to a common scaling of the numerators") {
    SeededRng rng(16);
    const PlcaModel model = testing::random_model(rng, 4, 3, 3);
    const PosteriorTable post = posterior(model);
    const double scale = 3.7;
    for (std::size_t e = 0; e < 4; ++e) {
        for (std::size_t g = 0; g < 3; ++g) {
            double scaled_den = 0.0;
            std::vector<double> scaled(3);
            for (std::size_t z = 0; z < 3; ++z) {
                scaled[z] = scale * model.components()(e, z) * model.mixture()(z, g);
                scaled_den += scaled[z];
            }
            for (std::size_t z = 0; z < 3; ++z) {
                CHECK(post.at(z, e, g) ==
                      doctest::Approx(scaled[z] / scaled_den).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("model construction validates and renormalizes") {
    SUBCASE("column sum off by more than the tolerance is rejected") {
        CHECK_THROWS_AS(PlcaModel({1.0}, Matrix::from_rows({{1.0}}),
                                  Matrix::from_rows({{0.6}, {0.5}})),
                        ValidationError);
    }
    SUBCASE("negative entries are rejected") {
        CHECK_THROWS_AS(PlcaModel({1.0}, Matrix::from_rows({{1.0}}),
                                  Matrix::from_rows({{1.2}, {-0.2}})),
                        ValidationError);
    }
    SUBCASE("prior must match mixture columns") {
        CHECK_THROWS_AS(PlcaModel({0.5, 0.5}, Matrix::from_rows({{1.0}}),
                                  Matrix::from_rows({{0.5}, {0.5}})),
                        ShapeError);
    }
    SUBCASE("mild round-off is renormalized") {
        PlcaModel model({1.0}, Matrix::from_rows({{1.0}}),
                        Matrix::from_rows({{0.6 + 4e-10}, {0.4}}));
        const double sum = model.components()(0, 0) + model.components()(1, 0);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("K above min(M, N) is allowed") {
        Matrix mixture(3, 2);
        for (std::size_t z = 0; z < 3; ++z) {
            for (std::size_t g = 0; g < 2; ++g) {
                mixture(z, g) = 1.0 / 3.0;
            }
        }
        Matrix components(2, 3, 0.5);
        CHECK_NOTHROW(PlcaModel({0.5, 0.5}, mixture, components));
    }
}
