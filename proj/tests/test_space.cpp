#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "mmspace/io.hpp"
#include "mmspace/random.hpp"
#include "mmspace/space.hpp"

using namespace mmspace;

namespace {

std::string data(const std::string& name) { return std::string(MMSPACE_DATA_DIR) + "/" + name; }

}  // namespace

TEST(Validate, SinglePoint) { EXPECT_TRUE(validate(make_space({1.0}, {{0.0}})).ok()); }

TEST(Validate, TwoPointUniform) { EXPECT_TRUE(validate(make_space({0.5, 0.5}, {{0, 1}, {1, 0}})).ok()); }

TEST(Validate, ReportsAsymmetry) {
  const auto r = validate(make_space({0.5, 0.5}, {{0, 1}, {2, 0}}));
  ASSERT_FALSE(r.ok());
  bool found = false;
  for (const auto& v : r.violations) found = found || v.find("asymmetry") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Validate, ReportsEveryViolation) {
  FiniteMMSpace bad({"a", "a", "c"}, {-1.0, 0.5, 0.5}, Matrix::from_rows({{1, 1, 5}, {1, 0, 1}, {5, 1, 0}}));
  const auto r = validate(bad);
  // duplicate label, negative weight, nonzero diagonal, triangle inequality
  EXPECT_GE(r.violations.size(), 4u);
}

TEST(Validate, ZeroTotalMass) { EXPECT_FALSE(validate(make_space({0.0}, {{0.0}})).ok()); }

TEST(ScaleMeasure, HalvesWeight) {
  const auto s = scale_measure(make_space({1.0}, {{0.0}}), 0.5);
  EXPECT_DOUBLE_EQ(s.weight(0), 0.5);
}

TEST(ScaleMeasure, AlphaOneIsIdentity) {
  const auto X = make_space({0.3, 0.7}, {{0, 1}, {1, 0}});
  EXPECT_EQ(scale_measure(X, 1.0), X);
}

TEST(ScaleMeasure, DoublesMass) {
  const auto s = scale_measure(make_space({0.5, 0.5}, {{0, 1}, {1, 0}}), 2.0);
  EXPECT_DOUBLE_EQ(s.weight(0), 1.0);
  EXPECT_DOUBLE_EQ(s.weight(1), 1.0);
  EXPECT_DOUBLE_EQ(s.total_mass(), 2.0);
}

TEST(ScaleMeasure, RejectsNonPositive) {
  const auto X = make_space({1.0}, {{0.0}});
  EXPECT_THROW(scale_measure(X, 0.0), DomainError);
  EXPECT_THROW(scale_measure(X, -1.0), DomainError);
}

TEST(ScaleMeasure, RoundTripProperty) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const auto X = random_space(rng, {1, 5, false, 8});
    std::uniform_real_distribution<double> a(0.1, 10.0);
    const double alpha = a(rng);
    const auto back = scale_measure(scale_measure(X, alpha), 1.0 / alpha);
    for (std::size_t i = 0; i < X.size(); ++i) EXPECT_NEAR(back.weight(i), X.weight(i), 1e-12);
  }
}

TEST(Pullback, DiagonalCouplingGivesEqualDistances) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto X = random_space(rng, {1, 5, false, 8});
    const auto p = pullback_pair(X, X, diagonal_coupling(X));
    EXPECT_EQ(p.d1, p.d2);
  }
}

TEST(Pullback, ProductCouplingOfTwoPointSpaces) {
  const auto X = make_space({0.5, 0.5}, {{0, 1}, {1, 0}});
  const auto Y = make_space({0.5, 0.5}, {{0, 2}, {2, 0}});
  const auto p = pullback_pair(X, Y, product_coupling(X, Y));
  ASSERT_EQ(p.size(), 4u);
  for (double w : p.weights) EXPECT_DOUBLE_EQ(w, 0.25);
  // cells (0,0),(0,1),(1,0),(1,1)
  EXPECT_DOUBLE_EQ(p.d1(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(p.d2(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(p.d1(0, 1), 0.0);
}

TEST(Pullback, ZeroCellIsDropped) {
  const auto X = make_space({0.5, 0.5}, {{0, 1}, {1, 0}});
  const auto p = pullback_pair(X, X, diagonal_coupling(X));
  EXPECT_EQ(p.size(), 2u);
  EXPECT_EQ(p.cells[1], (Cell{1, 1}));
}

TEST(Pullback, MarginalMismatchThrows) {
  const auto X = make_space({0.5, 0.5}, {{0, 1}, {1, 0}});
  EXPECT_THROW(pullback_pair(X, X, Coupling(Matrix::from_rows({{0.5, 0.0}, {0.5, 0.0}}))), DomainError);
}

TEST(Coupling, ConstructedMarginalsMatch) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto X = random_space(rng, {1, 5, true, 8});
    const auto Y = random_space(rng, {1, 5, true, 8});
    EXPECT_LE(product_coupling(X, Y).marginal_error(X.weights(), Y.weights()), 1e-12);
    EXPECT_LE(random_coupling(X, Y, rng).marginal_error(X.weights(), Y.weights()), 1e-12);
    auto ro = iota_order(X.size()), co = iota_order(Y.size());
    EXPECT_LE(Coupling(northwest_corner(X.weights(), Y.weights(), ro, co)).marginal_error(X.weights(), Y.weights()),
              1e-12);
  }
}

TEST(Io, RoundTrip) {
  std::mt19937_64 rng(8);
  const auto path = (std::filesystem::temp_directory_path() / "mmspace_roundtrip.json").string();
  for (int k = 0; k < 50; ++k) {
    auto X = random_space(rng, {1, 6, true, 8});
    write_space(X, path);
    EXPECT_EQ(read_space(path), X);
  }
  std::remove(path.c_str());
}

TEST(Io, WritesSeventeenDigits) {
  const auto X = make_space({1.0 / 3.0}, {{0.0}});
  EXPECT_NE(format_space(X).find("0.33333333333333331"), std::string::npos);
}

TEST(Io, NegativeWeightIsALoadError) {
  EXPECT_THROW(parse_space(R"({"labels":["a"],"weights":[-1],"dist":[[0]]})"), ValidationError);
}

TEST(Io, MissingDistRowIsAParseError) { EXPECT_THROW(read_space(data("missing_row.json")), ParseError); }

TEST(Io, AsymmetricFileIsRejected) { EXPECT_THROW(read_space(data("asymmetric.json")), ValidationError); }

TEST(Io, MissingFile) { EXPECT_THROW(read_space(data("no_such_file.json")), ParseError); }

TEST(Io, MalformedJson) { EXPECT_THROW(parse_space("{\"weights\": [1"), ParseError); }
