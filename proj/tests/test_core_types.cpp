#include <doctest.h>

#include <cmath>

#include "milstroud/core_types.hpp"
#include "test_helpers.hpp"

using namespace milstroud;

namespace {

Dataset two_bag_dataset() {
  Dataset d;
  d.featureDim = 2;
  d.trainingBags.push_back(make_bag(0, {{0, 0}, {1, 1}, {2, 0}}));
  d.testBags.push_back(make_bag(1, {{0, 1}, {5, 5}}, Label::Anomalous));
  return d;
}

}  // namespace

TEST_CASE("validate_dataset") {
  SUBCASE("well-formed dataset has no violations") { CHECK(validate_dataset(two_bag_dataset()).empty()); }

  SUBCASE("NaN feature in a test bag") {
    auto d = two_bag_dataset();
    d.testBags[0].instances[1].features[0] = NAN;
    const auto v = validate_dataset(d);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("instance 1001") != std::string::npos);
  }

  SUBCASE("anomalous training bag") {
    auto d = two_bag_dataset();
    d.trainingBags[0].label = Label::Anomalous;
    const auto v = validate_dataset(d);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("training bag not Normal") != std::string::npos);
  }

  SUBCASE("structural violations") {
    auto d = two_bag_dataset();
    d.testBags[0].instances.pop_back();
    d.trainingBags[0].instances[0].features.push_back(1.0);
    CHECK(validate_dataset(d).size() == 2);
    d.trainingBags.clear();
    CHECK(!validate_dataset(d).empty());
  }
}

TEST_CASE("bag label follows its instances") {
  CHECK(label_from_instances({Label::Normal, Label::Anomalous}) == Label::Anomalous);
  CHECK(label_from_instances({Label::Normal, std::nullopt}) == Label::Normal);
  CHECK(!label_from_instances({std::nullopt}).has_value());
}

TEST_CASE("Strangeness rejects negative and non-finite values") {
  CHECK(Strangeness(0.0).value() == 0.0);
  CHECK_THROWS_AS(Strangeness{-1e-9}, std::domain_error);
  CHECK_THROWS_AS(Strangeness{INFINITY}, std::domain_error);
}

TEST_CASE("with_context keeps the exception type") {
  CHECK_THROWS_AS(with_context("stage", []() -> int { throw ConfigError("x"); }), ConfigError);
  try {
    with_context("bag 7", []() -> int { throw DataError("broken"); });
  } catch (const DataError& e) {
    CHECK(std::string(e.what()) == "bag 7: broken");
  }
}
