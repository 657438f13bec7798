#include <sstream>

#include <gtest/gtest.h>

#include "mba/instance.hpp"
#include "mba/json_io.hpp"

using mba::Rational;

namespace {

mba::Instance two_items(Rational budget, Rational p1, Rational p2) {
  mba::InstanceBuilder b;
  b.add_player("a", budget);
  b.add_item("j1");
  b.add_item("j2");
  b.set_price(0, 0, p1);
  b.set_price(0, 1, p2);
  return b.build();
}

}  // namespace

TEST(ConfigValue, CapsAtBudget) {
  auto inst = two_items(Rational(1), Rational(3, 5), Rational(7, 10));
  std::vector<std::size_t> both{0, 1};
  EXPECT_EQ(mba::config_value(inst, 0, both), Rational(1));
  EXPECT_EQ(mba::config_value(inst, 0, std::vector<std::size_t>{}), Rational(0));
  EXPECT_EQ(mba::config_value(inst, "a", {"j1"}), Rational(3, 5));
  EXPECT_THROW(mba::config_value(inst, "zz", {}), mba::ValidationError);
  EXPECT_THROW(mba::config_value(inst, "a", {"nope"}), mba::ValidationError);
}

TEST(ConfigValue, MonotoneAndBounded) {
  auto inst = two_items(Rational(1), Rational(3, 5), Rational(7, 10));
  std::vector<std::vector<std::size_t>> sets{{}, {0}, {1}, {0, 1}};
  for (const auto& a : sets) {
    EXPECT_LE(mba::config_value(inst, 0, a), inst.budget(0));
    for (const auto& b : sets) {
      bool subset = std::includes(b.begin(), b.end(), a.begin(), a.end());
      if (subset) {
        EXPECT_LE(mba::config_value(inst, 0, a), mba::config_value(inst, 0, b));
      }
    }
  }
}

TEST(AssignmentValue, SinglePlayer) {
  auto inst = two_items(Rational(2), Rational(1), Rational(1));
  mba::Assignment a(2);
  EXPECT_EQ(mba::assignment_value(inst, a), Rational(0));
  a.assign(0, 0);
  a.assign(1, 0);
  EXPECT_EQ(mba::assignment_value(inst, a), Rational(2));
  EXPECT_LE(mba::assignment_value(inst, a), inst.budget(0));
}

TEST(AssignmentValue, ZeroPriceAssignmentIsLegal) {
  mba::InstanceBuilder b;
  b.add_player("a", Rational(1));
  b.add_player("b", Rational(1));
  b.add_item("j");
  b.set_price(0, 0, Rational(1));
  auto inst = b.build();
  mba::Assignment a(1);
  a.assign(0, 1);
  EXPECT_EQ(mba::assignment_value(inst, a), Rational(0));
}

TEST(FracValue, NoBudgetCap) {
  auto inst = two_items(Rational(2), Rational(3, 2), Rational(1));
  mba::FractionalAssignment x(1, 2);
  EXPECT_EQ(mba::frac_value(inst, x).total, Rational(0));
  x.set(0, 0, Rational(1));
  EXPECT_EQ(mba::frac_value(inst, x).per_player[0], Rational(3, 2));
}

TEST(FracValue, AgreesWithSingletonConfigurations) {
  auto inst = two_items(Rational(2), Rational(3, 2), Rational(1, 3));
  mba::FractionalAssignment x(1, 2);
  x.set(0, 0, Rational(1, 2));
  x.set(0, 1, Rational(1, 4));
  mba::ConfigurationSolution y;
  y.add(0, {0}, Rational(1, 2));
  y.add(0, {1}, Rational(1, 4));
  EXPECT_EQ(mba::frac_value(inst, x).total, mba::config_frac_value(inst, y).total);
}

TEST(BigItems, ThresholdInclusive) {
  mba::InstanceBuilder b;
  b.add_player("a", Rational(1));
  b.add_item("j1");
  b.add_item("j2");
  b.add_item("j3");
  b.set_price(0, 0, Rational(2, 3));
  b.set_price(0, 1, Rational(1, 2));
  b.set_price(0, 2, Rational(199, 200));
  auto inst = b.build();
  auto big = mba::big_items(inst, Rational(1, 3));
  EXPECT_TRUE(big[0]);
  EXPECT_FALSE(big[1]);
  auto big2 = mba::big_items(inst, Rational(1, 100));
  EXPECT_FALSE(big2[0]);
  EXPECT_FALSE(big2[1]);
  EXPECT_TRUE(big2[2]);
}

TEST(BigItems, RejectsNonRestricted) {
  mba::InstanceBuilder b;
  b.add_player("a", Rational(1));
  b.add_player("b", Rational(1));
  b.add_item("j");
  b.set_price(0, 0, Rational(1, 2));
  b.set_price(1, 0, Rational(1, 3));
  EXPECT_THROW(mba::big_items(b.build(), Rational(1, 3)), mba::ClassificationError);
}

TEST(Classify, SinglePlayerSingleItem) {
  mba::InstanceBuilder b;
  b.add_player("a", Rational(1));
  b.add_item("j");
  b.set_price(0, 0, Rational(1));
  auto c = mba::classify(b.build());
  EXPECT_TRUE(c.is_graph);
  EXPECT_TRUE(c.is_restricted);
  EXPECT_TRUE(c.is_uniform_budget);
}

TEST(Classify, ThreeSupportedPlayersIsNotGraph) {
  mba::InstanceBuilder b;
  for (auto id : {"a", "b", "c"}) b.add_player(id, Rational(1));
  b.add_item("j");
  for (std::size_t i = 0; i < 3; ++i) b.set_price(i, 0, Rational(1, 2));
  auto c = mba::classify(b.build());
  EXPECT_FALSE(c.is_graph);
  EXPECT_TRUE(c.is_restricted);
}

TEST(Instance, ValidationErrors) {
  {
    mba::InstanceBuilder b;
    b.add_player("a", Rational(1));
    b.add_player("a", Rational(1));
    EXPECT_THROW(b.build(), mba::ValidationError);
  }
  {
    mba::InstanceBuilder b;
    b.add_player("a", Rational(1));
    b.add_item("j");
    b.set_price(0, 0, Rational(-1));
    EXPECT_THROW(b.build(), mba::ValidationError);
  }
}

TEST(Instance, ClampsPriceAboveBudget) {
  std::vector<std::string> warnings;
  auto inst = two_items(Rational(1), Rational(3), Rational(1, 2));
  EXPECT_EQ(inst.price(0, 0), Rational(1));
  mba::InstanceBuilder b;
  b.add_player("a", Rational(1));
  b.add_item("j");
  b.set_price(0, 0, Rational(5, 2));
  auto clamped = b.build(&warnings);
  EXPECT_EQ(clamped.price(0, 0), Rational(1));
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Json, RoundTripIsIdentity) {
  const char* text =
      R"({"players":[{"id":"p","budget":"3/2"},{"id":"q","budget":2}],"items":["b","a"],)"
      R"("prices":[{"player":"p","item":"b","price":"1/3"},{"player":"q","item":"a","price":"2"}]})";
  std::istringstream in(text);
  auto inst = mba::read_instance(in);
  EXPECT_EQ(inst.item_rank(0), 1u);
  EXPECT_EQ(inst.item_rank(1), 0u);
  auto dumped = mba::instance_to_json(inst).dump();
  std::istringstream again(dumped);
  EXPECT_EQ(mba::instance_to_json(mba::read_instance(again)).dump(), dumped);
  EXPECT_EQ(dumped,
            R"({"players":[{"id":"p","budget":"3/2"},{"id":"q","budget":"2"}],"items":["b","a"],)"
            R"("prices":[{"player":"p","item":"b","price":"1/3"},{"player":"q","item":"a","price":"2"}]})");
}

TEST(Json, RejectsMalformedInput) {
  std::istringstream bad1(R"({"players":[],"items":["a"],"prices":[{"player":"x","item":"a","price":"1"}]})");
  EXPECT_THROW(mba::read_instance(bad1), mba::ValidationError);
  std::istringstream bad2("{not json");
  EXPECT_THROW(mba::read_instance(bad2), mba::ValidationError);
  std::istringstream bad3(R"({"players":[{"id":"p","budget":"1/0"}],"items":[]})");
  EXPECT_THROW(mba::read_instance(bad3), mba::ValidationError);
}

TEST(ConfigurationSolution, ValidateMass) {
  auto inst = two_items(Rational(1), Rational(1, 2), Rational(1, 2));
  mba::ConfigurationSolution y;
  y.add(0, {1, 0}, Rational(1, 2));
  y.add(0, {0}, Rational(1, 2));
  EXPECT_NO_THROW(y.validate(inst));
  EXPECT_EQ(y.weight(0, {0, 1}), Rational(1, 2));
  y.add(0, {1}, Rational(1, 4));
  EXPECT_THROW(y.validate(inst), mba::ValidationError);
}
