#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "fmest/errors.hpp"
#include "fmest/machine_io.hpp"

using namespace fmest;
using nlohmann::json;

namespace {

Machine small() {
  Machine m;
  m.next0 = {1, 1, 2};
  m.next1 = {2, 3, 3};
  m.estimate = {0.1, 1.0 / 3, 0.9};
  m.initial = 2;
  return m;
}

std::string field_of(const std::string& text) {
  try {
    deserialize(text);
  } catch (const ParseError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(MachineIo, RoundTripPlainMachine) {
  const Machine m = small();
  const MachineDocument doc = deserialize(serialize(m));
  EXPECT_EQ(doc.machine, m);
  EXPECT_FALSE(doc.metadata.has_value());
}

TEST(MachineIo, RoundTripComposedEstimator) {
  const ComposedEstimator est = build_estimator(5, 0.03);
  const MachineDocument doc = deserialize(serialize(est));
  EXPECT_EQ(doc.machine, est.machine);
  ASSERT_TRUE(doc.metadata.has_value());
  EXPECT_EQ(doc.metadata->K, 5);
  EXPECT_EQ(doc.metadata->epsilon, 0.03);
  EXPECT_EQ(doc.metadata->mini, est.layout.mini);
  const ComposedLayout L = layout_of(doc);
  EXPECT_EQ(L.entry, est.layout.entry);
  EXPECT_EQ(L.class_map, est.layout.class_map);
  EXPECT_EQ(L.mini, est.layout.mini);
}

TEST(MachineIo, PropertyDoublesRoundTripExactly) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Machine m;
  for (int i = 0; i < 200; ++i) {
    m.next0.push_back(1 + static_cast<int>(gen() % 200));
    m.next1.push_back(1 + static_cast<int>(gen() % 200));
    m.estimate.push_back(u(gen));
  }
  m.initial = 17;
  EXPECT_EQ(deserialize(serialize(m)).machine, m);
}

TEST(MachineIo, SerializationIsDeterministic) {
  const ComposedEstimator est = build_estimator(4, 0.01);
  EXPECT_EQ(serialize(est), serialize(est));
}

TEST(MachineIo, ErrorsNameTheField) {
  json doc = json::parse(serialize(small()));
  auto with = [&](const char* key, json value) {
    json d = doc;
    d[key] = std::move(value);
    return d.dump();
  };
  EXPECT_EQ(field_of("{not json"), "document");
  EXPECT_EQ(field_of("[1,2]"), "document");
  EXPECT_EQ(field_of(with("version", 2)), "version");
  EXPECT_EQ(field_of(with("initial", 9)), "initial");
  EXPECT_EQ(field_of(with("next0", json::array({1, 4, 2}))), "next0[2]");
  EXPECT_EQ(field_of(with("next1", json::array({1, 2}))), "next1");
  EXPECT_EQ(field_of(with("estimate", json::array({0.1, 1.5, 0.2}))), "estimate[2]");
  EXPECT_EQ(field_of(with("class_map", json::array({1, 0, 1}))), "class_map[2]");
  json missing = doc;
  missing.erase("next1");
  EXPECT_EQ(field_of(missing.dump()), "next1");
}

TEST(MachineIo, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "fmest_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.json";
  const ComposedEstimator est = build_estimator(3, 0.1);
  write_machine_file(path, serialize(est));
  const MachineDocument doc = read_machine_file(path);
  EXPECT_EQ(doc.machine, est.machine);
  EXPECT_TRUE(validate(doc.machine).structural_ok);
  EXPECT_THROW(read_machine_file(dir / "absent.json"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
