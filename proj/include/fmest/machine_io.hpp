#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "fmest/estimator.hpp"
#include "fmest/machine.hpp"

// Machine documents are JSON objects:
//
//   {"version": 1, "num_states": S, "initial": i,
//    "next0": [...], "next1": [...], "estimate": [...],
//    "class_map": [...],                       // optional
//    "metadata": {"K": K, "epsilon": e,        // optional, composed machines
//                 "mini_params": [{"N":..,"s":..,"p":..,"q":..}, ...]}}
//
// Arrays are written in state order; all state indices are 1-based.
namespace fmest {

inline constexpr int kMachineFormatVersion = 1;

struct EstimatorMetadata {
  int K = 0;
  double epsilon = 0.0;
  std::vector<MiniParams> mini;
  bool operator==(const EstimatorMetadata&) const = default;
};

struct MachineDocument {
  Machine machine;
  std::optional<EstimatorMetadata> metadata;
};

std::string serialize(const Machine& m, const std::optional<EstimatorMetadata>& meta = std::nullopt);
std::string serialize(const ComposedEstimator& est);

// Throws ParseError naming the offending field.
MachineDocument deserialize(std::string_view text);

void write_machine_file(const std::filesystem::path& path, const std::string& document);
MachineDocument read_machine_file(const std::filesystem::path& path);

// Layout for a document carrying class_map (and metadata when present).
ComposedLayout layout_of(const MachineDocument& doc);

}  // namespace fmest
