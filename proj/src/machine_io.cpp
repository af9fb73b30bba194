#include "fmest/machine_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fmest/errors.hpp"

namespace fmest {

using nlohmann::json;

namespace {

template <class T>
T field_as(const json& doc, const char* name) {
  if (!doc.contains(name)) throw ParseError(name, "missing");
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(name, e.what());
  }
}

std::vector<StateIndex> index_array(const json& doc, const char* name, int S) {
  auto values = field_as<std::vector<StateIndex>>(doc, name);
  if (static_cast<int>(values.size()) != S) throw ParseError(name, "length differs from num_states");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 1 || values[i] > S) {
      throw ParseError(std::string(name) + "[" + std::to_string(i + 1) + "]",
                       "state index " + std::to_string(values[i]) + " outside [1," + std::to_string(S) + "]");
    }
  }
  return values;
}

}  // namespace

std::string serialize(const Machine& m, const std::optional<EstimatorMetadata>& meta) {
  json doc;
  doc["version"] = kMachineFormatVersion;
  doc["num_states"] = m.num_states();
  doc["initial"] = m.initial;
  doc["next0"] = m.next0;
  doc["next1"] = m.next1;
  doc["estimate"] = m.estimate;
  if (!m.class_map.empty()) doc["class_map"] = m.class_map;
  if (meta) {
    json mini = json::array();
    for (const MiniParams& mp : meta->mini) {
      mini.push_back({{"N", mp.N}, {"s", mp.s}, {"p", mp.p}, {"q", mp.q}});
    }
    doc["metadata"] = {{"K", meta->K}, {"epsilon", meta->epsilon}, {"mini_params", mini}};
  }
  return doc.dump(1) + "\n";
}

std::string serialize(const ComposedEstimator& est) {
  return serialize(est.machine, EstimatorMetadata{est.layout.K, est.layout.epsilon, est.layout.mini});
}

MachineDocument deserialize(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("document", e.what());
  }
  if (!doc.is_object()) throw ParseError("document", "top level must be an object");
  const int version = field_as<int>(doc, "version");
  if (version != kMachineFormatVersion) {
    throw ParseError("version", "unsupported version " + std::to_string(version));
  }
  const int S = field_as<int>(doc, "num_states");
  if (S < 1) throw ParseError("num_states", "must be positive");

  MachineDocument out;
  Machine& m = out.machine;
  m.initial = field_as<StateIndex>(doc, "initial");
  if (m.initial < 1 || m.initial > S) throw ParseError("initial", "state index out of range");
  m.next0 = index_array(doc, "next0", S);
  m.next1 = index_array(doc, "next1", S);
  m.estimate = field_as<std::vector<double>>(doc, "estimate");
  if (static_cast<int>(m.estimate.size()) != S) throw ParseError("estimate", "length differs from num_states");
  for (int i = 0; i < S; ++i) {
    const double e = m.estimate[i];
    if (!(e >= 0.0 && e <= 1.0)) {
      throw ParseError("estimate[" + std::to_string(i + 1) + "]", "value outside [0,1]");
    }
  }
  if (doc.contains("class_map")) {
    m.class_map = field_as<std::vector<int>>(doc, "class_map");
    if (static_cast<int>(m.class_map.size()) != S) throw ParseError("class_map", "length differs from num_states");
    for (int i = 0; i < S; ++i) {
      if (m.class_map[i] < 1) throw ParseError("class_map[" + std::to_string(i + 1) + "]", "class labels start at 1");
    }
  }
  if (doc.contains("metadata")) {
    const json& md = doc["metadata"];
    if (!md.is_object()) throw ParseError("metadata", "must be an object");
    EstimatorMetadata meta;
    meta.K = field_as<int>(md, "K");
    meta.epsilon = field_as<double>(md, "epsilon");
    if (!md.contains("mini_params") || !md["mini_params"].is_array()) {
      throw ParseError("metadata.mini_params", "missing or not an array");
    }
    for (const json& entry : md["mini_params"]) {
      try {
        meta.mini.push_back({entry.at("N").get<int>(), entry.at("s").get<int>(),
                             entry.at("p").get<double>(), entry.at("q").get<double>()});
      } catch (const json::exception& e) {
        throw ParseError("metadata.mini_params", e.what());
      }
    }
    if (static_cast<int>(meta.mini.size()) != meta.K) {
      throw ParseError("metadata.mini_params", "expected one entry per class");
    }
    out.metadata = std::move(meta);
  }
  return out;
}

void write_machine_file(const std::filesystem::path& path, const std::string& document) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << document;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

MachineDocument read_machine_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return deserialize(buf.str());
}

ComposedLayout layout_of(const MachineDocument& doc) {
  if (doc.metadata) return infer_layout(doc.machine, doc.metadata->epsilon, doc.metadata->mini);
  return infer_layout(doc.machine, 0.0, {});
}

}  // namespace fmest
