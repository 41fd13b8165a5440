#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sceneryscope/lattice_walk.hpp"
#include "sceneryscope/reconstruct.hpp"
#include "sceneryscope/scenery.hpp"
#include "sceneryscope/sim.hpp"
#include "sceneryscope/tensor_algebra.hpp"

namespace sceneryscope {

using json = nlohmann::json;

/// {"q": {"0": 0.5, "1": 0.25, "-1": 0.25}} or the bare map.
IncrementLaw law_from_json(const json& j);
json law_to_json(const IncrementLaw& q);

/// Full form {"alphabet", "alpha", "deviations"} or {"coins": {...}}.
Scenery scenery_from_json(const json& j);
json scenery_to_json(const Scenery& s);
bool is_coin_json(const json& j);

std::string tuple_key(const std::vector<int>& idx);
std::vector<int> parse_tuple_key(const std::string& key);

json pvector_to_json(const PVector& p);
PVector pvector_from_json(const json& j);
json qtensor_to_json(const QTensor& q);
QTensor qtensor_from_json(const json& j);

json law_list_to_json(const std::vector<SiteLaw>& laws);
json reconstruction_to_json(const Reconstruction& rec);

enum class ObsFormat { Jsonl, Binary };

ObsFormat parse_format(const std::string& name);

struct ObservationHeader {
  std::vector<std::string> alphabet;
  /// Number of steps; a complete file holds n + 1 symbols.
  long n = 0;
  std::uint64_t seed = 0;
};

struct ObservationFile {
  ObservationHeader header;
  std::vector<Symbol> symbols;

  bool complete() const { return static_cast<long>(symbols.size()) >= header.n + 1; }
};

/// Binary mode writes raw bytes to `path` and the header to `path + ".json"`.
void write_observations(const std::string& path, const ObservationHeader& header,
                        std::span<const Symbol> symbols, ObsFormat format);
ObservationFile read_observations(const std::string& path, ObsFormat format);

json read_json_file(const std::string& path);

}  // namespace sceneryscope
