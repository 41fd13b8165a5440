#include "sceneryscope/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace sceneryscope {

namespace {

long parse_site(const std::string& key) {
  long z = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), z);
  if (ec != std::errc() || ptr != key.data() + key.size()) {
    fail(ErrorCode::ConfigError, "site key '" + key + "' is not an integer");
  }
  return z;
}

std::vector<double> number_array(const json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorCode::ConfigError, what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) fail(ErrorCode::ConfigError, what + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

IncrementLaw law_from_json(const json& j) {
  const json& m = j.contains("q") ? j.at("q") : j;
  if (!m.is_object() || m.empty()) fail(ErrorCode::ConfigError, "increment law must be a nonempty object");
  std::map<int, double> raw;
  for (const auto& [k, v] : m.items()) {
    if (!v.is_number()) fail(ErrorCode::ConfigError, "increment probability must be a number");
    raw[static_cast<int>(parse_site(k))] = v.get<double>();
  }
  return validate(raw);
}

json law_to_json(const IncrementLaw& q) {
  json m = json::object();
  for (const auto& [z, p] : q.support_probs) m[std::to_string(z)] = p;
  return json{{"q", m}};
}

bool is_coin_json(const json& j) { return j.is_object() && j.contains("coins"); }

Scenery scenery_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "scenery must be an object");
  if (is_coin_json(j)) {
    const json& c = j.at("coins");
    if (!c.is_object()) fail(ErrorCode::ConfigError, "coins must map sites to biases");
    CoinScenery cs;
    for (const auto& [k, v] : c.items()) {
      if (!v.is_number()) fail(ErrorCode::ConfigError, "coin bias must be a number");
      cs.theta[parse_site(k)] = v.get<double>();
    }
    return cs.to_scenery();
  }
  for (const char* key : {"alphabet", "alpha"}) {
    if (!j.contains(key)) fail(ErrorCode::ConfigError, std::string("scenery is missing '") + key + "'");
  }
  std::vector<std::string> symbols;
  for (const auto& s : j.at("alphabet")) {
    if (!s.is_string()) fail(ErrorCode::ConfigError, "alphabet labels must be strings");
    symbols.push_back(s.get<std::string>());
  }
  Alphabet alphabet = Alphabet::of(std::move(symbols));
  SiteLaw alpha{number_array(j.at("alpha"), "alpha")};
  std::map<long, SiteLaw> dev;
  if (j.contains("deviations")) {
    if (!j.at("deviations").is_object()) fail(ErrorCode::ConfigError, "deviations must be an object");
    for (const auto& [k, v] : j.at("deviations").items()) {
      dev[parse_site(k)] = SiteLaw{number_array(v, "site law")};
    }
  }
  return Scenery(std::move(alphabet), std::move(alpha), std::move(dev));
}

json scenery_to_json(const Scenery& s) {
  json dev = json::object();
  for (const auto& [z, law] : s.deviations()) dev[std::to_string(z)] = law.probs;
  return json{{"alphabet", s.alphabet().symbols}, {"alpha", s.alpha().probs}, {"deviations", dev}};
}

std::string tuple_key(const std::vector<int>& idx) {
  std::string out = "(";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(idx[i]);
  }
  return out + ")";
}

std::vector<int> parse_tuple_key(const std::string& key) {
  if (key.size() < 2 || key.front() != '(' || key.back() != ')') {
    fail(ErrorCode::ConfigError, "bad tuple key '" + key + "'");
  }
  std::vector<int> out;
  std::stringstream ss(key.substr(1, key.size() - 2));
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(static_cast<int>(parse_site(part)));
  return out;
}

json pvector_to_json(const PVector& p) {
  json e = json::object();
  for (std::size_t f = 0; f < p.entries.size(); ++f) e[tuple_key(unflatten(f, p.k, p.r, 1))] = p.entries[f];
  return json{{"k", p.k}, {"r", p.r}, {"entries", e}};
}

PVector pvector_from_json(const json& j) {
  PVector p;
  p.k = j.at("k").get<int>();
  p.r = j.at("r").get<int>();
  p.entries.assign(ipow(p.r, p.k), 0.0);
  std::vector<bool> seen(p.entries.size(), false);
  for (const auto& [key, v] : j.at("entries").items()) {
    std::size_t f = flat_index(parse_tuple_key(key), p.r, 1);
    p.entries[f] = v.get<double>();
    seen[f] = true;
  }
  for (bool s : seen) {
    if (!s) fail(ErrorCode::ConfigError, "p vector index set is incomplete");
  }
  return p;
}

json qtensor_to_json(const QTensor& q) {
  json e = json::object();
  for (std::size_t f = 0; f < q.entries.size(); ++f) e[tuple_key(unflatten(f, q.k, q.m + 1, 0))] = q.entries[f];
  return json{{"k", q.k}, {"m", q.m}, {"entries", e}};
}

QTensor qtensor_from_json(const json& j) {
  QTensor q;
  q.k = j.at("k").get<int>();
  q.m = j.at("m").get<int>();
  q.entries.assign(ipow(q.m + 1, q.k), 0.0);
  for (const auto& [key, v] : j.at("entries").items()) {
    q.entries[flat_index(parse_tuple_key(key), q.m + 1, 0)] = v.get<double>();
  }
  return q;
}

json law_list_to_json(const std::vector<SiteLaw>& laws) {
  json out = json::array();
  for (const auto& l : laws) out.push_back(l.probs);
  return out;
}

json reconstruction_to_json(const Reconstruction& rec) {
  json diag = {{"r", rec.diagnostics.r},
               {"condition", rec.diagnostics.condition},
               {"residual", rec.diagnostics.residual},
               {"q_evaluations", rec.diagnostics.q_evaluations},
               {"ell_scan", rec.diagnostics.ell_scan}};
  diag["ell_estimate"] = rec.diagnostics.ell_estimate ? json(*rec.diagnostics.ell_estimate) : json(nullptr);
  json out = {{"bracket", true}, {"alpha", rec.alpha.probs}, {"diagnostics", diag}};
  if (rec.no_signal) {
    out["ell"] = nullptr;
    out["sites"] = json::array();
    out["verdict"] = "all-alpha";
  } else {
    out["ell"] = rec.ell;
    out["sites"] = law_list_to_json(rec.sites);
    out["verdict"] = "reconstructed";
  }
  return out;
}

ObsFormat parse_format(const std::string& name) {
  if (name == "jsonl") return ObsFormat::Jsonl;
  if (name == "bin") return ObsFormat::Binary;
  fail(ErrorCode::ConfigError, "format must be jsonl or bin, got '" + name + "'");
}

namespace {

json header_json(const ObservationHeader& h) {
  return json{{"alphabet", h.alphabet}, {"n", h.n}, {"seed", h.seed}};
}

ObservationHeader header_from(const json& j) {
  ObservationHeader h;
  try {
    h.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    h.n = j.at("n").get<long>();
    h.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, std::string("bad observation header: ") + e.what());
  }
  return h;
}

}  // namespace

void write_observations(const std::string& path, const ObservationHeader& header,
                        std::span<const Symbol> symbols, ObsFormat format) {
  if (format == ObsFormat::Jsonl) {
    std::ofstream f(path);
    if (!f) fail(ErrorCode::IoError, "cannot open " + path);
    f << header_json(header).dump() << '\n';
    std::string buf;
    buf.reserve(1 << 16);
    for (Symbol s : symbols) {
      buf += std::to_string(static_cast<int>(s));
      buf += '\n';
      if (buf.size() > (1 << 16) - 8) {
        f << buf;
        buf.clear();
      }
    }
    f << buf;
    if (!f) fail(ErrorCode::IoError, "write failed for " + path);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path);
  f.write(reinterpret_cast<const char*>(symbols.data()), static_cast<std::streamsize>(symbols.size()));
  std::ofstream side(path + ".json");
  if (!side) fail(ErrorCode::IoError, "cannot open " + path + ".json");
  side << header_json(header).dump() << '\n';
  if (!f || !side) fail(ErrorCode::IoError, "write failed for " + path);
}

ObservationFile read_observations(const std::string& path, ObsFormat format) {
  ObservationFile out;
  if (format == ObsFormat::Jsonl) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) fail(ErrorCode::IoError, path + " has no header line");
    try {
      out.header = header_from(json::parse(line));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::IoError, std::string("bad observation header: ") + e.what());
    }
    const std::size_t A = out.header.alphabet.size();
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      int v = -1;
      auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
      if (ec != std::errc() || v < 0 || static_cast<std::size_t>(v) >= A) {
        fail(ErrorCode::IoError, "bad symbol line in " + path);
      }
      out.symbols.push_back(static_cast<Symbol>(v));
    }
    return out;
  }
  out.header = header_from(read_json_file(path + ".json"));
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path);
  out.symbols.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  for (Symbol s : out.symbols) {
    if (s >= out.header.alphabet.size()) fail(ErrorCode::IoError, "symbol outside alphabet in " + path);
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, "invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace sceneryscope
