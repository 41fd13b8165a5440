#include "commands.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace sceneryscope::cli {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientObservations:
    case ErrorCode::HorizonTooSmall:
      return kInsufficientData;
    case ErrorCode::NoSignal:
      return kNoSignal;
    case ErrorCode::NotNormalized:
    case ErrorCode::Asymmetric:
    case ErrorCode::Periodic:
    case ErrorCode::AlphabetMismatch:
    case ErrorCode::NotCentered:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
      return kConfigError;
    default:
      return kNumericFailure;
  }
}

namespace {

template <class T>
T get_as(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("config key '") + key + "': " + e.what());
  }
}

Tolerances parse_tolerances(const json& j, Tolerances tol) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "tolerances must be an object");
  const std::set<std::string> keys = {"degenerate", "tie", "discriminant", "zero", "separation", "profile"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) fail(ErrorCode::ConfigError, "unknown tolerance '" + k + "'");
    if (!v.is_number() || v.get<double>() < 0) fail(ErrorCode::ConfigError, "tolerance '" + k + "' must be >= 0");
  }
  tol.degenerate = j.value("degenerate", tol.degenerate);
  tol.tie = j.value("tie", tol.tie);
  tol.discriminant = j.value("discriminant", tol.discriminant);
  tol.zero = j.value("zero", tol.zero);
  tol.separation = j.value("separation", tol.separation);
  tol.profile = j.value("profile", tol.profile);
  return tol;
}

BenchSpec parse_bench(const json& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "bench must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k != "N_grid" && k != "seeds" && k != "t_vectors") fail(ErrorCode::ConfigError, "unknown bench key '" + k + "'");
  }
  BenchSpec b;
  b.n_grid = get_as<std::vector<long>>(j, "N_grid");
  b.seeds = get_as<std::vector<std::uint64_t>>(j, "seeds");
  b.t_vectors = j.contains("t_vectors") ? get_as<std::vector<std::vector<int>>>(j, "t_vectors")
                                        : std::vector<std::vector<int>>{{1}};
  if (b.n_grid.empty()) fail(ErrorCode::ConfigError, "bench.N_grid is empty");
  if (b.seeds.empty()) fail(ErrorCode::ConfigError, "bench.seeds is empty");
  if (b.t_vectors.empty()) fail(ErrorCode::ConfigError, "bench.t_vectors is empty");
  for (long n : b.n_grid) {
    if (n < 16) fail(ErrorCode::ConfigError, "bench.N_grid entries must be >= 16");
  }
  for (const auto& t : b.t_vectors) {
    if (t.empty()) fail(ErrorCode::ConfigError, "empty t vector in bench");
    for (int g : t) {
      if (g < 1) fail(ErrorCode::ConfigError, "t vector entries must be positive");
    }
  }
  return b;
}

std::string checksum(std::span<const Symbol> s) {
  std::uint64_t h = 1469598103934665603ull;
  for (Symbol x : s) {
    h ^= x;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void emit(const json& report, const RunConfig& cfg, std::ostream& out) {
  if (cfg.out) {
    std::ofstream f(*cfg.out);
    if (!f) fail(ErrorCode::IoError, "cannot open " + *cfg.out);
    f << report.dump(2) << '\n';
  } else {
    out << report.dump(2) << '\n';
  }
}

const Scenery& need_scenery(const RunConfig& cfg) {
  if (!cfg.scenery) fail(ErrorCode::ConfigError, "config has no scenery");
  return *cfg.scenery;
}

ReconstructConfig recon_config(const RunConfig& cfg, bool coin_default) {
  ReconstructConfig rc = cfg.reconstruct;
  rc.coin_mode = cfg.coin_mode.value_or(coin_default);
  return rc;
}

std::vector<SiteLaw> truth_window(const Scenery& s) {
  std::vector<SiteLaw> laws;
  if (s.empty()) return laws;
  Bounds bd = bounds(s);
  for (long z = bd.a; z <= bd.b; ++z) laws.push_back(s.law_at(z));
  return laws;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::ConfigError, "config must be a JSON object");
  static const std::set<std::string> keys = {
      "q", "scenery", "seed", "N", "observations", "format", "out", "alpha", "coin_mode",
      "family", "m_max", "r_cap", "rank_tol", "tau", "tolerances", "bench"};
  for (const auto& [k, v] : doc.items()) {
    if (!keys.count(k)) fail(ErrorCode::ConfigError, "unknown config key '" + k + "'");
  }
  RunConfig cfg;
  cfg.q = doc.contains("q") ? law_from_json(doc.at("q"))
                            : validate({{0, 0.5}, {1, 0.25}, {-1, 0.25}});
  if (doc.contains("scenery")) {
    cfg.scenery = scenery_from_json(doc.at("scenery"));
    cfg.coin_scenery = is_coin_json(doc.at("scenery"));
  }
  if (doc.contains("seed")) cfg.seed = get_as<std::uint64_t>(doc, "seed");
  if (doc.contains("N")) {
    cfg.N = get_as<long>(doc, "N");
    if (cfg.N < 1) fail(ErrorCode::ConfigError, "N must be positive");
  }
  if (doc.contains("observations")) cfg.observations = get_as<std::string>(doc, "observations");
  if (doc.contains("format")) cfg.format = parse_format(get_as<std::string>(doc, "format"));
  if (doc.contains("out")) cfg.out = get_as<std::string>(doc, "out");
  if (doc.contains("alpha")) cfg.alpha = checked_law(get_as<std::vector<double>>(doc, "alpha"));
  if (doc.contains("coin_mode")) cfg.coin_mode = get_as<bool>(doc, "coin_mode");
  ReconstructConfig& rc = cfg.reconstruct;
  if (doc.contains("family")) {
    std::string f = get_as<std::string>(doc, "family");
    if (f == "indicators") rc.family = FamilyKind::Indicators;
    else if (f == "identity") rc.family = FamilyKind::Identity;
    else fail(ErrorCode::ConfigError, "family must be indicators or identity");
  }
  if (doc.contains("m_max")) rc.m_max = get_as<int>(doc, "m_max");
  if (doc.contains("r_cap")) rc.r_cap = get_as<int>(doc, "r_cap");
  if (doc.contains("rank_tol")) rc.rank_tol = get_as<double>(doc, "rank_tol");
  if (doc.contains("tau")) rc.tau = get_as<double>(doc, "tau");
  if (doc.contains("tolerances")) rc.tol = parse_tolerances(doc.at("tolerances"), rc.tol);
  if (rc.m_max < 0) fail(ErrorCode::ConfigError, "m_max must be >= 0");
  if (rc.r_cap < 1) fail(ErrorCode::ConfigError, "r_cap must be >= 1");
  if (!(rc.rank_tol > 0 && rc.rank_tol < 1)) fail(ErrorCode::ConfigError, "rank_tol must lie in (0,1)");
  if (doc.contains("bench")) cfg.bench = parse_bench(doc.at("bench"));
  if (cfg.alpha && cfg.scenery && cfg.alpha->probs.size() != cfg.scenery->alphabet().size()) {
    fail(ErrorCode::ConfigError, "alpha size differs from the scenery alphabet");
  }
  return cfg;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const Scenery& s = need_scenery(cfg);
  if (!cfg.out) fail(ErrorCode::ConfigError, "simulate needs an output path");
  const ObsFormat fmt = cfg.format.value_or(ObsFormat::Jsonl);
  std::vector<Symbol> obs = observe(cfg.q, s, static_cast<std::size_t>(cfg.N), cfg.seed);
  ObservationHeader header{s.alphabet().symbols, cfg.N, cfg.seed};
  write_observations(*cfg.out, header, obs, fmt);
  json summary = {{"N", cfg.N},
                  {"seed", cfg.seed},
                  {"alphabet", s.alphabet().symbols},
                  {"symbols", obs.size()},
                  {"format", fmt == ObsFormat::Jsonl ? "jsonl" : "bin"},
                  {"checksum", checksum(obs)}};
  out << summary.dump() << '\n';
  return kOk;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  const Scenery& s = need_scenery(cfg);
  RandomWalk walk(cfg.q);
  Reconstruction rec = reconstruct_exact(walk, s, recon_config(cfg, cfg.coin_scenery));
  std::vector<SiteLaw> truth = truth_window(s);
  json report = {{"true_bracket", law_list_to_json(canonical_bracket(truth).canonical)},
                 {"reconstruction", reconstruction_to_json(rec)}};
  if (rec.no_signal) {
    report["verdict"] = "all-alpha";
    report["max_abs_error"] = s.empty() ? 0.0 : INFINITY;
  } else {
    report["verdict"] = "reconstructed";
    report["max_abs_error"] = bracket_distance(rec.sites, truth);
    report["palindrome"] = bracket_distance(rec.sites, std::vector<SiteLaw>(rec.sites.rbegin(), rec.sites.rend())) == 0.0;
  }
  report["condition"] = rec.diagnostics.condition;
  report["r"] = rec.diagnostics.r;
  report["residual"] = rec.diagnostics.residual;
  emit(report, cfg, out);
  return kOk;
}

int cmd_reconstruct(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.observations) fail(ErrorCode::ConfigError, "config has no observations path");
  const std::string& path = *cfg.observations;
  ObsFormat fmt = cfg.format.value_or(
      path.size() > 4 && path.compare(path.size() - 4, 4, ".bin") == 0 ? ObsFormat::Binary : ObsFormat::Jsonl);
  ObservationFile file;
  try {
    file = read_observations(path, fmt);
    if (!file.complete()) {
      fail(ErrorCode::InsufficientObservations,
           "header announces " + std::to_string(file.header.n + 1) + " symbols, file holds " +
               std::to_string(file.symbols.size()));
    }
  } catch (const Error& e) {
    throw e.with_stage("read_observations");
  }
  Alphabet alphabet = Alphabet::of(file.header.alphabet);
  const long N = static_cast<long>(file.symbols.size());
  SiteLaw alpha;
  if (cfg.alpha) {
    alpha = *cfg.alpha;
  } else if (cfg.scenery) {
    alpha = cfg.scenery->alpha();
  } else {
    alpha.probs.assign(alphabet.size(), 0.0);
    for (Symbol x : file.symbols) alpha.probs[x] += 1.0;
    for (double& p : alpha.probs) p /= static_cast<double>(N);
  }
  if (alpha.probs.size() != alphabet.size()) fail(ErrorCode::ConfigError, "alpha size differs from the alphabet");
  RandomWalk walk(cfg.q);
  const bool coin_default = alphabet.symbols == Alphabet::coin().symbols;
  Reconstruction rec = reconstruct_observed(walk, file.symbols, N, alphabet, alpha, recon_config(cfg, coin_default));
  json report = reconstruction_to_json(rec);
  report["N"] = N;
  emit(report, cfg, out);
  return rec.no_signal ? kNoSignal : kOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Scenery& s = need_scenery(cfg);
  if (!cfg.bench) fail(ErrorCode::ConfigError, "config has no bench section");
  const BenchSpec& b = *cfg.bench;
  RandomWalk walk(cfg.q);
  const bool coin = cfg.coin_mode.value_or(cfg.coin_scenery);
  const TestFunction phi =
      make_family(coin ? FamilyKind::Identity : cfg.reconstruct.family, s.alphabet(), s.alpha())[0];
  std::vector<double> exact;
  for (const auto& t : b.t_vectors) exact.push_back(exact_p(walk, s, phi, t));

  struct Task {
    long N;
    std::uint64_t seed;
    std::vector<double> est;
  };
  std::vector<Task> tasks;
  for (long N : b.n_grid) {
    for (std::uint64_t seed : b.seeds) tasks.push_back({N, seed, {}});
  }
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SCENERYSCOPE_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap < 1) fail(ErrorCode::ConfigError, "SCENERYSCOPE_THREADS must be >= 1");
      threads = std::min<unsigned>(threads, static_cast<unsigned>(cap));
    } catch (const std::logic_error&) {
      fail(ErrorCode::ConfigError, "SCENERYSCOPE_THREADS is not an integer");
    }
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex fail_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        Task& task = tasks[i];
        std::vector<Symbol> obs = observe(cfg.q, s, static_cast<std::size_t>(task.N - 1), task.seed);
        for (const auto& t : b.t_vectors) task.est.push_back(estimate_p(obs, walk, phi, t, task.N));
      } catch (...) {
        std::lock_guard lock(fail_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  std::ostringstream csv;
  csv.precision(17);
  csv << "N,seed,t,estimate,exact,error\n";
  for (const Task& task : tasks) {
    for (std::size_t j = 0; j < b.t_vectors.size(); ++j) {
      csv << task.N << ',' << task.seed << ",\"" << tuple_key(b.t_vectors[j]) << "\"," << task.est[j] << ','
          << exact[j] << ',' << task.est[j] - exact[j] << '\n';
    }
  }
  json summary = json::array();
  for (long N : b.n_grid) {
    for (std::size_t j = 0; j < b.t_vectors.size(); ++j) {
      double sse = 0;
      for (const Task& task : tasks) {
        if (task.N == N) sse += (task.est[j] - exact[j]) * (task.est[j] - exact[j]);
      }
      summary.push_back({{"N", N}, {"t", tuple_key(b.t_vectors[j])},
                         {"mse", sse / static_cast<double>(b.seeds.size())},
                         {"seeds", b.seeds.size()}});
    }
  }
  if (cfg.out) {
    std::ofstream f(*cfg.out);
    if (!f) fail(ErrorCode::IoError, "cannot open " + *cfg.out);
    f << csv.str();
    out << summary.dump() << '\n';
  } else {
    out << csv.str();
    err << summary.dump() << '\n';
  }
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"sceneryscope: simulate and reconstruct random-walk sceneries"};
  app.require_subcommand(1);
  std::string config_path, out_path, format;
  std::uint64_t seed = 0;
  std::vector<CLI::App*> subs;
  for (const char* name : {"simulate", "oracle", "reconstruct", "bench"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "RNG seed (overrides config)");
    sub->add_option("--out", out_path, "output path (overrides config)");
    sub->add_option("--format", format, "jsonl or bin")->check(CLI::IsMember({"jsonl", "bin"}));
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    int rc = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return rc == 0 ? kOk : kConfigError;
  }
  std::string cmd;
  for (CLI::App* sub : subs) {
    if (sub->parsed()) cmd = sub->get_name();
  }
  try {
    RunConfig cfg = parse_config(read_json_file(config_path));
    CLI::App* sub = app.get_subcommand(cmd);
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--out")) cfg.out = out_path;
    if (sub->count("--format")) cfg.format = parse_format(format);
    if (cmd == "simulate") return cmd_simulate(cfg, out);
    if (cmd == "oracle") return cmd_oracle(cfg, out);
    if (cmd == "reconstruct") return cmd_reconstruct(cfg, out);
    return cmd_bench(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: ConfigError: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace sceneryscope::cli
