// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sgmcmc/errors.hpp"
#include "sgmcmc/experiments.hpp"

namespace sgmcmc {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSynthMse: return "synth-mse";
    case ExperimentKind::kVarianceSpeedup: return "variance-speedup";
    case ExperimentKind::kMultiChain: return "multichain";
    case ExperimentKind::kBlrLoss: return "blr";
  }
  throw ConfigError("unknown experiment kind");
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "synth-mse") return ExperimentKind::kSynthMse;
  if (name == "variance-speedup") return ExperimentKind::kVarianceSpeedup;
  if (name == "multichain") return ExperimentKind::kMultiChain;
  if (name == "blr") return ExperimentKind::kBlrLoss;
  throw ParseError("unknown experiment kind '" + name +
                   "' (expected synth-mse, variance-speedup, multichain or blr)");
}

namespace {

std::string to_string(KernelKind k) {
  return k == KernelKind::kSgld ? "sgld" : "sghmc";
}

KernelKind kernel_from_string(const std::string& s) {
  if (s == "sgld") return KernelKind::kSgld;
  if (s == "sghmc") return KernelKind::kSghmc;
  throw ParseError("unknown kernel '" + s + "' (expected sgld or sghmc)");
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kRoundRobin: return "round-robin";
    case PolicyKind::kRandomReady: return "random-ready";
    case PolicyKind::kEventDriven: return "event-driven";
  }
  throw ConfigError("unknown policy kind");
}

PolicyKind policy_from_string(const std::string& s) {
  if (s == "round-robin") return PolicyKind::kRoundRobin;
  if (s == "random-ready") return PolicyKind::kRandomReady;
  if (s == "event-driven") return PolicyKind::kEventDriven;
  throw ParseError("unknown policy '" + s +
                   "' (expected round-robin, random-ready or event-driven)");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s) {
  if (s.empty()) throw ParseError("expected a real number, got empty value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno != 0) {
    throw ParseError("expected a real number, got '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  if (s.empty() || s[0] == '-') {
    throw ParseError("expected a non-negative integer, got '" + s + "'");
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno != 0) {
    throw ParseError("expected a non-negative integer, got '" + s + "'");
  }
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ParseError("expected true or false, got '" + s + "'");
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& s, F&& one) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(one(trim(item)));
  if (out.empty()) throw ParseError("expected a comma-separated list, got '" + s + "'");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }

template <typename T>
std::string fmt_list(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

// One entry per recognized "section.key"; anything else is an error.
const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.kind",
       [](ExperimentConfig& c, const std::string& v) {
         c.experiment = experiment_kind_from_string(v);
       }},
      {"experiment.replicates",
       [](ExperimentConfig& c, const std::string& v) { c.replicates = parse_u64(v); }},
      {"experiment.base_seed",
       [](ExperimentConfig& c, const std::string& v) { c.base_seed = parse_u64(v); }},
      {"experiment.output",
       [](ExperimentConfig& c, const std::string& v) { c.output = v; }},

      {"model.kind",
       [](ExperimentConfig& c, const std::string& v) {
         if (v != "gaussian" && v != "blr") {
           throw ParseError("unknown model kind '" + v +
                            "' (expected gaussian or blr)");
         }
         c.model_kind = v;
       }},
      {"model.theta_true",
       [](ExperimentConfig& c, const std::string& v) { c.theta_true = parse_double(v); }},
      {"model.n_data",
       [](ExperimentConfig& c, const std::string& v) { c.n_data = parse_u64(v); }},
      {"model.data_seed",
       [](ExperimentConfig& c, const std::string& v) { c.data_seed = parse_u64(v); }},
      {"model.train_path",
       [](ExperimentConfig& c, const std::string& v) { c.train_path = v; }},
      {"model.test_path",
       [](ExperimentConfig& c, const std::string& v) { c.test_path = v; }},
      {"model.n_features",
       [](ExperimentConfig& c, const std::string& v) { c.n_features = parse_u64(v); }},
      {"model.subset",
       [](ExperimentConfig& c, const std::string& v) { c.subset = parse_u64(v); }},

      {"chain.kernel",
       [](ExperimentConfig& c, const std::string& v) { c.kernel = kernel_from_string(v); }},
      {"chain.step_size",
       [](ExperimentConfig& c, const std::string& v) { c.step_size = parse_double(v); }},
      {"chain.step_constant",
       [](ExperimentConfig& c, const std::string& v) { c.step_constant = parse_double(v); }},
      {"chain.friction",
       [](ExperimentConfig& c, const std::string& v) { c.friction = parse_double(v); }},
      {"chain.minibatch",
       [](ExperimentConfig& c, const std::string& v) { c.minibatch = parse_u64(v); }},
      {"chain.iterations",
       [](ExperimentConfig& c, const std::string& v) { c.iterations = parse_u64(v); }},
      {"chain.burn_in",
       [](ExperimentConfig& c, const std::string& v) { c.burn_in = parse_u64(v); }},
      {"chain.taus",
       [](ExperimentConfig& c, const std::string& v) {
         c.taus = parse_list<std::uint64_t>(v, parse_u64);
       }},
      {"chain.staleness_bound",
       [](ExperimentConfig& c, const std::string& v) { c.staleness_bound = parse_u64(v); }},

      {"cluster.workers",
       [](ExperimentConfig& c, const std::string& v) {
         c.workers = parse_list<std::uint64_t>(v, parse_u64);
       }},
      {"cluster.servers",
       [](ExperimentConfig& c, const std::string& v) {
         c.servers = parse_list<std::uint64_t>(v, parse_u64);
       }},
      {"cluster.policy",
       [](ExperimentConfig& c, const std::string& v) { c.policy = policy_from_string(v); }},
      {"cluster.compute_times",
       [](ExperimentConfig& c, const std::string& v) {
         c.compute_times = parse_list<double>(v, parse_double);
       }},
      {"cluster.exponential_durations",
       [](ExperimentConfig& c, const std::string& v) {
         c.exponential_durations = parse_bool(v);
       }},
      {"cluster.real_threads",
       [](ExperimentConfig& c, const std::string& v) { c.real_threads = parse_bool(v); }},

      {"output.checkpoints",
       [](ExperimentConfig& c, const std::string& v) { c.checkpoints = parse_u64(v); }},
      {"output.target_variance",
       [](ExperimentConfig& c, const std::string& v) {
         c.target_variance = parse_double(v);
       }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::string section;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto pos = line.find_first_of("#;"); pos != std::string::npos) {
      line.erase(pos);
    }
    line = trim(line);
    if (line.empty()) continue;

    const std::string at = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(at + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "model" && section != "chain" &&
          section != "cluster" && section != "output") {
        throw ParseError(at + ": unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(at + ": expected 'key = value', got '" + line + "'");
    }
    if (section.empty()) {
      throw ParseError(at + ": key outside of any [section]");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qualified = section + "." + key;
    const auto it = setters().find(qualified);
    if (it == setters().end()) {
      throw ParseError(at + ": unknown key '" + qualified + "'");
    }
    try {
      it->second(cfg, value);
    } catch (const ParseError& e) {
      throw ParseError(at + ": key '" + qualified + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "kind = " << to_string(cfg.experiment) << "\n";
  out << "replicates = " << cfg.replicates << "\n";
  out << "base_seed = " << cfg.base_seed << "\n";
  out << "output = " << cfg.output << "\n";
  out << "[model]\n";
  out << "kind = " << cfg.model_kind << "\n";
  out << "theta_true = " << fmt(cfg.theta_true) << "\n";
  out << "n_data = " << cfg.n_data << "\n";
  out << "data_seed = " << cfg.data_seed << "\n";
  out << "train_path = " << cfg.train_path << "\n";
  out << "test_path = " << cfg.test_path << "\n";
  out << "n_features = " << cfg.n_features << "\n";
  out << "subset = " << cfg.subset << "\n";
  out << "[chain]\n";
  out << "kernel = " << to_string(cfg.kernel) << "\n";
  out << "step_size = " << fmt(cfg.step_size) << "\n";
  out << "step_constant = " << fmt(cfg.step_constant) << "\n";
  out << "friction = " << fmt(cfg.friction) << "\n";
  out << "minibatch = " << cfg.minibatch << "\n";
  out << "iterations = " << cfg.iterations << "\n";
  out << "burn_in = " << cfg.burn_in << "\n";
  out << "taus = " << fmt_list(cfg.taus) << "\n";
  out << "staleness_bound = " << cfg.staleness_bound << "\n";
  out << "[cluster]\n";
  out << "workers = " << fmt_list(cfg.workers) << "\n";
  out << "servers = " << fmt_list(cfg.servers) << "\n";
  out << "policy = " << to_string(cfg.policy) << "\n";
  out << "compute_times = " << fmt_list(cfg.compute_times) << "\n";
  out << "exponential_durations = " << (cfg.exponential_durations ? "true" : "false")
      << "\n";
  out << "real_threads = " << (cfg.real_threads ? "true" : "false") << "\n";
  out << "[output]\n";
  out << "checkpoints = " << cfg.checkpoints << "\n";
  out << "target_variance = " << fmt(cfg.target_variance) << "\n";
  return out.str();
}

std::string config_fingerprint(const ExperimentConfig& cfg) {
  // The destination path is I/O bookkeeping, not experiment identity: two
  // runs writing the same results to different files must share a
  // fingerprint.
  ExperimentConfig keyed = cfg;
  keyed.output.clear();
  const std::string text = serialize_config(keyed);
  std::uint64_t h = 14695981039346656037ull;  // FNV-1a 64
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ExperimentConfig::validate() const {
  if (replicates == 0) throw ConfigError("experiment.replicates must be >= 1");
  if (model_kind != "gaussian" && model_kind != "blr") {
    throw ConfigError("model.kind must be gaussian or blr");
  }

  switch (experiment) {
    case ExperimentKind::kSynthMse:
    case ExperimentKind::kMultiChain:
      if (model_kind != "gaussian") {
        throw ConfigError(to_string(experiment) + " requires model.kind = gaussian");
      }
      break;
    case ExperimentKind::kBlrLoss:
      if (model_kind != "blr") {
        throw ConfigError("blr requires model.kind = blr");
      }
      break;
    case ExperimentKind::kVarianceSpeedup:
      break;  // either model
  }

  if (model_kind == "gaussian") {
    if (n_data == 0) throw ConfigError("model.n_data must be >= 1");
    if (minibatch > n_data) {
      throw ConfigError("chain.minibatch exceeds model.n_data");
    }
  } else {
    if (train_path.empty() != test_path.empty()) {
      throw ConfigError(
          "model.train_path and model.test_path must be set together");
    }
    for (const std::string& p : {train_path, test_path}) {
      if (!p.empty() && !std::filesystem::exists(p)) {
        throw ConfigError("referenced file does not exist: " + p);
      }
    }
    if (subset > 0 && train_path.empty()) {
      throw ConfigError("model.subset requires model.train_path");
    }
  }

  if (step_size < 0.0) throw ConfigError("chain.step_size must be >= 0");
  if (experiment == ExperimentKind::kSynthMse) {
    if (taus.empty()) throw ConfigError("chain.taus must not be empty");
    if (!(step_constant > 0.0) && step_size == 0.0) {
      throw ConfigError("chain.step_constant must be positive");
    }
  } else if (step_size == 0.0) {
    throw ConfigError(to_string(experiment) +
                      " requires an explicit chain.step_size");
  }
  if (kernel == KernelKind::kSghmc && !(friction > 0.0)) {
    throw ConfigError("chain.friction must be positive");
  }
  if (minibatch == 0) throw ConfigError("chain.minibatch must be >= 1");
  if (iterations == 0) throw ConfigError("chain.iterations must be >= 1");
  if (burn_in >= iterations) {
    throw ConfigError("chain.burn_in must be smaller than chain.iterations");
  }

  if (workers.empty()) throw ConfigError("cluster.workers must not be empty");
  for (std::uint64_t w : workers) {
    if (w == 0) throw ConfigError("cluster.workers entries must be >= 1");
  }
  if (servers.empty()) throw ConfigError("cluster.servers must not be empty");
  for (std::uint64_t s : servers) {
    if (s == 0) throw ConfigError("cluster.servers entries must be >= 1");
  }
  for (double t : compute_times) {
    if (!(t > 0.0)) throw ConfigError("cluster.compute_times must be positive");
  }
  if (checkpoints < 2) throw ConfigError("output.checkpoints must be >= 2");
  if (target_variance < 0.0) {
    throw ConfigError("output.target_variance must be >= 0");
  }
}

}  // namespace sgmcmc
