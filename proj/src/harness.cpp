// Copyright 2026 The PALQO Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "palqo/harness.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "palqo/error.hpp"
#include "palqo/format.hpp"
#include "palqo/trajectory_io.hpp"

namespace palqo {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Vanilla: return "vanilla";
    case Method::Palqo: return "palqo";
    case Method::Dmd: return "dmd";
  }
  return "vanilla";
}

Method parse_method(std::string_view text) {
  if (text == "vanilla") return Method::Vanilla;
  if (text == "palqo") return Method::Palqo;
  if (text == "dmd") return Method::Dmd;
  throw Error(ErrorCode::Config, "unknown method '" + std::string(text) + "' (expected vanilla, palqo or dmd)");
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out.flush()) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

class ConfigReader {
 public:
  ConfigReader(std::string origin, fs::path base) : origin_(std::move(origin)), base_(std::move(base)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const YAML::Mark m = at.Mark();
    const std::string where = m.is_null() ? origin_ : origin_ + ":" + std::to_string(m.line + 1);
    throw Error(ErrorCode::Config, where + ": " + msg);
  }

  // Rejects unknown and duplicate keys, then visits each entry.
  template <typename Visit>
  void each(const YAML::Node& map, std::string_view section, std::initializer_list<std::string_view> allowed,
            Visit&& visit) const {
    if (!map.IsMap()) fail(map, "section '" + std::string(section) + "' must be a mapping");
    std::set<std::string> seen;
    for (const auto& kv : map) {
      const YAML::Node& key = kv.first;
      if (!key.IsScalar()) fail(key, "keys must be scalars");
      const std::string& k = key.Scalar();
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        fail(key, "unknown key '" + k + "' in " + std::string(section));
      if (!seen.insert(k).second) fail(key, "duplicate key '" + k + "' in " + std::string(section));
      visit(k, kv.second);
    }
  }

  std::string text(const YAML::Node& n) const {
    if (!n.IsScalar()) fail(n, "expected a scalar");
    return n.Scalar();
  }

  double real(const YAML::Node& n) const {
    const std::string s = text(n);
    try {
      return parse_double(s);
    } catch (const Error&) {
      fail(n, "expected a number, got '" + s + "'");
    }
  }

  std::uint64_t count(const YAML::Node& n) const {
    const std::string s = text(n);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      fail(n, "expected a non-negative integer, got '" + s + "'");
    return v;
  }

  std::size_t size(const YAML::Node& n) const { return static_cast<std::size_t>(count(n)); }

  double positive(const YAML::Node& n) const {
    const double v = real(n);
    if (!(v > 0.0)) fail(n, "expected a positive number");
    return v;
  }

  bool flag(const YAML::Node& n) const {
    const std::string s = text(n);
    if (s == "true") return true;
    if (s == "false") return false;
    fail(n, "expected true or false, got '" + s + "'");
  }

  fs::path existing_file(const YAML::Node& n) const {
    fs::path p = text(n);
    if (p.is_relative() && !base_.empty()) p = base_ / p;
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) fail(n, "file '" + p.string() + "' does not exist");
    return p;
  }

  template <typename F>
  void checked(const YAML::Node& at, F&& validate) const {
    try {
      validate();
    } catch (const Error& e) {
      fail(at, e.what());
    }
  }

 private:
  std::string origin_;
  fs::path base_;
};

void read_hamiltonian(const ConfigReader& r, const YAML::Node& node, HamiltonianConfig& h) {
  bool has_builder = false;
  bool has_file = false;
  bool has_n = false;
  r.each(node, "hamiltonian", {"builder", "file", "n", "j", "h", "jx", "jy", "jz", "jp", "delta"},
         [&](const std::string& k, const YAML::Node& v) {
           if (k == "builder") {
             h.builder = r.text(v);
             if (h.builder != "tfim" && h.builder != "heisenberg" && h.builder != "xxz")
               r.fail(v, "unknown builder '" + h.builder + "' (expected tfim, heisenberg or xxz)");
             has_builder = true;
           } else if (k == "file") {
             h.file = r.existing_file(v);
             has_file = true;
           } else if (k == "n") {
             h.n = r.size(v);
             if (h.n < 1 || h.n > kExactMaxQubits)
               r.fail(v, "n must be in [1, " + std::to_string(kExactMaxQubits) + "]");
             has_n = true;
           } else if (k == "j") {
             h.j = r.real(v);
           } else if (k == "h") {
             h.h = r.real(v);
           } else if (k == "jx") {
             h.jx = r.real(v);
           } else if (k == "jy") {
             h.jy = r.real(v);
           } else if (k == "jz") {
             h.jz = r.real(v);
           } else if (k == "jp") {
             h.jp = r.real(v);
           } else {
             h.delta = r.real(v);
           }
         });
  if (has_builder == has_file) r.fail(node, "hamiltonian needs exactly one of 'builder' or 'file'");
  if (has_file) {
    h.builder = "file";
    if (has_n) r.fail(node, "'n' is taken from the Hamiltonian file");
  } else if (!has_n) {
    r.fail(node, "builder '" + h.builder + "' needs 'n'");
  }
  r.checked(node, [&] {
    const Hamiltonian built = h.build();
    if (built.num_qubits() > kExactMaxQubits)
      throw Error(ErrorCode::TooLarge, "exact reference limited to " + std::to_string(kExactMaxQubits) + " qubits");
  });
}

void read_ansatz(const ConfigReader& r, const YAML::Node& node, AnsatzConfig& a) {
  bool has_file = false;
  bool has_layers = false;
  r.each(node, "ansatz", {"type", "layers", "file"}, [&](const std::string& k, const YAML::Node& v) {
    if (k == "type") {
      a.type = r.text(v);
      if (a.type != "hea" && a.type != "hva" && a.type != "generators")
        r.fail(v, "unknown ansatz type '" + a.type + "' (expected hea, hva or generators)");
    } else if (k == "layers") {
      a.layers = r.size(v);
      if (a.layers < 1) r.fail(v, "layers must be at least 1");
      has_layers = true;
    } else {
      a.file = r.existing_file(v);
      has_file = true;
    }
  });
  if ((a.type == "generators") != has_file) r.fail(node, "'file' is required for, and only for, type generators");
  if (a.type == "generators" && has_layers) r.fail(node, "'layers' does not apply to type generators");
}

void read_noise(const ConfigReader& r, const YAML::Node& node, NoiseModel& noise) {
  r.each(node, "noise", {"shots_per_term", "depolarizing"}, [&](const std::string& k, const YAML::Node& v) {
    if (k == "shots_per_term") {
      noise.shots_per_term = r.count(v);
      if (*noise.shots_per_term < 1) r.fail(v, "shots_per_term must be at least 1");
    } else {
      noise.depolarizing_prob = r.real(v);
      if (!(noise.depolarizing_prob >= 0.0 && noise.depolarizing_prob <= 1.0))
        r.fail(v, "depolarizing must lie in [0, 1]");
    }
  });
}

void read_vqe(const ConfigReader& r, const YAML::Node& node, VqeConfig& c) {
  r.each(node, "vqe", {"eta", "max_iters", "varsigma", "accuracy", "shot_epsilon", "noise"},
         [&](const std::string& k, const YAML::Node& v) {
           if (k == "eta") c.eta = r.positive(v);
           else if (k == "max_iters") c.max_iters = r.size(v);
           else if (k == "varsigma") c.varsigma = r.positive(v);
           else if (k == "accuracy") c.accuracy = r.positive(v);
           else if (k == "shot_epsilon") c.shot_epsilon = r.positive(v);
           else {
             NoiseModel noise;
             read_noise(r, v, noise);
             if (!noise.is_ideal()) c.noise = noise;
           }
         });
  r.checked(node, [&] { c.validate(); });
}

void read_pinn(const ConfigReader& r, const YAML::Node& node, PinnConfig& c) {
  r.each(node, "pinn",
         {"width", "width_factor", "hidden_layers", "lambda_data", "lambda_p1", "lambda_p2", "epochs", "lr_initial",
          "lr_final", "train_seed", "p2_enabled", "p1_per_component", "init"},
         [&](const std::string& k, const YAML::Node& v) {
           if (k == "width") c.width = r.size(v);
           else if (k == "width_factor") c.width_factor = r.size(v);
           else if (k == "hidden_layers") c.hidden_layers = r.size(v);
           else if (k == "lambda_data") c.lambda_data = r.real(v);
           else if (k == "lambda_p1") c.lambda_p1 = r.real(v);
           else if (k == "lambda_p2") c.lambda_p2 = r.real(v);
           else if (k == "epochs") c.epochs = r.size(v);
           else if (k == "lr_initial") c.lr_initial = r.real(v);
           else if (k == "lr_final") c.lr_final = r.real(v);
           else if (k == "train_seed") c.train_seed = r.count(v);
           else if (k == "p2_enabled") c.p2_enabled = r.flag(v);
           else if (k == "p1_per_component") c.p1_per_component = r.flag(v);
           else {
             try {
               c.init = parse_init_scheme(r.text(v));
             } catch (const Error& e) {
               r.fail(v, e.what());
             }
           }
         });
  r.checked(node, [&] { c.validate(); });
}

void read_rollout(const ConfigReader& r, const YAML::Node& node, RolloutConfig& c) {
  r.each(node, "rollout", {"max_steps", "delta_tol"}, [&](const std::string& k, const YAML::Node& v) {
    if (k == "max_steps") c.max_steps = r.size(v);
    else c.delta_tol = r.real(v);
  });
  r.checked(node, [&] { c.validate(); });
}

void read_loop_keys(const ConfigReader& r, const std::string& k, const YAML::Node& v, CycleLoopConfig& loop) {
  if (k == "tau") loop.tau = r.size(v);
  else if (k == "tau_first") loop.tau_first = r.size(v);
  else if (k == "max_cycles") loop.max_cycles = r.size(v);
}

void read_palqo(const ConfigReader& r, const YAML::Node& node, PalqoConfig& c) {
  r.each(node, "palqo", {"tau", "tau_first", "max_cycles", "reset_network", "rollout"},
         [&](const std::string& k, const YAML::Node& v) {
           if (k == "reset_network") c.reset_network_each_cycle = r.flag(v);
           else if (k == "rollout") read_rollout(r, v, c.rollout);
           else read_loop_keys(r, k, v, c.loop);
         });
  r.checked(node, [&] { c.loop.validate(); });
}

void read_dmd(const ConfigReader& r, const YAML::Node& node, DmdConfig& c) {
  r.each(node, "dmd", {"tau", "tau_first", "max_cycles", "max_predict_steps", "rcond", "rank"},
         [&](const std::string& k, const YAML::Node& v) {
           if (k == "max_predict_steps") c.max_predict_steps = r.size(v);
           else if (k == "rcond") c.fit.rcond = r.real(v);
           else if (k == "rank") c.fit.rank = r.size(v);
           else read_loop_keys(r, k, v, c.loop);
         });
  r.checked(node, [&] { c.validate(); });
}

void read_baseline(const ConfigReader& r, const YAML::Node& node, ExperimentConfig& c) {
  r.each(node, "baseline", {"enabled", "max_iters"}, [&](const std::string& k, const YAML::Node& v) {
    if (k == "enabled") c.baseline = r.flag(v);
    else c.baseline_max_iters = r.size(v);
  });
}

}  // namespace

Hamiltonian HamiltonianConfig::build() const {
  if (builder == "tfim") return build_tfim(n, j, h);
  if (builder == "heisenberg") return build_heisenberg(n, jx, jy, jz, h);
  if (builder == "xxz") return build_xxz(n, j, jp, delta);
  if (builder == "file") return parse_hamiltonian(read_file(file));
  throw Error(ErrorCode::Config, "unknown Hamiltonian builder '" + builder + "'");
}

std::string HamiltonianConfig::describe() const {
  const auto num = [](double v) { return format_double(v); };
  if (builder == "tfim") return "tfim(n=" + std::to_string(n) + ",j=" + num(j) + ",h=" + num(h) + ")";
  if (builder == "heisenberg")
    return "heisenberg(n=" + std::to_string(n) + ",jx=" + num(jx) + ",jy=" + num(jy) + ",jz=" + num(jz) +
           ",h=" + num(h) + ")";
  if (builder == "xxz")
    return "xxz(n=" + std::to_string(n) + ",j=" + num(j) + ",jp=" + num(jp) + ",delta=" + num(delta) + ")";
  return "file(" + file.filename().string() + ")";
}

AnsatzSpec AnsatzConfig::build(const Hamiltonian& h) const {
  if (type == "hea") return AnsatzSpec::hea(h.num_qubits(), layers);
  if (type == "hva") return AnsatzSpec(HvaSpec{layers, hva_generators(h)});
  if (type == "generators") return load_generators(read_file(file));
  throw Error(ErrorCode::Config, "unknown ansatz type '" + type + "'");
}

void ExperimentConfig::validate(Method m) const {
  if (seeds.empty()) throw Error(ErrorCode::Config, "seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw Error(ErrorCode::Config, "seeds must be distinct");
  if (name.empty() && output_dir.empty()) throw Error(ErrorCode::Config, "either name or output_dir is required");
  if (output_dir.is_absolute()) throw Error(ErrorCode::Config, "output_dir must be relative to the output root");
  vqe.validate();
  if (m == Method::Palqo) {
    if (!has_palqo_section) throw Error(ErrorCode::Config, "method palqo needs a 'palqo' section");
    palqo.validate();
  }
  if (m == Method::Dmd) {
    if (!has_dmd_section) throw Error(ErrorCode::Config, "method dmd needs a 'dmd' section");
    dmd.validate();
  }
  if (hamiltonian.builder == "file" && !fs::is_regular_file(hamiltonian.file))
    throw Error(ErrorCode::Config, "Hamiltonian file '" + hamiltonian.file.string() + "' does not exist");
  if (ansatz.type == "generators" && !fs::is_regular_file(ansatz.file))
    throw Error(ErrorCode::Config, "generator file '" + ansatz.file.string() + "' does not exist");
}

ExperimentConfig parse_experiment_config(std::string_view yaml, const fs::path& base_dir, std::string_view origin) {
  const ConfigReader r{std::string(origin), base_dir};
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Config, std::string(origin) + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw Error(ErrorCode::Config, std::string(origin) + ": top level must be a mapping");

  ExperimentConfig c;
  c.source_text = std::string(yaml);
  bool has_h = false;
  bool has_ansatz = false;
  YAML::Node pinn_node;
  r.each(root, "config",
         {"name", "method", "hamiltonian", "ansatz", "vqe", "pinn", "palqo", "dmd", "baseline", "seeds",
          "output_dir"},
         [&](const std::string& k, const YAML::Node& v) {
           if (k == "name") {
             c.name = r.text(v);
           } else if (k == "method") {
             try {
               c.method = parse_method(r.text(v));
             } catch (const Error& e) {
               r.fail(v, e.what());
             }
           } else if (k == "hamiltonian") {
             read_hamiltonian(r, v, c.hamiltonian);
             has_h = true;
           } else if (k == "ansatz") {
             read_ansatz(r, v, c.ansatz);
             has_ansatz = true;
           } else if (k == "vqe") {
             read_vqe(r, v, c.vqe);
           } else if (k == "pinn") {
             read_pinn(r, v, c.palqo.pinn);
           } else if (k == "palqo") {
             read_palqo(r, v, c.palqo);
             c.has_palqo_section = true;
           } else if (k == "dmd") {
             read_dmd(r, v, c.dmd);
             c.has_dmd_section = true;
           } else if (k == "baseline") {
             read_baseline(r, v, c);
           } else if (k == "seeds") {
             if (!v.IsSequence() || v.size() == 0) r.fail(v, "seeds must be a non-empty list");
             c.seeds.clear();
             for (const auto& s : v) {
               const std::uint64_t seed = r.count(s);
               if (std::find(c.seeds.begin(), c.seeds.end(), seed) != c.seeds.end())
                 r.fail(s, "duplicate seed " + std::to_string(seed));
               c.seeds.push_back(seed);
             }
           } else {
             c.output_dir = r.text(v);
             if (c.output_dir.is_absolute()) r.fail(v, "output_dir must be relative to the output root");
           }
         });
  if (!has_h) r.fail(root, "missing 'hamiltonian' section");
  if (!has_ansatz) r.fail(root, "missing 'ansatz' section");
  if (c.name.empty() && c.output_dir.empty()) r.fail(root, "either 'name' or 'output_dir' is required");
  if (c.method == Method::Palqo && !c.has_palqo_section) r.fail(root, "method palqo needs a 'palqo' section");
  if (c.method == Method::Dmd && !c.has_dmd_section) r.fail(root, "method dmd needs a 'dmd' section");
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& file) {
  return parse_experiment_config(read_file(file), file.parent_path(), file.string());
}

double compute_delta_e(double e_hat, double e_target) {
  if (!std::isfinite(e_hat) || !std::isfinite(e_target))
    throw Error(ErrorCode::NonFinite, "energy difference needs finite energies");
  return std::abs(e_hat - e_target);
}

std::optional<double> compute_speedup(std::optional<std::uint64_t> baseline_iters,
                                      std::optional<std::uint64_t> method_iters) {
  if (!baseline_iters || !method_iters || *baseline_iters == 0 || *method_iters == 0) return std::nullopt;
  return static_cast<double>(*baseline_iters) / static_cast<double>(*method_iters);
}

namespace {

// Quantum cost of each record: 1 for gradient steps and charged evaluations.
std::vector<std::uint64_t> record_charges(std::span<const TrajectoryRecord> records, std::uint64_t* grads,
                                          std::uint64_t* evals) {
  std::vector<std::uint64_t> charge(records.size(), 0);
  std::uint64_t g = 0;
  std::uint64_t e = 0;
  const TrajectoryRecord* last_quantum = nullptr;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TrajectoryRecord& r = records[i];
    switch (r.source) {
      case RecordSource::Quantum:
        if (i > 0) charge[i] = 1, ++g;
        last_quantum = &r;
        break;
      case RecordSource::Predicted:
        charge[i] = 1, ++e;
        break;
      case RecordSource::Restart: {
        const bool repeat = last_quantum != nullptr && last_quantum->theta.size() == r.theta.size() &&
                            (last_quantum->theta.array() == r.theta.array()).all();
        if (!repeat) charge[i] = 1, ++e;
        break;
      }
    }
  }
  if (grads != nullptr) *grads = g;
  if (evals != nullptr) *evals = e;
  return charge;
}

}  // namespace

std::uint64_t count_quantum_iterations(std::span<const TrajectoryRecord> records) {
  std::uint64_t g = 0;
  std::uint64_t e = 0;
  record_charges(records, &g, &e);
  return g + e;
}

std::optional<std::uint64_t> iterations_to_accuracy(std::span<const TrajectoryRecord> records, double exact,
                                                    double accuracy) {
  const std::vector<std::uint64_t> charge = record_charges(records, nullptr, nullptr);
  std::uint64_t cum = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    cum += charge[i];
    if (compute_delta_e(records[i].energy, exact) > accuracy) continue;
    for (std::size_t j = i + 1; records[i].source != RecordSource::Quantum && j < records.size() &&
                                records[j].source != RecordSource::Quantum;
         ++j)
      cum += charge[j];
    return cum;
  }
  return std::nullopt;
}

RunSummary summarize_trajectory(std::span<const TrajectoryRecord> records, double exact, double accuracy,
                                const ShotModel& shots) {
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "cannot summarize an empty trajectory");
  RunSummary s;
  record_charges(records, &s.gradient_steps, &s.energy_evaluations);
  s.quantum_iterations = s.gradient_steps + s.energy_evaluations;
  s.shot_total = shot_cost(shots, s.gradient_steps) + energy_shot_cost(shots, s.energy_evaluations);
  s.final_energy = records.back().energy;
  s.delta_e = compute_delta_e(s.final_energy, exact);
  s.converged = s.delta_e <= accuracy;
  s.iters_to_accuracy = iterations_to_accuracy(records, exact, accuracy);
  return s;
}

SpeedupStats aggregate_speedups(const std::vector<std::optional<double>>& values) {
  SpeedupStats st;
  st.total = values.size();
  std::vector<double> v;
  for (const auto& x : values)
    if (x) v.push_back(*x);
  st.defined = v.size();
  if (v.empty()) return st;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  st.median = v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  st.min = v.front();
  st.max = v.back();
  return st;
}

bool ExperimentResult::all_converged() const {
  return std::all_of(seeds.begin(), seeds.end(), [](const SeedMetrics& s) { return s.run.converged; });
}

namespace {

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json optional_json(const std::optional<std::uint64_t>& v) { return v ? Json(*v) : Json(nullptr); }

Json summary_json(const RunSummary& s) {
  Json j;
  j["termination"] = s.termination;
  j["converged"] = s.converged;
  j["final_energy"] = s.final_energy;
  j["delta_e"] = s.delta_e;
  j["quantum_iterations"] = s.quantum_iterations;
  j["gradient_steps"] = s.gradient_steps;
  j["energy_evaluations"] = s.energy_evaluations;
  j["shot_total"] = s.shot_total;
  j["iters_to_accuracy"] = optional_json(s.iters_to_accuracy);
  return j;
}

struct SeedRun {
  SeedMetrics metrics;
  std::vector<TrajectoryRecord> records;
  std::vector<TrajectoryRecord> baseline_records;
  double baseline_seconds = 0.0;
};

std::string plot_rows(std::string_view method, std::uint64_t seed, std::span<const TrajectoryRecord> records,
                      double exact) {
  const std::vector<std::uint64_t> charge = record_charges(records, nullptr, nullptr);
  std::string out;
  std::uint64_t cum = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    cum += charge[i];
    out += std::string(method) + "," + std::to_string(seed) + "," + std::to_string(cum) + "," +
           format_double(compute_delta_e(records[i].energy, exact)) + "\n";
  }
  return out;
}

}  // namespace

std::string metrics_json(const ExperimentConfig& config, const ExperimentResult& result) {
  Json j;
  j["name"] = config.name;
  j["method"] = std::string(to_string(result.method));
  j["hamiltonian"] = config.hamiltonian.describe();
  j["ansatz"] = config.ansatz.type;
  j["exact_energy"] = result.exact_energy;
  j["accuracy"] = config.vqe.accuracy;
  const bool has_baseline = result.method == Method::Vanilla || config.baseline;
  j["baseline"] = has_baseline ? Json("vanilla") : Json(nullptr);
  j["converged"] = result.all_converged();
  Json sp;
  sp["defined"] = result.speedup.defined;
  sp["seeds"] = result.speedup.total;
  sp["median"] = optional_json(result.speedup.median);
  sp["min"] = optional_json(result.speedup.min);
  sp["max"] = optional_json(result.speedup.max);
  j["speedup"] = sp;
  Json seeds = Json::array();
  for (const SeedMetrics& s : result.seeds) {
    Json e;
    e["seed"] = s.run.seed;
    e["cycles"] = s.cycles;
    const Json run = summary_json(s.run);
    for (const auto& [k, v] : run.items()) e[k] = v;
    e["method_iters"] = optional_json(s.run.iters_to_accuracy);
    e["baseline_iters"] = s.baseline ? optional_json(s.baseline->iters_to_accuracy) : Json(nullptr);
    e["speedup"] = optional_json(s.speedup);
    e["baseline_run"] = s.baseline ? summary_json(*s.baseline) : Json(nullptr);
    seeds.push_back(std::move(e));
  }
  j["seeds"] = std::move(seeds);
  return j.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::optional<Method> method,
                                const fs::path& output_root) {
  if (method && config.method && *method != *config.method)
    throw Error(ErrorCode::Config, "config declares method " + std::string(to_string(*config.method)) +
                                       " but " + std::string(to_string(*method)) + " was requested");
  if (!method) method = config.method;
  if (!method) throw Error(ErrorCode::Config, "no method given");
  config.validate(*method);

  const Hamiltonian h = config.hamiltonian.build();
  const AnsatzSpec ansatz = config.ansatz.build(h);
  const double exact = exact_ground_energy(h);
  const VqeModel model(h, ansatz, config.vqe.noise);
  const TargetStop target{exact, config.vqe.accuracy};
  const ShotModel shots{model.term_count(), config.vqe.shot_epsilon, model.param_count()};
  const bool run_baseline = *method != Method::Vanilla && config.baseline;

  ExperimentResult result;
  result.method = *method;
  result.exact_energy = exact;
  result.output_dir = output_root / (config.output_dir.empty() ? fs::path(config.name) : config.output_dir);

  using Clock = std::chrono::steady_clock;
  const auto seconds_since = [](Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  std::vector<SeedRun> runs;
  for (const std::uint64_t seed : config.seeds) {
    SeedRun run;
    VqeConfig vqe = config.vqe;
    vqe.init_seed = seed;

    const auto t0 = Clock::now();
    Trajectory traj;
    std::string termination;
    if (*method == Method::Vanilla) {
      VqeResult r = run_vqe(model, vqe, target);
      termination = std::string(to_string(r.termination));
      traj = std::move(r.trajectory);
    } else {
      CycleLoopResult r;
      if (*method == Method::Palqo) {
        PalqoConfig pc = config.palqo;
        pc.loop.vqe = vqe;
        r = run_palqo(model, pc, target);
      } else {
        DmdConfig dc = config.dmd;
        dc.loop.vqe = vqe;
        r = run_dmd(model, dc, target);
      }
      termination = std::string(to_string(r.termination));
      run.metrics.cycles = r.cycles.size();
      traj = std::move(r.trajectory);
    }
    run.metrics.wall_seconds = seconds_since(t0);
    run.records = traj.records();

    RunSummary& s = run.metrics.run;
    s = summarize_trajectory(run.records, exact, config.vqe.accuracy, shots);
    s.seed = seed;
    s.termination = termination;
    if (s.quantum_iterations != traj.quantum_iterations() || s.shot_total != traj.shot_total())
      throw std::logic_error("persisted records do not account for every charged quantum iteration");

    if (*method == Method::Vanilla) {
      run.metrics.baseline = s;
    } else if (run_baseline) {
      VqeConfig bv = vqe;
      if (config.baseline_max_iters) bv.max_iters = *config.baseline_max_iters;
      const auto tb = Clock::now();
      VqeResult b = run_vqe(model, bv, target);
      run.baseline_seconds = seconds_since(tb);
      run.baseline_records = b.trajectory.records();
      RunSummary bs = summarize_trajectory(run.baseline_records, exact, config.vqe.accuracy, shots);
      bs.seed = seed;
      bs.termination = std::string(to_string(b.termination));
      run.metrics.baseline = bs;
    }
    if (run.metrics.baseline)
      run.metrics.speedup = compute_speedup(run.metrics.baseline->iters_to_accuracy, s.iters_to_accuracy);
    runs.push_back(std::move(run));
  }

  std::vector<std::optional<double>> speedups;
  for (const SeedRun& r : runs) {
    result.seeds.push_back(r.metrics);
    speedups.push_back(r.metrics.speedup);
  }
  result.speedup = aggregate_speedups(speedups);

  // Everything is computed before the first write.
  const bool with_source = *method != Method::Vanilla;
  fs::create_directories(result.output_dir);
  std::string plot = "method,seed,iteration,delta_e\n";
  Json timing;
  Json timing_seeds = Json::array();
  double total = 0.0;
  for (const SeedRun& r : runs) {
    const std::uint64_t seed = r.metrics.run.seed;
    const fs::path dir = result.output_dir / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    write_file(dir / "trajectory.csv", trajectory_to_csv(r.records, with_source));
    plot += plot_rows(to_string(*method), seed, r.records, exact);
    if (!r.baseline_records.empty()) {
      write_file(dir / "baseline.csv", trajectory_to_csv(r.baseline_records, false));
      plot += plot_rows("vanilla", seed, r.baseline_records, exact);
    }
    Json t;
    t["seed"] = seed;
    t["wall_seconds"] = r.metrics.wall_seconds;
    t["baseline_wall_seconds"] = r.baseline_seconds;
    timing_seeds.push_back(std::move(t));
    total += r.metrics.wall_seconds + r.baseline_seconds;
  }
  timing["seeds"] = std::move(timing_seeds);
  timing["total_seconds"] = total;
  write_file(result.output_dir / "metrics.json", metrics_json(config, result));
  write_file(result.output_dir / "timing.json", timing.dump(2) + "\n");
  write_file(result.output_dir / "plot.csv", plot);
  write_file(result.output_dir / "config.yaml", config.source_text);
  return result;
}

}  // namespace palqo
