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

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "palqo/error.hpp"
#include "palqo/format.hpp"
#include "palqo/harness.hpp"
#include "palqo/pauli.hpp"
#include "palqo/vqe.hpp"

namespace {

namespace fs = std::filesystem;
using namespace palqo;

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kValidation = 2;
constexpr int kNotConverged = 3;

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  return out;
}

// Accepts a Hamiltonian file or an inline builder such as tfim:4,1,0.5.
Hamiltonian resolve_hamiltonian(const std::string& arg) {
  const auto colon = arg.find(':');
  if (colon != std::string::npos && !fs::exists(arg)) {
    const std::string name = arg.substr(0, colon);
    const std::vector<double> v = split_numbers(arg.substr(colon + 1));
    const auto need = [&](std::size_t k, const char* usage) {
      if (v.size() != k) throw Error(ErrorCode::InvalidArgument, std::string("expected ") + usage);
      if (v[0] < 1 || v[0] != static_cast<double>(static_cast<std::size_t>(v[0])))
        throw Error(ErrorCode::InvalidArgument, "qubit count must be a positive integer");
    };
    if (name == "tfim") {
      need(3, "tfim:n,J,h");
      return build_tfim(static_cast<std::size_t>(v[0]), v[1], v[2]);
    }
    if (name == "heisenberg") {
      need(5, "heisenberg:n,Jx,Jy,Jz,h");
      return build_heisenberg(static_cast<std::size_t>(v[0]), v[1], v[2], v[3], v[4]);
    }
    if (name == "xxz") {
      need(4, "xxz:n,J,Jp,delta");
      return build_xxz(static_cast<std::size_t>(v[0]), v[1], v[2], v[3]);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown builder '" + name + "'");
  }
  return parse_hamiltonian(read_text(arg));
}

fs::path output_root() {
  const char* env = std::getenv("PALQO_OUTPUT_ROOT");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::current_path();
}

std::string optional_text(const nlohmann::json& v) {
  return v.is_null() ? "undefined" : format_double(v.get<double>());
}

int run_config(Method method, const std::string& path) {
  const ExperimentConfig config = load_experiment_config(path);
  const ExperimentResult r = run_experiment(config, method, output_root());
  std::cout << "method " << to_string(method) << "\n";
  std::cout << "exact_energy " << format_double(r.exact_energy) << "\n";
  for (const SeedMetrics& s : r.seeds) {
    std::cout << "seed " << s.run.seed << " termination " << s.run.termination << " delta_e "
              << format_double(s.run.delta_e) << " quantum_iterations " << s.run.quantum_iterations
              << " shot_total " << s.run.shot_total << " speedup "
              << (s.speedup ? format_double(*s.speedup) : "undefined") << "\n";
  }
  std::cout << "speedup_median " << (r.speedup.median ? format_double(*r.speedup.median) : "undefined") << " ("
            << r.speedup.defined << "/" << r.speedup.total << " defined)\n";
  std::cout << "output " << r.output_dir.string() << "\n";
  if (!r.all_converged()) {
    std::cerr << "warning: not every seed reached delta_e <= " << format_double(config.vqe.accuracy) << "\n";
    return kNotConverged;
  }
  return kOk;
}

int compare(const std::vector<std::string>& files) {
  std::printf("%-40s %-8s %6s %8s %14s %14s %14s %14s\n", "metrics", "method", "seeds", "defined", "alpha_median",
              "alpha_min", "alpha_max", "delta_e_median");
  for (const std::string& f : files) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text(f));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Io, f + ": " + e.what());
    }
    try {
      std::vector<double> gaps;
      for (const auto& s : j.at("seeds")) gaps.push_back(s.at("delta_e").get<double>());
      if (gaps.empty()) throw Error(ErrorCode::Io, f + ": no seeds");
      std::sort(gaps.begin(), gaps.end());
      const std::size_t m = gaps.size() / 2;
      const double med = gaps.size() % 2 == 1 ? gaps[m] : 0.5 * (gaps[m - 1] + gaps[m]);
      const auto& sp = j.at("speedup");
      std::printf("%-40s %-8s %6zu %8zu %14s %14s %14s %14s\n", f.c_str(),
                  j.at("method").get<std::string>().c_str(), gaps.size(), sp.at("defined").get<std::size_t>(),
                  optional_text(sp.at("median")).c_str(), optional_text(sp.at("min")).c_str(),
                  optional_text(sp.at("max")).c_str(), format_double(med).c_str());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Io, f + ": not a metrics file (" + e.what() + ")");
    }
  }
  return kOk;
}

bool is_validation(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonFinite:
    case ErrorCode::Divergence:
    case ErrorCode::Overflow:
      return false;
    default:
      return true;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-flow accelerated VQE experiments"};
  app.require_subcommand(1);

  std::string hamiltonian;
  auto* exact = app.add_subcommand("exact", "Print the exact ground energy of a Hamiltonian");
  exact->add_option("hamiltonian", hamiltonian, "Hamiltonian file or builder (tfim:n,J,h | heisenberg:n,Jx,Jy,Jz,h | "
                                                "xxz:n,J,Jp,delta)")
      ->required();

  std::string config;
  auto* vqe = app.add_subcommand("vqe", "Run plain gradient-descent VQE from a config");
  auto* palqo = app.add_subcommand("palqo", "Run network-accelerated VQE from a config");
  auto* dmd = app.add_subcommand("dmd", "Run the DMD-accelerated baseline from a config");
  for (auto* sub : {vqe, palqo, dmd}) sub->add_option("config", config, "Experiment YAML")->required();

  std::uint64_t p = 0, m = 0, iters = 0;
  double eps = 0.0;
  auto* shots = app.add_subcommand("shots", "Print iters * ceil(2 p M / eps^2)");
  shots->add_option("p", p, "Parameter count")->required();
  shots->add_option("M", m, "Pauli term count")->required();
  shots->add_option("epsilon", eps, "Target accuracy")->required();
  shots->add_option("iters", iters, "Iterations")->required();

  std::vector<std::string> metrics;
  auto* cmp = app.add_subcommand("compare", "Tabulate speedup and energy gap from metrics files");
  cmp->add_option("metrics", metrics, "metrics.json files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*exact) {
      std::cout << format_double(exact_ground_energy(resolve_hamiltonian(hamiltonian))) << "\n";
      return kOk;
    }
    if (*vqe) return run_config(Method::Vanilla, config);
    if (*palqo) return run_config(Method::Palqo, config);
    if (*dmd) return run_config(Method::Dmd, config);
    if (*shots) {
      std::cout << shot_cost(ShotModel{m, eps, p}, iters) << "\n";
      return kOk;
    }
    if (*cmp) return compare(metrics);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation(e.code()) ? kValidation : kRuntimeFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}
