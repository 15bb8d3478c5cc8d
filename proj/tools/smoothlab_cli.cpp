// Batch driver: simulate, spectrum, support, diagnose, check.
//
// Exit codes: 0 ok, 1 usage, 2 bad input, 3 computation failed, 4 budget.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "smoothlab/smoothlab.h"

namespace {

using nlohmann::json;

struct Failure {
  int code;
};

int exit_code(sl_status s) {
  switch (s) {
    case SL_OK: return 0;
    case SL_ERR_INVALID_ARGUMENT:
    case SL_ERR_INVALID_MODEL:
    case SL_ERR_IO:
    case SL_ERR_NEGATIVE_INPUT:
    case SL_ERR_OUT_OF_RANGE:
      return 2;
    case SL_ERR_BUDGET_EXCEEDED:
    case SL_ERR_SUPERCRITICAL_BLOWUP:
      return 4;
    default:
      return 3;
  }
}

void check(sl_status s) {
  if (s == SL_OK) return;
  std::cerr << "error [" << sl_status_name(s) << "]: " << sl_last_error() << "\n";
  throw Failure{exit_code(s)};
}

struct ModelDel {
  void operator()(sl_model* m) const { sl_model_free(m); }
};
struct PoolDel {
  void operator()(sl_pool* p) const { sl_pool_free(p); }
};
struct StrDel {
  void operator()(char* s) const { sl_string_free(s); }
};
using Model = std::unique_ptr<sl_model, ModelDel>;
using Pool = std::unique_ptr<sl_pool, PoolDel>;
using Str = std::unique_ptr<char, StrDel>;

Model load_model(const std::string& path) {
  sl_model* m = nullptr;
  check(sl_model_load(path.c_str(), &m));
  return Model(m);
}

Pool load_pool(const std::string& path) {
  sl_pool* p = nullptr;
  check(sl_pool_load_csv(path.c_str(), &p));
  return Pool(p);
}

void write_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error [Io]: cannot write " << path << "\n";
    throw Failure{2};
  }
}

struct Manifest {
  std::string model_path;
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> outputs;

  void write(const std::string& path) const {
    json doc;
    doc["model_path"] = model_path;
    doc["command"] = command;
    doc["seed"] = seed;
    doc["parameters"] = parameters;
    doc["output_paths"] = outputs;
    doc["tool_version"] = sl_version();
    write_file(path, doc.dump(2) + "\n");
  }
};

std::string join(const std::vector<double>& v) {
  std::ostringstream s;
  s.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  return s.str();
}

// Output either to PREFIX<suffix> or, with no prefix, to stdout.
void emit(const std::string& prefix, const std::string& suffix, const char* text, Manifest* m) {
  if (prefix.empty()) {
    std::cout << text;
    return;
  }
  write_file(prefix + suffix, text);
  if (m) m->outputs.push_back(prefix + suffix);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smoothlab: fixed points of the multivariate smoothing transform"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sl_version()));
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker cap (0 = all cores)");

  std::string model_path, pool_path, out;
  std::uint64_t seed = 0;

  // simulate
  auto* sim = app.add_subcommand("simulate", "population dynamics; writes a pool CSV and a manifest");
  std::size_t k = 100000;
  unsigned rounds = 50;
  std::string method = "pool";
  sim->add_option("--model", model_path, "model JSON")->required();
  sim->add_option("-K,--K", k, "pool size")->capture_default_str();
  sim->add_option("--rounds", rounds, "iterations of the smoothing map")->capture_default_str();
  sim->add_option("--seed", seed, "RNG seed")->required();
  sim->add_option("--method", method, "pool | norm-law (<u,Z> for alpha < 1 models)")
      ->check(CLI::IsMember({"pool", "norm-law"}))
      ->capture_default_str();
  sim->add_option("--out", out, "pool CSV path")->required();

  // spectrum
  auto* spec = app.add_subcommand("spectrum", "kappa, m, gamma, alpha, kappa~ and a0");
  std::vector<double> s_grid{-1.5, -1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  bool require_alpha = false;
  spec->add_option("--model", model_path, "model JSON")->required();
  spec->add_option("--s", s_grid, "s grid")->delimiter(',');
  spec->add_option("--seed", seed, "RNG seed")->required();
  spec->add_flag("--require-alpha", require_alpha, "exit 3 when no alpha is found");
  spec->add_option("--out", out, "output prefix (PREFIX.json, PREFIX.csv); stdout when omitted");

  // support
  auto* sup = app.add_subcommand("support", "semigroup, eigen-directions, hull and l1/l2 witnesses");
  unsigned depth = 3;
  sup->add_option("--model", model_path, "model JSON")->required();
  sup->add_option("-L,--L", depth, "maximum word length")->capture_default_str();
  sup->add_option("--pool", pool_path, "pool CSV for the empirical support check");
  sup->add_option("--out", out, "output JSON path; stdout when omitted");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "transform decay, N_delta(t), harmonic moments, small balls");
  diag->add_option("--model", model_path, "model JSON")->required();
  diag->add_option("--pool", pool_path, "pool CSV")->required();
  diag->add_option("--seed", seed, "RNG seed")->required();
  diag->add_option("--out", out, "output prefix (PREFIX.json, PREFIX_curve.csv, PREFIX_kill.csv)");

  // check
  auto* chk = app.add_subcommand("check", "verdict table for Conditions 1, 2, 3, 5, 7, 9");
  chk->add_option("--model", model_path, "model JSON")->required();
  chk->add_option("--out", out, "also write the JSON verdicts here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  sl_set_threads(threads);
  if (const char* env = std::getenv("SMOOTHING_LAB_BUDGET")) {
    char* end = nullptr;
    const unsigned long long b = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      std::cerr << "error: SMOOTHING_LAB_BUDGET must be a nonnegative integer\n";
      return 2;
    }
    sl_set_budget(b);
  }

  try {
    Model model = load_model(model_path);
    Manifest man{model_path, "", seed, {}, {}};

    if (*sim) {
      man.command = "simulate";
      man.parameters = {{"K", std::to_string(k)}, {"rounds", std::to_string(rounds)}, {"method", method}};
      sl_pool* p = nullptr;
      if (method == "pool") {
        check(sl_simulate(model.get(), k, rounds, seed, &p));
      } else {
        double alpha = 0.0;
        check(sl_simulate_norm_law(model.get(), k, rounds, seed, &p, &alpha));
        std::ostringstream a;
        a.precision(17);
        a << alpha;
        man.parameters["alpha"] = a.str();
      }
      Pool pool(p);
      check(sl_pool_save_csv(pool.get(), out.c_str()));
      man.outputs.push_back(out);
      man.write(out + ".manifest.json");
      std::cerr << "wrote " << sl_pool_size(pool.get()) << " samples to " << out << "\n";
    } else if (*spec) {
      man.command = "spectrum";
      man.parameters = {{"s", join(s_grid)}, {"require_alpha", require_alpha ? "true" : "false"}};
      char* js = nullptr;
      char* csv = nullptr;
      check(sl_spectrum_report(model.get(), s_grid.data(), s_grid.size(), seed, require_alpha ? 1 : 0, &js, &csv));
      Str j(js), c(csv);
      emit(out, ".json", j.get(), &man);
      if (!out.empty()) {
        emit(out, ".csv", c.get(), &man);
        man.write(out + ".manifest.json");
      }
    } else if (*sup) {
      man.command = "support";
      man.parameters = {{"L", std::to_string(depth)}, {"pool", pool_path}};
      Pool pool;
      if (!pool_path.empty()) pool = load_pool(pool_path);
      char* js = nullptr;
      check(sl_support_report(model.get(), depth, pool.get(), &js));
      Str j(js);
      if (out.empty()) {
        std::cout << j.get();
      } else {
        write_file(out, j.get());
        man.outputs.push_back(out);
        man.write(out + ".manifest.json");
      }
    } else if (*diag) {
      man.command = "diagnose";
      man.parameters = {{"pool", pool_path}};
      Pool pool = load_pool(pool_path);
      char* js = nullptr;
      char* curve = nullptr;
      char* kill = nullptr;
      check(sl_diagnose_report(model.get(), pool.get(), seed, &js, &curve, &kill));
      Str j(js), c(curve), kc(kill);
      emit(out, ".json", j.get(), &man);
      if (!out.empty()) {
        emit(out, "_curve.csv", c.get(), &man);
        emit(out, "_kill.csv", kc.get(), &man);
        man.write(out + ".manifest.json");
      }
    } else if (*chk) {
      char* js = nullptr;
      char* table = nullptr;
      check(sl_check_report(model.get(), &js, &table));
      Str j(js), t(table);
      std::cout << t.get();
      if (!out.empty()) write_file(out, j.get());
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
