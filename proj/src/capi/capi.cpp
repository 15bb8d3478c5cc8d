#define SMOOTHLAB_BUILDING
#include "smoothlab/smoothlab.h"

#include <atomic>
#include <cmath>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "json.hpp"
#include "smoothlab/cascade.hpp"
#include "smoothlab/diagnostics.hpp"
#include "smoothlab/error.hpp"
#include "smoothlab/io.hpp"
#include "smoothlab/parallel.hpp"
#include "smoothlab/spectral.hpp"
#include "smoothlab/support.hpp"

struct sl_model {
  smoothlab::ModelSpec spec;
};

struct sl_pool {
  smoothlab::SamplePool pool;
};

namespace {

using nlohmann::json;
using namespace smoothlab;

thread_local std::string g_last_error;
std::atomic<std::uint64_t> g_budget{0};

std::size_t budget_or(std::size_t fallback) {
  const auto b = g_budget.load();
  return b == 0 ? fallback : static_cast<std::size_t>(b);
}

sl_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return SL_ERR_INVALID_ARGUMENT;
    case ErrorCode::InvalidModel: return SL_ERR_INVALID_MODEL;
    case ErrorCode::Io: return SL_ERR_IO;
    case ErrorCode::NotPrimitive: return SL_ERR_NOT_PRIMITIVE;
    case ErrorCode::ZeroColumn: return SL_ERR_ZERO_COLUMN;
    case ErrorCode::SingularDirection: return SL_ERR_SINGULAR_DIRECTION;
    case ErrorCode::NoSingletonBranch: return SL_ERR_NO_SINGLETON_BRANCH;
    case ErrorCode::FurstenbergKestenViolated: return SL_ERR_FK_VIOLATED;
    case ErrorCode::NoConvergence: return SL_ERR_NO_CONVERGENCE;
    case ErrorCode::NotFound: return SL_ERR_NOT_FOUND;
    case ErrorCode::BudgetExceeded: return SL_ERR_BUDGET_EXCEEDED;
    case ErrorCode::OutOfRange: return SL_ERR_OUT_OF_RANGE;
    case ErrorCode::NegativeInput: return SL_ERR_NEGATIVE_INPUT;
    case ErrorCode::InsufficientDecay: return SL_ERR_INSUFFICIENT_DECAY;
    case ErrorCode::EmptyTail: return SL_ERR_EMPTY_TAIL;
    case ErrorCode::SupercriticalBlowup: return SL_ERR_SUPERCRITICAL_BLOWUP;
    case ErrorCode::MomentRangeExceeded: return SL_ERR_MOMENT_RANGE_EXCEEDED;
    case ErrorCode::NotScalarReducible: return SL_ERR_NOT_SCALAR_REDUCIBLE;
  }
  return SL_ERR_INTERNAL;
}

template <class F>
sl_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SL_ERR_INTERNAL;
  }
}

sl_status null_arg(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return SL_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json num_or_null(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const NonNegMatrix& a) {
  json rows = json::array();
  for (std::size_t i = 0; i < a.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < a.dim(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return rows;
}

json witness_json(const std::optional<Witness>& w) {
  if (!w) return nullptr;
  return {{"radius", w->radius}, {"word", w->word}, {"matrix", matrix_json(w->matrix)},
          {"min_entry", w->matrix.min_entry()}};
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  return out + "\n";
}

std::string opt_cell(std::optional<double> v) { return v ? format_number(*v) : std::string(); }

}  // namespace

extern "C" {

const char* sl_version(void) { return "1.0.0"; }

const char* sl_status_name(sl_status status) {
  switch (status) {
    case SL_OK: return "OK";
    case SL_ERR_INTERNAL: return "Internal";
    default: break;
  }
  const int v = static_cast<int>(status);
  if (v >= 1 && v <= 18) return to_string(static_cast<ErrorCode>(v - 1));
  return "Unknown";
}

const char* sl_last_error(void) { return g_last_error.c_str(); }

void sl_string_free(char* s) { delete[] s; }

void sl_set_threads(unsigned threads) { set_thread_count(threads); }

void sl_set_budget(uint64_t budget) { g_budget.store(budget); }

sl_status sl_model_load(const char* path, sl_model** out) {
  if (!path || !out) return null_arg("path/out");
  *out = nullptr;
  return guarded([&] { *out = new sl_model{load_model(path)}; });
}

sl_status sl_model_parse(const char* text, sl_model** out) {
  if (!text || !out) return null_arg("json/out");
  *out = nullptr;
  return guarded([&] { *out = new sl_model{parse_model(text)}; });
}

void sl_model_free(sl_model* model) { delete model; }

size_t sl_model_dim(const sl_model* model) { return model ? model->spec.dim() : 0; }

double sl_model_expected_n(const sl_model* model) { return model ? model->spec.expected_n() : 0.0; }

sl_status sl_model_to_json(const sl_model* model, char** out) {
  if (!model || !out) return null_arg("model/out");
  return guarded([&] { *out = dup_string(model_to_json(model->spec)); });
}

sl_status sl_simulate(const sl_model* model, size_t k, unsigned rounds, uint64_t seed, sl_pool** out) {
  if (!model || !out) return null_arg("model/out");
  *out = nullptr;
  return guarded([&] {
    if (k == 0) fail(ErrorCode::InvalidArgument, "K must be positive");
    auto run = run_fixed_point(model->spec, k, rounds, std::nullopt, seed);
    *out = new sl_pool{std::move(run.pool)};
  });
}

sl_status sl_simulate_norm_law(const sl_model* model, size_t k, unsigned rounds, uint64_t seed, sl_pool** out,
                               double* alpha) {
  if (!model || !out) return null_arg("model/out");
  *out = nullptr;
  return guarded([&] {
    if (k == 0) fail(ErrorCode::InvalidArgument, "K must be positive");
    auto law = sample_norm_law(model->spec, k, rounds, seed);
    if (alpha) *alpha = law.alpha;
    *out = new sl_pool{std::move(law.pool)};
  });
}

sl_status sl_pool_load_csv(const char* path, sl_pool** out) {
  if (!path || !out) return null_arg("path/out");
  *out = nullptr;
  return guarded([&] { *out = new sl_pool{read_pool_csv(path)}; });
}

sl_status sl_pool_save_csv(const sl_pool* pool, const char* path) {
  if (!pool || !path) return null_arg("pool/path");
  return guarded([&] { write_pool_csv(pool->pool, path); });
}

sl_status sl_pool_from_array(const double* values, size_t k, size_t dim, sl_pool** out) {
  if (!values || !out) return null_arg("values/out");
  *out = nullptr;
  return guarded([&] {
    if (k == 0 || dim == 0) fail(ErrorCode::InvalidArgument, "empty pool");
    SamplePool p;
    p.dim = dim;
    p.values.assign(values, values + k * dim);
    *out = new sl_pool{std::move(p)};
  });
}

void sl_pool_free(sl_pool* pool) { delete pool; }

size_t sl_pool_size(const sl_pool* pool) { return pool ? pool->pool.size() : 0; }

size_t sl_pool_dim(const sl_pool* pool) { return pool ? pool->pool.dim : 0; }

const double* sl_pool_data(const sl_pool* pool) { return pool ? pool->pool.values.data() : nullptr; }

sl_status sl_kappa_one(const sl_model* model, double* out) {
  if (!model || !out) return null_arg("model/out");
  return guarded([&] { *out = kappa_one_exact(model->spec); });
}

sl_status sl_critical_exponent(const sl_model* model, double* out, int* found) {
  if (!model || !out || !found) return null_arg("model/out/found");
  return guarded([&] {
    const auto a0 = critical_exponent(model->spec);
    *found = a0 ? 1 : 0;
    *out = a0 ? *a0 : 0.0;
  });
}

sl_status sl_spectrum_report(const sl_model* model, const double* s_grid, size_t n_s, uint64_t seed,
                             int require_alpha, char** json_out, char** csv_out) {
  if (!model || !json_out || !csv_out || (n_s > 0 && !s_grid)) return null_arg("model/s_grid/out");
  *json_out = *csv_out = nullptr;
  return guarded([&] {
    const auto& spec = model->spec;
    ProfileOptions opts;
    opts.seed = seed;
    const auto prof = spectral_profile(spec, std::vector<double>(s_grid, s_grid + n_s), opts);
    if (require_alpha && !prof.alpha) fail(ErrorCode::NotFound, "no alpha in (0, 1] with m(alpha) = 1");

    std::string csv = "s,kappa,stderr,m,kappa_tilde\n";
    for (std::size_t i = 0; i < prof.s_grid.size(); ++i)
      csv += csv_row({format_number(prof.s_grid[i]), format_number(prof.kappa[i].value),
                      format_number(prof.kappa[i].se), format_number(prof.m[i].value),
                      opt_cell(prof.kappa_tilde[i])});

    const double en = spec.expected_n();
    json doc;
    doc["expected_n"] = en;
    doc["kappa_one"] = kappa_one_exact(spec);
    doc["m_one"] = en * kappa_one_exact(spec);
    doc["gamma"] = prof.gamma.value;
    doc["gamma_stderr"] = prof.gamma.se;
    doc["gamma_bound"] = -std::log(en);
    doc["gamma_below_bound"] = prof.gamma.value + 3.0 * prof.gamma.se < -std::log(en);
    doc["alpha"] = num_or_null(prof.alpha);
    doc["a0"] = num_or_null(prof.a0);
    doc["p_n_equals_1"] = prob_n_equals(spec, 1);
    json rows = json::array();
    for (std::size_t i = 0; i < prof.s_grid.size(); ++i)
      rows.push_back({{"s", prof.s_grid[i]},
                      {"kappa", prof.kappa[i].value},
                      {"stderr", prof.kappa[i].se},
                      {"m", prof.m[i].value},
                      {"kappa_tilde", num_or_null(prof.kappa_tilde[i])}});
    doc["profile"] = rows;
    *json_out = dup_string(doc.dump(2) + "\n");
    *csv_out = dup_string(csv);
  });
}

sl_status sl_support_report(const sl_model* model, unsigned max_length, const sl_pool* pool, char** json_out) {
  if (!model || !json_out) return null_arg("model/out");
  *json_out = nullptr;
  return guarded([&] {
    const auto& spec = model->spec;
    const std::size_t cap = budget_or(kDefaultElementCap);
    const auto sg = enumerate_semigroup(spec, max_length, cap);
    const auto lambda = lambda_set(sg);
    std::vector<Vector> dirs;
    for (const auto& l : lambda) dirs.push_back(l.direction);

    json doc;
    doc["max_length"] = max_length;
    doc["elements"] = sg.elements.size();
    doc["allowable"] = check_allowability(sg);
    doc["has_positive_element"] = check_positivity(sg);
    json lam = json::array();
    for (const auto& l : lambda) lam.push_back({{"direction", l.direction}, {"word", l.word}});
    doc["lambda_directions"] = lam;
    doc["lambda_stable"] = lambda_stable(spec, max_length, cap);

    std::optional<ConeHull> hull;
    if (!dirs.empty()) {
      hull = cone_hull(dirs, spec.dim());
      doc["hull_extremes"] = hull->extremes;
    } else {
      doc["hull_extremes"] = json::array();
    }

    if (pool) {
      if (pool->pool.dim != spec.dim()) fail(ErrorCode::InvalidArgument, "pool and model dimensions differ");
      if (hull) {
        const auto chk = empirical_support_check(pool->pool, *hull);
        doc["inside_fraction"] = chk.inside_fraction;
        doc["gaps"] = chk.gaps;
        doc["nonzero_samples"] = chk.nonzero;
      } else {
        doc["inside_fraction"] = nullptr;
        doc["gaps"] = nullptr;
      }
    }

    const auto w = search_l1_l2(spec, 3, cap);
    doc["l1"] = witness_json(w.l1);
    doc["l2"] = witness_json(w.l2);
    json certs = json::array();
    for (const auto& r : w.realizations) certs.push_back({{"branch", r.branch}, {"matrix", matrix_json(r.matrix)}});
    doc["certificates"] = certs;
    *json_out = dup_string(doc.dump(2) + "\n");
  });
}

sl_status sl_diagnose_report(const sl_model* model, const sl_pool* pool, uint64_t seed, char** json_out,
                             char** curve_csv, char** kill_csv) {
  if (!model || !pool || !json_out || !curve_csv || !kill_csv) return null_arg("model/pool/out");
  *json_out = *curve_csv = *kill_csv = nullptr;
  return guarded([&] {
    const auto& spec = model->spec;
    const auto& p = pool->pool;
    if (p.dim != spec.dim() && p.dim != 1)
      fail(ErrorCode::InvalidArgument, "pool dimension must match the model (or be 1 for norm-law pools)");
    json doc;

    const auto curve = transform_curve(p, 0, 14, derive_stream(seed, 1));
    std::string ccsv = "radius,modulus,stderr\n";
    for (std::size_t i = 0; i < curve.radii.size(); ++i)
      ccsv += csv_row({format_number(curve.radii[i]), format_number(curve.modulus[i]), format_number(curve.se)});
    if (curve.fit) {
      doc["a_hat_ecf"] = curve.fit->a_hat;
      doc["a_hat_ci"] = {curve.fit->ci_lo, curve.fit->ci_hi};
    } else {
      doc["a_hat_ecf"] = nullptr;
      doc["a_hat_ci"] = nullptr;
    }
    doc["ecf_sup_modulus_at_max_radius"] = curve.modulus.back();

    const std::vector<double> deltas{0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
    const auto grid = probe_directions(spec.dim(), spec.dim() == 2 ? 128 : 0);
    const auto kc = kill_counts(spec, grid, deltas, 100000, derive_stream(seed, 2), 0.0, budget_or(100000));
    std::string kcsv;
    for (std::size_t j = 0; j < spec.dim(); ++j) kcsv += "t" + std::to_string(j + 1) + ",";
    kcsv += "delta,mean";
    for (std::size_t n = 0; n <= spec.max_n(); ++n) kcsv += ",p" + std::to_string(n);
    kcsv += "\n";
    for (std::size_t ti = 0; ti < grid.size(); ++ti)
      for (std::size_t di = 0; di < deltas.size(); ++di) {
        for (double v : grid[ti]) kcsv += format_number(v) + ",";
        kcsv += format_number(deltas[di]) + "," + format_number(kc.means[ti][di]);
        for (double q : kc.law[ti][di]) kcsv += "," + format_number(q);
        kcsv += "\n";
      }
    json mins = json::array();
    for (std::size_t di = 0; di < deltas.size(); ++di) mins.push_back({{"delta", deltas[di]}, {"min_mean", kc.min_mean[di]}});
    doc["min_E_Ndelta"] = mins;
    doc["largest_delta"] = num_or_null(kc.largest_delta);
    doc["kill_counts_exact"] = kc.exact;

    try {
      const auto sb = small_ball_exponent(p, {}, 400, derive_stream(seed, 3));
      doc["a0_smallball"] = sb.slope;
      doc["a0_smallball_ci"] = {sb.ci_lo, sb.ci_hi};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyTail) throw;
      doc["a0_smallball"] = nullptr;
      doc["a0_smallball_ci"] = nullptr;
    }

    json table = json::array();
    for (double b : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0}) {
      const auto h = harmonic_moment(p, b, 1e-10);
      table.push_back({{"b", b}, {"value", finite_or_null(h.value)}, {"floors", h.floors},
                       {"ladder", h.ladder}, {"stable", h.stable}});
    }
    doc["harmonic_table"] = table;

    *json_out = dup_string(doc.dump(2) + "\n");
    *curve_csv = dup_string(ccsv);
    *kill_csv = dup_string(kcsv);
  });
}

sl_status sl_check_report(const sl_model* model, char** json_out, char** table_out) {
  if (!model || !json_out || !table_out) return null_arg("model/out");
  *json_out = *table_out = nullptr;
  return guarded([&] {
    const auto& spec = model->spec;
    const auto r = check_conditions(spec, 3, 3, budget_or(kDefaultElementCap));
    json doc;
    doc["condition_1"] = {{"holds", r.c1}, {"expected_n", spec.expected_n()}};
    doc["condition_2"] = {{"holds", r.c2_allowable && r.c2_positive}, {"allowable", r.c2_allowable},
                          {"positive_element", r.c2_positive}};
    doc["condition_3"] = {{"holds", r.c3}, {"searched_depth", 3}};
    doc["condition_5"] = {{"holds", r.c5}};
    doc["condition_7"] = {{"holds", r.c7}, {"c", finite_or_null(r.c7_c)}};
    doc["condition_9"] = {{"holds", r.c9.holds},
                          {"survivor_always", r.c9.survivor_always},
                          {"not_single_survivor", r.c9.not_single_survivor},
                          {"min_survivor_norm", r.c9.min_survivor_norm},
                          {"min_count_on_grid", r.c9.min_count_on_grid}};

    auto line = [](const char* name, bool ok, const std::string& note) {
      std::string s = name;
      s.resize(14, ' ');
      s += ok ? "holds   " : "fails   ";
      return s + note + "\n";
    };
    std::string t = "condition     verdict detail\n";
    t += line("1", r.c1, "E[N] = " + format_number(spec.expected_n()));
    t += line("2", r.c2_allowable && r.c2_positive,
              std::string("allowable=") + (r.c2_allowable ? "yes" : "no") +
                  " positive=" + (r.c2_positive ? "yes" : "no") + " (words <= 3)");
    t += line("3", r.c3, r.c3 ? "l1 and l2 found (depth <= 3)" : "no witness pair within depth 3");
    t += line("5", r.c5, "conditionally i.i.d. given N");
    t += line("7", r.c7, std::isfinite(r.c7_c) ? "c = " + format_number(r.c7_c) : std::string("A1 not positive"));
    t += line("9", r.c9.holds,
              std::string("N(t)>=1: ") + (r.c9.survivor_always ? "yes" : "no") +
                  ", P[N(t)=1]<1: " + (r.c9.not_single_survivor ? "yes" : "no"));
    *json_out = dup_string(doc.dump(2) + "\n");
    *table_out = dup_string(t);
  });
}

}  // extern "C"
