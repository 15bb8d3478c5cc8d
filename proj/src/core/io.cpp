#include "smoothlab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "smoothlab/error.hpp"

namespace smoothlab {

using nlohmann::json;

namespace {

NonNegMatrix matrix_from(const json& j, std::size_t dim) {
  std::vector<double> flat;
  if (!j.is_array()) fail(ErrorCode::InvalidModel, "matrix must be an array");
  if (!j.empty() && j.front().is_array()) {
    if (j.size() != dim) fail(ErrorCode::InvalidModel, "matrix has the wrong number of rows");
    for (const auto& row : j) {
      if (!row.is_array() || row.size() != dim) fail(ErrorCode::InvalidModel, "matrix row has the wrong length");
      for (const auto& v : row) flat.push_back(v.get<double>());
    }
  } else {
    for (const auto& v : j) flat.push_back(v.get<double>());
    if (flat.size() != dim * dim) fail(ErrorCode::InvalidModel, "flat matrix must have dim^2 entries");
  }
  for (double v : flat)
    if (!(v >= 0.0)) fail(ErrorCode::InvalidModel, "matrix entries must be nonnegative");
  return NonNegMatrix::from_row_major(dim, std::move(flat));
}

json matrix_to(const NonNegMatrix& a) {
  json rows = json::array();
  for (std::size_t i = 0; i < a.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < a.dim(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

double prob_of(const json& j) {
  if (j.contains("p")) return j.at("p").get<double>();
  return j.at("probability").get<double>();
}

}  // namespace

ModelSpec parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidModel, std::string("model is not valid JSON: ") + e.what());
  }
  try {
    const auto dim = doc.at("dim").get<std::size_t>();
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "explicit_atoms") {
      std::vector<BranchAtom> atoms;
      for (const auto& a : doc.at("atoms")) {
        BranchAtom b;
        b.probability = prob_of(a);
        for (const auto& m : a.at("branch")) b.branch.push_back(matrix_from(m, dim));
        atoms.push_back(std::move(b));
      }
      return ModelSpec::explicit_atoms(dim, std::move(atoms));
    }
    if (kind == "iid_coefficients") {
      std::vector<CountAtom> n_law;
      for (const auto& a : doc.at("n_law")) n_law.push_back({a.at("n").get<unsigned>(), prob_of(a)});
      std::vector<MatrixAtom> mu;
      for (const auto& a : doc.at("mu_atoms")) mu.push_back({prob_of(a), matrix_from(a.at("matrix"), dim)});
      return ModelSpec::iid_coefficients(dim, std::move(n_law), std::move(mu));
    }
    if (kind == "scalar_randomized") {
      std::vector<NonNegMatrix> base;
      for (const auto& m : doc.at("base_branch")) base.push_back(matrix_from(m, dim));
      std::vector<ScalarAtom> law;
      for (const auto& a : doc.at("scalar_law")) law.push_back({a.at("value").get<double>(), prob_of(a)});
      return ModelSpec::scalar_randomized(dim, std::move(base), std::move(law));
    }
    fail(ErrorCode::InvalidModel, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidModel, std::string("malformed model: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidModel) throw;
    fail(ErrorCode::InvalidModel, e.what());
  }
}

ModelSpec load_model(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::Io, "model file not found: " + path);
  return parse_model(read_text(path));
}

std::string model_to_json(const ModelSpec& spec) {
  json doc;
  doc["dim"] = spec.dim();
  switch (spec.kind()) {
    case ModelKind::ExplicitAtoms: {
      doc["kind"] = "explicit_atoms";
      json atoms = json::array();
      for (const auto& a : spec.atoms()) {
        json branch = json::array();
        for (const auto& m : a.branch) branch.push_back(matrix_to(m));
        atoms.push_back({{"p", a.probability}, {"branch", branch}});
      }
      doc["atoms"] = atoms;
      break;
    }
    case ModelKind::IIDCoefficients: {
      doc["kind"] = "iid_coefficients";
      json n_law = json::array();
      for (const auto& a : spec.n_law()) n_law.push_back({{"n", a.n}, {"p", a.probability}});
      json mu = json::array();
      for (const auto& a : spec.declared_mu_atoms()) mu.push_back({{"p", a.probability}, {"matrix", matrix_to(a.matrix)}});
      doc["n_law"] = n_law;
      doc["mu_atoms"] = mu;
      break;
    }
    case ModelKind::ScalarRandomized: {
      doc["kind"] = "scalar_randomized";
      json base = json::array();
      for (const auto& m : spec.base_branch()) base.push_back(matrix_to(m));
      json law = json::array();
      for (const auto& a : spec.scalar_law()) law.push_back({{"value", a.value}, {"p", a.probability}});
      doc["base_branch"] = base;
      doc["scalar_law"] = law;
      break;
    }
  }
  return doc.dump(2) + "\n";
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string pool_to_csv(const SamplePool& pool) {
  std::string out;
  for (std::size_t j = 0; j < pool.dim; ++j) {
    if (j) out += ',';
    out += "z" + std::to_string(j + 1);
  }
  out += '\n';
  out.reserve(out.size() + pool.values.size() * 24);
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto z = pool.sample(k);
    for (std::size_t j = 0; j < pool.dim; ++j) {
      if (j) out += ',';
      out += format_number(z[j]);
    }
    out += '\n';
  }
  return out;
}

SamplePool parse_pool_csv(const std::string& text) {
  SamplePool pool;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && (line[0] == 'z' || line[0] == 'Z')) {  // header
      first = false;
      continue;
    }
    first = false;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      const std::string cell = line.substr(pos, end - pos);
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(ErrorCode::InvalidArgument, "bad number in pool CSV: '" + cell + "'");
      }
      pos = end + 1;
    }
    if (pool.dim == 0) pool.dim = row.size();
    if (row.size() != pool.dim) fail(ErrorCode::InvalidArgument, "ragged pool CSV");
    pool.values.insert(pool.values.end(), row.begin(), row.end());
  }
  if (pool.dim == 0) fail(ErrorCode::InvalidArgument, "pool CSV has no samples");
  return pool;
}

void write_pool_csv(const SamplePool& pool, const std::string& path) { write_text(path, pool_to_csv(pool)); }

SamplePool read_pool_csv(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::Io, "pool file not found: " + path);
  return parse_pool_csv(read_text(path));
}

std::string manifest_to_json(const RunManifest& m) {
  json doc;
  doc["model_path"] = m.model_path;
  doc["command"] = m.command;
  doc["seed"] = m.seed;
  doc["parameters"] = m.parameters;
  doc["output_paths"] = m.output_paths;
  doc["tool_version"] = m.tool_version;
  return doc.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
  try {
    const json doc = json::parse(text);
    RunManifest m;
    m.model_path = doc.at("model_path").get<std::string>();
    m.command = doc.at("command").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.parameters = doc.at("parameters").get<std::map<std::string, std::string>>();
    m.output_paths = doc.at("output_paths").get<std::vector<std::string>>();
    m.tool_version = doc.value("tool_version", "");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("malformed manifest: ") + e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

}  // namespace smoothlab
