#pragma once

#include <array>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rjm/selection.hpp"
#include "rjm/solver.hpp"
#include "rjm/types.hpp"

namespace rjm {

struct StdErrors {
  Vector beta;
  Vector omega;
  Vector eta;
};

struct SelectionInfo {
  double ric = 0.0;
  int grid_points = 0;
};

/// Everything a saved model carries. schema_version identifies the layout;
/// readers reject versions and fields they do not know rather than guessing.
struct ModelFile {
  int schema_version = 1;
  double alpha = 1.0;
  std::array<double, 3> lambda{};
  ModelParams params;
  double pilot_sigma2 = 0.0;
  FitSummary fit;
  std::optional<StdErrors> std_errors;
  std::optional<SelectionInfo> selection;
  std::vector<std::string> warnings;
};

namespace detail {

inline nlohmann::json to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Vector vector_from_json(const nlohmann::json& a, const std::string& what) {
  if (!a.is_array()) throw io_error("model file: '" + what + "' must be an array");
  Vector v(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw io_error("model file: '" + what + "' must hold numbers");
    v(static_cast<Index>(i)) = a[i].get<double>();
  }
  return v;
}

inline void require_keys(const nlohmann::json& obj, const std::set<std::string>& required,
                         const std::set<std::string>& optional, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!required.count(item.key()) && !optional.count(item.key())) {
      throw io_error("model file: unknown field '" + item.key() + "' in " + where);
    }
  }
  for (const auto& k : required) {
    if (!obj.contains(k)) {
      throw io_error("model file: missing field '" + k + "' in " + where);
    }
  }
}

inline FitStatus status_from_string(const std::string& s) {
  if (s == "converged") return FitStatus::converged;
  if (s == "max_iterations") return FitStatus::max_iterations;
  if (s == "stalled") return FitStatus::stalled;
  throw io_error("model file: unknown fit status '" + s + "'");
}

}  // namespace detail

inline void save_model(const std::string& path, const ModelFile& m) {
  nlohmann::json j;
  j["schema_version"] = m.schema_version;
  j["alpha"] = m.alpha;
  j["lambda"] = {{"beta", m.lambda[0]}, {"omega", m.lambda[1]}, {"eta", m.lambda[2]}};
  j["coefficients"] = {{"beta", detail::to_json(m.params.beta)},
                       {"omega", detail::to_json(m.params.omega)},
                       {"eta", detail::to_json(m.params.eta)},
                       {"sigma2", m.params.sigma2}};
  j["pilot_sigma2"] = m.pilot_sigma2;
  j["fit"] = {{"objective", m.fit.objective},
              {"iterations", m.fit.iterations},
              {"converged", m.fit.converged},
              {"status", to_string(m.fit.status)}};
  if (m.std_errors) {
    j["standard_errors"] = {{"beta", detail::to_json(m.std_errors->beta)},
                            {"omega", detail::to_json(m.std_errors->omega)},
                            {"eta", detail::to_json(m.std_errors->eta)}};
  }
  if (m.selection) {
    j["selection"] = {{"ric", m.selection->ric}, {"grid_points", m.selection->grid_points}};
  }
  if (!m.warnings.empty()) j["warnings"] = m.warnings;

  std::ofstream out(path);
  if (!out) throw io_error("save_model: cannot open '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw io_error("save_model: write to '" + path + "' failed");
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("load_model: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("load_model: '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw io_error("load_model: '" + path + "' must hold a JSON object");

  detail::require_keys(j, {"schema_version", "alpha", "lambda", "coefficients", "fit"},
                       {"pilot_sigma2", "standard_errors", "selection", "warnings"}, "top level");
  ModelFile m;
  m.schema_version = j["schema_version"].get<int>();
  if (m.schema_version != 1) {
    throw io_error("load_model: unsupported schema_version " +
                   std::to_string(m.schema_version));
  }
  m.alpha = j["alpha"].get<double>();

  detail::require_keys(j["lambda"], {"beta", "omega", "eta"}, {}, "lambda");
  m.lambda = {j["lambda"]["beta"].get<double>(), j["lambda"]["omega"].get<double>(),
              j["lambda"]["eta"].get<double>()};

  detail::require_keys(j["coefficients"], {"beta", "omega", "eta", "sigma2"}, {}, "coefficients");
  m.params.beta = detail::vector_from_json(j["coefficients"]["beta"], "coefficients.beta");
  m.params.omega = detail::vector_from_json(j["coefficients"]["omega"], "coefficients.omega");
  m.params.eta = detail::vector_from_json(j["coefficients"]["eta"], "coefficients.eta");
  m.params.sigma2 = j["coefficients"]["sigma2"].get<double>();
  check_params(m.params, m.params.beta.size());

  detail::require_keys(j["fit"], {"objective", "iterations", "converged", "status"}, {}, "fit");
  m.fit.objective = j["fit"]["objective"].get<double>();
  m.fit.iterations = j["fit"]["iterations"].get<int>();
  m.fit.converged = j["fit"]["converged"].get<bool>();
  m.fit.status = detail::status_from_string(j["fit"]["status"].get<std::string>());

  if (j.contains("pilot_sigma2")) m.pilot_sigma2 = j["pilot_sigma2"].get<double>();
  if (j.contains("standard_errors")) {
    detail::require_keys(j["standard_errors"], {"beta", "omega", "eta"}, {}, "standard_errors");
    StdErrors se;
    se.beta = detail::vector_from_json(j["standard_errors"]["beta"], "standard_errors.beta");
    se.omega = detail::vector_from_json(j["standard_errors"]["omega"], "standard_errors.omega");
    se.eta = detail::vector_from_json(j["standard_errors"]["eta"], "standard_errors.eta");
    m.std_errors = std::move(se);
  }
  if (j.contains("selection")) {
    detail::require_keys(j["selection"], {"ric", "grid_points"}, {}, "selection");
    m.selection = SelectionInfo{j["selection"]["ric"].get<double>(),
                                j["selection"]["grid_points"].get<int>()};
  }
  if (j.contains("warnings")) {
    for (const auto& w : j["warnings"]) m.warnings.push_back(w.get<std::string>());
  }
  return m;
}

}  // namespace rjm
