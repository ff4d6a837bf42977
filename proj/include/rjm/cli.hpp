#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rjm/csv.hpp"
#include "rjm/model_io.hpp"
#include "rjm/simulation.hpp"

namespace rjm {

// Process exit codes shared by every subcommand.
//   0  success
//   1  usage, input, or file-format problem
//   2  the solver finished without meeting the convergence test
//   3  numerical or selection failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNoConverge = 2;
inline constexpr int kExitNumerical = 3;

enum class OutputFormat { csv, json };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw invalid_argument_error("--format must be csv or json, got '" + s + "'");
}

namespace detail {

inline int classify_exit(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (dynamic_cast<const selection_error*>(&e) || dynamic_cast<const rank_error*>(&e) ||
      dynamic_cast<const numerical_error*>(&e)) {
    return kExitNumerical;
  }
  if (dynamic_cast<const error*>(&e)) return kExitInput;
  return kExitNumerical;
}

inline std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '"') c = ';';
  }
  return s;
}

inline std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : "NA";
}

}  // namespace detail

struct FitCommand {
  std::string input;
  std::string model_out;
  double alpha = 1.0;
  std::optional<double> lambda1, lambda2, lambda3;
  bool select = false;
  int grid_points = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  OptimizerConfig opt;
};

/// fit: estimate the joint model from a CSV and write a model file.
/// Penalties come either from --lambda1/2/3 or from a criterion-driven grid
/// search (--select). Exit 0 only if the solver converged.
inline int cmd_fit(const FitCommand& c, std::ostream& out, std::ostream& err) {
  try {
    if (!c.select && !c.lambda1 && !c.lambda2 && !c.lambda3) {
      throw invalid_argument_error("fit: give --lambda1/--lambda2/--lambda3 or --select");
    }
    const Dataset data = dataset_from_csv(c.input);

    Rng pilot_rng(substream_seed(c.seed, 0));
    const PilotFit pilot = lasso_pilot(data, pilot_rng);

    OptimizerConfig opt = c.opt;
    opt.init = InitKind::custom;
    opt.init_params.beta = pilot.coef;
    opt.init_params.omega = pilot.coef;
    opt.init_params.eta = ridge_logistic(data.X(), data.z());
    opt.init_params.sigma2 = pilot.scale.sigma2;

    ModelFile m;
    m.alpha = c.alpha;
    m.pilot_sigma2 = pilot.scale.sigma2;

    if (c.select) {
      GridSearchOptions gopt;
      gopt.threads = c.threads;
      const LambdaGrid grid = make_grid(data, c.grid_points, c.alpha, pilot.scale.sigma2);
      const SelectionResult sel =
          grid_search(data, grid, c.alpha, opt, pilot.scale.sigma2, gopt);
      m.lambda = sel.best_lambdas;
      m.params = sel.best_params;
      m.fit = sel.best_fit;
      m.selection = SelectionInfo{sel.best_ric, c.grid_points};
      m.warnings = sel.warnings;
    } else {
      const DPDConfig cfg{c.alpha, c.lambda1.value_or(0.0), c.lambda2.value_or(0.0),
                          c.lambda3.value_or(0.0)};
      const FitResult fr = fit(data, cfg, opt, pilot.scale.sigma2);
      m.lambda = {cfg.lambda1, cfg.lambda2, cfg.lambda3};
      m.params = fr.params;
      m.fit = {fr.objective, fr.iterations, fr.converged, fr.status};
      if (!fr.message.empty()) m.warnings.push_back(fr.message);
    }

    m.params.sigma2 = refresh_sigma(data, m.params).sigma2;
    try {
      const auto J = compute_J(data, m.params, c.alpha);
      const auto K = compute_K(data, m.params, c.alpha);
      const SandwichCov sc = sandwich_cov(J, K);
      const Vector se = standard_errors(sc, data.n());
      const Index p = data.p();
      m.std_errors = StdErrors{se.segment(0, p), se.segment(p, p), se.segment(2 * p, p)};
    } catch (const error& e) {
      m.warnings.push_back(std::string("standard errors unavailable: ") + e.what());
    }

    save_model(c.model_out, m);
    out << "model written to " << c.model_out << " (status: " << to_string(m.fit.status)
        << ", objective " << format_double(m.fit.objective) << ")\n";
    return m.fit.converged ? kExitOk : kExitNoConverge;
  } catch (const std::exception& e) {
    return detail::classify_exit(e, err);
  }
}

struct PredictCommand {
  std::string model;
  std::string input;
  std::string out_path;
  OutputFormat format = OutputFormat::csv;
};

/// predict: score a feature CSV with a saved model. Output columns carry
/// both prediction rules so the choice stays with the consumer.
inline int cmd_predict(const PredictCommand& c, std::ostream& out, std::ostream& err) {
  try {
    const ModelFile m = load_model(c.model);
    const Matrix X = features_from_csv(c.input);
    if (X.cols() != m.params.beta.size()) {
      throw dimension_error("predict: model expects p = " + std::to_string(m.params.beta.size()) +
                            " features, input has " + std::to_string(X.cols()));
    }
    std::ofstream f(c.out_path);
    if (!f) throw io_error("predict: cannot open '" + c.out_path + "'");
    if (c.format == OutputFormat::csv) {
      f << "index,p_hat,z_hat,y_hat_classify,y_hat_mixture\n";
      for (Index i = 0; i < X.rows(); ++i) {
        const Vector x = X.row(i).transpose();
        const Prediction cl = predict(x, m.params, PredictionRule::classify_then_regress);
        const Prediction mx = predict(x, m.params, PredictionRule::mixture_mean);
        f << i << "," << format_double(cl.p_hat) << "," << cl.z_hat << ","
          << format_double(cl.y_hat) << "," << format_double(mx.y_hat) << "\n";
      }
    } else {
      nlohmann::json rows = nlohmann::json::array();
      for (Index i = 0; i < X.rows(); ++i) {
        const Vector x = X.row(i).transpose();
        const Prediction cl = predict(x, m.params, PredictionRule::classify_then_regress);
        const Prediction mx = predict(x, m.params, PredictionRule::mixture_mean);
        rows.push_back({{"index", i},
                        {"p_hat", cl.p_hat},
                        {"z_hat", cl.z_hat},
                        {"y_hat_classify", cl.y_hat},
                        {"y_hat_mixture", mx.y_hat}});
      }
      f << rows.dump(2) << "\n";
    }
    if (!f) throw io_error("predict: write to '" + c.out_path + "' failed");
    out << X.rows() << " predictions written to " << c.out_path << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return detail::classify_exit(e, err);
  }
}

struct SelectCommand {
  std::string input;
  std::string out_path;
  double alpha = 1.0;
  int grid_points = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  OutputFormat format = OutputFormat::json;
  OptimizerConfig opt;
};

/// select: run the penalty grid search on a CSV and write the criterion
/// surface plus the winning triple (no model file).
inline int cmd_select(const SelectCommand& c, std::ostream& out, std::ostream& err) {
  try {
    const Dataset data = dataset_from_csv(c.input);
    Rng pilot_rng(substream_seed(c.seed, 0));
    const PilotFit pilot = lasso_pilot(data, pilot_rng);

    OptimizerConfig opt = c.opt;
    opt.init = InitKind::custom;
    opt.init_params.beta = pilot.coef;
    opt.init_params.omega = pilot.coef;
    opt.init_params.eta = ridge_logistic(data.X(), data.z());
    opt.init_params.sigma2 = pilot.scale.sigma2;

    GridSearchOptions gopt;
    gopt.threads = c.threads;
    const LambdaGrid grid = make_grid(data, c.grid_points, c.alpha, pilot.scale.sigma2);
    const SelectionResult sel = grid_search(data, grid, c.alpha, opt, pilot.scale.sigma2, gopt);

    std::ofstream f(c.out_path);
    if (!f) throw io_error("select: cannot open '" + c.out_path + "'");
    if (c.format == OutputFormat::json) {
      nlohmann::json j;
      j["alpha"] = c.alpha;
      j["grid_points"] = c.grid_points;
      j["pilot_sigma2"] = pilot.scale.sigma2;
      j["best"] = {{"lambda1", sel.best_lambdas[0]},
                   {"lambda2", sel.best_lambdas[1]},
                   {"lambda3", sel.best_lambdas[2]},
                   {"ric", sel.best_ric}};
      nlohmann::json surf = nlohmann::json::array();
      for (const auto& e : sel.surface) {
        surf.push_back({{"lambda1", e.lambdas[0]},
                        {"lambda2", e.lambdas[1]},
                        {"lambda3", e.lambdas[2]},
                        {"ric", e.ric},
                        {"objective", e.objective},
                        {"iterations", e.iterations},
                        {"converged", e.converged},
                        {"nnz_beta", e.nnz[0]},
                        {"nnz_omega", e.nnz[1]},
                        {"nnz_eta", e.nnz[2]}});
      }
      j["surface"] = std::move(surf);
      if (!sel.warnings.empty()) j["warnings"] = sel.warnings;
      f << j.dump(2) << "\n";
    } else {
      f << "lambda1,lambda2,lambda3,ric,objective,iterations,converged,nnz_beta,nnz_omega,nnz_eta\n";
      for (const auto& e : sel.surface) {
        f << format_double(e.lambdas[0]) << "," << format_double(e.lambdas[1]) << ","
          << format_double(e.lambdas[2]) << "," << format_double(e.ric) << ","
          << format_double(e.objective) << "," << e.iterations << ","
          << (e.converged ? 1 : 0) << "," << e.nnz[0] << "," << e.nnz[1] << "," << e.nnz[2]
          << "\n";
      }
    }
    if (!f) throw io_error("select: write to '" + c.out_path + "' failed");
    out << "selected lambda = (" << format_double(sel.best_lambdas[0]) << ", "
        << format_double(sel.best_lambdas[1]) << ", " << format_double(sel.best_lambdas[2])
        << "), ric " << format_double(sel.best_ric) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return detail::classify_exit(e, err);
  }
}

namespace detail {

inline const std::vector<std::pair<std::string, std::optional<double> (*)(const ReplicationRow&)>>&
metric_accessors() {
  using Row = ReplicationRow;
  static const std::vector<std::pair<std::string, std::optional<double> (*)(const Row&)>> acc = {
      {"rmspe", [](const Row& r) { return std::optional<double>(r.metrics.rmspe); }},
      {"rmse", [](const Row& r) { return std::optional<double>(r.metrics.rmse); }},
      {"me", [](const Row& r) { return std::optional<double>(r.metrics.me); }},
      {"l2_beta", [](const Row& r) { return std::optional<double>(r.metrics.l2_beta); }},
      {"l2_omega", [](const Row& r) { return std::optional<double>(r.metrics.l2_omega); }},
      {"l2_eta", [](const Row& r) { return std::optional<double>(r.metrics.l2_eta); }},
      {"fp_rate", [](const Row& r) { return r.metrics.fp_rate; }},
      {"fn_rate", [](const Row& r) { return r.metrics.fn_rate; }},
  };
  return acc;
}

inline void write_metrics_csv(const std::string& path, const std::vector<ReplicationRow>& rows) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open '" + path + "'");
  f << "rep,method,contamination,rate,failed,converged,rmspe,rmse,me,l2_beta,l2_omega,l2_eta,"
       "fp_rate,fn_rate,sigma2_hat,lambda1,lambda2,lambda3,error\n";
  for (const auto& r : rows) {
    f << r.rep << "," << to_string(r.method) << "," << r.contamination << ","
      << format_double(r.rate) << "," << (r.failed ? 1 : 0) << "," << (r.converged ? 1 : 0);
    if (r.failed) {
      for (int k = 0; k < 12; ++k) f << ",NA";
      f << "," << csv_safe(r.error);
    } else {
      f << "," << format_double(r.metrics.rmspe) << "," << format_double(r.metrics.rmse) << ","
        << format_double(r.metrics.me) << "," << format_double(r.metrics.l2_beta) << ","
        << format_double(r.metrics.l2_omega) << "," << format_double(r.metrics.l2_eta) << ","
        << opt_field(r.metrics.fp_rate) << "," << opt_field(r.metrics.fn_rate) << ","
        << format_double(r.sigma2_hat) << "," << format_double(r.lambdas[0]) << ","
        << format_double(r.lambdas[1]) << "," << format_double(r.lambdas[2]) << ",";
    }
    f << "\n";
  }
  if (!f) throw io_error("write to '" + path + "' failed");
}

// One long-format file per metric: method,contamination,value. Failed rows
// and undefined rates are left out.
inline void write_plot_files(const std::string& dir, const std::vector<ReplicationRow>& rows) {
  for (const auto& [name, get] : metric_accessors()) {
    const std::string path = dir + "/plot_" + name + ".csv";
    std::ofstream f(path);
    if (!f) throw io_error("cannot open '" + path + "'");
    f << "method,contamination,value\n";
    for (const auto& r : rows) {
      if (r.failed) continue;
      const auto v = get(r);
      if (!v) continue;
      f << to_string(r.method) << "," << r.contamination << "," << format_double(*v) << "\n";
    }
    if (!f) throw io_error("write to '" + path + "' failed");
  }
}

inline void write_summary_json(const std::string& path, const std::vector<ReplicationRow>& rows) {
  // group rows by (method, contamination, rate) in first-appearance order
  struct Group {
    std::string method, contamination;
    double rate = 0.0;
    std::vector<const ReplicationRow*> rows;
  };
  std::vector<Group> groups;
  for (const auto& r : rows) {
    Group* g = nullptr;
    for (auto& cand : groups) {
      if (cand.method == to_string(r.method) && cand.contamination == r.contamination &&
          cand.rate == r.rate) {
        g = &cand;
        break;
      }
    }
    if (!g) {
      groups.push_back({to_string(r.method), r.contamination, r.rate, {}});
      g = &groups.back();
    }
    g->rows.push_back(&r);
  }

  nlohmann::json j;
  j["groups"] = nlohmann::json::array();
  for (const auto& g : groups) {
    nlohmann::json jg;
    jg["method"] = g.method;
    jg["contamination"] = g.contamination;
    jg["rate"] = g.rate;
    jg["n_rows"] = g.rows.size();
    int failed = 0;
    for (const auto* r : g.rows) failed += r->failed ? 1 : 0;
    jg["n_failed"] = failed;
    nlohmann::json jm;
    for (const auto& [name, get] : metric_accessors()) {
      std::vector<double> vals;
      for (const auto* r : g.rows) {
        if (r->failed) continue;
        if (const auto v = get(*r)) vals.push_back(*v);
      }
      const StatSummary s = summarize(std::move(vals));
      jm[name] = {{"median", s.median}, {"q25", s.q25}, {"q75", s.q75}, {"n", s.n}};
    }
    jg["metrics"] = std::move(jm);
    j["groups"].push_back(std::move(jg));
  }
  std::ofstream f(path);
  if (!f) throw io_error("cannot open '" + path + "'");
  f << j.dump(2) << "\n";
  if (!f) throw io_error("write to '" + path + "' failed");
}

}  // namespace detail

struct SimulateCommand {
  std::string scenario = "p8";  // p8 | p50
  double sparsity = 0.1;
  std::string contamination = "none";  // code, comma list, or "all"
  double rate = 0.0;
  int replications = 100;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string method = "both";  // dpd | lasso | both
  PipelineOptions pipeline;
};

/// simulate: replication study on synthetic data. Writes metrics.csv,
/// summary.json, and one plot_<metric>.csv per metric into --out.
inline int cmd_simulate(const SimulateCommand& c, std::ostream& out, std::ostream& err) {
  try {
    Scenario sc;
    if (c.scenario == "p8") {
      sc = Scenario::dense8();
    } else if (c.scenario == "p50") {
      sc = Scenario::sparse50(c.sparsity);
    } else {
      throw invalid_argument_error("simulate: --scenario must be p8 or p50, got '" + c.scenario +
                                   "'");
    }

    std::vector<std::string> codes;
    if (c.contamination == "all") {
      codes = ContaminationScheme::all_codes();
    } else {
      std::string cur;
      for (char ch : c.contamination + ",") {
        if (ch == ',') {
          if (!cur.empty()) codes.push_back(cur);
          cur.clear();
        } else {
          cur += ch;
        }
      }
      if (codes.empty()) throw invalid_argument_error("simulate: empty --contamination");
    }

    std::vector<Method> methods;
    if (c.method == "dpd") {
      methods = {Method::dpd};
    } else if (c.method == "lasso") {
      methods = {Method::lasso};
    } else if (c.method == "both") {
      methods = {Method::dpd, Method::lasso};
    } else {
      throw invalid_argument_error("simulate: --method must be dpd, lasso, or both");
    }

    std::filesystem::create_directories(c.out_dir);
    std::vector<ReplicationRow> rows;
    for (const auto& code : codes) {
      const ContaminationScheme scheme = ContaminationScheme::parse(code, c.rate);
      if (scheme.code() != "none" && scheme.rate > 0.0 &&
          static_cast<Index>(std::floor(scheme.rate * sc.n_train)) == 0) {
        err << "note: rate " << format_double(c.rate) << " corrupts zero of " << sc.n_train
            << " training rows; data left clean\n";
      }
      for (const Method m : methods) {
        const MetricTable t =
            run_replications(sc, scheme, m, c.replications, c.pipeline, c.seed);
        rows.insert(rows.end(), t.rows.begin(), t.rows.end());
      }
    }

    detail::write_metrics_csv(c.out_dir + "/metrics.csv", rows);
    detail::write_summary_json(c.out_dir + "/summary.json", rows);
    detail::write_plot_files(c.out_dir, rows);

    int failed = 0;
    for (const auto& r : rows) failed += r.failed ? 1 : 0;
    out << rows.size() << " replication rows written to " << c.out_dir << " (" << failed
        << " failed)\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return detail::classify_exit(e, err);
  }
}

struct ReportCommand {
  std::string input;  // a metrics.csv produced by simulate
  std::string out_dir;
};

/// report: regenerate summary.json and the plot files from an existing
/// metrics.csv, so runs can be combined or re-summarized without refitting.
inline int cmd_report(const ReportCommand& c, std::ostream& out, std::ostream& err) {
  try {
    const CsvTable t = read_csv(c.input);
    const std::string ctx = "'" + c.input + "'";
    const Index i_rep = t.column("rep", ctx);
    const Index i_method = t.column("method", ctx);
    const Index i_cont = t.column("contamination", ctx);
    const Index i_rate = t.column("rate", ctx);
    const Index i_failed = t.column("failed", ctx);
    const Index i_conv = t.column("converged", ctx);
    const Index i_sigma2 = t.column("sigma2_hat", ctx);
    const Index i_err = t.column("error", ctx);
    const std::array<Index, 3> i_lam{t.column("lambda1", ctx), t.column("lambda2", ctx),
                                     t.column("lambda3", ctx)};

    std::vector<ReplicationRow> rows;
    rows.reserve(t.rows.size());
    for (size_t k = 0; k < t.rows.size(); ++k) {
      const auto& f = t.rows[k];
      const std::string rctx = ctx + " row " + std::to_string(k + 2);
      ReplicationRow r;
      r.rep = static_cast<int>(parse_double(f[i_rep], rctx));
      if (f[i_method] == "dpd") {
        r.method = Method::dpd;
      } else if (f[i_method] == "lasso") {
        r.method = Method::lasso;
      } else {
        throw io_error(rctx + ": unknown method '" + f[i_method] + "'");
      }
      r.contamination = f[i_cont];
      r.rate = parse_double(f[i_rate], rctx);
      r.failed = f[i_failed] == "1";
      r.converged = f[i_conv] == "1";
      r.error = f[i_err];
      if (!r.failed) {
        const auto opt_parse = [&](const std::string& s) -> std::optional<double> {
          if (s == "NA") return std::nullopt;
          return parse_double(s, rctx);
        };
        r.metrics.rmspe = parse_double(f[t.column("rmspe", ctx)], rctx);
        r.metrics.rmse = parse_double(f[t.column("rmse", ctx)], rctx);
        r.metrics.me = parse_double(f[t.column("me", ctx)], rctx);
        r.metrics.l2_beta = parse_double(f[t.column("l2_beta", ctx)], rctx);
        r.metrics.l2_omega = parse_double(f[t.column("l2_omega", ctx)], rctx);
        r.metrics.l2_eta = parse_double(f[t.column("l2_eta", ctx)], rctx);
        r.metrics.fp_rate = opt_parse(f[t.column("fp_rate", ctx)]);
        r.metrics.fn_rate = opt_parse(f[t.column("fn_rate", ctx)]);
        r.sigma2_hat = parse_double(f[i_sigma2], rctx);
        for (int b = 0; b < 3; ++b) r.lambdas[b] = parse_double(f[i_lam[b]], rctx);
      }
      rows.push_back(std::move(r));
    }

    std::filesystem::create_directories(c.out_dir);
    detail::write_summary_json(c.out_dir + "/summary.json", rows);
    detail::write_plot_files(c.out_dir, rows);
    out << "summary and plot data for " << rows.size() << " rows written to " << c.out_dir
        << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return detail::classify_exit(e, err);
  }
}

}  // namespace rjm
