// Command-line front end: fit, predict, simulate, select, report.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rjm/rjm.hpp"

namespace {

void add_optimizer_flags(CLI::App* app, rjm::OptimizerConfig* opt) {
  app->add_option("--max-iter", opt->max_iter, "Iteration budget")->capture_default_str();
  app->add_option("--tol", opt->tol, "Relative-change convergence threshold")
      ->capture_default_str();
  app->add_option("--accept-slack", opt->accept_slack, "Sufficient-decrease slope")
      ->capture_default_str();
  app->add_option("--inflate", opt->inflate, "Step-scalar inflation factor")
      ->capture_default_str();
  app->add_option("--window", opt->window, "Non-monotone look-back length")
      ->capture_default_str();
  app->add_option("--gamma-min", opt->gamma_min, "Smallest step scalar")->capture_default_str();
  app->add_option("--gamma-max", opt->gamma_max, "Largest step scalar")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust sparse joint modeling of a continuous and a binary response"};
  app.require_subcommand(1);

  rjm::FitCommand fit_cmd;
  std::string fit_format = "json";  // reserved; model files are JSON
  auto* fit = app.add_subcommand("fit", "Estimate the joint model from a CSV");
  fit->add_option("--input", fit_cmd.input, "Data CSV with columns x1..xp,y,z")->required();
  fit->add_option("--model", fit_cmd.model_out, "Model file to write")->required();
  fit->add_option("--alpha", fit_cmd.alpha, "Divergence exponent")->capture_default_str();
  double l1 = -1.0, l2 = -1.0, l3 = -1.0;
  fit->add_option("--lambda1", l1, "Penalty for beta");
  fit->add_option("--lambda2", l2, "Penalty for omega");
  fit->add_option("--lambda3", l3, "Penalty for eta");
  fit->add_flag("--select", fit_cmd.select, "Choose penalties by grid search");
  fit->add_option("--grid-points", fit_cmd.grid_points, "Grid points per penalty axis")
      ->capture_default_str();
  fit->add_option("--seed", fit_cmd.seed, "Master seed")->capture_default_str();
  fit->add_option("--threads", fit_cmd.threads, "Worker threads for the grid search")
      ->capture_default_str();
  add_optimizer_flags(fit, &fit_cmd.opt);

  rjm::PredictCommand pred_cmd;
  std::string pred_format = "csv";
  auto* pred = app.add_subcommand("predict", "Score a feature CSV with a saved model");
  pred->add_option("--model", pred_cmd.model, "Model file")->required();
  pred->add_option("--input", pred_cmd.input, "Feature CSV with columns x1..xp")->required();
  pred->add_option("--out", pred_cmd.out_path, "Predictions file to write")->required();
  pred->add_option("--format", pred_format, "csv or json")->capture_default_str();

  rjm::SimulateCommand sim_cmd;
  auto* sim = app.add_subcommand("simulate", "Replication study on synthetic data");
  sim->add_option("--scenario", sim_cmd.scenario, "p8 or p50")->capture_default_str();
  sim->add_option("--sparsity", sim_cmd.sparsity, "Active fraction for p50")
      ->capture_default_str();
  sim->add_option("--contamination", sim_cmd.contamination,
                  "none, a subset of xyz, a comma list, or all")
      ->capture_default_str();
  sim->add_option("--rate", sim_cmd.rate, "Contamination rate in [0,1]")->capture_default_str();
  sim->add_option("--replications", sim_cmd.replications, "Number of replications")
      ->capture_default_str();
  sim->add_option("--seed", sim_cmd.seed, "Master seed")->capture_default_str();
  sim->add_option("--out", sim_cmd.out_dir, "Output directory")->required();
  sim->add_option("--method", sim_cmd.method, "dpd, lasso, or both")->capture_default_str();
  sim->add_option("--alpha", sim_cmd.pipeline.alpha, "Divergence exponent")
      ->capture_default_str();
  sim->add_option("--grid-points", sim_cmd.pipeline.grid_points, "Grid points per penalty axis")
      ->capture_default_str();
  sim->add_option("--threads", sim_cmd.pipeline.threads, "Worker threads across replications")
      ->capture_default_str();
  add_optimizer_flags(sim, &sim_cmd.pipeline.opt);

  rjm::SelectCommand sel_cmd;
  std::string sel_format = "json";
  auto* sel = app.add_subcommand("select", "Grid-search the penalties on a CSV");
  sel->add_option("--input", sel_cmd.input, "Data CSV with columns x1..xp,y,z")->required();
  sel->add_option("--out", sel_cmd.out_path, "Selection report to write")->required();
  sel->add_option("--alpha", sel_cmd.alpha, "Divergence exponent")->capture_default_str();
  sel->add_option("--grid-points", sel_cmd.grid_points, "Grid points per penalty axis")
      ->capture_default_str();
  sel->add_option("--seed", sel_cmd.seed, "Master seed")->capture_default_str();
  sel->add_option("--threads", sel_cmd.threads, "Worker threads for the grid search")
      ->capture_default_str();
  sel->add_option("--format", sel_format, "json or csv")->capture_default_str();
  add_optimizer_flags(sel, &sel_cmd.opt);

  rjm::ReportCommand rep_cmd;
  auto* rep = app.add_subcommand("report", "Re-summarize an existing metrics.csv");
  rep->add_option("--input", rep_cmd.input, "metrics.csv from a simulate run")->required();
  rep->add_option("--out", rep_cmd.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? rjm::kExitOk : rjm::kExitInput;
  }

  try {
    if (fit->parsed()) {
      if (l1 >= 0.0) fit_cmd.lambda1 = l1;
      if (l2 >= 0.0) fit_cmd.lambda2 = l2;
      if (l3 >= 0.0) fit_cmd.lambda3 = l3;
      return rjm::cmd_fit(fit_cmd, std::cout, std::cerr);
    }
    if (pred->parsed()) {
      pred_cmd.format = rjm::parse_format(pred_format);
      return rjm::cmd_predict(pred_cmd, std::cout, std::cerr);
    }
    if (sim->parsed()) {
      return rjm::cmd_simulate(sim_cmd, std::cout, std::cerr);
    }
    if (sel->parsed()) {
      sel_cmd.format = rjm::parse_format(sel_format);
      return rjm::cmd_select(sel_cmd, std::cout, std::cerr);
    }
    if (rep->parsed()) {
      return rjm::cmd_report(rep_cmd, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rjm::kExitInput;
  }
  return rjm::kExitInput;
}
