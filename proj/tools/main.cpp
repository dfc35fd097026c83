#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pintgfm/experiment.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

int cmd_run(const std::string& config_path, const std::string& out_dir, bool svg) {
  namespace fs = std::filesystem;
  const pintgfm::ExperimentConfig config = pintgfm::parse_config_file(config_path);
  const pintgfm::ExperimentResult result = pintgfm::run_experiment(config);

  fs::create_directories(out_dir);
  const std::string stem = fs::path(config_path).stem().string();

  auto emit = [&](const std::string& name, auto writer) {
    const std::string path = (fs::path(out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pintgfm::ParameterError("cannot write " + path);
    writer(out);
    std::cout << path << "\n";
  };

  emit(stem + ".csv", [&](std::ostream& out) { pintgfm::write_csv(result, out); });
  if (config.outputs.diagnostics)
    emit(stem + "_diagnostics.csv",
         [&](std::ostream& out) { pintgfm::write_diagnostics_csv(result, out); });
  if (svg) emit(stem + ".svg", [&](std::ostream& out) { pintgfm::write_svg(result, out); });
  return 0;
}

int cmd_reproduce(const std::string& target, const std::string& out_dir, bool svg) {
  for (const auto& path : pintgfm::reproduce(target, out_dir, svg)) std::cout << path << "\n";
  return 0;
}

int cmd_bound(double alpha, double beta, double gamma, double delta, int n, int k) {
  if (n < 1) throw pintgfm::ParameterError("bound: n must be >= 1");
  const pintgfm::BoundCoefficients c{alpha, beta, gamma, delta};
  std::cout.precision(12);
  std::cout << delta * pintgfm::theta(n - 1, k, c) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-iteration convergence analysis for iterative parallel-in-time methods "
               "on the Dahlquist equation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", target;
  bool svg = false;
  double alpha = 0, beta = 0, gamma = 0, delta = 1;
  int n = 1, k = 1;

  auto* run = app.add_subcommand("run", "Run the experiments described by a config file");
  run->add_option("config", config_path, "config file (key = value or JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--svg", svg, "also write an SVG plot");

  auto* rep = app.add_subcommand("reproduce", "Run a built-in comparison experiment");
  rep->add_option("target", target, "fig2, fig3, fig4, fig5, fig6 or table3")->required();
  rep->add_option("--out", out_dir, "output directory");
  rep->add_flag("--svg", svg, "also write SVG plots");

  auto* bound = app.add_subcommand("bound", "Evaluate the closed-form error bound delta*theta_n^k");
  bound->add_option("--alpha", alpha, "norm of the previous-block, previous-iterate operator")
      ->required();
  bound->add_option("--beta", beta, "norm of the previous-block, current-iterate operator")
      ->required();
  bound->add_option("--gamma", gamma, "norm of the same-block, previous-iterate operator")
      ->required();
  bound->add_option("--delta", delta, "maximum initial-guess error")->required();
  bound->add_option("--n", n, "block index (>= 1)")->required();
  bound->add_option("--k", k, "iteration index (>= 1)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir, svg);
    if (*rep) return cmd_reproduce(target, out_dir, svg);
    if (*bound) return cmd_bound(alpha, beta, gamma, delta, n, k);
  } catch (const pintgfm::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const pintgfm::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalError;
  }
  return 0;
}
