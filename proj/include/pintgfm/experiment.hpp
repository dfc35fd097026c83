#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pintgfm/bounds.hpp"

namespace pintgfm {

/// One level of an experiment: a collocation method on a node family, or a
/// Runge-Kutta method on equidistant steps.
struct LevelConfig {
  IntegratorSpec::Kind kind = IntegratorSpec::Kind::Collocation;
  NodeFamily family = NodeFamily::LobattoLegendre;  // collocation
  int num_nodes = 1;                                // collocation node count / rk steps
  RKMethod rk;                                      // rk
  RKFormulation formulation = RKFormulation::Volume;
  bool include_left = false;  // rk volume: nodes {0, ..., 1} with num_nodes steps

  BlockDiscretization make_disc() const;
  IntegratorSpec integrator() const;
};

/// Which CSV columns an experiment emits.
struct OutputSelection {
  bool volume_error = true;
  bool interface_error = true;
  bool gfm_bound = true;
  bool interface_estimate = true;
  bool gander_hairer = true;
  bool linear_bound = true;
  bool diagnostics = true;
};

struct ExperimentConfig {
  Complex lambda{0.0, 1.0};
  double t_end = 1.0;
  Complex u0{1.0, 0.0};
  int num_blocks = 1;
  LevelConfig fine;
  std::optional<LevelConfig> coarse;
  ApproxSpec approx;
  std::vector<MethodSpec> methods;
  int iterations = 10;
  std::uint64_t seed = 0;
  OutputSelection outputs;

  double dt() const { return t_end / num_blocks; }
  Complex lam_dt() const { return lambda * dt(); }
};

/// Parses a flat key = value config (sections per method) or the JSON
/// equivalent; the format is chosen by content.  Throws ParameterError
/// listing every offending field.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

struct MethodResult {
  std::string method;
  IterationRun run;
  BoundCoefficients coefficients;
  InterfaceCoefficients interface_coefficients;
  RealMatrix gfm_bound;           // volume GFM bound
  RealMatrix interface_estimate;  // interface approximation (estimate for M > 1)
  bool interface_is_estimate = false;
  RealMatrix gander_hairer;
  RealMatrix linear_bound;
  double inf_norm_iteration_matrix = 0.0;
  double spectral_radius_iteration_matrix = 0.0;
  double consistency_residual = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<MethodResult> methods;
};

/// Runs every configured method with a shared initial guess.  The env var
/// PINT_GFM_SEED, when set, overrides the config seed.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Data rows: method,n,k,err_volume,err_interface,gfm_bound,
/// interface_estimate,gander_hairer_bound,linear_bound.  Unselected columns
/// stay empty; bound columns carry delta at k = 0.
void write_csv(const ExperimentResult& result, std::ostream& out);

/// One row per method: coefficients, iteration-matrix diagnostics and the
/// consistency residual; complex values formatted as re+imj.
void write_diagnostics_csv(const ExperimentResult& result, std::ostream& out);

/// Semilog error-versus-iteration chart at the last block.
void write_svg(const ExperimentResult& result, std::ostream& out);

std::string format_complex(Complex z);
Complex parse_complex(const std::string& text);

/// Max modulus error of a propagator applied sequentially, against the
/// exact solution u0 * exp(lambda t), taken over every node of every block.
/// The coarse-level propagators are run and measured on the coarse nodes.
struct PropagatorAccuracy {
  std::string propagator;
  double max_abs_error = 0.0;
};

std::vector<PropagatorAccuracy> propagator_errors(const TwoLevelSetup& setup, Complex u0,
                                                  Complex lambda, double dt, int num_blocks);
std::vector<PropagatorAccuracy> propagator_errors(const BlockOperatorPair& fine,
                                                  const ComplexMatrix& phi_approx, Complex u0,
                                                  Complex lambda, double dt, int num_blocks);

/// Built-in experiment configurations reproducing the comparison studies:
/// fig2_left/right, fig3_left/right, fig4, fig5, fig6_left/right.
ExperimentConfig builtin_config(const std::string& name);

/// Writes the CSV (and optional SVG) files for a reproduction target:
/// fig2, fig3, fig4, fig5, fig6 or table3.  Returns the written file names.
std::vector<std::string> reproduce(const std::string& target, const std::string& out_dir,
                                   bool svg);

} // namespace pintgfm
