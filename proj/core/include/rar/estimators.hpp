#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rar/core_model.hpp"
#include "rar/marginal_screen.hpp"
#include "rar/wlasso.hpp"

namespace rar {

enum class Method { Lasso, AdaLasso, SisLasso, IsisLasso, Rar, Mrar };

std::string method_name(Method m);
Method parse_method(const std::string& name);

/// How MRAR picks the stage-2 solutions that define Q.
enum class Stage3Mode {
  Enumerate,  ///< every distinct Q along the stage-2 path
  Gic,        ///< the single Q at the GIC-selected stage-2 lambda
};

struct EstimatorConfig {
  SolverConfig solver;
  bool standardize = true;          ///< fit on standardized columns (reported paths stay on that scale)
  Index screen_size = 0;            ///< SIS/ISIS d_n; 0 means floor(n / log n)
  IsisOptions isis;                 ///< d is taken from screen_size
  int permutations = 10;            ///< m for RAR/MRAR
  std::uint64_t seed = 0;           ///< permutation seed
  std::optional<double> gamma;      ///< overrides the permutation threshold
  bool cap = true;                  ///< ceil(sqrt(n)) retention cap
  Stage3Mode stage3 = Stage3Mode::Enumerate;
  double gic_multiplier = 1.0;
};

struct Stage3Fit {
  IndexSet q;                        ///< unpenalized stage-2 discoveries
  std::vector<Index> stage2_indices; ///< stage-2 lambda indices whose active set gave q
  PenaltyProfile profile;
  SolutionPath path;
};

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct EstimatorOutput {
  Method method = Method::Lasso;
  SolutionPath primary_path;
  PenaltyProfile primary_profile;
  std::optional<RetentionResult> retention;
  std::optional<IndexSet> screened;   ///< SIS/ISIS selection
  std::optional<IndexSet> q_set;      ///< Stage3Mode::Gic only
  std::vector<Stage3Fit> stage3;
  bool degraded = false;              ///< RAR/MRAR with empty retention (plain lasso)
  bool standardized = false;
  Vector center;                      ///< column means removed before fitting
  Vector scale;                       ///< column scales divided out before fitting
  std::vector<StageTime> timings;
};

/// Data the paths were fitted on (standardized copy or the input itself).
Dataset working_data(const Dataset& data, const EstimatorConfig& config);

/// Maps a working-scale solution back to the original columns.
std::pair<CoefficientVector, double> to_original_scale(const EstimatorOutput& out, const CoefficientVector& beta,
                                                       double intercept);

EstimatorOutput run_lasso(const Dataset& data, const EstimatorConfig& config);
EstimatorOutput run_ada_lasso(const Dataset& data, const EstimatorConfig& config);
EstimatorOutput run_sis_lasso(const Dataset& data, const EstimatorConfig& config);
EstimatorOutput run_isis_lasso(const Dataset& data, const EstimatorConfig& config);
EstimatorOutput run_rar(const Dataset& data, const EstimatorConfig& config);
EstimatorOutput run_mrar(const Dataset& data, const EstimatorConfig& config);
EstimatorOutput run_method(Method method, const Dataset& data, const EstimatorConfig& config);

/// Adds MRAR stage 3 to a finished RAR output; `data` must be the input given to run_rar.
EstimatorOutput mrar_from_rar(const Dataset& data, EstimatorOutput rar, const EstimatorConfig& config);

/// Variants taking an already standardized working dataset (no copy is made).
EstimatorOutput run_method_on_working(Method method, const Dataset& working, const EstimatorConfig& config);
EstimatorOutput mrar_from_rar_on_working(const Dataset& working, EstimatorOutput rar, const EstimatorConfig& config);

}  // namespace rar
