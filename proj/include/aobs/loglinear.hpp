#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "aobs/capture_data.hpp"

namespace aobs {

// Heterogeneity column shapes for the Poisson log-linear contingency fit:
//   darroch           h(j) = j^2 / 2
//   indirect_poisson  h(j) = 2^j - 1
//   indirect_gamma    h(j) = -log(j + 3.5) + log(3.5)
//   homogeneous       no column (the classical equal-catchability model)
enum class LogLinearFamily { darroch, indirect_poisson, indirect_gamma, homogeneous };

const char* family_name(LogLinearFamily fam);
LogLinearFamily family_by_name(const std::string& name);
double h_value(LogLinearFamily fam, int captures);

struct LogLinearSpec {
  int lists = 0;
  LogLinearFamily family = LogLinearFamily::darroch;
  std::vector<std::uint32_t> cells;  // all 2^T - 1 observable patterns, ascending
  Eigen::MatrixXd design;            // intercept, T list columns, optional h column
  int h_column = -1;
};

LogLinearSpec build_design(int lists, LogLinearFamily family);

struct LogLinearFit {
  LogLinearFamily family = LogLinearFamily::darroch;
  int lists = 0;
  Eigen::VectorXd coef;       // beta0, beta_1..T, tau (when present)
  Eigen::MatrixXd cov;        // inverse observed information
  Eigen::VectorXd fitted;     // fitted cell means, aligned with spec.cells
  std::int64_t m = 0;
  double n_hat = 0.0;         // m + exp(beta0)
  double ci_lo = 0.0;         // lognormal interval on the zero cell
  double ci_hi = 0.0;
  int iterations = 0;
  double final_grad_norm = 0.0;

  double tau() const;  // heterogeneity coefficient; errors for homogeneous
};

// Newton/IRLS for the Poisson likelihood over the 2^T - 1 observable cells;
// converges when the gradient max-norm drops below 1e-8, caps at 100 passes.
LogLinearFit fit_loglinear(const LogLinearSpec& spec, const CaptureDataset& data);

// N_alpha implied by the fitted parametric mixing distribution: N_hat times
// the G*-mass of {theta : p(theta) > alpha} under the fitted family, computed
// by adaptive quadrature (series for the Poisson family).
double estimate_n_alpha_parametric(const LogLinearFit& fit, double alpha);

}  // namespace aobs
