#pragma once

#include <functional>
#include <vector>

#include "blowup_lab/profiles.hpp"

namespace blab {

// C_b1 as a function of b1 (the full coefficient, c sqrt(b1) in the model law)
using CLaw = std::function<double(double)>;

CLaw c_model(double c);
// tabulated from the Sigma integrals on [1e-6, 1e-2], continued as a + b sqrt(b1) below
CLaw c_integral(const ProfileFamily& fam, int samples = 25);

struct ModulationState {
  std::vector<double> b;
  double log_lambda = 0.0;
  double s = 0.0;
  double t = 0.0;
  double lambda() const;
};

struct ModulationRhs {
  std::vector<double> db;
  double dlog_lambda = 0.0;
  double dlambda = 0.0;
  double dt = 0.0;
};

ModulationRhs modulation_rhs(const ModulationState& st, const CLaw& C);

// b_k(s0) = s0^(-k + 1/3) / 2, lambda = 1, t = 0
ModulationState default_initial_state(int L, double s0 = 100.0);

struct IntegrateOptions {
  double rtol = 1e-12;
  double atol = 1e-30;
  int per_decade = 200;
};

std::vector<ModulationState> integrate_modulation(const ModulationState& st0, double s_end, const CLaw& C,
                                                  const IntegrateOptions& o = {});

struct LambdaFit {
  double kappa = 0.0;
  double c = 0.0;
  double exponent = 1.0 / 3.0;
  double rel_residual = 0.0;
};

// log lambda = -kappa s^p + c on [s_lo, s_hi]; p fixed at 1/3 unless free_exponent
LambdaFit fit_log_lambda(const std::vector<ModulationState>& tr, double s_lo, double s_hi,
                         bool free_exponent = false);

struct BlowupTime {
  double T = 0.0;
  double tail_error = 0.0;
  LambdaFit fit;
  // log(T - t_i) for every trajectory sample
  std::vector<double> log_remaining;
};

BlowupTime blowup_time(const std::vector<ModulationState>& tr);

struct RateReport {
  double slope = 0.0;          // log(lambda / sqrt(T-t)) against log|log(T-t)|
  double slope_residual = 0.0;
  double R_variation = 0.0;    // (max - min) / mean of lambda |log(T-t)| / sqrt(T-t)
  double s_lo = 0.0, s_hi = 0.0;
};

// window: the last two decades of s
RateReport rate_diagnostics(const std::vector<ModulationState>& tr, const BlowupTime& bt);

// slope of the same regression for a synthetic lambda(t) series given as (log(T-t), log lambda)
double rate_slope(const std::vector<double>& log_remaining, const std::vector<double>& log_lambda);

// max over the trajectory of |b_k| / (b_1^(k + 1/2 + eta/10)), k >= 2
double bootstrap_ratio(const std::vector<ModulationState>& tr, double eta);

}  // namespace blab
