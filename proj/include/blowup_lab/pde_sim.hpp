#pragma once

#include <functional>
#include <string>
#include <vector>

#include "blowup_lab/profiles.hpp"

namespace blab {

struct SimParams {
  int d = 7;
  int n = 1000;           // intervals of the reference grid
  double y_max = 1e3;
  double sinh_scale = 0.5;  // y = a sinh(xi): uniform below a, logarithmic beyond
  double cfl = 0.5;         // times 1 / Lipschitz bound of the explicit term
  double accuracy = 0.02;   // d tau <= accuracy * lambda_ref^2
  double trigger = 50.0;    // rescale when lambda_ref < trigger * y_1
  double stop_lambda = 1e-6;
  long max_steps = 2000000;
  double t_max = 1e30;
  int record_every = 1;
  int snapshot_every = 0;   // 0: none
};

struct SimState {
  int d = 7;
  std::vector<double> y;
  std::vector<double> u;     // w(y) with u(r, t) = w(r / scale)
  double t = 0.0;
  double dt = 0.0;
  double s = 0.0;            // renormalized time, ds = dt / lambda_est^2
  double scale = 1.0;        // product of rescale factors
  double lambda_est = 0.0;   // physical 1 / u_r(0, t)
  int rescale_count = 0;
  double outer_value = 0.0;
};

std::vector<double> make_sim_grid(const SimParams& p);
SimState make_sim_state(const std::function<double(double)>& u0, const SimParams& p);

// 1 / w_y(0) from the odd fit a1 y + a3 y^3 through the two innermost nodes
double reference_lambda(const SimState& s);
// w at arbitrary reference radius: odd fit inside the second node, monotone cubic beyond,
// outer value past y_max
std::function<double(double)> sim_interpolant(const SimState& s);

// one linearly split IMEX step of size dtau in the reference frame (physical dt = scale^2 dtau)
SimState step(const SimState& s, double dtau);
// largest stable d tau for the explicit part under p
double stable_dtau(const SimState& s, const SimParams& p);
// w(y) <- w(lambda_ref y), scale *= lambda_ref
SimState rescale(const SimState& s);

enum class TypeClass { TypeI, TypeII, Undetermined };
const char* type_name(TypeClass c);

struct LambdaSample {
  double t = 0.0;
  double lambda = 0.0;
  double dt = 0.0;  // physical time since the previous sample, summed step by step
};

struct RescaleEvent {
  double t = 0.0;
  double before = 0.0;  // scale * lambda_ref before
  double after = 0.0;
};

struct BlowupFit {
  double T = 0.0;
  double remaining_end = 0.0;  // T - t at the last sample
  std::vector<LambdaSample> lambda_series;
  TypeClass type_class = TypeClass::Undetermined;
  double rate_slope = 0.0;     // log rho against log|log(T-t)|
  double rate_residual = 0.0;
  double rho_slope = 0.0;      // log rho against log(T-t)
  bool rho_decreasing = false;
  double decades = 0.0;        // of T - t used
};

struct SimRun {
  bool blew_up = false;
  bool decayed = false;
  long steps = 0;
  BlowupFit fit;
  std::vector<RescaleEvent> events;
  std::vector<SimState> snapshots;
  std::string note;
};

SimRun run_to_blowup(const std::function<double(double)>& u0, const SimParams& p);

// u0(r) = A (pi/2) tanh(r)
std::function<double(double)> tanh_data(double A);

// T - t_i from backward sums of the sample increments (t differences when dt is absent)
std::vector<double> remaining_times(const std::vector<LambdaSample>& s, double remaining_end);
// T - t_end = lambda^2 / |d lambda^2 / dt| from a regression over the samples with lambda <= 2 lambda_end
double estimate_remaining(const std::vector<LambdaSample>& s);
// fills type_class and slopes on the window that drops the first skip_decades and the last
// tail_decades of T - t
BlowupFit classify(std::vector<LambdaSample> series, double remaining_end, double skip_decades = 1.0,
                   double tail_decades = 1.0);

struct EnergyResult {
  double value = 0.0;
  bool divergent = false;
};

// trapezoidal on the given nodes; divergent when r >= r_max / 2 carries more than 1e-3 of the total
EnergyResult energy(const std::vector<double>& r, const std::vector<double>& u, int d);

struct Decomposition {
  double lambda = 0.0;
  std::vector<double> b;
  RadialProfile q;
  int iterations = 0;
  double residual = 0.0;
};

// Q + sum_k b_k T_k
RadialProfile ansatz_profile(const ProfileFamily& fam, const std::vector<double>& b);

// u given as a function of the physical radius
Decomposition decompose_modulation(const std::function<double(double)>& u, const ProfileFamily& fam,
                                   const PhiBasis& basis, double lambda_guess,
                                   std::vector<double> b_guess = {});

Decomposition decompose_state(const SimState& s, const ProfileFamily& fam, const PhiBasis& basis);

// E_(2k) = int |L^k q|^2 y^6 for each k
std::vector<double> monitor_energies(const RadialProfile& q, const LinearizedContext& ctx,
                                     const std::vector<int>& k_list, double y_cut = -1.0);

}  // namespace blab
