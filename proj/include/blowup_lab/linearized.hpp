#pragma once

#include <vector>

#include "blowup_lab/grid.hpp"
#include "blowup_lab/stationary.hpp"

namespace blab {

struct LinearizedContext {
  StationaryMap Q;
  GridPtr grid;
  RadialProfile LQ;  // T_0
  RadialProfile V;   // Lambda log(LQ)
  RadialProfile Z;   // 6 cos 2Q
  RadialProfile Zt;  // (V+1)^2 + 5(V+1) - Lambda V
  RadialProfile Gamma;
  double a0 = 0.0;
  double a1 = 0.0;
};

LinearizedContext build_context(const StationaryMap& Q);

RadialProfile apply_A(const LinearizedContext& c, const RadialProfile& f);
RadialProfile apply_Astar(const LinearizedContext& c, const RadialProfile& f);
RadialProfile apply_L(const LinearizedContext& c, const RadialProfile& f);
RadialProfile apply_Ltilde(const LinearizedContext& c, const RadialProfile& f);
RadialProfile apply_L_power(const LinearizedContext& c, const RadialProfile& f, int k);

RadialProfile compute_Gamma(const LinearizedContext& c);

struct Inverse {
  RadialProfile w;
  RadialProfile Aw;
};

Inverse invert_L(const LinearizedContext& c, const RadialProfile& f);
RadialProfile invert_L_power(const LinearizedContext& c, const RadialProfile& f, int k);

std::vector<RadialProfile> adapted_derivatives(const LinearizedContext& c, const RadialProfile& f,
                                               int i_max);

RadialProfile cutoff_profile(GridPtr g, double M);
// L(chi_M f) for f in the kernel of L, written through derivatives of chi so it vanishes where chi is flat
RadialProfile L_of_cut_kernel(const LinearizedContext& c, const RadialProfile& f, double M);

struct PhiM {
  double M = 0.0;
  RadialProfile Phi;
  std::vector<double> c;
  std::vector<RadialProfile> Lj;  // L^j(chi_M LQ), j = 0..L
  double chiLQ_LQ = 0.0;          // <chi_M LQ, LQ>
};

// T[k] = T_k with T[0] = LQ; needs T.size() > L
PhiM build_PhiM(const LinearizedContext& c, double M, int L, const std::vector<RadialProfile>& T);

// L^(k+1)(phi f) as (A* A)^(k+1)(phi f) and through the phi_{2k+2,i} recurrence; relative max discrepancy
double leibniz_consistency(const LinearizedContext& c, const RadialProfile& phi, const RadialProfile& f,
                           int k, double y_lo = 1e-2, double y_hi = 1e2);

}  // namespace blab
