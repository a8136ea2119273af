#pragma once

#include <memory>
#include <string>
#include <vector>

#include "blowup_lab/linearized.hpp"

namespace blab {

struct ChiMoments {
  double I0 = 0.0;  // int_1^2 chi
  double I1 = 0.0;  // int_1^2 x chi
  double I2 = 0.0;  // int_1^2 x^2 chi
  double C_chi = 0.0;
};

// (1 + I0)^2 (1/3 + I2) / (1/2 + I1)^3
double c_chi(double I0, double I1, double I2);
ChiMoments chi_moments();

struct ProfileFamily {
  std::shared_ptr<const LinearizedContext> ctx;
  int L = 2;
  std::vector<RadialProfile> T;  // T[0] = LQ
  double a0 = 0.0, a1 = 0.0, C0 = 0.0, C1 = 0.0, alpha = 0.0;
  ChiMoments chi;
};

// T_k = -L^-1 T_(k-1) for k <= max(L, t_max)
ProfileFamily build_family(std::shared_ptr<const LinearizedContext> ctx, int L = 2, int t_max = 4);

struct SigmaConstants {
  double b1 = 0.0;
  double B0 = 0.0;
  double B = 0.0;
  double C_b1 = 0.0;
  double m_LQ2 = 0.0;   // int (LQ)^2 chi_B0 x^6
  double m_GLQ = 0.0;   // int Gamma LQ chi_B0 x^6
};

// exact integral formulas for B and C_b1 at this b1
SigmaConstants sigma_constants(const ProfileFamily& fam, double b1);

struct SigmaBundle {
  SigmaConstants k;
  RadialProfile source;  // L Sigma
  RadialProfile Sigma;
  RadialProfile SigmaBar;  // Sigma - C_b1 T_1
};

SigmaBundle build_sigma(const ProfileFamily& fam, double b1);

// theta_k = Lambda T_k - (2k-2) T_k - (-1)^(k+1) L^(-k+1) Sigma
RadialProfile build_theta(const ProfileFamily& fam, int k, const SigmaBundle& sigma);

struct SProfiles {
  std::vector<double> b;
  std::vector<RadialProfile> S;  // S[k], k = 0 .. L+2; S[0] = S[1] = 0
  std::vector<RadialProfile> F;  // L S_k = -F_k
  // dS[k][j] = dS_k / db_j for j = 1 .. L
  std::vector<std::vector<RadialProfile>> dS;
  std::vector<RadialProfile> theta;  // theta[k], k = 1 .. L
};

// b = (b_1, ..., b_L); sigma must be built at b_1
SProfiles build_S(const ProfileFamily& fam, const SigmaBundle& sigma, const std::vector<double>& b);

// (3/y^2) P_i, the degree-i part of the Taylor expansion of the nonlinearity
RadialProfile nonlinear_part(const ProfileFamily& fam, const std::vector<double>& b,
                             const std::vector<RadialProfile>& S, int i);

RadialProfile assemble_Qb(const ProfileFamily& fam, const SProfiles& S);
RadialProfile assemble_Qb_localized(const ProfileFamily& fam, const SProfiles& S, double B1);
// B_1 = B_0^(1 + eta)
double B1_of(const SigmaConstants& k, double eta);

struct PsiParts {
  RadialProfile Psi;
  RadialProfile Mod;
};

// b_dot empty means the modulation law (Mod = 0)
PsiParts residual_Psi(const ProfileFamily& fam, const SigmaBundle& sigma, const SProfiles& S,
                      std::vector<double> b_dot = {}, double B1_localize = -1.0);

// modulation law (b_k)_s = -(2k - 2 + C_b1) b_1 b_k + b_(k+1)
std::vector<double> modulation_bdot(const std::vector<double>& b, double C_b1);

// int_{y <= Y} |f|^2 / (1 + y^w) y^6 dy
double weighted_norm2(const RadialProfile& f, double w_power, double Y);

struct AdmissibilityReport {
  bool ok = false;
  int origin_power = 0;
  bool odd_parity = false;
  std::vector<double> tail_slopes;  // of d^j f / dy^j, j = 0..2
  std::string detail;
};

AdmissibilityReport check_admissible(const RadialProfile& f, int p1, int p2, double y_a = 1e2,
                                     double y_b = 1e3, double slope_tol = 0.05);

struct PhiBasis {
  double M = 0.0;
  int L = 0;
  PhiM phi;
  std::vector<RadialProfile> LkPhi;  // L^k Phi_M, k = 0..L
  double LQ_Phi = 0.0;               // <LQ, Phi_M>
};

PhiBasis make_phi_basis(const ProfileFamily& fam, double M);

}  // namespace blab
