#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blowup_lab/series.hpp"

namespace blab {

struct RadialGrid {
  std::vector<double> y;
  int d = 7;
  // integrates f(y) y^(d-1) dy over [y_1, y_n] by dot product with nodal values
  std::vector<double> quad_weights;
  // derivatives at nodes below this radius come from the origin series when one is attached
  double series_radius = 0.0;

  // five-point stencils: node i uses values at stencil_start[i] .. +4
  std::vector<std::array<double, 5>> d1, d2;
  std::vector<int> stencil_start;
  // cubic rule on [y_i, y_(i+1)] from nodes cell_start[i] .. +3
  std::vector<std::array<double, 4>> cell_w;
  std::vector<int> cell_start;

  int size() const { return static_cast<int>(y.size()); }
  double ymin() const { return y.front(); }
  double ymax() const { return y.back(); }
  // first node index with y[i] >= v
  int index_at_least(double v) const;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_log_grid(double y_min, double y_max, int n, double cluster_exponent = 1.0, int d = 7,
                      double series_radius = -1.0);

struct TailModel {
  double coefficient = 0.0;
  double exponent = 0.0;
  std::vector<double> corrections;  // coefficients of y^(exponent - 1), y^(exponent - 2), ...
  double y_tail = 0.0;
};

struct RadialProfile {
  GridPtr grid;
  std::vector<double> v;
  std::optional<Series> origin;
  std::optional<TailModel> tail;

  RadialProfile() = default;
  RadialProfile(GridPtr g, std::vector<double> values, std::optional<Series> s = std::nullopt)
      : grid(std::move(g)), v(std::move(values)), origin(std::move(s)) {}

  int size() const { return static_cast<int>(v.size()); }
  double operator[](int i) const { return v[i]; }
  double y(int i) const { return grid->y[i]; }
  // cubic interpolation in log y; series below the first node
  double at(double y) const;
};

RadialProfile sample(GridPtr g, const std::function<double(double)>& f,
                     std::optional<Series> s = std::nullopt);
RadialProfile power_profile(GridPtr g, int k);

RadialProfile operator+(const RadialProfile& f, const RadialProfile& g);
RadialProfile operator-(const RadialProfile& f, const RadialProfile& g);
RadialProfile operator*(const RadialProfile& f, const RadialProfile& g);
RadialProfile operator*(double c, const RadialProfile& f);
RadialProfile operator-(const RadialProfile& f);
RadialProfile divide(const RadialProfile& f, const RadialProfile& g);
RadialProfile shift_power(const RadialProfile& f, int k);
// pointwise map with no origin data carried over
RadialProfile map_values(const RadialProfile& f, const std::function<double(double, double)>& fn);

RadialProfile differentiate(const RadialProfile& f, int order);
RadialProfile lambda_op(const RadialProfile& f);
RadialProfile integrate_cumulative(const RadialProfile& f, int weight_power);
// int_0^ymax f y^w dy; the segment below the first node is dropped when no series is attached
double integrate_total(const RadialProfile& f, int weight_power);
// <f, g> with the y^(d-1) measure, optionally restricted to y <= y_cut
double inner(const RadialProfile& f, const RadialProfile& g, double y_cut = -1.0);
double norm(const RadialProfile& f, double y_cut = -1.0);

struct TailFit {
  double coefficient = 0.0;
  double exponent = 0.0;
  double fit_error = 0.0;
  bool sign_change = false;
};

TailFit fit_tail(const RadialProfile& f, double y_a, double y_b);
// least squares f ~ sum_k c_k y^(powers_k) on the window
std::vector<double> fit_powers(const RadialProfile& f, double y_a, double y_b,
                               const std::vector<double>& powers);
// local log-log slope of |f| between two radii
double loglog_slope(const RadialProfile& f, double y_a, double y_b);

struct CacheHeader {
  std::string grid_spec;
  int d = 7;
  std::string provenance;
  std::string tolerances;
  std::string params;
};

void write_profile_cache(const std::string& path, const CacheHeader& h, const std::vector<double>& data);
// returns false when the file is missing, malformed or fails its checksum
bool read_profile_cache(const std::string& path, CacheHeader& h, std::vector<double>& data);
std::string checksum_hex(const std::vector<double>& data);
std::string checksum_hex(const std::string& data);

}  // namespace blab
