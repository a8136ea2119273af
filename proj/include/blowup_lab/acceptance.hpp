#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "blowup_lab/profiles.hpp"

namespace blab {

struct Check {
  std::string name;
  double value = 0.0;
  std::string bound;  // human-readable pass condition
  bool pass = false;
};

struct CriterionResult {
  std::string id;
  bool pass = false;
  double seconds = 0.0;
  double budget = 0.0;  // runtime budget in seconds
  std::vector<Check> checks;
  std::string note;
  std::string error;  // non-empty when the stage threw
};

struct AcceptanceSettings {
  std::uint64_t seed = 1;
  int hardy_samples = 1000;
  int coercivity_samples = 1000;
  // multiplies solver tolerances only; acceptance thresholds are fixed
  double tol_scale = 1.0;
};

// lazily built d = 7 objects shared by the criteria
class Workbench {
 public:
  explicit Workbench(AcceptanceSettings s = {});
  const AcceptanceSettings& settings() const { return s_; }
  const StationaryMap& Q7();
  std::shared_ptr<const LinearizedContext> context();
  const ProfileFamily& family();

 private:
  AcceptanceSettings s_;
  std::unique_ptr<StationaryMap> q_;
  std::shared_ptr<const LinearizedContext> ctx_;
  std::unique_ptr<ProfileFamily> fam_;
};

// max y^2 |L(LQ)| / max |LQ|
double kernel_residual(const LinearizedContext& c);
// max |-(Gamma' LQ - Gamma LQ') y^6 - 1| on [lo, hi]
double wronskian_error(const LinearizedContext& c, double lo = 0.1, double hi = 100.0);
// L f against A* A f on interior nodes below y = 1e3, relative to max |L f|
double composition_error(const LinearizedContext& c, const RadialProfile& f);
// |<A f, g> - <f, A* g>| / (|A f| |g|)
double adjoint_error(const LinearizedContext& c, const RadialProfile& f, const RadialProfile& g);
// coarser grid for the Leibniz recurrence (n = 2500 on [1e-3, 1e3]); repeated stencils amplify roundoff on fine grids
LinearizedContext leibniz_context();
// Leibniz recurrence on that grid with phi = exp(-y^2), f = LQ
double leibniz_probe(int k);

const std::vector<std::string>& criterion_ids();
// stage that owns each criterion, in pipeline order
std::string criterion_stage(const std::string& id);

CriterionResult run_criterion(const std::string& id, Workbench& wb);

}  // namespace blab
