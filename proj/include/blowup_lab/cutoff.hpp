#pragma once

namespace blab {

// smooth nonincreasing ramp: 1 on [0,1], 0 on [2,inf)
double chi(double x);
double chi_d1(double x);
double chi_d2(double x);

}  // namespace blab
