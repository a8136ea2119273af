#pragma once

#include "blowup_lab/acceptance.hpp"

// one d = 7 ground state, context and family per test process
inline blab::Workbench& bench() {
  static blab::Workbench wb;
  return wb;
}

inline double max_abs_on(const blab::RadialProfile& f, double lo, double hi) {
  double m = 0;
  for (int i = 0; i < f.size(); ++i)
    if (f.y(i) >= lo && f.y(i) <= hi) m = std::max(m, std::abs(f[i]));
  return m;
}
