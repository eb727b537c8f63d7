#pragma once

#include "oracles.hpp"
#include "smtpcps/controller.hpp"
#include "smtpcps/dynamics.hpp"

namespace fixture {

using namespace smtpcps;

inline LinearModel reference_model() {
  LinearModel m;
  m.A.resize(2, 2);
  m.A << 1.0, 0.0975, 0.0, 0.9512;
  m.B.resize(2);
  m.B << 0.0246, 0.4877;
  m.Ts = 0.1;
  return m;
}

inline Polytope box(double half_width) { return Polytope::symmetric_box(oracle::v2(half_width, half_width)); }

inline UncertainModel controller_model() { return {reference_model(), box(0.12)}; }

inline UncertainModel eavesdropper_model(double alpha) { return {reference_model(), scale(box(0.12), alpha)}; }

inline TerminalGain reference_gain() {
  TerminalGain g;
  g.K.resize(2);
  g.K << -13.27, -2.26;
  return g;
}

/// The N = 250 reference family, built once per test binary.
inline const ControllableFamily& reference_family() {
  static const ControllableFamily fam = build_family(controller_model(), reference_gain(), 6.0, 250, 0.05);
  return fam;
}

}  // namespace fixture
