// Prints the ideal squeezing floor and the full-model minimum for the default parameters.

#include <cstdio>

#include "optomech/spectra.hpp"

int main() {
  using namespace optomech;
  SystemParams p;
  p.mode.measured_coupling = to_angular(580e3);

  const DriftSystem sys = build_drift(p);
  const double bound = squeezing_bound(p, p.mode);
  const auto best = spectrum_minimum(sys, to_angular(1.5e6), to_angular(2.5e6));
  const double eta = p.optics.eta_d * p.optics.outcoupling();

  std::printf("Gamma_opt/2pi   %10.2f kHz\n", to_hz(measurement_rate(p)) / 1e3);
  std::printf("bound           %10.4f (%.2f dB)\n", bound, db(bound));
  std::printf("S_out minimum   %10.4f at %.4f MHz\n", best.value, to_hz(best.omega) / 1e6);
  std::printf("after eta=%.3f  %10.4f (%.2f dB)\n", eta, detection_chain(best.value, eta, 0.0),
              db(detection_chain(best.value, eta, 0.0)));
  std::printf("n_eff           %10.3f\n", effective_occupation(sys, 0));
}
