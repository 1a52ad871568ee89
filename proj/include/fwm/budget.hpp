#pragma once

// Detection-efficiency chains and multi-photon coincidence rates.

#include <string>
#include <utility>
#include <vector>

#include "fwm/error.hpp"

namespace fwm {

struct EfficiencyStage {
  std::string name;
  double transmission = 1.0;
};

struct EfficiencyChain {
  std::string arm;
  std::vector<EfficiencyStage> stages;

  void validate() const {
    for (const auto& s : stages)
      if (!(s.transmission >= 0.0 && s.transmission <= 1.0))
        throw InvalidArgument("chain " + arm + ": stage '" + s.name +
                              "' transmission must be in [0, 1]");
  }

  EfficiencyChain& add(std::string name, double transmission) {
    stages.push_back({std::move(name), transmission});
    return *this;
  }
};

inline double chain_efficiency(const EfficiencyChain& chain) {
  chain.validate();
  double eta = 1.0;
  for (const auto& s : chain.stages) eta *= s.transmission;
  return eta;
}

inline EfficiencyChain concatenate(const EfficiencyChain& a, const EfficiencyChain& b) {
  EfficiencyChain out{a.arm, a.stages};
  out.stages.insert(out.stages.end(), b.stages.begin(), b.stages.end());
  return out;
}

/// rep * p^(n/2) * prod(mu) for n detected photons from n/2 pair sources.
inline double nfold_rate(double repetition_rate, double pair_probability,
                         const std::vector<double>& efficiencies) {
  if (!(repetition_rate >= 0.0)) throw InvalidArgument("nfold_rate: repetition rate must be >= 0");
  if (!(pair_probability >= 0.0 && pair_probability <= 1.0))
    throw InvalidArgument("nfold_rate: pair probability must be in [0, 1]");
  if (efficiencies.size() % 2 != 0)
    throw InvalidArgument("nfold_rate: photon count must be even, got " +
                          std::to_string(efficiencies.size()));
  double rate = repetition_rate;
  for (std::size_t k = 0; k < efficiencies.size() / 2; ++k) rate *= pair_probability;
  for (double mu : efficiencies) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidArgument("nfold_rate: efficiency must be in [0, 1]");
    rate *= mu;
  }
  return rate;
}

/// Chance coincidences of n independent detectors: prod(singles) * window^(n-1).
inline double accidental_rate(const std::vector<double>& singles_rates, double window) {
  if (!(window >= 0.0)) throw InvalidArgument("accidental_rate: window must be >= 0");
  if (singles_rates.empty()) return 0.0;
  double rate = 1.0;
  for (double s : singles_rates) {
    if (!(s >= 0.0)) throw InvalidArgument("accidental_rate: singles rates must be >= 0");
    rate *= s;
  }
  for (std::size_t k = 1; k < singles_rates.size(); ++k) rate *= window;
  return rate;
}

struct RateReport {
  double repetition_rate = 0.0;
  double pair_probability = 0.0;
  std::vector<double> efficiencies;
  double nfold_rate = 0.0;
  double accidental_rate = 0.0;
};

/// Singles per detector are estimated as rep * p * mu.
inline RateReport make_rate_report(double repetition_rate, double pair_probability,
                                   const std::vector<double>& efficiencies,
                                   double coincidence_window) {
  RateReport r;
  r.repetition_rate = repetition_rate;
  r.pair_probability = pair_probability;
  r.efficiencies = efficiencies;
  r.nfold_rate = fwm::nfold_rate(repetition_rate, pair_probability, efficiencies);
  std::vector<double> singles;
  for (double mu : efficiencies) singles.push_back(repetition_rate * pair_probability * mu);
  r.accidental_rate = fwm::accidental_rate(singles, coincidence_window);
  return r;
}

/// Measured-collection chains of the 597/860 nm source.
inline EfficiencyChain paper_signal_chain() {
  EfficiencyChain c{"signal", {}};
  c.add("blocking filter", 0.81).add("detector", 0.59).add("coupling, PCF and dichroic", 0.439);
  return c;
}

inline EfficiencyChain paper_idler_chain() {
  EfficiencyChain c{"idler", {}};
  c.add("blocking filter", 0.65).add("detector", 0.40).add("coupling, PCF and dichroic", 0.692);
  return c;
}

}  // namespace fwm
