#include "forkjoin/presets.hpp"

#include "forkjoin/error.hpp"

namespace forkjoin {

namespace {

constexpr double kMu3Heavy = 1.0 / 0.95;     // ~ the type-a arrival rate
constexpr double kMu3Mid = 1.0 / 0.7125;     // between lambda_a and muA
constexpr double kMu3Fast = 1.0 / 0.35;      // above muA
constexpr double kHeavy = 1.0 / 0.95;
constexpr double kLight = 1.0 / 0.7;

std::array<InstancePreset, 36> make_table() {
  std::array<InstancePreset, 36> t{};
  const double mu3_levels[3] = {kMu3Heavy, kMu3Mid, kMu3Fast};
  auto fill = [&](int id, double mu3, double mu5, double mu6, double mu7, int var) {
    InstancePreset& p = t[id - 1];
    p.id = id;
    p.mu3 = mu3;
    p.mu5 = mu5;
    p.mu6 = mu6;
    p.mu7 = mu7;
    switch (var) {
      case 0:
        p.service_family = DistFamily::kErlangK;
        p.variability = "low";
        break;
      case 1:
        p.service_family = DistFamily::kExponential;
        p.variability = "moderate";
        break;
      default:
        p.service_family = DistFamily::kGammaScv;
        p.variability = "high";
        break;
    }
  };
  // Instances 1..18: joins light; mu3 level x mu5 level x variability.
  int id = 1;
  for (int m3 = 0; m3 < 3; ++m3)
    for (double mu5 : {kHeavy, kLight})
      for (int var = 0; var < 3; ++var) fill(id++, mu3_levels[m3], mu5, kLight, kLight, var);
  // Instances 19..36: at least one join heavy; moderate variability.
  for (double mu7 : {kLight, kHeavy})
    for (double mu5 : {kHeavy, kLight})
      for (int m3 = 0; m3 < 3; ++m3) fill(id++, mu3_levels[m3], mu5, kHeavy, mu7, 1);
  for (double mu5 : {kHeavy, kLight})
    for (int m3 = 0; m3 < 3; ++m3) fill(id++, mu3_levels[m3], mu5, kLight, kHeavy, 1);
  return t;
}

}  // namespace

const std::array<InstancePreset, 36>& instance_table() {
  static const std::array<InstancePreset, 36> table = make_table();
  return table;
}

const InstancePreset& instance_preset(int id) {
  if (id < 1 || id > 36)
    throw ConfigError("unknown preset: instance id " + std::to_string(id) +
                      " (valid ids are 1..36)");
  return instance_table()[id - 1];
}

Figure1Params instance_params(int id, double mu1, double mu2) {
  const InstancePreset& p = instance_preset(id);
  Figure1Params out;
  out.lambda_a = 1.0;
  out.lambda_b = 1.0;
  out.mu1 = mu1;
  out.mu2 = mu2;
  out.mu3 = p.mu3;
  out.mu5 = p.mu5;
  out.mu6 = p.mu6;
  out.mu7 = p.mu7;
  out.muA = 2.0 / 0.95;
  out.muB = 2.0 / 0.95;
  out.services.family = p.service_family;
  out.services.erlang_k = 3;
  out.services.gamma_scv = 3.0;
  return out;
}

Topology build_instance(int id, double mu1, double mu2) {
  return build_figure1(instance_params(id, mu1, mu2));
}

}  // namespace forkjoin
