#include "sidle/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sidle/errors.hpp"

namespace sidle {

Energy Energy::from_joules(double joules) {
  if (!std::isfinite(joules)) throw ContractViolation("energy must be finite");
  return Energy(std::llround(joules * 1e12));
}

Battery make_battery(double capacity_j, double harvest_rate_w) {
  if (!(capacity_j > 0.0)) throw ConfigError("energy.initial_j", "must be > 0");
  if (harvest_rate_w < 0.0) {
    throw ConfigError("energy.harvest_rate_w", "must be >= 0");
  }
  const Energy cap = Energy::from_joules(capacity_j);
  return {cap, cap, harvest_rate_w};
}

void RadioCostModel::validate() const {
  if (!(electronics_j_per_bit > 0.0)) {
    throw ConfigError("radio.electronics_j_per_bit", "must be > 0");
  }
  if (!(amplifier_j_per_bit_m2 > 0.0)) {
    throw ConfigError("radio.amplifier_j_per_bit_m2", "must be > 0");
  }
  if (!(rx_j_per_bit > 0.0)) throw ConfigError("radio.rx_j_per_bit", "must be > 0");
}

void DutyCostModel::validate() const {
  if (sleep_power_w < 0.0) throw ConfigError("energy.sleep_power_w", "must be >= 0");
  if (active_power_w < 0.0) throw ConfigError("energy.active_power_w", "must be >= 0");
  if (!(sleep_power_w < active_power_w)) {
    throw ConfigError("energy.sleep_power_w", "must be below active_power_w");
  }
  if (cpu_j_per_record < 0.0) {
    throw ConfigError("energy.cpu_j_per_record", "must be >= 0");
  }
}

double tx_cost(const RadioCostModel& model, std::size_t payload_bytes,
               double distance_m) {
  if (distance_m < 0.0) throw ContractViolation("tx_cost: negative distance");
  const double bits = 8.0 * static_cast<double>(payload_bytes);
  return bits * (model.electronics_j_per_bit +
                 model.amplifier_j_per_bit_m2 * distance_m * distance_m);
}

double rx_cost(const RadioCostModel& model, std::size_t payload_bytes) {
  return 8.0 * static_cast<double>(payload_bytes) * model.rx_j_per_bit;
}

DrainOutcome drain(Battery& battery, Energy amount) {
  if (amount < Energy{}) throw ContractViolation("drain: negative amount");
  battery.residual -= std::min(amount, battery.residual);
  return battery.residual > Energy{} ? DrainOutcome::Alive : DrainOutcome::Dead;
}

DrainOutcome drain(Battery& battery, double amount_j) {
  if (amount_j < 0.0) throw ContractViolation("drain: negative amount");
  return drain(battery, Energy::from_joules(amount_j));
}

Energy harvest(Battery& battery, double dt_s, double daylight_fraction) {
  if (dt_s < 0.0) throw ContractViolation("harvest: negative dt");
  const double fraction = std::clamp(daylight_fraction, 0.0, 1.0);
  const Energy offered = Energy::from_joules(battery.harvest_rate_w * dt_s * fraction);
  const Energy added = std::min(offered, battery.capacity - battery.residual);
  battery.residual += added;
  return added;
}

int normalized_residual(const Battery& battery) {
  if (battery.capacity <= Energy{}) return 0;
  const std::int64_t level =
      10 * battery.residual.picojoules() / battery.capacity.picojoules();
  return static_cast<int>(std::clamp<std::int64_t>(level, 0, 10));
}

std::string_view to_string(EnergyCause cause) {
  switch (cause) {
    case EnergyCause::Tx: return "tx";
    case EnergyCause::Rx: return "rx";
    case EnergyCause::Cpu: return "cpu";
    case EnergyCause::Idle: return "idle";
    case EnergyCause::Duty: return "duty";
    case EnergyCause::Harvest: return "harvest";
  }
  return "unknown";
}

EnergyLedger::EnergyLedger(std::vector<Battery> batteries, bool keep_audit)
    : batteries_(std::move(batteries)),
      drained_(batteries_.size()),
      harvested_(batteries_.size()),
      keep_audit_(keep_audit) {
  initial_.reserve(batteries_.size());
  for (const Battery& b : batteries_) initial_.push_back(b.residual);
}

DrainOutcome EnergyLedger::drain(NodeId node, SimTime time, Energy amount,
                                 EnergyCause cause) {
  Battery& b = batteries_.at(node.index());
  const Energy before = b.residual;
  const DrainOutcome outcome = sidle::drain(b, amount);
  const Energy taken = before - b.residual;
  drained_[node.index()] += taken;
  if (keep_audit_ && taken > Energy{}) {
    audit_.push_back({node, time, -taken.picojoules(), cause});
  }
  return outcome;
}

Energy EnergyLedger::harvest(NodeId node, SimTime time, double dt_s,
                             double daylight_fraction) {
  Battery& b = batteries_.at(node.index());
  const Energy added = sidle::harvest(b, dt_s, daylight_fraction);
  harvested_[node.index()] += added;
  if (keep_audit_ && added > Energy{}) {
    audit_.push_back({node, time, added.picojoules(), EnergyCause::Harvest});
  }
  return added;
}

Energy EnergyLedger::total_residual() const {
  Energy sum;
  for (const Battery& b : batteries_) sum += b.residual;
  return sum;
}

std::string EnergyLedger::audit_csv() const {
  std::string out = "node_id,time,delta_j,cause\n";
  char line[128];
  for (const AuditEntry& e : audit_) {
    const std::int64_t whole = e.delta_pj / 1'000'000'000'000LL;
    const std::int64_t frac = std::llabs(e.delta_pj % 1'000'000'000'000LL);
    std::snprintf(line, sizeof line, "%u,%lld,%s%lld.%012lld,%s\n", e.node.value,
                  static_cast<long long>(e.time),
                  (e.delta_pj < 0 && whole == 0) ? "-" : "",
                  static_cast<long long>(whole), static_cast<long long>(frac),
                  std::string(to_string(e.cause)).c_str());
    out += line;
  }
  return out;
}

}  // namespace sidle
