#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sidle/ids.hpp"

namespace sidle {

// Energy quantity stored as whole picojoules, so that ledger sums close
// exactly regardless of accumulation order.
class Energy {
 public:
  constexpr Energy() = default;

  static constexpr Energy from_picojoules(std::int64_t pj) { return Energy(pj); }
  static Energy from_joules(double joules);

  [[nodiscard]] constexpr std::int64_t picojoules() const { return pj_; }
  [[nodiscard]] constexpr double joules() const {
    return static_cast<double>(pj_) * 1e-12;
  }

  constexpr Energy& operator+=(Energy o) { pj_ += o.pj_; return *this; }
  constexpr Energy& operator-=(Energy o) { pj_ -= o.pj_; return *this; }
  friend constexpr Energy operator+(Energy a, Energy b) { return a += b; }
  friend constexpr Energy operator-(Energy a, Energy b) { return a -= b; }
  friend constexpr auto operator<=>(Energy, Energy) = default;

 private:
  constexpr explicit Energy(std::int64_t pj) : pj_(pj) {}
  std::int64_t pj_ = 0;
};

struct Battery {
  Energy capacity;
  Energy residual;
  double harvest_rate_w = 0.0;
};

[[nodiscard]] Battery make_battery(double capacity_j, double harvest_rate_w = 0.0);

// First-order radio model: electronics per bit plus a free-space amplifier
// term growing with distance squared.
struct RadioCostModel {
  double electronics_j_per_bit = 50e-9;
  double amplifier_j_per_bit_m2 = 100e-12;
  double rx_j_per_bit = 50e-9;

  void validate() const;
};

struct DutyCostModel {
  double active_power_w = 0.5e-3;
  double sleep_power_w = 5e-6;
  double cpu_j_per_record = 5e-6;

  void validate() const;
};

[[nodiscard]] double tx_cost(const RadioCostModel& model, std::size_t payload_bytes,
                             double distance_m);
[[nodiscard]] double rx_cost(const RadioCostModel& model, std::size_t payload_bytes);

enum class DrainOutcome : std::uint8_t { Alive, Dead };

// Removes min(amount, residual). Dead when nothing is left afterwards.
DrainOutcome drain(Battery& battery, Energy amount);
DrainOutcome drain(Battery& battery, double amount_j);

// Adds harvest_rate * dt * daylight, capped at the remaining headroom.
// Returns the energy actually stored.
Energy harvest(Battery& battery, double dt_s, double daylight_fraction);

// floor(10 * residual / capacity), clamped to 0..10.
[[nodiscard]] int normalized_residual(const Battery& battery);

enum class EnergyCause : std::uint8_t { Tx, Rx, Cpu, Idle, Duty, Harvest };

[[nodiscard]] std::string_view to_string(EnergyCause cause);

struct AuditEntry {
  NodeId node;
  SimTime time = 0;
  std::int64_t delta_pj = 0;  // negative for drains
  EnergyCause cause = EnergyCause::Idle;
};

// Per-node batteries plus running totals; optionally keeps every change as
// an audit entry.
class EnergyLedger {
 public:
  EnergyLedger(std::vector<Battery> batteries, bool keep_audit);

  DrainOutcome drain(NodeId node, SimTime time, Energy amount, EnergyCause cause);
  Energy harvest(NodeId node, SimTime time, double dt_s, double daylight_fraction);

  [[nodiscard]] const Battery& battery(NodeId node) const {
    return batteries_[node.index()];
  }
  [[nodiscard]] Energy initial(NodeId node) const { return initial_[node.index()]; }
  [[nodiscard]] Energy drained(NodeId node) const { return drained_[node.index()]; }
  [[nodiscard]] Energy harvested(NodeId node) const {
    return harvested_[node.index()];
  }
  [[nodiscard]] std::size_t size() const { return batteries_.size(); }
  [[nodiscard]] Energy total_residual() const;

  [[nodiscard]] bool keeps_audit() const { return keep_audit_; }
  [[nodiscard]] const std::vector<AuditEntry>& audit() const { return audit_; }
  [[nodiscard]] std::string audit_csv() const;

 private:
  std::vector<Battery> batteries_;
  std::vector<Energy> initial_;
  std::vector<Energy> drained_;
  std::vector<Energy> harvested_;
  bool keep_audit_;
  std::vector<AuditEntry> audit_;
};

}  // namespace sidle
