#include "sidle/runner.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sidle/errors.hpp"

namespace sidle {

namespace {

std::vector<Battery> make_batteries(const Topology& topology, const EnergyConfig& e) {
  std::vector<Battery> out;
  out.reserve(topology.node_count());
  for (const NodeInfo& n : topology.nodes()) {
    const double j = n.hardware == HardwareClass::Sophisticated && e.head_initial_j
                         ? *e.head_initial_j
                         : e.initial_j;
    out.push_back(make_battery(j, e.harvest_rate_w));
  }
  return out;
}

// Fraction of peak harvest available in a round: a half-sine day, dark
// the other half.
double daylight(std::uint64_t round, std::uint64_t day_rounds) {
  const double phase = static_cast<double>(round % day_rounds) / static_cast<double>(day_rounds);
  return std::max(0.0, std::sin(2.0 * std::numbers::pi * phase));
}

}  // namespace

Topology build_topology(const ScenarioConfig& config) {
  return config.topology_file ? load_topology(*config.topology_file)
                              : generate_hex_mesh(config.topology);
}

std::unique_ptr<Protocol> make_protocol(const ScenarioConfig& config, Network& net) {
  switch (config.protocol) {
    case ProtocolKind::Sidle: {
      SidleSetup s;
      s.params = config.sidle;
      s.format = config.packet;
      s.duty = config.energy.duty;
      s.timing = config.timing;
      s.round_period_ms = config.round_period_ms;
      s.seed = config.seed;
      s.commands = config.commands;
      return std::make_unique<SidleProtocol>(net, std::move(s));
    }
    case ProtocolKind::Leach:
      return std::make_unique<LeachProtocol>(
          net, config.leach,
          BaselineSetup{config.packet, config.energy.duty, config.timing, config.seed});
    case ProtocolKind::Fca:
      return std::make_unique<FcaProtocol>(
          net, fca_params(config),
          BaselineSetup{config.packet, config.energy.duty, config.timing, config.seed});
  }
  throw ConfigError("protocol", "unknown protocol");
}

Simulation::Simulation(const ScenarioConfig& config, bool trace)
    : Simulation(config, build_topology(config), trace) {}

Simulation::Simulation(ScenarioConfig config, Topology topology, bool trace)
    : config_(std::move(config)),
      topology_(std::move(topology)),
      ledger_(make_batteries(topology_, config_.energy), config_.energy.audit),
      trace_(trace),
      net_(topology_, config_.radio, ledger_, queue_, trace_, config_.seed) {
  config_.validate();
  for (std::size_t i = 0; i < config_.failures.size(); ++i) {
    if (config_.failures[i].node.index() >= topology_.node_count()) {
      throw ConfigError("failures[" + std::to_string(i) + "].node", "no such node");
    }
  }
  for (std::size_t i = 0; i < config_.commands.size(); ++i) {
    if (config_.commands[i].target.index() >= topology_.node_count()) {
      throw ConfigError("commands[" + std::to_string(i) + "].node", "no such node");
    }
  }
  trace_.note(0, "scenario-start", NodeId{}, static_cast<std::int64_t>(topology_.node_count()),
              to_string(config_.protocol));
  protocol_ = make_protocol(config_, net_);
  // Failures go in first so that one due at a boundary lands before it.
  for (const FailureSpec& f : config_.failures) {
    if (f.round >= config_.rounds) continue;
    queue_.schedule(static_cast<SimTime>(f.round) * config_.round_period_ms + f.offset_ms,
                    NodeFailureEvent{f.node, f.action});
  }
}

void Simulation::dispatch(const Event& event) {
  std::visit(
      [this](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TimerEvent>) {
          protocol_->on_timer(net_, p);
        } else if constexpr (std::is_same_v<T, ArrivalEvent>) {
          protocol_->on_arrival(net_, p);
        } else if constexpr (std::is_same_v<T, RoundBoundaryEvent>) {
          on_boundary(p.round);
        } else {
          if (!net_.alive(p.node)) return;
          if (p.action == FailureAction::Kill) {
            net_.kill(p.node, "scripted");
          } else {
            trace_.note(net_.now(), "scripted-reset", p.node);
          }
          protocol_->on_failure(net_, p);
        }
      },
      event.payload);
}

void Simulation::on_boundary(std::uint64_t round) {
  const double period_s = static_cast<double>(config_.round_period_ms) / 1000.0;
  const double sun =
      config_.energy.harvest_rate_w > 0.0 ? daylight(round, config_.energy.day_rounds) : 0.0;
  for (const NodeInfo& n : topology_.nodes()) {
    if (!net_.alive(n.id)) continue;
    net_.charge(n.id, config_.energy.duty.sleep_power_w * period_s, EnergyCause::Idle);
    if (sun > 0.0 && net_.alive(n.id)) ledger_.harvest(n.id, net_.now(), period_s, sun);
  }
  protocol_->begin_round(net_, round);
}

const MetricsSample& Simulation::step() {
  if (finished()) throw ContractViolation("simulation: no rounds left");
  const std::uint64_t round = next_round_++;
  const SimTime start = static_cast<SimTime>(round) * config_.round_period_ms;
  const SimTime end = start + config_.round_period_ms;
  queue_.schedule(start, RoundBoundaryEvent{round});
  while (true) {
    const auto next = queue_.next_time();
    if (!next || *next >= end) break;
    dispatch(*queue_.pop());
  }
  protocol_->end_round(net_, round);

  if (config_.check_invariants) {
    const std::vector<std::string> broken = protocol_->check_invariants(net_);
    if (!broken.empty()) {
      std::ostringstream msg;
      msg << "round " << round << ": " << broken.front();
      for (std::size_t i = 1; i < broken.size(); ++i) msg << "; " << broken[i];
      msg << "\n" << trace_tail(40);
      throw InvariantViolation(msg.str());
    }
  }

  const RoundReport report = protocol_->take_report();
  MetricsSample s;
  s.round = round;
  s.total_residual = ledger_.total_residual().joules();
  s.mean_residual = s.total_residual / static_cast<double>(topology_.node_count());
  s.alive_count = net_.alive_count();
  s.records_delivered = report.records_delivered;
  s.elections_held = report.elections_held;
  s.bytes_on_air = net_.bytes_on_air() - bytes_before_;
  bytes_before_ = net_.bytes_on_air();
  if (!first_death_ && s.alive_count < topology_.node_count()) first_death_ = round;
  series_.push_back(s);
  return series_.back();
}

void Simulation::run() {
  while (!finished()) step();
}

std::string Simulation::trace_tail(std::size_t rows) const {
  if (!trace_.enabled()) return "(trace disabled; rerun with --trace for context)";
  const std::string csv = trace_.to_csv();
  std::size_t pos = csv.size();
  for (std::size_t n = 0; n <= rows && pos > 0; ++n) {
    pos = csv.rfind('\n', pos - 1);
    if (pos == std::string::npos) return csv;
  }
  return csv.substr(pos + 1);
}

RunResult run_scenario(const ScenarioConfig& config, bool trace) {
  return run_scenario(config, build_topology(config), trace);
}

RunResult run_scenario(const ScenarioConfig& config, const Topology& topology, bool trace) {
  Simulation sim(config, topology, trace);
  sim.run();
  RunResult r;
  r.series = sim.series();
  r.first_death_round = sim.first_death_round();
  if (trace) r.trace_csv = sim.trace().to_csv();
  if (sim.ledger().keeps_audit()) r.audit_csv = sim.ledger().audit_csv();
  return r;
}

}  // namespace sidle
