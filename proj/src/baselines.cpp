#include <algorithm>
#include <cmath>

#include "sidle/baselines.hpp"
#include "sidle/errors.hpp"

namespace sidle {

namespace {

void listen_on_baseline_channel(Network& net) {
  for (const NodeInfo& n : net.topology().nodes()) {
    net.set_listening(n.id, {kBaselineChannel});
  }
}

void charge_listen_window(Network& net, const BaselineSetup& setup) {
  for (const NodeInfo& n : net.topology().nodes()) {
    if (net.alive(n.id)) charge_active(net, n.id, setup.duty, setup.timing.listen_window_ms);
  }
}

}  // namespace

// ---------------------------------------------------------------- LEACH

void LeachParams::validate() const { (void)leach_epoch_length(p); }

LeachProtocol::LeachProtocol(Network& net, LeachParams params, BaselineSetup setup)
    : params_(params),
      setup_(setup),
      state_(net.topology().node_count(), params.p),
      rng_(setup.seed, stream::kLeachThreshold),
      driver_(net.topology(), setup) {
  params_.validate();
  listen_on_baseline_channel(net);
}

void LeachProtocol::begin_round(Network& net, std::uint64_t round) {
  charge_listen_window(net, setup_);
  std::vector<bool> alive(net.topology().node_count());
  for (std::size_t i = 0; i < alive.size(); ++i) {
    alive[i] = net.alive(NodeId{static_cast<std::uint32_t>(i)});
  }
  std::vector<NodeId> heads = state_.elect(round, alive, rng_);
  ++elections_;
  for (NodeId h : heads) net.trace().note(net.now(), "ch-elected", h);
  driver_.start(net, round, std::move(heads));
}

void LeachProtocol::on_timer(Network& net, const TimerEvent& timer) {
  if (!driver_.on_timer(net, timer)) throw ContractViolation("leach: unknown timer tag");
}

void LeachProtocol::on_arrival(Network& net, const ArrivalEvent& arrival) {
  if (!net.accept(arrival)) return;
  driver_.on_arrival(net, arrival);
}

RoundReport LeachProtocol::take_report() {
  RoundReport r = driver_.take_report();
  r.elections_held = elections_;
  elections_ = 0;
  return r;
}

// ---------------------------------------------------------------- FCA

std::vector<NodeId> fca_select_heads(std::span<const ChanceEntry> entries, double range_m) {
  std::vector<NodeId> heads;
  for (const ChanceEntry& e : entries) {
    bool dominant = true;
    for (const ChanceEntry& o : entries) {
      if (o.id == e.id || distance(e.position, o.position) > range_m) continue;
      if (o.chance > e.chance || (o.chance == e.chance && o.id < e.id)) {
        dominant = false;
        break;
      }
    }
    if (dominant) heads.push_back(e.id);
  }
  std::sort(heads.begin(), heads.end());
  return heads;
}

void FcaParams::validate() const {
  if (!(cluster_range_m > 0.0)) throw ConfigError("fca.cluster_range_m", "must be > 0");
  rules.validate();
}

namespace {

// Chances travel as integer micro-units so sender and receivers compare
// identical values.
std::int64_t encode_chance(double c) { return std::llround(c * 1e6); }

}  // namespace

FcaProtocol::FcaProtocol(Network& net, FcaParams params, BaselineSetup setup)
    : params_(std::move(params)),
      setup_(setup),
      driver_(net.topology(), setup),
      chance_(net.topology().node_count(), 0.0),
      heard_last_(net.topology().node_count()),
      heard_now_(net.topology().node_count()) {
  params_.validate();
  if (params_.cluster_range_m > net.params().profile.boosted.range_m) {
    throw ConfigError("fca.cluster_range_m", "exceeds the boosted radio range");
  }
  listen_on_baseline_channel(net);
}

void FcaProtocol::begin_round(Network& net, std::uint64_t round) {
  round_ = round;
  charge_listen_window(net, setup_);
  if (round == 0) {
    // Hello so that the first chances see real degrees.
    for (const NodeInfo& n : net.topology().nodes()) {
      Message m;
      m.src = n.id;
      m.channel = kBaselineChannel;
      m.kind = MessageKind::IdAnnounce;
      m.power = PowerLevel::Boosted;
      m.reach_m = params_.cluster_range_m;
      m.payload_size = setup_.format.control_bytes();
      net.broadcast(std::move(m));
    }
  }
  net.queue().schedule(net.now() + 5, TimerEvent{NodeId{}, kAnnounce, round});
  net.queue().schedule(net.now() + 15, TimerEvent{NodeId{}, kDecide, round});
}

void FcaProtocol::on_timer(Network& net, const TimerEvent& timer) {
  if (timer.tag == kAnnounce) {
    const double range = params_.cluster_range_m;
    for (const NodeInfo& n : net.topology().nodes()) {
      if (!net.alive(n.id)) continue;
      const Battery& b = net.energy().battery(n.id);
      const double energy = static_cast<double>(b.residual.picojoules()) /
                            static_cast<double>(b.capacity.picojoules());
      const auto& heard = heard_last_[n.id.index()];
      double centrality = 0.0;
      if (!heard.empty()) {
        double sum = 0.0;
        for (NodeId o : heard) sum += net.distance_between(n.id, o);
        centrality = std::clamp(1.0 - sum / static_cast<double>(heard.size()) / range, 0.0,
                                1.0);
      }
      chance_[n.id.index()] =
          fca_chance(energy, static_cast<double>(heard.size()), centrality, params_.rules);
      Message m;
      m.src = n.id;
      m.channel = kBaselineChannel;
      m.kind = MessageKind::ChanceAnnounce;
      m.power = PowerLevel::Boosted;
      m.reach_m = range;
      m.payload_size = setup_.format.control_bytes();
      m.body = make_body(Announce{encode_chance(chance_[n.id.index()]), ClusterId{}});
      net.broadcast(std::move(m));
    }
    return;
  }
  if (timer.tag == kDecide) {
    std::vector<NodeId> heads;
    for (const NodeInfo& n : net.topology().nodes()) {
      auto& heard = heard_now_[n.id.index()];
      if (net.alive(n.id)) {
        const std::int64_t mine = encode_chance(chance_[n.id.index()]);
        bool dominant = true;
        for (const auto& [o, c] : heard) {
          const std::int64_t theirs = encode_chance(c);
          if (theirs > mine || (theirs == mine && o < n.id)) dominant = false;
        }
        if (dominant) heads.push_back(n.id);
      }
      auto& last = heard_last_[n.id.index()];
      last.clear();
      for (const auto& [o, c] : heard) last.push_back(o);
      heard.clear();
    }
    ++elections_;
    for (NodeId h : heads) net.trace().note(net.now(), "ch-elected", h);
    driver_.start(net, round_, std::move(heads));
    return;
  }
  if (!driver_.on_timer(net, timer)) throw ContractViolation("fca: unknown timer tag");
}

void FcaProtocol::on_arrival(Network& net, const ArrivalEvent& arrival) {
  if (!net.accept(arrival)) return;
  const Message& m = arrival.message;
  if (m.kind == MessageKind::IdAnnounce) {
    heard_last_[arrival.receiver.index()].push_back(m.src);
    return;
  }
  if (m.kind == MessageKind::ChanceAnnounce) {
    if (const Announce* a = m.as<Announce>()) {
      heard_now_[arrival.receiver.index()].emplace_back(m.src,
                                                        static_cast<double>(a->value) / 1e6);
    }
    return;
  }
  driver_.on_arrival(net, arrival);
}

RoundReport FcaProtocol::take_report() {
  RoundReport r = driver_.take_report();
  r.elections_held = elections_;
  elections_ = 0;
  return r;
}

}  // namespace sidle
