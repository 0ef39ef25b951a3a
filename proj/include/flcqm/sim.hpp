#pragma once

// Deterministic discrete-event simulation of one collision domain:
// periodic sampling, unslotted CSMA/CA, collisions without capture,
// static multi-hop forwarding and per-interval deadline bookkeeping.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "flcqm/qos.hpp"
#include "flcqm/scenario_spec.hpp"

namespace flcqm {

// splitmix64; one instance per run, drawn from in event order.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform draw from [0, 2^nbits - 1].
  std::uint64_t bits(int nbits) { return next() >> (64 - nbits); }
};

class SchedulingInPastError : public std::logic_error {
 public:
  SchedulingInPastError()
      : std::logic_error("event scheduled before current simulation time") {}
};

// Priority queue popping in (time, insertion sequence) order.
template <typename Payload>
class EventQueue {
 public:
  struct Entry {
    SimTime time;
    std::uint64_t seq;
    Payload payload;
  };

  void schedule(SimTime time, Payload payload) {
    if (time < now_) throw SchedulingInPastError();
    heap_.push_back(Entry{time, next_seq_++, std::move(payload)});
    std::push_heap(heap_.begin(), heap_.end(), later);
  }

  bool empty() const { return heap_.empty(); }

  const Entry& peek() const { return heap_.front(); }

  Entry pop_next() {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    Entry e = std::move(heap_.back());
    heap_.pop_back();
    now_ = e.time;
    return e;
  }

  SimTime now() const { return now_; }

 private:
  static bool later(const Entry& a, const Entry& b) {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }

  std::vector<Entry> heap_;
  std::uint64_t next_seq_ = 0;
  SimTime now_ = 0;
};

struct Packet {
  std::int64_t id = 0;
  std::int64_t seq = 0;   // per-source sequence number
  int source = 0;         // originating node id
  std::vector<int> route;
  int hop_index = 0;      // index of the node currently holding the frame
  SimTime created_at = 0;
  SimTime deadline_at = 0;
  int size_bytes = 45;
  bool delivered = false;
  SimTime delivered_at = 0;
  // Inband feedback frames carry the DMR report instead of sensor data.
  bool feedback = false;
  double fb_dmr = 0.0;
  std::int64_t fb_interval = 0;
};

struct IntervalRow {
  std::string source;
  std::int64_t k = 0;     // interval index, counted from node activation
  double t_end = 0.0;     // s, absolute time of the interval end
  double dmr = 0.0;
  double h = 0.0;         // s, period in force during the interval
  double e = 0.0;
  double de = 0.0;
  double dh = 0.0;        // s
};

struct SourceTotals {
  std::string source;
  std::int64_t delivered_on_time = 0;
  std::int64_t missed = 0;
  std::int64_t deadline_expired = 0;
};

struct MetricsLog {
  Scheme scheme = Scheme::fixed;
  std::uint64_t seed = 0;
  std::vector<IntervalRow> rows;
  std::vector<SourceTotals> totals;
  std::int64_t conservation_violations = 0;
};

class Simulation {
 public:
  explicit Simulation(const ScenarioSpec& spec)
      : spec_(spec), rng_(spec.seed) {
    validate_scenario(spec_);
    if (!spec_.controller)
      controller_ = std::make_shared<const FuzzyController>(
          default_controller());
    else
      controller_ = spec_.controller;
    for (const auto& n : spec_.nodes) {
      NodeState st;
      st.spec = n;
      st.active = false;
      st.totals.source = n.name;
      if (n.kind == NodeKind::source) {
        st.loop.emplace();
        st.loop->qos = initial_state(spec_.qos, n.id);
      }
      nodes_[n.id] = std::move(st);
    }
    log_.scheme = spec_.scheme;
    log_.seed = spec_.seed;
  }

  void set_trace(std::ostream* os) { trace_ = os; }

  MetricsLog run_until(double end_time_s) {
    const SimTime end = to_sim_time(end_time_s);
    for (auto& [id, st] : nodes_)
      if (st.spec.start_active) activate(id, 0);
    for (const auto& ev : spec_.timeline)
      queue_.schedule(to_sim_time(ev.time), EvTimeline{ev.node, ev.activate});
    while (!queue_.empty() && queue_.peek().time <= end) {
      auto entry = queue_.pop_next();
      now_ = entry.time;
      std::visit([&](const auto& e) { handle(e); }, entry.payload);
    }
    finalize_totals();
    return log_;
  }

  SimTime now() const { return now_; }
  std::int64_t conservation_violations() const {
    return log_.conservation_violations;
  }

 private:
  // ---- events ----
  struct EvSampleGen { int node; std::uint64_t epoch; };
  struct EvBackoffEnd { int node; std::uint64_t token; };  // CCA instant
  struct EvTxEnd { int node; std::int64_t tx_id; };
  struct EvDeadline { std::int64_t packet_id; };
  struct EvIntervalEnd { int node; };
  struct EvTimeline { int node; bool activate; };

  using Event = std::variant<EvSampleGen, EvBackoffEnd, EvTxEnd, EvDeadline,
                             EvIntervalEnd, EvTimeline>;

  struct SourceLoop {
    QosManagerState qos;
    std::int64_t interval_index = 0;
    SimTime interval_start = 0;
    double h_in_force = 0.0;
    std::int64_t misses = 0;
    std::int64_t ontime = 0;
    std::int64_t expired = 0;
  };

  struct NodeState {
    NodeSpec spec;
    bool active = false;
    std::uint64_t gen_epoch = 0;
    std::uint64_t csma_token = 0;
    std::deque<std::int64_t> waiting;  // frame ids, oldest first
    std::int64_t current = -1;         // frame in CSMA or on air
    bool transmitting = false;
    int be = 3;
    int nb = 0;
    std::int64_t next_seq = 0;
    std::optional<SourceLoop> loop;
    SourceTotals totals;
  };

  struct Transmission {
    std::int64_t tx_id;
    int sender;
    std::int64_t packet_id;
    SimTime start;
    SimTime end;
    bool corrupted = false;
  };

  // ---- helpers ----
  SimTime airtime(int size_bytes) const {
    return static_cast<SimTime>(size_bytes) * 8 * kNsPerSec /
           spec_.mac.data_rate_bps;
  }

  double period_of(const NodeState& st) const {
    if (st.spec.kind == NodeKind::source) return st.loop->qos.h;
    return st.spec.period;
  }

  void trace(const std::string& line) {
    if (trace_) (*trace_) << to_seconds(now_) << ' ' << line << '\n';
  }

  bool channel_busy_at(SimTime t) const {
    for (const auto& tx : active_tx_)
      if (tx.start <= t && t < tx.end) return true;
    return false;
  }

  void activate(int id, SimTime at) {
    NodeState& st = nodes_.at(id);
    st.active = true;
    ++st.gen_epoch;
    if (st.spec.kind == NodeKind::source || st.spec.kind == NodeKind::interferer)
      queue_.schedule(at, EvSampleGen{id, st.gen_epoch});
    if (st.spec.kind == NodeKind::source) {
      SourceLoop& loop = *st.loop;
      loop.interval_index = 0;
      loop.interval_start = at;
      loop.h_in_force = loop.qos.h;
      loop.misses = loop.ontime = loop.expired = 0;
      queue_.schedule(at + to_sim_time(loop.qos.t_flc), EvIntervalEnd{id});
    }
  }

  void deactivate(int id) {
    NodeState& st = nodes_.at(id);
    st.active = false;
    ++st.gen_epoch;   // cancels the pending generation
    ++st.csma_token;  // cancels a pending backoff
    st.waiting.clear();
    if (!st.transmitting) st.current = -1;  // an in-air frame completes
  }

  void handle(const EvTimeline& ev) {
    trace(std::string(ev.activate ? "activate " : "deactivate ") +
          nodes_.at(ev.node).spec.name);
    if (ev.activate)
      activate(ev.node, now_);
    else
      deactivate(ev.node);
  }

  void handle(const EvSampleGen& ev) {
    NodeState& st = nodes_.at(ev.node);
    if (!st.active || ev.epoch != st.gen_epoch) return;
    const double h = period_of(st);
    Packet p;
    p.id = static_cast<std::int64_t>(packets_.size());
    p.seq = st.next_seq++;
    p.source = ev.node;
    p.route = spec_.routes.at(ev.node).hops;
    p.hop_index = 0;
    p.created_at = now_;
    p.deadline_at = now_ + to_sim_time(h);
    p.size_bytes = spec_.packet_size_bytes;
    packets_.push_back(p);
    trace("generate " + st.spec.name + " pkt " + std::to_string(p.id));
    if (st.spec.kind == NodeKind::source)
      // +1 ns so delivery at exactly the deadline counts as on time.
      queue_.schedule(p.deadline_at + 1, EvDeadline{p.id});
    enqueue_frame(st, p.id);
    queue_.schedule(now_ + to_sim_time(h), EvSampleGen{ev.node, ev.epoch});
  }

  void enqueue_frame(NodeState& st, std::int64_t packet_id) {
    if (st.current < 0 && !st.transmitting) {
      st.current = packet_id;
      start_csma(st);
      return;
    }
    st.waiting.push_back(packet_id);
    if (static_cast<int>(st.waiting.size()) > spec_.mac.queue_capacity) {
      trace("overflow " + st.spec.name + " drops pkt " +
            std::to_string(st.waiting.front()));
      st.waiting.pop_front();  // oldest waiting frame is dropped
    }
  }

  void start_csma(NodeState& st) {
    st.be = spec_.mac.min_be;
    st.nb = 0;
    schedule_backoff(st);
  }

  void schedule_backoff(NodeState& st) {
    const std::uint64_t slots = rng_.bits(st.be);
    ++st.csma_token;
    queue_.schedule(now_ + static_cast<SimTime>(slots) * spec_.mac.unit_backoff,
                    EvBackoffEnd{st.spec.id, st.csma_token});
  }

  void handle(const EvBackoffEnd& ev) {
    NodeState& st = nodes_.at(ev.node);
    if (ev.token != st.csma_token || st.current < 0) return;
    if (!channel_busy_at(now_)) {
      begin_transmission(st);
      return;
    }
    ++st.nb;
    if (st.nb >= spec_.mac.max_csma_backoffs) {
      trace("access-failure " + st.spec.name + " drops pkt " +
            std::to_string(st.current));
      st.current = -1;
      next_from_queue(st);
      return;
    }
    st.be = std::min(st.be + 1, spec_.mac.max_be);
    schedule_backoff(st);
  }

  void begin_transmission(NodeState& st) {
    const Packet& p = packets_[st.current];
    Transmission tx;
    tx.tx_id = next_tx_id_++;
    tx.sender = st.spec.id;
    tx.packet_id = st.current;
    tx.start = now_ + spec_.mac.cca_duration;
    tx.end = tx.start + airtime(p.size_bytes);
    for (auto& other : active_tx_) {
      if (other.start < tx.end && tx.start < other.end) {
        other.corrupted = true;
        tx.corrupted = true;
      }
    }
    st.transmitting = true;
    active_tx_.push_back(tx);
    trace("tx-start " + st.spec.name + " pkt " + std::to_string(tx.packet_id));
    queue_.schedule(tx.end, EvTxEnd{st.spec.id, tx.tx_id});
  }

  void handle(const EvTxEnd& ev) {
    NodeState& st = nodes_.at(ev.node);
    auto it = std::find_if(active_tx_.begin(), active_tx_.end(),
                           [&](const Transmission& t) {
                             return t.tx_id == ev.tx_id;
                           });
    assert(it != active_tx_.end());
    const Transmission tx = *it;
    active_tx_.erase(it);
    st.transmitting = false;
    st.current = -1;
    if (tx.corrupted) {
      trace("collision " + st.spec.name + " pkt " +
            std::to_string(tx.packet_id));
    } else {
      deliver(tx.packet_id);
    }
    next_from_queue(st);
  }

  void next_from_queue(NodeState& st) {
    if (!st.active) return;
    if (st.current >= 0 || st.waiting.empty()) return;
    st.current = st.waiting.front();
    st.waiting.pop_front();
    start_csma(st);
  }

  void deliver(std::int64_t packet_id) {
    Packet& p = packets_[packet_id];
    const int receiver_id = p.route[p.hop_index + 1];
    NodeState& receiver = nodes_.at(receiver_id);
    if (p.hop_index + 2 == static_cast<int>(p.route.size())) {
      // terminal hop
      if (p.feedback) {
        apply_feedback(p);
        return;
      }
      p.delivered = true;
      p.delivered_at = now_;
      trace("deliver pkt " + std::to_string(p.id));
      return;
    }
    p.hop_index += 1;
    trace("forward pkt " + std::to_string(p.id) + " at " +
          receiver.spec.name);
    enqueue_frame(receiver, p.id);
  }

  void handle(const EvDeadline& ev) {
    const Packet& p = packets_[ev.packet_id];
    NodeState& st = nodes_.at(p.source);
    if (st.spec.kind != NodeKind::source || !st.loop) return;
    SourceLoop& loop = *st.loop;
    loop.expired += 1;
    st.totals.deadline_expired += 1;
    if (p.delivered && p.delivered_at <= p.deadline_at) {
      loop.ontime += 1;
      st.totals.delivered_on_time += 1;
    } else {
      loop.misses += 1;
      st.totals.missed += 1;
      trace("miss " + st.spec.name + " pkt " + std::to_string(p.id));
    }
  }

  void handle(const EvIntervalEnd& ev) {
    NodeState& st = nodes_.at(ev.node);
    if (!st.active || !st.loop) return;
    SourceLoop& loop = *st.loop;
    const DmrSample sample = compute_dmr(loop.misses, loop.qos.t_flc,
                                         loop.h_in_force, loop.interval_index);
    if (loop.ontime + loop.misses != loop.expired)
      log_.conservation_violations += 1;
    IntervalRow row;
    row.source = st.spec.name;
    row.k = loop.interval_index;
    row.t_end = to_seconds(now_);
    row.dmr = sample.dmr;
    row.h = loop.h_in_force;
    if (spec_.scheme == Scheme::flc) {
      if (spec_.inband_feedback) {
        send_feedback(st, sample);
      } else {
        loop.qos.interval_index = loop.interval_index;
        const QosStepDiag diag =
            on_interval_end(loop.qos, *controller_, sample);
        row.e = diag.e;
        row.de = diag.de;
        row.dh = diag.dh;
      }
    }
    log_.rows.push_back(row);
    loop.interval_index += 1;
    loop.interval_start = now_;
    loop.h_in_force = loop.qos.h;
    loop.misses = loop.ontime = loop.expired = 0;
    queue_.schedule(now_ + to_sim_time(loop.qos.t_flc), EvIntervalEnd{ev.node});
  }

  // Inband feedback: the terminal actuator sends the DMR report back to the
  // source as an ordinary frame over the reverse route. A lost report means
  // the source skips that interval's update.
  void send_feedback(NodeState& source_st, const DmrSample& sample) {
    const Route& fwd = spec_.routes.at(source_st.spec.id);
    Packet p;
    p.id = static_cast<std::int64_t>(packets_.size());
    p.source = fwd.hops.back();
    p.route.assign(fwd.hops.rbegin(), fwd.hops.rend());
    p.hop_index = 0;
    p.created_at = now_;
    p.deadline_at = now_;
    p.size_bytes = spec_.packet_size_bytes;
    p.feedback = true;
    p.fb_dmr = sample.dmr;
    p.fb_interval = sample.interval_index;
    NodeState& actuator = nodes_.at(p.source);
    p.seq = actuator.next_seq++;
    packets_.push_back(p);
    enqueue_frame(actuator, p.id);
  }

  void apply_feedback(const Packet& p) {
    NodeState& st = nodes_.at(p.route.back());
    if (!st.loop || !st.active) return;
    SourceLoop& loop = *st.loop;
    DmrSample sample;
    sample.interval_index = p.fb_interval;
    sample.dmr = p.fb_dmr;
    loop.qos.interval_index = p.fb_interval;
    const QosStepDiag diag = on_interval_end(loop.qos, *controller_, sample);
    // The period now in force for the rest of the current interval.
    loop.h_in_force = loop.qos.h;
    for (auto it = log_.rows.rbegin(); it != log_.rows.rend(); ++it) {
      if (it->source == st.spec.name && it->k == p.fb_interval) {
        it->e = diag.e;
        it->de = diag.de;
        it->dh = diag.dh;
        break;
      }
    }
  }

  void finalize_totals() {
    for (const auto& n : spec_.nodes) {
      if (n.kind != NodeKind::source) continue;
      log_.totals.push_back(nodes_.at(n.id).totals);
      log_.totals.back().source = n.name;
    }
  }

  ScenarioSpec spec_;
  std::shared_ptr<const FuzzyController> controller_;
  Rng rng_;
  EventQueue<Event> queue_;
  SimTime now_ = 0;
  std::map<int, NodeState> nodes_;
  std::vector<Packet> packets_;
  std::vector<Transmission> active_tx_;
  std::int64_t next_tx_id_ = 0;
  MetricsLog log_;
  std::ostream* trace_ = nullptr;
};

}  // namespace flcqm
