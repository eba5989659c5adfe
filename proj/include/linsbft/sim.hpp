#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "linsbft/engine.hpp"
#include "linsbft/epoch.hpp"
#include "linsbft/rng.hpp"
#include "linsbft/scenario.hpp"

namespace linsbft {

struct HeightStats {
    uint64_t rounds_used = 0;    // lowest certified round + 1
    uint64_t honest_msgs = 0;    // sends by honest nodes while at this height
    uint64_t honest_bytes = 0;
    uint64_t first_seen_tick = UINT64_MAX;
    uint64_t first_final_tick = UINT64_MAX;
    bool finalized = false;

    uint64_t finalize_latency() const {
        return (finalized && first_seen_tick != UINT64_MAX &&
                first_final_tick >= first_seen_tick)
                   ? first_final_tick - first_seen_tick
                   : 0;
    }
};

struct RunResult {
    std::string scenario_name;
    uint64_t seed = 0;
    uint32_t n = 0;
    uint32_t f = 0;
    uint64_t target = 0;
    uint64_t gst = 0;
    uint64_t delta = 0;

    bool reached_target = false;
    // Tick at which every honest current member had finalized the target
    // height (0 if that never happened within the tick budget).
    uint64_t all_final_tick = 0;
    bool deadlocked = false;
    bool safety_ok = true;
    std::string safety_detail;
    uint64_t l1_violations = 0;  // propose/vote lock agreement at h
    uint64_t l2_violations = 0;  // h-2 lock immutability while h is fixed
    uint64_t l3_violations = 0;  // cross-validator h-2 lock agreement
    uint64_t end_tick = 0;
    uint64_t events = 0;

    std::map<uint64_t, HeightStats> heights;
    uint64_t txs_total = 0;  // transactions inside world-finalized blocks
    uint64_t honest_msgs_total = 0;
    uint64_t honest_bytes_total = 0;
    uint64_t dkg_msgs_total = 0;
    std::map<std::string, uint64_t> evidence;
    // height -> distinct honest nodes that broadcast a certificate for it
    std::map<uint64_t, uint32_t> cert_broadcasters;
    std::map<uint32_t, uint64_t> rewards;       // node -> accumulated balance
    std::map<uint64_t, std::string> final_hex;  // height -> block hash hex
    std::string trace;

    double mean_rounds(uint64_t from_height, uint64_t to_height) const;
    uint64_t msgs_between(uint64_t from_height, uint64_t to_height) const;
};

// Discrete-event network driving one Validator per node. Deterministic for
// a fixed scenario: same seed, same trace bytes.
class World {
public:
    explicit World(const Scenario& sc);
    RunResult run();

    Validator& validator(uint32_t node) { return *vals_[node]; }

private:
    enum class EvKind : uint8_t { Deliver, Timer, StateTick };
    struct Ev {
        uint64_t t = 0;
        uint64_t seq = 0;
        EvKind kind = EvKind::Deliver;
        uint32_t node = 0;
        Bytes wire;
        TimerKind tk = TimerKind::Propose;
        RoundId rid;
    };
    struct EvLater {
        bool operator()(const Ev& a, const Ev& b) const {
            if (a.t != b.t) return a.t > b.t;
            return a.seq > b.seq;
        }
    };

    Behavior behavior_of(uint32_t node);
    const std::map<uint32_t, Behavior>& random_faults(uint64_t height);
    bool netdrop_hit(uint32_t src, uint32_t dst, uint8_t tag);
    void enqueue_delivery(uint32_t src, uint32_t dst, const Bytes& wire,
                          bool meter, size_t raw_size);
    void route_msg(uint32_t src, const Message& msg,
                   const std::vector<uint32_t>& targets);
    void route_broadcast(uint32_t src, const Message& msg);
    void route_actions(uint32_t src, const std::vector<OutputAction>& acts);
    void scan_message(const Message& msg);
    void handle_final(uint32_t node, uint64_t height, const Digest& hash);
    void note_height(uint32_t node);
    bool all_honest_final();
    void post_check(uint32_t node);
    void emit_spam(uint32_t node);
    void trace_line(uint32_t actor, const std::string& rest);
    const ThresholdKeySet& spam_keyset(uint64_t height);

    Scenario sc_;
    SimDealerSuite suite_;
    ThresholdKeySet keyring_;
    EngineConfig ecfg_;
    std::vector<std::unique_ptr<Validator>> vals_;
    std::vector<uint32_t> all_ids_;

    Rng rng_net_{0};
    Rng rng_fault_{0};
    Rng rng_spam_{0};

    std::priority_queue<Ev, std::vector<Ev>, EvLater> q_;
    uint64_t seq_ = 0;
    uint64_t now_ = 0;
    uint64_t world_h_ = 1;
    bool stop_ = false;

    std::map<uint64_t, std::map<uint32_t, Behavior>> random_faults_;
    std::vector<uint32_t> netdrop_used_;
    std::map<uint64_t, uint64_t> rounds_min_;
    std::map<uint64_t, std::set<uint32_t>> cert_senders_;
    std::map<Digest, Block> blocks_seen_;
    std::map<uint64_t, Digest> world_final_;
    std::map<uint64_t, Digest> lock2_by_height_;
    std::vector<uint64_t> last_h_;
    std::vector<std::optional<Digest>> lock2_last_;
    std::map<uint64_t, ThresholdKeySet> spam_keysets_;
    std::set<uint64_t> dkg_epochs_;
    uint64_t budget_ = 0;
    std::ostringstream trace_;
    RunResult res_;
};

}  // namespace linsbft
