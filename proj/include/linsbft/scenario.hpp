#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace linsbft {

enum class Behavior : uint8_t {
    Honest,
    Crash,          // stops sending and receiving inside the window
    Silent,         // sends nothing (not even to itself), ignores incoming votes
    SelectiveSend,  // broadcasts reach only the lower-index half of the nodes
    Equivocate,     // proposals go out in two conflicting variants
    FutureVoteSpam, // emits vote shares for rounds far ahead of the chain
};

const char* behavior_name(Behavior b);
Behavior behavior_from_name(const std::string& s);

// Scripted fault: `node` follows `behavior` while the network's leading
// height is inside [from_height, until_height].
struct FaultEntry {
    uint32_t node = 0;
    Behavior behavior = Behavior::Honest;
    uint64_t from_height = 0;
    uint64_t until_height = UINT64_MAX;
};

// Scripted link censorship, applied on top of the random loss model.
struct NetDrop {
    int32_t src = -1;   // -1 = any sender
    int32_t dst = -1;   // -1 = any receiver
    int32_t tag = -1;   // -1 = any message kind, else the wire tag byte
    uint64_t from_tick = 0;
    uint64_t until_tick = UINT64_MAX;
    uint32_t max_count = UINT32_MAX;  // drops remaining in this rule
};

struct JoinSpec {
    uint32_t node = 0;
    uint64_t deposit = 0;
    uint64_t height = 0;  // block height whose proposer carries the request
};

struct LeaveSpec {
    uint32_t node = 0;
    uint64_t height = 0;
};

// Complete description of one simulated run. Parses from / serializes to a
// plain key=value text format with repeatable fault/netdrop/jointx/leavetx
// lines.
struct Scenario {
    std::string name = "run";
    uint32_t n = 5;
    uint32_t f = 1;
    uint32_t standby = 0;  // extra never-member nodes in the universe
    uint64_t delta = 10;
    uint64_t delta_t_f = 0;    // 0 = 3 * delta
    uint64_t state_period = 0; // 0 = n * delta
    uint64_t gst = 0;
    uint32_t pre_gst_drop_pct = 10;
    uint64_t pre_gst_max_delay = 0;  // 0 = 20 * delta
    uint64_t max_jitter = 0;         // 0 = max(1, delta / 2)
    uint64_t seed = 1;
    uint64_t target = 10;            // run until this height finalizes
    uint64_t max_ticks = 0;          // 0 = derived bound
    uint64_t epoch_length = 0;       // 0 = single epoch
    uint32_t block_txs = 2;
    uint64_t coinbase = 10;
    std::vector<uint64_t> stakes;    // empty = all equal
    bool all_to_all = false;
    bool no_locks = false;
    std::string fault_mode = "scripted";  // or "random"
    std::vector<std::string> random_kinds;
    std::vector<FaultEntry> faults;
    std::vector<NetDrop> netdrops;
    std::vector<JoinSpec> joins;
    std::vector<LeaveSpec> leaves;

    uint64_t dtf() const { return delta_t_f ? delta_t_f : 3 * delta; }
    uint64_t period() const { return state_period ? state_period : uint64_t(n) * delta; }
    uint64_t jitter() const { return max_jitter ? max_jitter : (delta / 2 ? delta / 2 : 1); }
    uint64_t pre_delay() const { return pre_gst_max_delay ? pre_gst_max_delay : 20 * delta; }
    uint32_t universe() const;  // n + standby + joining nodes
    uint64_t tick_budget() const;

    // Throws std::invalid_argument with a readable reason.
    void validate() const;

    static Scenario parse(const std::string& text);
    static Scenario load(const std::string& path);
    std::string to_text() const;
};

}  // namespace linsbft
