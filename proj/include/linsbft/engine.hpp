#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "linsbft/block.hpp"
#include "linsbft/crypto.hpp"
#include "linsbft/epoch.hpp"
#include "linsbft/graph.hpp"
#include "linsbft/wire.hpp"

namespace linsbft {

// Round timers. Propose (T_p) paces the voter side of a round: expiry moves
// the validator to the next round. Collect (T_c) paces the collector side:
// expiry makes the collector propose a replacement block for the next round.
enum class TimerKind : uint8_t { Propose, Collect };

// Collect timeout for round index i: min(2^i, 2^cap) * delta.
uint64_t timeout_collect(uint64_t i, uint64_t delta, uint32_t cap_exp = 16);
// Propose timeout: twice the collect timeout of the same round index.
uint64_t timeout_propose(uint64_t i, uint64_t delta, uint32_t cap_exp = 16);

// Admission window for messages of round (h2, r2) observed by a validator
// whose pipeline anchor height is h: (h2-h)*delta_t_f + (2^r2 - 1)*2*delta.
// Saturates instead of overflowing.
uint64_t dur_ticks(uint64_t h, uint64_t h2, uint64_t r2, uint64_t delta_t_f,
                   uint64_t delta);

struct SendTo {
    uint32_t target = 0;  // node id
    Message msg;
};

struct Broadcast {
    Message msg;
};

struct SetTimer {
    TimerKind kind = TimerKind::Propose;
    RoundId rid;
    uint64_t duration = 0;
};

struct FinalizeBlock {
    uint64_t height = 0;
    Digest hash;
};

struct RequestSync {
    uint32_t peer = 0;  // node id
    uint64_t from_height = 0;
};

struct RecordEvidence {
    std::string kind;    // "equivocation", "bad_sig", "bad_cert", ...
    uint32_t node = 0;   // accused node
    RoundId rid;
    std::string detail;
};

using OutputAction = std::variant<SendTo, Broadcast, SetTimer, FinalizeBlock,
                                  RequestSync, RecordEvidence>;

struct EngineConfig {
    uint32_t n = 4;             // initial validator count
    uint32_t f = 0;             // tolerated faults; quorum = n - f
    uint64_t delta = 10;        // post-stabilization delay bound, ticks
    uint64_t delta_t_f = 0;     // optimistic height duration; 0 = 3 * delta
    uint64_t state_period = 0;  // status broadcast period; 0 = n * delta
    uint64_t genesis_seed = 0;  // bootstrap proposer/collector rotation
    uint64_t base_seed = 0;     // root for per-epoch key derivation
    uint32_t block_txs = 2;     // filler transactions per fresh block
    uint64_t epoch_length = 0;  // heights per epoch; 0 = epochs disabled
    uint32_t timeout_cap_exp = 16;
    bool all_to_all = false;    // debug: broadcast votes (quadratic control)
    bool no_locks = false;      // debug: disable vote guards

    uint64_t dtf() const { return delta_t_f ? delta_t_f : 3 * delta; }
    uint64_t period() const { return state_period ? state_period : uint64_t(n) * delta; }
};

// One validator's sans-I/O state machine. Every entry point takes the
// current tick and returns the actions the caller must perform; the engine
// itself never touches clocks, sockets, or randomness.
class Validator {
public:
    Validator(uint32_t node, const EngineConfig& cfg, EpochConfig epoch0,
              const CryptoSuite* suite, ThresholdKeySet node_ks,
              std::map<uint64_t, std::vector<Transaction>> tx_schedule = {});

    std::vector<OutputAction> on_start(uint64_t now);
    std::vector<OutputAction> on_message(const Bytes& wire, uint64_t now);
    std::vector<OutputAction> on_timer(TimerKind kind, RoundId rid, uint64_t now);
    std::vector<OutputAction> on_state_tick(uint64_t now);

    // Signed catch-up request; the simulator turns RequestSync actions into
    // deliveries via this.
    Message make_sync_req(uint64_t from_height) const;

    // Introspection for the harness and the property checkers.
    uint32_t node() const { return me_; }
    uint64_t height() const { return h_; }
    uint64_t round() const { return r_; }
    uint64_t round_prev() const { return r_prev_; }
    uint64_t finalized_head() const { return graph_.finalized_head(); }
    const BlockGraph& graph() const { return graph_; }
    const std::optional<Block>& plock() const { return plock_; }
    const std::optional<Block>& vlock0() const { return vlock_h0_; }
    const std::optional<Block>& vlock1() const { return vlock_h1_; }
    const std::optional<Block>& vlock2() const { return vlock_h2_; }
    std::optional<VoteCertificate> best_cert() const;
    std::optional<VoteCertificate> cert_at(uint64_t l) const;
    bool is_member() const;  // active in the current height's validator set
    const EpochConfig& config_at(uint64_t height);

    // Collector node for round (l, v) per this validator's own certificate
    // records; nullopt when the seeding certificate is out of range.
    std::optional<uint32_t> collector_node(uint64_t l, uint64_t v);

private:
    struct CertRec {
        VoteCertificate cert;
        uint64_t first_obs = 0;
    };
    struct PendingSync {
        VoteCertificate cert;
        std::vector<std::pair<uint32_t, Proposal>> proposals;
        std::vector<std::pair<uint32_t, Vote>> votes;
        uint64_t last_req = 0;
    };

    using Out = std::vector<OutputAction>;

    // message handlers
    void handle_proposal(const Proposal& p, uint32_t sender, uint64_t now, Out& out,
                         bool replay);
    void handle_vote(const Vote& vt, uint32_t sender, uint64_t now, Out& out,
                     bool replay);
    void handle_cert(const VoteCertificate& c, uint32_t sender, uint64_t now, Out& out);
    void handle_state(const StateMsg& s, uint32_t sender, uint64_t now, Out& out);
    void handle_sync_req(const SyncReq& q, uint32_t sender, uint64_t now, Out& out);
    void handle_sync_resp(const SyncResp& s, uint32_t sender, uint64_t now, Out& out);

    // core transitions
    void advance_via_proposal(const Proposal& p, uint64_t now, Out& out);
    void advance_via_cert(const VoteCertificate& c, uint64_t now, Out& out);
    void enter_prepare(RoundId rid, uint64_t now, Out& out);
    void enter_propose(RoundId rid, std::optional<VoteCertificate> carry,
                       uint64_t now, Out& out);
    void send_vote(RoundId rid, const Block& b, uint64_t now, Out& out);
    void check_pool(RoundId rid, uint64_t now, Out& out);
    void recheck_pools(uint64_t now, Out& out);

    // certificate intake: verification, record-keeping, lock effects.
    bool observe_cert(const VoteCertificate& c, uint32_t from, uint64_t now, Out& out);
    enum class Succ { No, Yes, NeedFetch };
    Succ succeeds(const VoteCertificate& c) const;
    void relock_h1(const Block& b);
    void synchronize(const VoteCertificate& c, uint64_t now, Out& out);
    void start_sync(const VoteCertificate& c, uint64_t now, Out& out);
    void install_branch(const VoteCertificate& c, uint64_t now, Out& out);
    bool try_advance_cert(const VoteCertificate& c, uint64_t now, Out& out);
    bool try_advance_own_cert(uint64_t now, Out& out);
    void flush_pending(uint64_t now, Out& out);
    void reconcile_h1();
    void finalize_chain(const Digest& tip, Out& out);

    bool verify_cert(const VoteCertificate& c);
    bool dur_admits(uint64_t l, uint64_t v, uint64_t now) const;
    bool voted_for_or_larger(uint64_t l, const Block& b) const;
    bool voted_larger(uint64_t l, const Block& b) const;
    std::optional<Block> pick_vote_block() const;
    std::optional<Digest> chain_digest(uint64_t l) const;
    Block fresh_block(uint64_t height, uint64_t round,
                      const Digest& prehash) const;
    Message signed_(MsgBody body) const;
    void prune();
    void ensure_epoch(uint64_t e);
    const ThresholdKeySet& keyset_at(uint64_t height);
    int my_index(uint64_t height);
    uint32_t quorum() const { return cfg_.n - cfg_.f; }

    uint32_t me_;
    EngineConfig cfg_;
    const CryptoSuite* suite_;
    ThresholdKeySet node_ks_;  // long-lived message keys, whole node universe
    std::map<uint64_t, std::vector<Transaction>> tx_schedule_;

    std::map<uint64_t, EpochConfig> epochs_;
    std::map<uint64_t, ThresholdKeySet> keysets_;

    uint64_t h_ = 1;
    uint64_t r_ = 0;
    uint64_t r_prev_ = 0;
    std::optional<Block> B_;         // adopted block for the current height
    std::optional<Block> plock_;     // propose-lock at h
    std::optional<Block> vlock_h0_;  // vote-lock at h (transient)
    std::optional<Block> vlock_h1_;  // vote-lock at h-1
    std::optional<Block> vlock_h2_;  // vote-lock at h-2 (permanent)

    BlockGraph graph_;
    std::map<uint64_t, CertRec> recs_;  // canonical cert per height, >= h-3

    std::set<RoundId> voted_;
    std::map<uint64_t, std::vector<Block>> voted_blocks_;
    std::map<RoundId, std::map<Digest, std::map<uint32_t, PartialSig>>> pools_;
    std::set<RoundId> proposed_;
    std::set<RoundId> cert_built_;
    std::map<Digest, uint64_t> cert_relayed_;            // digest -> height
    std::map<RoundId, std::map<uint32_t, Digest>> seen_props_;
    std::map<uint32_t, StateMsg> state_reports_;

    std::optional<PendingSync> pending_;
    uint64_t last_sync_req_ = 0;
    uint32_t sync_cursor_ = 0;  // round-robin peer choice, survives resets
};

// Long-lived per-node message keys for the whole node universe (members,
// standbys, and future joiners). Sender authentication uses these; epoch
// keysets only cover vote shares.
ThresholdKeySet node_keyring(const CryptoSuite& suite, uint32_t universe,
                             uint64_t seed);

}  // namespace linsbft
