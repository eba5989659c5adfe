#include "linsbft/engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace linsbft {

namespace {
constexpr uint64_t kSatCap = uint64_t(1) << 60;

uint64_t sat_mul(uint64_t a, uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > kSatCap / b) return kSatCap;
    return a * b;
}

uint64_t sat_add(uint64_t a, uint64_t b) {
    uint64_t s = a + b;
    return (s < a || s > kSatCap) ? kSatCap : s;
}
}  // namespace

uint64_t timeout_collect(uint64_t i, uint64_t delta, uint32_t cap_exp) {
    uint64_t e = std::min<uint64_t>(i, std::min<uint32_t>(cap_exp, 40));
    return sat_mul(uint64_t(1) << e, delta);
}

uint64_t timeout_propose(uint64_t i, uint64_t delta, uint32_t cap_exp) {
    return sat_mul(2, timeout_collect(i, delta, cap_exp));
}

uint64_t dur_ticks(uint64_t h, uint64_t h2, uint64_t r2, uint64_t delta_t_f,
                   uint64_t delta) {
    uint64_t gap = h2 > h ? h2 - h : 0;
    uint64_t rexp = std::min<uint64_t>(r2, 40);
    uint64_t backoff = sat_mul((uint64_t(1) << rexp) - 1, sat_mul(2, delta));
    return sat_add(sat_mul(gap, delta_t_f), backoff);
}

ThresholdKeySet node_keyring(const CryptoSuite& suite, uint32_t universe,
                             uint64_t seed) {
    return suite.keygen(universe, 1, seed ^ 0x6e6f64656b657973ULL);
}

Validator::Validator(uint32_t node, const EngineConfig& cfg, EpochConfig epoch0,
                     const CryptoSuite* suite, ThresholdKeySet node_ks,
                     std::map<uint64_t, std::vector<Transaction>> tx_schedule)
    : me_(node),
      cfg_(cfg),
      suite_(suite),
      node_ks_(std::move(node_ks)),
      tx_schedule_(std::move(tx_schedule)) {
    epochs_[0] = std::move(epoch0);
    VoteCertificate g = genesis_cert(*suite_, keyset_at(0));
    recs_[0] = CertRec{g, 0};
    vlock_h1_ = graph_.genesis();
}

std::vector<OutputAction> Validator::on_start(uint64_t now) {
    Out out;
    enter_prepare({1, 0}, now, out);
    const EpochConfig& ec = config_at(1);
    uint32_t boot = ec.validators[cfg_.genesis_seed % ec.validators.size()];
    if (boot == me_) enter_propose({1, 0}, recs_.at(0).cert, now, out);
    return out;
}

std::vector<OutputAction> Validator::on_message(const Bytes& wire, uint64_t now) {
    Out out;
    Message m;
    try {
        m = Message::decode(wire);
    } catch (const std::exception&) {
        return out;
    }
    if (m.sender >= node_ks_.n) return out;
    Bytes pre = Message::preimage(m.body, m.sender);
    if (!suite_->verify(node_ks_, m.sender, pre, m.sender_sig)) return out;

    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, Proposal>)
                handle_proposal(body, m.sender, now, out, false);
            else if constexpr (std::is_same_v<T, Vote>)
                handle_vote(body, m.sender, now, out, false);
            else if constexpr (std::is_same_v<T, CertMsg>)
                handle_cert(body.cert, m.sender, now, out);
            else if constexpr (std::is_same_v<T, StateMsg>)
                handle_state(body, m.sender, now, out);
            else if constexpr (std::is_same_v<T, SyncReq>)
                handle_sync_req(body, m.sender, now, out);
            else
                handle_sync_resp(body, m.sender, now, out);
        },
        m.body);
    return out;
}

// -------------------------------------------------------------------------
// collector rotation

const EpochConfig& Validator::config_at(uint64_t height) {
    uint64_t e = 0;
    if (cfg_.epoch_length && height > 0) e = (height - 1) / cfg_.epoch_length;
    ensure_epoch(e);
    return epochs_.at(e);
}

void Validator::ensure_epoch(uint64_t e) {
    while (!epochs_.count(e)) {
        uint64_t missing = e;
        while (missing > 0 && !epochs_.count(missing - 1)) --missing;
        const EpochConfig& prev = epochs_.at(missing - 1);
        // collect the finished epoch's blocks from the certified chain
        std::vector<Block> blocks;
        if (!vlock_h1_) throw std::runtime_error("epoch inputs unavailable");
        uint64_t lo = prev.first_height(), hi = prev.last_height();
        for (uint64_t i = lo; i <= hi && i > 0; ++i) {
            auto b = graph_.ancestor_at(vlock_h1_->hash(), i);
            if (!b) throw std::runtime_error("epoch inputs unavailable");
            blocks.push_back(*b);
        }
        epochs_[missing] =
            epoch_transition(prev, blocks, cfg_.f, cfg_.base_seed);
    }
}

const ThresholdKeySet& Validator::keyset_at(uint64_t height) {
    uint64_t e = 0;
    if (cfg_.epoch_length && height > 0) e = (height - 1) / cfg_.epoch_length;
    auto it = keysets_.find(e);
    if (it == keysets_.end()) {
        it = keysets_
                 .emplace(e, suite_->keygen(cfg_.n, quorum(),
                                            epoch_keyset_seed(cfg_.base_seed, e)))
                 .first;
    }
    return it->second;
}

int Validator::my_index(uint64_t height) {
    try {
        return config_at(height).index_of(me_);
    } catch (const std::exception&) {
        return -1;
    }
}

bool Validator::is_member() const {
    return const_cast<Validator*>(this)->my_index(h_) >= 0;
}

std::optional<uint32_t> Validator::collector_node(uint64_t l, uint64_t v) {
    if (l == 0) return std::nullopt;
    const EpochConfig* ec = nullptr;
    try {
        ec = &config_at(l);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    uint32_t n = uint32_t(ec->validators.size());
    if (n == 0) return std::nullopt;
    if (l == 1) return ec->validators[(cfg_.genesis_seed + 1 + v) % n];
    auto it = recs_.find(l - 2);
    if (it == recs_.end()) return std::nullopt;
    Bytes w = it->second.cert.wire();
    uint32_t idx;
    if (ec->stakes.size() == ec->validators.size() && !ec->stakes.empty())
        idx = select_collector_weighted(w, v, ec->stakes);
    else
        idx = select_collector(w, v, n);
    return ec->validators[idx];
}

std::optional<VoteCertificate> Validator::best_cert() const {
    if (recs_.empty()) return std::nullopt;
    return recs_.rbegin()->second.cert;
}

std::optional<VoteCertificate> Validator::cert_at(uint64_t l) const {
    auto it = recs_.find(l);
    if (it == recs_.end()) return std::nullopt;
    return it->second.cert;
}

// -------------------------------------------------------------------------
// certificate intake

bool Validator::verify_cert(const VoteCertificate& c) {
    Digest d = vote_digest(c.l, c.v, c.block_hash);
    return suite_->ts_verify(keyset_at(c.l), d, c.ts);
}

std::optional<Digest> Validator::chain_digest(uint64_t l) const {
    if (l == h_ && vlock_h0_) return vlock_h0_->hash();
    if (l == h_ - 1 && vlock_h1_) return vlock_h1_->hash();
    if (l == h_ - 2 && vlock_h2_) return vlock_h2_->hash();
    if (auto b = graph_.final_at(l)) return b->hash();
    if (l < h_ - 1 && vlock_h1_) {
        auto b = graph_.ancestor_at(vlock_h1_->hash(), l);
        if (b) return b->hash();
    }
    return std::nullopt;
}

bool Validator::observe_cert(const VoteCertificate& c, uint32_t from,
                             uint64_t now, Out& out) {
    if (c.l == 0) return c.block_hash == graph_.genesis_hash();
    if (!verify_cert(c)) {
        out.push_back(RecordEvidence{"bad_cert", from, {c.l, c.v}, c.block_hash.short_hex()});
        return false;
    }
    auto it = recs_.find(c.l);
    if (it == recs_.end()) {
        recs_[c.l] = CertRec{c, now};
    } else if (it->second.cert.block_hash == c.block_hash) {
        // Same block certified again at a later round: the higher round wins
        // the tie. Collector selection hashes the stored certificate, so every
        // node must settle on the same variant, and the one that circulates in
        // later proposals is the one from the round that actually made
        // progress. first_obs stays: the height was certified at that time.
        if (c.v > it->second.cert.v) it->second.cert = c;
    } else if (c.v > it->second.cert.v) {
        // competing certified block from a later round supersedes: certificate
        // rounds only ratchet upward, so every correct node converges on the
        // same per-height winner regardless of arrival order
        it->second = CertRec{c, now};
    }

    // lock effects at the current height
    if (c.l == h_ && graph_.has(c.block_hash)) {
        const Block& bc = *graph_.get(c.block_hash);
        // The certified sibling wins a same-round tie: at most one block per
        // (height, round) can ever gather a certificate, so a propose-lock
        // held on the losing twin must yield or the propose and vote locks
        // split permanently.
        if (!plock_ ||
            (bc.prehash == plock_->prehash && bc.round >= plock_->round) ||
            larger_than(bc, *plock_))
            plock_ = bc;
        bool finalize_parent = false;
        if (!vlock_h0_) {
            if (!voted_larger(h_, bc)) {
                vlock_h0_ = bc;
                finalize_parent = true;
            }
        } else if (vlock_h0_->hash() != bc.hash() && larger_than(bc, *vlock_h0_)) {
            vlock_h0_ = bc;
            finalize_parent = true;
        }
        if (finalize_parent && vlock_h1_ && bc.prehash == vlock_h1_->hash())
            finalize_chain(bc.prehash, out);
    }
    reconcile_h1();
    return true;
}

// Keep the previous-height vote lock on the block the best certificate
// evidence designates: the parent of a certified current-height block settles
// the question outright; otherwise the highest-round certificate stored for
// h-1 wins. Without this a validator that advanced on one of two competing
// certificates can wedge the whole network from inside its stale lane lock.
void Validator::reconcile_h1() {
    if (h_ < 1 || !vlock_h1_) return;
    std::optional<Digest> want;
    if (auto it = recs_.find(h_); it != recs_.end()) {
        if (const Block* hb = graph_.get(it->second.cert.block_hash))
            want = hb->prehash;
    }
    if (!want) {
        if (auto it = recs_.find(h_ - 1); it != recs_.end())
            want = it->second.cert.block_hash;
    }
    if (!want || vlock_h1_->hash() == *want) return;
    const Block* nb = graph_.get(*want);
    if (!nb || nb->height != h_ - 1) return;
    relock_h1(*nb);
}

Validator::Succ Validator::succeeds(const VoteCertificate& c) const {
    if (c.l == 0 || c.l + 1 < h_) return Succ::No;
    if (c.l > h_) return Succ::Yes;
    if (c.l == h_) {
        if (!graph_.has(c.block_hash)) return Succ::Yes;
        const Block& bc = *graph_.get(c.block_hash);
        if (!vlock_h1_ || bc.prehash == vlock_h1_->hash()) {
            return voted_for_or_larger(h_, bc) ? Succ::No : Succ::Yes;
        }
        if (voted_for_or_larger(h_, bc)) return Succ::No;
        return graph_.has(bc.prehash) ? Succ::Yes : Succ::NeedFetch;
    }
    // c.l == h_ - 1: only the certificate currently winning the round
    // ratchet can move the lane lock; fetch its block if we lack it
    if (!vlock_h1_) return Succ::No;
    if (c.block_hash == vlock_h1_->hash()) return Succ::No;
    auto it = recs_.find(c.l);
    if (it == recs_.end() || it->second.cert.block_hash != c.block_hash)
        return Succ::No;
    if (auto ht = recs_.find(h_); ht != recs_.end()) {
        if (const Block* hb = graph_.get(ht->second.cert.block_hash))
            if (hb->prehash != c.block_hash) return Succ::No;
    }
    if (!graph_.has(c.block_hash)) return Succ::NeedFetch;
    return Succ::Yes;
}

bool Validator::dur_admits(uint64_t l, uint64_t v, uint64_t now) const {
    if (l <= h_) return true;
    uint64_t base = 0;
    for (auto it = recs_.rbegin(); it != recs_.rend(); ++it) {
        if (it->first + 2 <= h_) {
            base = it->second.first_obs;
            break;
        }
    }
    return now <= sat_add(base, dur_ticks(h_, l, v, cfg_.dtf(), cfg_.delta));
}

bool Validator::voted_for_or_larger(uint64_t l, const Block& b) const {
    auto it = voted_blocks_.find(l);
    if (it == voted_blocks_.end()) return false;
    for (const Block& v : it->second)
        if (v.hash() == b.hash() || larger_than(v, b)) return true;
    return false;
}

bool Validator::voted_larger(uint64_t l, const Block& b) const {
    auto it = voted_blocks_.find(l);
    if (it == voted_blocks_.end()) return false;
    for (const Block& v : it->second)
        if (larger_than(v, b)) return true;
    return false;
}

// -------------------------------------------------------------------------
// catch-up

void Validator::relock_h1(const Block& b) {
    vlock_h1_ = b;
    Digest bh = b.hash();
    if (B_ && B_->prehash != bh) B_.reset();
    if (plock_ && plock_->prehash != bh) plock_.reset();
    if (vlock_h0_ && vlock_h0_->prehash != bh) vlock_h0_.reset();
    // membership derived from a changed branch must be recomputed
    if (cfg_.epoch_length) {
        uint64_t cut = (h_ >= 2) ? (h_ - 2 + cfg_.epoch_length - 1) / cfg_.epoch_length : 1;
        if (cut == 0) cut = 1;
        for (auto it = epochs_.begin(); it != epochs_.end();) {
            if (it->first >= cut && it->first > 0)
                it = epochs_.erase(it);
            else
                ++it;
        }
    }
}

void Validator::synchronize(const VoteCertificate& c, uint64_t now, Out& out) {
    if (c.l > h_) {
        bool ready = graph_.has(c.block_hash) &&
                     h_ >= 1 && graph_.ancestor_at(c.block_hash, h_ - 1).has_value();
        if (ready)
            install_branch(c, now, out);
        else
            start_sync(c, now, out);
        return;
    }
    if (c.l == h_ && !graph_.has(c.block_hash)) {
        start_sync(c, now, out);
        return;
    }
    // certified sibling branch at this height or one back: the lock follows
    // the certificate evidence (observe_cert already recorded the winner)
    reconcile_h1();
}

void Validator::start_sync(const VoteCertificate& c, uint64_t now, Out& out) {
    if (!pending_ || higher_than(c, pending_->cert))
        pending_ = PendingSync{c, {}, {}, 0};
    if (now - last_sync_req_ < cfg_.delta && last_sync_req_ != 0) return;
    last_sync_req_ = now;
    pending_->last_req = now;
    const EpochConfig* ec = nullptr;
    try {
        ec = &config_at(h_);
    } catch (const std::exception&) {
        return;
    }
    uint32_t n = uint32_t(ec->validators.size());
    for (uint32_t i = 0; i < n; ++i) {
        uint32_t peer = ec->validators[(sync_cursor_ + i) % n];
        if (peer == me_) continue;
        sync_cursor_ = (sync_cursor_ + i + 1) % n;
        out.push_back(RequestSync{peer, h_ > 0 ? h_ - 1 : 0});
        return;
    }
}

Message Validator::make_sync_req(uint64_t from_height) const {
    return signed_(SyncReq{from_height});
}

void Validator::install_branch(const VoteCertificate& c, uint64_t now, Out& out) {
    if (c.l <= h_) return;
    auto anc1 = graph_.ancestor_at(c.block_hash, h_ - 1);
    if (!anc1) return;
    if (vlock_h1_ && anc1->hash() != vlock_h1_->hash()) {
        // a certificate at or above our height commits the branch
        if (!(c.l >= h_ || larger_than(*anc1, *vlock_h1_))) return;
        if (h_ >= 2 && vlock_h2_) {
            auto anc2 = graph_.ancestor_at(c.block_hash, h_ - 2);
            if (anc2 && anc2->hash() != vlock_h2_->hash())
                throw SafetyViolation("certified branch diverges below the permanent lock");
        }
    }
    uint64_t tip = c.l;
    auto nv1 = graph_.ancestor_at(c.block_hash, tip - 1);
    if (!nv1) return;
    const Block& top = *graph_.get(c.block_hash);

    finalize_chain(nv1->hash(), out);
    vlock_h2_.reset();
    if (tip >= 2) {
        auto nv2 = graph_.ancestor_at(c.block_hash, tip - 2);
        if (nv2) vlock_h2_ = *nv2;
    }
    vlock_h1_ = *nv1;
    vlock_h0_ = top;
    B_ = top;
    plock_ = top;
    h_ = tip;
    r_ = c.v;
    auto it = recs_.find(tip - 1);
    r_prev_ = (it != recs_.end()) ? it->second.cert.v : 0;

    auto rit = recs_.find(c.l);
    if (rit == recs_.end())
        recs_[c.l] = CertRec{c, now};
    else if (rit->second.cert.block_hash == c.block_hash) {
        if (c.v < rit->second.cert.v) rit->second = CertRec{c, now};
    } else if (c.v > rit->second.cert.v) {
        rit->second = CertRec{c, now};
    }
    reconcile_h1();

    enter_prepare({h_, r_}, now, out);
    recheck_pools(now, out);
    prune();

    if (pending_ && pending_->cert.l <= h_) flush_pending(now, out);
}

void Validator::flush_pending(uint64_t now, Out& out) {
    if (!pending_) return;
    auto props = std::move(pending_->proposals);
    auto votes = std::move(pending_->votes);
    pending_.reset();
    for (auto& [s, p] : props) handle_proposal(p, s, now, out, true);
    for (auto& [s, v] : votes) handle_vote(v, s, now, out, true);
}

void Validator::finalize_chain(const Digest& tip, Out& out) {
    for (const Block& b : graph_.finalize(tip))
        out.push_back(FinalizeBlock{b.height, b.hash()});
}

// -------------------------------------------------------------------------
// proposals

void Validator::handle_proposal(const Proposal& p, uint32_t sender, uint64_t now,
                                Out& out, bool replay) {
    if (p.l == 0 || p.l + 1 < h_) return;
    // structure
    if (p.block.height != p.l || p.cert.l + 1 != p.l) return;
    if (p.block.prehash != p.cert.block_hash) return;
    if (p.block.round > p.v) return;
    if (p.v == 0 && (p.block.round != 0 || p.block.proposer != sender)) return;

    // proposer legitimacy
    std::optional<uint32_t> expect;
    if (p.l == 1 && p.v == 0) {
        try {
            const EpochConfig& ec = config_at(1);
            expect = ec.validators[cfg_.genesis_seed % ec.validators.size()];
        } catch (const std::exception&) {
        }
    } else if (p.v == 0) {
        expect = collector_node(p.l - 1, p.cert.v);
    } else {
        expect = collector_node(p.l, p.v - 1);
    }
    bool legit = expect.has_value() && *expect == sender;
    if (expect && !legit) return;

    if (!observe_cert(p.cert, sender, now, out)) return;
    if (!suite_->verify(node_ks_, sender, p.cert.wire(), p.cert_endorsement)) {
        out.push_back(RecordEvidence{"bad_endorsement", sender, {p.l, p.v}, ""});
        return;
    }
    Digest bh = p.block.hash();
    {
        auto& seen = seen_props_[RoundId{p.l, p.v}];
        auto it = seen.find(sender);
        if (it != seen.end() && it->second != bh) {
            out.push_back(RecordEvidence{
                "equivocation", sender, {p.l, p.v},
                it->second.short_hex() + "/" + bh.short_hex()});
            return;
        }
        seen[sender] = bh;
    }
    if (!legit) {
        // rotation state too old to check: useful only as a catch-up signal
        if (succeeds(p.cert) != Succ::No && !replay) {
            if (!pending_) start_sync(p.cert, now, out);
            if (pending_ && pending_->proposals.size() < 8)
                pending_->proposals.emplace_back(sender, p);
        }
        return;
    }
    if (graph_.has(p.block.prehash) && !graph_.has(bh)) graph_.insert(p.block);
    reconcile_h1();

    if (p.l == h_ + 1) {
        if (!graph_.has(p.block.prehash)) {
            if (succeeds(p.cert) != Succ::No && !replay) {
                start_sync(p.cert, now, out);
                if (pending_ && pending_->proposals.size() < 8)
                    pending_->proposals.emplace_back(sender, p);
            }
            return;
        }
        const Block& parent = *graph_.get(p.block.prehash);
        bool clean = !vlock_h1_ || parent.prehash == vlock_h1_->hash();
        if (!clean) {
            Succ s = succeeds(p.cert);
            if (s == Succ::Yes) {
                synchronize(p.cert, now, out);
            } else if (s == Succ::NeedFetch && !replay) {
                start_sync(p.cert, now, out);
                if (pending_ && pending_->proposals.size() < 8)
                    pending_->proposals.emplace_back(sender, p);
                return;
            } else {
                return;  // conflicting branch without unlock evidence
            }
            if (!vlock_h1_ || parent.prehash != vlock_h1_->hash())
                return;  // relock did not take effect
        }
        advance_via_proposal(p, now, out);
        return;
    }
    if (p.l == h_) {
        if (p.v == r_) {
            if (!B_) B_ = p.block;
            if (!voted_.count({h_, r_})) {
                bool guard = cfg_.no_locks ||
                             ((!vlock_h1_ || p.block.prehash == vlock_h1_->hash()) &&
                              (!vlock_h0_ || vlock_h0_->hash() == bh ||
                               larger_than(p.block, *vlock_h0_)));
                if (guard) {
                    B_ = p.block;
                    send_vote({h_, r_}, p.block, now, out);
                }
            }
        } else if (p.v > r_) {
            r_ = p.v;
            B_ = p.block;
            enter_prepare({h_, r_}, now, out);
            bool guard = cfg_.no_locks ||
                         ((!vlock_h1_ || p.block.prehash == vlock_h1_->hash()) &&
                          (!vlock_h0_ || vlock_h0_->hash() == bh ||
                           larger_than(p.block, *vlock_h0_)));
            if (guard && !voted_.count({h_, r_}))
                send_vote({h_, r_}, p.block, now, out);
        }
        return;
    }
    if (p.l + 1 == h_) {
        if (p.v <= r_prev_) return;
        r_prev_ = p.v;
        out.push_back(SetTimer{TimerKind::Propose, {p.l, p.v},
                               timeout_propose(p.v, cfg_.delta, cfg_.timeout_cap_exp)});
        if (vlock_h1_ && bh == vlock_h1_->hash() && !voted_.count({p.l, p.v}))
            send_vote({p.l, p.v}, *vlock_h1_, now, out);
        return;
    }
    // p.l > h_ + 1: only useful through its certificate
    if (succeeds(p.cert) != Succ::No && !replay) {
        synchronize(p.cert, now, out);
        if (pending_ && pending_->proposals.size() < 8)
            pending_->proposals.emplace_back(sender, p);
    }
}

void Validator::advance_via_proposal(const Proposal& p, uint64_t now, Out& out) {
    const Block& parent = *graph_.get(p.block.prehash);
    std::optional<Digest> fin =
        vlock_h1_ ? std::optional<Digest>(vlock_h1_->hash()) : std::nullopt;

    vlock_h2_ = vlock_h1_;
    vlock_h1_ = parent;
    vlock_h0_.reset();
    uint64_t old_r = r_;
    h_ = p.l;
    r_ = p.v;
    r_prev_ = old_r;
    B_ = p.block;
    plock_ = p.block;
    reconcile_h1();

    if (fin) finalize_chain(*fin, out);

    enter_prepare({h_, r_}, now, out);
    if (!voted_.count({h_, r_}) &&
        (cfg_.no_locks || p.block.prehash == vlock_h1_->hash()))
        send_vote({h_, r_}, p.block, now, out);
    recheck_pools(now, out);
    prune();

    if (pending_ && pending_->cert.l <= h_) flush_pending(now, out);
}

void Validator::advance_via_cert(const VoteCertificate& c, uint64_t now, Out& out) {
    const Block& bc = *graph_.get(c.block_hash);
    std::optional<Digest> fin =
        vlock_h1_ ? std::optional<Digest>(vlock_h1_->hash()) : std::nullopt;

    vlock_h2_ = vlock_h1_;
    vlock_h1_ = bc;
    vlock_h0_.reset();
    uint64_t old_r = r_;
    h_ = c.l + 1;
    r_ = 0;
    r_prev_ = old_r;
    B_.reset();
    plock_.reset();
    reconcile_h1();

    if (fin) finalize_chain(*fin, out);
    enter_prepare({h_, r_}, now, out);
    recheck_pools(now, out);
    prune();
    if (pending_ && pending_->cert.l <= h_) flush_pending(now, out);
}

// Certificate for the current height whose block is in hand: sufficient
// evidence to move up even when the follow-up proposal never arrived. The
// branch must extend (or be made to extend, via relock) the h-1 lock first.
bool Validator::try_advance_cert(const VoteCertificate& c, uint64_t now, Out& out) {
    if (c.l != h_ || !graph_.has(c.block_hash)) return false;
    {
        const Block& bc = *graph_.get(c.block_hash);
        if (vlock_h1_ && bc.prehash != vlock_h1_->hash()) {
            synchronize(c, now, out);
            if (!vlock_h1_) return false;
            auto again = graph_.get(c.block_hash);
            if (!again || again->prehash != vlock_h1_->hash()) return false;
        }
    }
    advance_via_cert(c, now, out);
    return true;
}

bool Validator::try_advance_own_cert(uint64_t now, Out& out) {
    auto it = recs_.find(h_);
    return it != recs_.end() && try_advance_cert(it->second.cert, now, out);
}

// -------------------------------------------------------------------------
// rounds

void Validator::enter_prepare(RoundId rid, uint64_t now, Out& out) {
    (void)now;
    out.push_back(SetTimer{TimerKind::Propose, rid,
                           timeout_propose(rid.v, cfg_.delta, cfg_.timeout_cap_exp)});
    auto coll = collector_node(rid.l, rid.v);
    if (coll && *coll == me_ && !recs_.count(rid.l) && !cert_built_.count(rid))
        out.push_back(SetTimer{TimerKind::Collect, rid,
                               timeout_collect(rid.v, cfg_.delta, cfg_.timeout_cap_exp)});
}

void Validator::enter_propose(RoundId rid, std::optional<VoteCertificate> carry,
                              uint64_t now, Out& out) {
    (void)now;
    if (rid.l + 1 < h_) return;
    if (proposed_.count(rid)) return;
    if (my_index(rid.l) < 0) return;

    std::optional<VoteCertificate> cert = carry;
    if (!cert) {
        auto it = recs_.find(rid.l - 1);
        if (it == recs_.end()) return;
        cert = it->second.cert;
    }
    std::optional<Block> b;
    if (rid.l == h_ && plock_)
        b = plock_;
    else if (rid.l + 1 == h_ && vlock_h1_)
        b = vlock_h1_;
    if (!b || b->prehash != cert->block_hash || b->round > rid.v)
        b = fresh_block(rid.l, rid.v, cert->block_hash);

    proposed_.insert(rid);
    Digest endo = suite_->sign(node_ks_, me_, cert->wire());
    out.push_back(Broadcast{signed_(Proposal{rid.l, rid.v, *b, *cert, endo})});
}

Block Validator::fresh_block(uint64_t height, uint64_t round,
                             const Digest& prehash) const {
    Block b;
    b.height = height;
    b.round = round;
    b.prehash = prehash;
    b.proposer = me_;
    for (uint32_t i = 0; i < cfg_.block_txs; ++i) {
        Transaction tx;
        tx.fee = 1 + (height * 31 + uint64_t(i) * 7 + me_) % 10;
        tx.payload = str_bytes("tx-" + std::to_string(height) + "-" +
                               std::to_string(me_) + "-" + std::to_string(i));
        b.txs.push_back(std::move(tx));
    }
    auto it = tx_schedule_.find(height);
    if (it != tx_schedule_.end())
        for (const Transaction& tx : it->second) b.txs.push_back(tx);
    return b;
}

std::optional<Block> Validator::pick_vote_block() const {
    if (vlock_h0_) return vlock_h0_;
    if (B_) return B_;
    if (plock_) return plock_;
    return std::nullopt;
}

void Validator::send_vote(RoundId rid, const Block& b, uint64_t now, Out& out) {
    (void)now;
    int idx = my_index(rid.l);
    if (idx < 0) return;
    if (voted_.count(rid)) return;
    auto target = collector_node(rid.l, rid.v);
    if (!target) return;

    voted_.insert(rid);
    voted_blocks_[rid.l].push_back(b);

    Digest bh = b.hash();
    Digest d = vote_digest(rid.l, rid.v, bh);
    PartialSig ps = suite_->partial_sign(keyset_at(rid.l), uint32_t(idx), d);
    auto carry = best_cert();
    if (!carry) return;
    Vote vt{rid.l, rid.v, bh, ps, *carry};
    Message m = signed_(vt);
    if (cfg_.all_to_all)
        out.push_back(Broadcast{std::move(m)});
    else
        out.push_back(SendTo{*target, std::move(m)});
}

std::vector<OutputAction> Validator::on_timer(TimerKind kind, RoundId rid,
                                              uint64_t now) {
    Out out;
    if (kind == TimerKind::Propose) {
        if (rid.l == h_ && rid.v == r_) {
            r_ += 1;
            enter_prepare({h_, r_}, now, out);
            if (!voted_.count({h_, r_})) {
                auto b = pick_vote_block();
                if (b) {
                    bool guard = cfg_.no_locks ||
                                 ((!vlock_h1_ || b->prehash == vlock_h1_->hash()) &&
                                  (!vlock_h0_ || vlock_h0_->hash() == b->hash() ||
                                   larger_than(*b, *vlock_h0_)));
                    if (guard) send_vote({h_, r_}, *b, now, out);
                }
            }
        } else if (rid.l + 1 == h_ && rid.v == r_prev_) {
            r_prev_ += 1;
            out.push_back(SetTimer{TimerKind::Propose, {rid.l, r_prev_},
                                   timeout_propose(r_prev_, cfg_.delta,
                                                   cfg_.timeout_cap_exp)});
            if (vlock_h1_ && !voted_.count({rid.l, r_prev_}))
                send_vote({rid.l, r_prev_}, *vlock_h1_, now, out);
        }
        return out;
    }
    // Collect: the round's collector replaces the proposal for the next round
    bool current = (rid.l == h_ && rid.v == r_) ||
                   (rid.l + 1 == h_ && rid.v == r_prev_);
    if (!current) return out;
    if (recs_.count(rid.l) || cert_built_.count(rid)) return out;
    enter_propose({rid.l, rid.v + 1}, std::nullopt, now, out);
    return out;
}

// -------------------------------------------------------------------------
// votes

void Validator::handle_vote(const Vote& vt, uint32_t sender, uint64_t now,
                            Out& out, bool replay) {
    if (vt.l == 0 || vt.l + 1 < h_) return;
    if (cert_built_.count({vt.l, vt.v})) return;

    int idx_s = -1;
    try {
        idx_s = config_at(vt.l).index_of(sender);
    } catch (const std::exception&) {
        return;
    }
    if (idx_s < 0 || vt.partial.signer != uint32_t(idx_s)) return;
    Digest expect = vote_digest(vt.l, vt.v, vt.block_hash);
    if (vt.partial.digest != expect) return;
    if (!suite_->partial_verify(keyset_at(vt.l), vt.partial)) {
        out.push_back(RecordEvidence{"bad_vote_sig", sender, {vt.l, vt.v}, ""});
        return;
    }
    if (!observe_cert(vt.cert, sender, now, out)) return;

    Succ s = succeeds(vt.cert);
    if (s == Succ::Yes) {
        if (!dur_admits(vt.l, vt.v, now)) return;
        synchronize(vt.cert, now, out);
        auto coll = collector_node(vt.cert.l, vt.cert.v);
        Digest ck = sha256(vt.cert.wire());
        if (coll && *coll == me_ && !cert_relayed_.count(ck)) {
            cert_relayed_[ck] = vt.cert.l;
            out.push_back(Broadcast{signed_(CertMsg{vt.cert})});
        }
    } else if (s == Succ::NeedFetch && !replay) {
        start_sync(vt.cert, now, out);
        if (pending_ && pending_->votes.size() < 32)
            pending_->votes.emplace_back(sender, vt);
    }

    // pool for aggregation when this validator collects that round
    if (vt.l > h_ + 1 || vt.l + 1 < h_) return;
    auto coll = collector_node(vt.l, vt.v);
    if (!coll || *coll != me_) return;
    pools_[{vt.l, vt.v}][vt.block_hash][sender] = vt.partial;
    check_pool({vt.l, vt.v}, now, out);
}

void Validator::check_pool(RoundId rid, uint64_t now, Out& out) {
    if (cert_built_.count(rid)) return;
    auto pit = pools_.find(rid);
    if (pit == pools_.end()) return;
    for (auto& [digest, signers] : pit->second) {
        if (signers.size() < quorum() || !graph_.has(digest)) continue;
        // A second certificate for an already-certified block adds nothing: the
        // height has a cert and its collector proposed onward. Building a
        // round-variant here would stay private (the follow-up proposal slot is
        // already taken) and skew this node's collector draws away from the
        // variant everyone else stores.
        if (auto rit = recs_.find(rid.l);
            rit != recs_.end() && rit->second.cert.block_hash == digest)
            continue;
        std::vector<PartialSig> parts;
        parts.reserve(signers.size());
        for (auto& [node, ps] : signers) parts.push_back(ps);
        std::string err;
        auto ts = suite_->aggregate(keyset_at(rid.l), parts, &err);
        if (!ts) {
            out.push_back(RecordEvidence{"bad_aggregate", me_, rid, err});
            continue;
        }
        VoteCertificate cert{rid.l, rid.v, digest, *ts};
        cert_built_.insert(rid);
        observe_cert(cert, me_, now, out);
        enter_propose({rid.l + 1, 0}, cert, now, out);
        return;
    }
}

void Validator::recheck_pools(uint64_t now, Out& out) {
    std::vector<RoundId> rids;
    for (auto& [rid, _] : pools_)
        if (rid.l + 1 >= h_ && rid.l <= h_ + 1) rids.push_back(rid);
    for (RoundId rid : rids) check_pool(rid, now, out);
}

// -------------------------------------------------------------------------
// certificates, status reports

void Validator::handle_cert(const VoteCertificate& c, uint32_t sender,
                            uint64_t now, Out& out) {
    if (c.l == 0 || c.l + 3 < h_) return;
    if (!observe_cert(c, sender, now, out)) return;
    Succ s = succeeds(c);
    if (s == Succ::Yes)
        synchronize(c, now, out);
    else if (s == Succ::NeedFetch)
        start_sync(c, now, out);
    try_advance_own_cert(now, out);
}

std::vector<OutputAction> Validator::on_state_tick(uint64_t now) {
    Out out;
    (void)now;
    if (my_index(h_) < 0) return out;
    auto best = best_cert();
    if (!best) return out;
    out.push_back(Broadcast{signed_(StateMsg{*best, h_, r_})});
    return out;
}

void Validator::handle_state(const StateMsg& s, uint32_t sender, uint64_t now,
                             Out& out) {
    if (!observe_cert(s.cert, sender, now, out)) return;
    state_reports_[sender] = s;

    Succ sc = succeeds(s.cert);
    if (sc == Succ::Yes)
        synchronize(s.cert, now, out);
    else if (sc == Succ::NeedFetch)
        start_sync(s.cert, now, out);
    if (try_advance_own_cert(now, out)) return;

    // quorum of reports certifying this height: fetch the missing block, or
    // move up directly once it is in hand
    const EpochConfig* ec = nullptr;
    try {
        ec = &config_at(h_);
    } catch (const std::exception&) {
        return;
    }
    std::map<Digest, uint32_t> at_h;
    std::map<uint64_t, uint32_t> ahead;
    for (const auto& [node, rep] : state_reports_) {
        if (ec->index_of(node) < 0) continue;
        if (rep.cert.l == h_) at_h[rep.cert.block_hash] += 1;
        if (rep.l == h_ && rep.v > r_) ahead[rep.v] += 1;
    }
    for (const auto& [digest, cnt] : at_h) {
        if (cnt < quorum()) continue;
        for (const auto& [node, rep] : state_reports_) {
            if (rep.cert.l == h_ && rep.cert.block_hash == digest) {
                if (try_advance_cert(rep.cert, now, out)) return;
                if (!graph_.has(digest)) start_sync(rep.cert, now, out);
                return;
            }
        }
    }
    // quorum of members already past our round at this height: jump forward
    uint32_t total = 0;
    for (const auto& [v, cnt] : ahead) total += cnt;
    if (total >= quorum()) {
        uint64_t target = ahead.begin()->first;
        r_ = target;
        enter_prepare({h_, r_}, now, out);
    }
}

// -------------------------------------------------------------------------
// explicit catch-up

void Validator::handle_sync_req(const SyncReq& q, uint32_t sender, uint64_t now,
                                Out& out) {
    (void)now;
    const Block* tip = nullptr;
    if (plock_)
        tip = &*plock_;
    else if (vlock_h1_)
        tip = &*vlock_h1_;
    if (!tip) return;
    uint64_t lo = std::max<uint64_t>(1, q.from_height);
    if (tip->height < lo) return;
    uint64_t hi = std::min(tip->height, lo + 63);

    SyncResp resp;
    resp.from_height = lo;
    for (uint64_t i = lo; i <= hi; ++i) {
        auto b = graph_.ancestor_at(tip->hash(), i);
        if (!b) return;
        SyncEntry e;
        e.block = *b;
        auto it = recs_.find(i);
        if (it != recs_.end() && it->second.cert.block_hash == b->hash())
            e.cert = it->second.cert;
        resp.entries.push_back(std::move(e));
    }
    out.push_back(SendTo{sender, signed_(resp)});
}

void Validator::handle_sync_resp(const SyncResp& s, uint32_t sender,
                                 uint64_t now, Out& out) {
    (void)sender;
    if (!pending_) return;
    VoteCertificate target = pending_->cert;

    // Ingest blocks and attached certificates unconditionally: both are
    // self-certifying, so they stay useful even when the original sync
    // target has been overtaken in the meantime.
    std::vector<VoteCertificate> attached;
    for (const SyncEntry& e : s.entries) {
        if (e.block.height == 0) break;
        if (!graph_.has(e.block.hash())) {
            if (!graph_.has(e.block.prehash)) break;
            try {
                graph_.insert(e.block);
            } catch (const std::exception&) {
                break;
            }
        }
        if (e.cert && e.cert->l == e.block.height &&
            e.cert->block_hash == e.block.hash() && verify_cert(*e.cert))
            attached.push_back(*e.cert);
    }
    for (const VoteCertificate& c : attached)
        if (c.l + 3 >= h_) observe_cert(c, me_, now, out);
    reconcile_h1();

    if (target.l > h_) {
        if (graph_.has(target.block_hash) &&
            graph_.ancestor_at(target.block_hash, h_ >= 1 ? h_ - 1 : 0)) {
            install_branch(target, now, out);
            return;
        }
        if (try_advance_own_cert(now, out)) return;
        // chain still incomplete: rotate to the next peer
        last_sync_req_ = 0;
        start_sync(target, now, out);
        return;
    }
    // target at or below our height: adopt whatever became usable
    try_advance_own_cert(now, out);
    if (pending_ && pending_->cert.l <= h_) flush_pending(now, out);
}

// -------------------------------------------------------------------------
// misc

Message Validator::signed_(MsgBody body) const {
    Message m;
    m.sender = me_;
    m.body = std::move(body);
    Bytes pre = Message::preimage(m.body, me_);
    m.sender_sig = suite_->sign(node_ks_, me_, pre);
    return m;
}

void Validator::prune() {
    uint64_t keep_rec = h_ >= 3 ? h_ - 3 : 0;
    for (auto it = recs_.begin(); it != recs_.end();)
        it = (it->first < keep_rec) ? recs_.erase(it) : std::next(it);
    uint64_t keep = h_ >= 1 ? h_ - 1 : 0;
    auto drop_rid = [&](auto& m) {
        for (auto it = m.begin(); it != m.end();)
            it = (it->first.l < keep) ? m.erase(it) : std::next(it);
    };
    for (auto it = voted_.begin(); it != voted_.end();)
        it = (it->l < keep) ? voted_.erase(it) : std::next(it);
    for (auto it = proposed_.begin(); it != proposed_.end();)
        it = (it->l < keep) ? proposed_.erase(it) : std::next(it);
    for (auto it = cert_built_.begin(); it != cert_built_.end();)
        it = (it->l < keep) ? cert_built_.erase(it) : std::next(it);
    drop_rid(pools_);
    drop_rid(seen_props_);
    for (auto it = voted_blocks_.begin(); it != voted_blocks_.end();)
        it = (it->first < keep) ? voted_blocks_.erase(it) : std::next(it);
    for (auto it = cert_relayed_.begin(); it != cert_relayed_.end();)
        it = (it->second + 3 < h_) ? cert_relayed_.erase(it) : std::next(it);
}

}  // namespace linsbft
