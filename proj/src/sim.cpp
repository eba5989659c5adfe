#include "linsbft/sim.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "linsbft/graph.hpp"

namespace linsbft {

double RunResult::mean_rounds(uint64_t from_height, uint64_t to_height) const {
    double sum = 0.0;
    uint64_t count = 0;
    for (const auto& [h, s] : heights) {
        if (h < from_height || h > to_height || s.rounds_used == 0) continue;
        sum += double(s.rounds_used);
        ++count;
    }
    return count ? sum / double(count) : 0.0;
}

uint64_t RunResult::msgs_between(uint64_t from_height, uint64_t to_height) const {
    uint64_t sum = 0;
    for (const auto& [h, s] : heights) {
        if (h < from_height || h > to_height) continue;
        sum += s.honest_msgs;
    }
    return sum;
}

World::World(const Scenario& sc) : sc_(sc) {
    sc_.validate();
    const uint32_t uni = sc_.universe();

    keyring_ = node_keyring(suite_, uni, sc_.seed);

    ecfg_.n = sc_.n;
    ecfg_.f = sc_.f;
    ecfg_.delta = sc_.delta;
    ecfg_.delta_t_f = sc_.delta_t_f;
    ecfg_.state_period = sc_.state_period;
    ecfg_.genesis_seed = sc_.seed;
    ecfg_.base_seed = sc_.seed;
    ecfg_.block_txs = sc_.block_txs;
    ecfg_.epoch_length = sc_.epoch_length;
    ecfg_.all_to_all = sc_.all_to_all;
    ecfg_.no_locks = sc_.no_locks;

    EpochConfig epoch0;
    epoch0.index = 0;
    epoch0.length = sc_.epoch_length;
    epoch0.validators.resize(sc_.n);
    std::iota(epoch0.validators.begin(), epoch0.validators.end(), 0u);
    epoch0.stakes = sc_.stakes.empty() ? std::vector<uint64_t>(sc_.n, 1)
                                       : sc_.stakes;
    epoch0.keyset_seed = epoch_keyset_seed(sc_.seed, 0);

    std::map<uint64_t, std::vector<Transaction>> schedule;
    for (const JoinSpec& j : sc_.joins)
        schedule[j.height].push_back(make_join_tx(j.node, j.deposit, 1));
    for (const LeaveSpec& l : sc_.leaves)
        schedule[l.height].push_back(make_leave_tx(l.node, 1));

    vals_.reserve(uni);
    all_ids_.reserve(uni);
    for (uint32_t i = 0; i < uni; ++i) {
        vals_.push_back(std::make_unique<Validator>(i, ecfg_, epoch0, &suite_,
                                                    keyring_, schedule));
        all_ids_.push_back(i);
    }
    last_h_.assign(uni, 1);
    lock2_last_.assign(uni, std::nullopt);
    netdrop_used_.assign(sc_.netdrops.size(), 0);

    Rng root(sc_.seed);
    rng_net_ = root.fork(0x6e6574);    // link delays and loss
    rng_fault_ = root.fork(0x666c74);  // per-height fault subsets
    rng_spam_ = root.fork(0x7370616d); // spam payloads

    res_.scenario_name = sc_.name;
    res_.seed = sc_.seed;
    res_.n = sc_.n;
    res_.f = sc_.f;
    res_.target = sc_.target;
    res_.gst = sc_.gst;
    res_.delta = sc_.delta;
}

Behavior World::behavior_of(uint32_t node) {
    if (sc_.fault_mode == "random") {
        if (sc_.f == 0) return Behavior::Honest;
        const auto& picks = random_faults(world_h_);
        auto it = picks.find(node);
        return it == picks.end() ? Behavior::Honest : it->second;
    }
    for (const FaultEntry& fe : sc_.faults) {
        if (fe.node == node && world_h_ >= fe.from_height &&
            world_h_ <= fe.until_height)
            return fe.behavior;
    }
    return Behavior::Honest;
}

const std::map<uint32_t, Behavior>& World::random_faults(uint64_t height) {
    auto it = random_faults_.find(height);
    if (it != random_faults_.end()) return it->second;

    Rng r = rng_fault_.fork(height);
    std::vector<uint32_t> ids(sc_.n);
    std::iota(ids.begin(), ids.end(), 0u);
    std::map<uint32_t, Behavior> picks;
    for (uint32_t i = 0; i < sc_.f && i < sc_.n; ++i) {
        uint64_t j = i + r.below(uint64_t(sc_.n - i));
        std::swap(ids[i], ids[size_t(j)]);
        const std::string& kind =
            sc_.random_kinds[size_t(r.below(uint64_t(sc_.random_kinds.size())))];
        picks[ids[i]] = behavior_from_name(kind);
    }
    return random_faults_.emplace(height, std::move(picks)).first->second;
}

bool World::netdrop_hit(uint32_t src, uint32_t dst, uint8_t tag) {
    for (size_t i = 0; i < sc_.netdrops.size(); ++i) {
        const NetDrop& nd = sc_.netdrops[i];
        if (nd.src >= 0 && uint32_t(nd.src) != src) continue;
        if (nd.dst >= 0 && uint32_t(nd.dst) != dst) continue;
        if (nd.tag >= 0 && uint8_t(nd.tag) != tag) continue;
        if (now_ < nd.from_tick || now_ > nd.until_tick) continue;
        if (netdrop_used_[i] >= nd.max_count) continue;
        ++netdrop_used_[i];
        return true;
    }
    return false;
}

void World::enqueue_delivery(uint32_t src, uint32_t dst, const Bytes& wire,
                             bool meter, size_t raw_size) {
    if (dst == src) {
        // Local loopback: next tick, never metered, never lost.
        q_.push(Ev{now_ + 1, seq_++, EvKind::Deliver, dst, wire,
                   TimerKind::Propose, RoundId{}});
        return;
    }
    if (meter) {
        uint64_t sh = vals_[src]->height();
        HeightStats& hs = res_.heights[sh];
        hs.honest_msgs += 1;
        hs.honest_bytes += raw_size;
        res_.honest_msgs_total += 1;
        res_.honest_bytes_total += raw_size;
    }
    uint8_t tag = wire.empty() ? 0 : wire[0];
    if (netdrop_hit(src, dst, tag)) return;

    uint64_t delay;
    if (now_ < sc_.gst) {
        if (rng_net_.percent(sc_.pre_gst_drop_pct)) return;
        delay = rng_net_.range(1, sc_.pre_delay());
    } else {
        delay = rng_net_.range(1, sc_.jitter());
    }
    q_.push(Ev{now_ + delay, seq_++, EvKind::Deliver, dst, wire,
               TimerKind::Propose, RoundId{}});
}

void World::route_msg(uint32_t src, const Message& msg,
                      const std::vector<uint32_t>& targets) {
    Behavior b = behavior_of(src);
    if (b == Behavior::Crash || b == Behavior::Silent) return;

    scan_message(msg);

    if (const auto* p = std::get_if<Proposal>(&msg.body)) {
        trace_line(src, "e=prop l=" + std::to_string(p->l) +
                            " v=" + std::to_string(p->v) +
                            " b=" + p->block.hash().short_hex());
    } else if (const auto* v = std::get_if<Vote>(&msg.body)) {
        trace_line(src, "e=vote l=" + std::to_string(v->l) +
                            " v=" + std::to_string(v->v) +
                            " b=" + v->block_hash.short_hex());
    } else if (const auto* c = std::get_if<CertMsg>(&msg.body)) {
        if (b == Behavior::Honest && targets.size() > 1)
            cert_senders_[c->cert.l].insert(src);
    }

    const Bytes wire = msg.encode();
    const bool meter = (b == Behavior::Honest);
    for (uint32_t dst : targets)
        enqueue_delivery(src, dst, wire, meter && dst != src, wire.size());
}

void World::route_broadcast(uint32_t src, const Message& msg) {
    Behavior b = behavior_of(src);

    if (b == Behavior::Equivocate) {
        if (const auto* p = std::get_if<Proposal>(&msg.body)) {
            // Conflicting variant of the same (l, v) slot: same parent and
            // round, one extra transaction, fresh signature.
            Block twin;
            twin.height = p->block.height;
            twin.round = p->block.round;
            twin.prehash = p->block.prehash;
            twin.proposer = p->block.proposer;
            twin.txs = p->block.txs;
            twin.txs.push_back(Transaction{0, Bytes{'t', 'w', 'i', 'n'}});

            Proposal alt{p->l, p->v, twin, p->cert, p->cert_endorsement};
            Message m2;
            m2.sender = src;
            m2.body = alt;
            m2.sender_sig =
                suite_.sign(keyring_, src, Message::preimage(m2.body, src));

            uint32_t mid = uint32_t(all_ids_.size() / 2);
            std::vector<uint32_t> low, high;
            for (uint32_t t : all_ids_) {
                if (t == src) {
                    low.push_back(t);  // one self-copy, original variant
                    continue;
                }
                if (t < mid) low.push_back(t);
                else if (t > mid) high.push_back(t);
                else {
                    low.push_back(t);  // pivot node hears both variants
                    high.push_back(t);
                }
            }
            route_msg(src, msg, low);
            route_msg(src, m2, high);
            return;
        }
        route_msg(src, msg, all_ids_);
        return;
    }

    if (b == Behavior::SelectiveSend) {
        std::vector<uint32_t> targets;
        for (uint32_t t : all_ids_)
            if (t < sc_.n / 2 || t == src) targets.push_back(t);
        route_msg(src, msg, targets);
        return;
    }

    route_msg(src, msg, all_ids_);
}

void World::route_actions(uint32_t src, const std::vector<OutputAction>& acts) {
    for (const OutputAction& a : acts) {
        if (const auto* s = std::get_if<SendTo>(&a)) {
            route_msg(src, s->msg, {s->target});
        } else if (const auto* bc = std::get_if<Broadcast>(&a)) {
            route_broadcast(src, bc->msg);
        } else if (const auto* t = std::get_if<SetTimer>(&a)) {
            q_.push(Ev{now_ + t->duration, seq_++, EvKind::Timer, src, Bytes{},
                       t->kind, t->rid});
        } else if (const auto* fin = std::get_if<FinalizeBlock>(&a)) {
            handle_final(src, fin->height, fin->hash);
        } else if (const auto* rs = std::get_if<RequestSync>(&a)) {
            trace_line(src, "e=sync p=" + std::to_string(rs->peer) +
                                " f=" + std::to_string(rs->from_height));
            route_msg(src, vals_[src]->make_sync_req(rs->from_height),
                      {rs->peer});
        } else if (const auto* ev = std::get_if<RecordEvidence>(&a)) {
            res_.evidence[ev->kind] += 1;
            trace_line(src, "e=evid k=" + ev->kind +
                                " n=" + std::to_string(ev->node));
        }
    }
}

void World::scan_message(const Message& msg) {
    auto see_cert = [&](const VoteCertificate& c) {
        if (c.l == 0) return;
        auto it = rounds_min_.find(c.l);
        if (it == rounds_min_.end() || c.v < it->second) rounds_min_[c.l] = c.v;
    };
    if (const auto* p = std::get_if<Proposal>(&msg.body)) {
        blocks_seen_.emplace(p->block.hash(), p->block);
        see_cert(p->cert);
        HeightStats& hs = res_.heights[p->l];
        hs.first_seen_tick = std::min(hs.first_seen_tick, now_);
    } else if (const auto* v = std::get_if<Vote>(&msg.body)) {
        see_cert(v->cert);
    } else if (const auto* c = std::get_if<CertMsg>(&msg.body)) {
        see_cert(c->cert);
    } else if (const auto* st = std::get_if<StateMsg>(&msg.body)) {
        see_cert(st->cert);
    } else if (const auto* sr = std::get_if<SyncResp>(&msg.body)) {
        for (const SyncEntry& e : sr->entries) {
            blocks_seen_.emplace(e.block.hash(), e.block);
            if (e.cert) see_cert(*e.cert);
        }
    }
}

void World::handle_final(uint32_t node, uint64_t height, const Digest& hash) {
    trace_line(node, "e=fin h=" + std::to_string(height) +
                         " b=" + hash.short_hex());
    auto it = world_final_.find(height);
    if (it == world_final_.end()) {
        world_final_.emplace(height, hash);
        HeightStats& hs = res_.heights[height];
        hs.finalized = true;
        if (hs.first_final_tick == UINT64_MAX) hs.first_final_tick = now_;
        if (height >= sc_.target) res_.reached_target = true;
    } else if (it->second != hash) {
        res_.safety_ok = false;
        res_.safety_detail =
            "conflicting finalization at height " + std::to_string(height) +
            ": " + it->second.short_hex() + " vs " + hash.short_hex() +
            " (node " + std::to_string(node) + ")";
        stop_ = true;
        return;
    }
    // The run ends once every honest current member has the target height
    // finalized, so liveness can be judged against the slowest honest node.
    if (res_.reached_target && res_.all_final_tick == 0 && all_honest_final()) {
        res_.all_final_tick = now_;
        stop_ = true;
    }
}

// The per-height fault schedule keys on the world height: the regime for
// height h starts the moment the first validator enters h. This runs between
// an engine call and the routing of its actions so that the advancing
// validator's own output already falls under the new height's regime.
void World::note_height(uint32_t node) {
    uint64_t nh = vals_[node]->height();
    if (nh <= world_h_) return;
    world_h_ = nh;
    if (sc_.epoch_length) {
        uint64_t e = (world_h_ - 1) / sc_.epoch_length;
        if (e > 0 && dkg_epochs_.insert(e).second) {
            // Synthetic key-refresh cost: n * ceil(log2 n)^2 per epoch.
            uint32_t lg = 0;
            while ((uint64_t(1) << lg) < sc_.n) ++lg;
            res_.dkg_msgs_total += uint64_t(sc_.n) * uint64_t(lg) * uint64_t(lg);
        }
    }
}

bool World::all_honest_final() {
    for (uint32_t i : all_ids_) {
        if (behavior_of(i) != Behavior::Honest) continue;
        if (!vals_[i]->is_member()) continue;
        if (vals_[i]->finalized_head() < sc_.target) return false;
    }
    return true;
}

void World::post_check(uint32_t node) {
    Validator& v = *vals_[node];

    if (v.height() != last_h_[node]) {
        last_h_[node] = v.height();
        trace_line(node, "e=adv h=" + std::to_string(v.height()));
        HeightStats& hs = res_.heights[v.height()];
        hs.first_seen_tick = std::min(hs.first_seen_tick, now_);

        if (v.vlock2()) {
            uint64_t h2 = v.height() - 2;
            Digest d = v.vlock2()->hash();
            auto it = lock2_by_height_.find(h2);
            if (it == lock2_by_height_.end()) {
                lock2_by_height_.emplace(h2, d);
            } else if (it->second != d) {
                res_.l3_violations += 1;
                res_.safety_ok = false;
                res_.safety_detail = "vote-lock disagreement at height " +
                                     std::to_string(h2) + " (node " +
                                     std::to_string(node) + ")";
            }
        }
        lock2_last_[node] =
            v.vlock2() ? std::optional<Digest>(v.vlock2()->hash()) : std::nullopt;
    } else {
        // While the pipeline height holds still, the h-2 vote lock must not
        // move (a change here is exactly the two-chain safety argument).
        auto cur = v.vlock2() ? std::optional<Digest>(v.vlock2()->hash())
                              : std::nullopt;
        if (lock2_last_[node] && cur && *cur != *lock2_last_[node]) {
            res_.l2_violations += 1;
            res_.safety_ok = false;
            res_.safety_detail = "h-2 vote lock moved at fixed height (node " +
                                 std::to_string(node) + ")";
        }
        if (cur) lock2_last_[node] = cur;
    }

    // Propose lock and the height-h vote lock must agree whenever both exist.
    if (v.plock() && v.vlock0() &&
        v.plock()->hash() != v.vlock0()->hash()) {
        res_.l1_violations += 1;
        res_.safety_ok = false;
        res_.safety_detail = "propose/vote lock split at height " +
                             std::to_string(v.height()) + " (node " +
                             std::to_string(node) + ")";
    }
    if (!res_.safety_ok) stop_ = true;
}

const ThresholdKeySet& World::spam_keyset(uint64_t height) {
    uint64_t e = sc_.epoch_length ? (height - 1) / sc_.epoch_length : 0;
    auto it = spam_keysets_.find(e);
    if (it != spam_keysets_.end()) return it->second;
    ThresholdKeySet ks =
        suite_.keygen(sc_.n, sc_.n - sc_.f, epoch_keyset_seed(sc_.seed, e));
    return spam_keysets_.emplace(e, std::move(ks)).first->second;
}

void World::emit_spam(uint32_t node) {
    Validator& v = *vals_[node];
    auto best = v.best_cert();
    if (!best) return;
    uint64_t h = v.height();
    if (node >= sc_.n) return;  // shares only exist for initial members

    for (uint64_t d = 1; d <= 3; ++d) {
        uint64_t l = h + d;
        for (uint64_t r = 0; r <= 1; ++r) {
            auto target = v.collector_node(l, r);
            if (!target) continue;
            Digest fake;
            for (auto& byte : fake.v) byte = uint8_t(rng_spam_.below(256));
            PartialSig ps =
                suite_.partial_sign(spam_keyset(l), node, vote_digest(l, r, fake));
            Vote vt{l, r, fake, ps, *best};
            Message m;
            m.sender = node;
            m.body = vt;
            m.sender_sig =
                suite_.sign(keyring_, node, Message::preimage(m.body, node));
            // Bypass the Silent/Crash output filter deliberately: a spammer
            // that also fits one of those labels still isn't interesting.
            enqueue_delivery(node, *target, m.encode(), false, 0);
        }
    }
}

void World::trace_line(uint32_t actor, const std::string& rest) {
    trace_ << "t=" << now_ << " a=" << actor << " " << rest << "\n";
}

RunResult World::run() {
    budget_ = sc_.max_ticks ? sc_.max_ticks : sc_.tick_budget();
    const uint64_t event_cap = 50'000'000;

    auto guarded = [&](uint32_t node, auto&& fn) {
        try {
            auto acts = fn();
            note_height(node);
            route_actions(node, acts);
            post_check(node);
        } catch (const SafetyViolation& e) {
            res_.safety_ok = false;
            res_.safety_detail = std::string("node ") + std::to_string(node) +
                                 ": " + e.what();
            stop_ = true;
        } catch (const std::exception& e) {
            res_.safety_ok = false;
            res_.safety_detail = std::string("node ") + std::to_string(node) +
                                 " engine error: " + e.what();
            stop_ = true;
        }
    };

    for (uint32_t i : all_ids_) {
        if (stop_) break;
        guarded(i, [&] { return vals_[i]->on_start(now_); });
    }
    q_.push(Ev{sc_.period(), seq_++, EvKind::StateTick, 0, Bytes{},
               TimerKind::Propose, RoundId{}});

    while (!q_.empty() && !stop_) {
        Ev ev = q_.top();
        q_.pop();
        if (ev.t > budget_) break;
        now_ = ev.t;
        if (++res_.events > event_cap) {
            res_.safety_detail = "event cap exceeded";
            break;
        }

        switch (ev.kind) {
            case EvKind::Deliver: {
                Behavior b = behavior_of(ev.node);
                if (b == Behavior::Crash) break;
                if (b == Behavior::Silent && !ev.wire.empty() &&
                    ev.wire[0] == uint8_t(MsgTag::Vote))
                    break;
                guarded(ev.node,
                        [&] { return vals_[ev.node]->on_message(ev.wire, now_); });
                break;
            }
            case EvKind::Timer: {
                if (behavior_of(ev.node) == Behavior::Crash) break;
                guarded(ev.node, [&] {
                    return vals_[ev.node]->on_timer(ev.tk, ev.rid, now_);
                });
                break;
            }
            case EvKind::StateTick: {
                for (uint32_t i : all_ids_) {
                    if (stop_) break;
                    guarded(i, [&] { return vals_[i]->on_state_tick(now_); });
                }
                for (uint32_t i : all_ids_) {
                    if (stop_) break;
                    if (behavior_of(i) == Behavior::FutureVoteSpam) emit_spam(i);
                }
                if (now_ + sc_.period() <= budget_)
                    q_.push(Ev{now_ + sc_.period(), seq_++, EvKind::StateTick, 0,
                               Bytes{}, TimerKind::Propose, RoundId{}});
                break;
            }
        }
    }

    res_.end_tick = now_;
    // A run truncated at or before GST never had a chance to make progress;
    // deadlock means stalling on a stabilized network.
    res_.deadlocked =
        !res_.reached_target && res_.safety_ok && res_.end_tick > sc_.gst;

    for (const auto& [h, v] : rounds_min_) res_.heights[h].rounds_used = v + 1;
    for (const auto& [h, s] : cert_senders_)
        res_.cert_broadcasters[h] = uint32_t(s.size());

    RewardLedger ledger;
    for (const auto& [h, d] : world_final_) {
        if (h == 0) continue;
        res_.final_hex[h] = d.hex();
        auto it = blocks_seen_.find(d);
        if (it != blocks_seen_.end()) {
            res_.txs_total += it->second.txs.size();
            assign_reward(ledger, it->second, it->second.proposer, sc_.coinbase);
        }
    }
    res_.rewards = ledger.balance;
    res_.trace = trace_.str();
    return res_;
}

}  // namespace linsbft
