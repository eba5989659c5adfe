#include "linsbft/epoch.hpp"

#include <algorithm>
#include <stdexcept>

#include "linsbft/bytes.hpp"
#include "linsbft/digest.hpp"

namespace linsbft {

uint64_t epoch_keyset_seed(uint64_t base_seed, uint64_t epoch_index) {
    Writer w;
    w.raw(str_bytes("epoch-keyset"));
    w.u64(base_seed);
    w.u64(epoch_index);
    return sha256(w.take()).lead64();
}

EpochConfig epoch_transition(const EpochConfig& prev,
                             const std::vector<Block>& finished_epoch_blocks,
                             uint32_t f, uint64_t base_seed) {
    // Candidate pool: previous members at their recorded stakes, then the
    // epoch's join/leave requests applied in block (and intra-block tx) order.
    std::map<uint32_t, uint64_t> pool;
    for (size_t i = 0; i < prev.validators.size(); ++i)
        pool[prev.validators[i]] = prev.stakes[i];

    for (const Block& b : finished_epoch_blocks) {
        for (const Transaction& tx : b.txs) {
            if (auto join = parse_join_tx(tx)) {
                pool[join->node] = join->deposit;
            } else if (auto leaver = parse_leave_tx(tx)) {
                pool.erase(*leaver);
            }
        }
    }

    size_t n = prev.validators.size();
    if (pool.size() < size_t(4) * f + 1)
        throw std::invalid_argument("epoch transition: candidate pool smaller than 4f+1");

    std::vector<std::pair<uint32_t, uint64_t>> ranked(pool.begin(), pool.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;  // deposit desc
        return a.first < b.first;                              // node id asc
    });
    if (ranked.size() > n) ranked.resize(n);

    EpochConfig next;
    next.index = prev.index + 1;
    next.length = prev.length;
    next.keyset_seed = epoch_keyset_seed(base_seed, next.index);
    for (const auto& [node, stake] : ranked) {
        next.validators.push_back(node);
        next.stakes.push_back(stake);
    }
    return next;
}

void assign_reward(RewardLedger& ledger, const Block& b, uint32_t proposer_node,
                   uint64_t coinbase) {
    uint64_t amount = coinbase;
    for (const Transaction& tx : b.txs) amount += tx.fee;
    ledger.balance[proposer_node] += amount;
    ledger.total += amount;
}

}  // namespace linsbft
