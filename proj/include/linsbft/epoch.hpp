#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "linsbft/block.hpp"

namespace linsbft {

// Active validator set for one epoch. `validators` is ordered by the
// ranking rule (deposit descending, node id ascending on ties); a
// validator's index in this list is its signing/collector index for the
// epoch. Keys for the epoch are regenerated from scratch from keyset_seed.
struct EpochConfig {
    uint64_t index = 0;
    uint64_t length = 0;  // heights per epoch; 0 = epochs disabled
    std::vector<uint32_t> validators;  // node ids
    std::vector<uint64_t> stakes;      // aligned with validators
    uint64_t keyset_seed = 0;

    // Heights (first..last) this epoch governs; epoch e covers
    // [e*length + 1, (e+1)*length]. With length 0 the single epoch 0
    // covers everything.
    uint64_t first_height() const { return length ? index * length + 1 : 1; }
    uint64_t last_height() const { return length ? (index + 1) * length : UINT64_MAX; }

    int index_of(uint32_t node) const {
        for (size_t i = 0; i < validators.size(); ++i)
            if (validators[i] == node) return int(i);
        return -1;
    }
};

// Build the next epoch from the previous one plus the join/leave requests
// found in the finished epoch's finalized blocks. Candidates are the
// previous members (minus leavers, with their recorded stakes) plus the
// joiners with their deposits; the top n by (deposit desc, node id asc)
// survive, where n is the previous set size. Throws std::invalid_argument
// if fewer than 4f+1 candidates remain for the configured f.
EpochConfig epoch_transition(const EpochConfig& prev,
                             const std::vector<Block>& finished_epoch_blocks,
                             uint32_t f, uint64_t base_seed);

// Deterministic per-epoch key seed.
uint64_t epoch_keyset_seed(uint64_t base_seed, uint64_t epoch_index);

// Fees plus coinbase of a finalized block are credited to its proposer.
// The ledger is keyed by node id; `proposer_node` is the resolved node for
// the block's proposer index in its epoch.
struct RewardLedger {
    std::map<uint32_t, uint64_t> balance;
    uint64_t total = 0;
};

void assign_reward(RewardLedger& ledger, const Block& b, uint32_t proposer_node,
                   uint64_t coinbase);

}  // namespace linsbft
