#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "linsbft/block.hpp"

namespace linsbft {

// Thrown when finalization would commit two different blocks at one height.
// This firing during a simulation is itself a failed run.
struct SafetyViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One validator's view of the block tree: finalized prefix plus unfinalized
// candidate branches. Single-writer; inserts require the parent to already
// be present so ancestry queries never dangle.
class BlockGraph {
public:
    BlockGraph();  // seeds itself with the genesis block, already final

    bool has(const Digest& h) const { return blocks_.count(h) != 0; }
    const Block* get(const Digest& h) const;

    // Parent must already be stored and heights must chain (+1). Reinserting
    // an identical block is a no-op.
    void insert(const Block& b);

    // Blocks conflict when neither is an ancestor of (or equal to) the
    // other. Both must be stored.
    bool conflicts(const Digest& a, const Digest& b) const;
    bool is_ancestor(const Digest& anc, const Digest& desc) const;

    // Walk desc's parent chain down to `height`; nullopt if desc is below
    // that height or the chain leaves the graph (cannot happen for stored
    // blocks, by the insert invariant).
    std::optional<Block> ancestor_at(const Digest& desc, uint64_t height) const;

    // Finalize b and all its ancestors. Returns the newly finalized blocks
    // in ascending height order; already-final prefixes are skipped
    // (idempotent). Throws SafetyViolation if any height would finalize a
    // second distinct block.
    std::vector<Block> finalize(const Digest& b);

    bool is_final(const Digest& h) const;
    uint64_t finalized_head() const { return finalized_head_; }
    std::optional<Block> final_at(uint64_t height) const;
    const Block& genesis() const { return *get(genesis_hash_); }
    const Digest& genesis_hash() const { return genesis_hash_; }
    size_t size() const { return blocks_.size(); }

private:
    std::map<Digest, Block> blocks_;
    std::map<uint64_t, Digest> finalized_;  // contiguous from height 0
    uint64_t finalized_head_ = 0;
    Digest genesis_hash_;
};

}  // namespace linsbft
