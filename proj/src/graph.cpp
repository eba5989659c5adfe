#include "linsbft/graph.hpp"

#include <algorithm>

namespace linsbft {

BlockGraph::BlockGraph() {
    Block g = genesis_block();
    genesis_hash_ = g.hash();
    blocks_.emplace(genesis_hash_, g);
    finalized_.emplace(0, genesis_hash_);
}

const Block* BlockGraph::get(const Digest& h) const {
    auto it = blocks_.find(h);
    return it == blocks_.end() ? nullptr : &it->second;
}

void BlockGraph::insert(const Block& b) {
    Digest h = b.hash();
    if (blocks_.count(h)) return;
    const Block* parent = get(b.prehash);
    if (!parent) throw std::invalid_argument("insert: parent not stored");
    if (parent->height + 1 != b.height)
        throw std::invalid_argument("insert: height does not extend parent");
    blocks_.emplace(h, b);
}

bool BlockGraph::is_ancestor(const Digest& anc, const Digest& desc) const {
    const Block* a = get(anc);
    const Block* d = get(desc);
    if (!a || !d) throw std::invalid_argument("is_ancestor: block not stored");
    while (d->height > a->height) d = get(d->prehash);
    return d->hash() == anc;
}

bool BlockGraph::conflicts(const Digest& a, const Digest& b) const {
    if (a == b) return false;
    return !is_ancestor(a, b) && !is_ancestor(b, a);
}

std::optional<Block> BlockGraph::ancestor_at(const Digest& desc,
                                             uint64_t height) const {
    const Block* d = get(desc);
    if (!d) throw std::invalid_argument("ancestor_at: block not stored");
    if (d->height < height) return std::nullopt;
    while (d->height > height) d = get(d->prehash);
    return *d;
}

std::vector<Block> BlockGraph::finalize(const Digest& bh) {
    const Block* b = get(bh);
    if (!b) throw std::invalid_argument("finalize: block not stored");
    // Collect the not-yet-final suffix of b's ancestor chain.
    std::vector<Block> fresh;
    const Block* cur = b;
    while (true) {
        auto it = finalized_.find(cur->height);
        if (it != finalized_.end()) {
            if (it->second != cur->hash())
                throw SafetyViolation("finalize: conflicting block at height " +
                                      std::to_string(cur->height));
            break;  // rest of the chain already final and consistent
        }
        fresh.push_back(*cur);
        cur = get(cur->prehash);
    }
    std::reverse(fresh.begin(), fresh.end());
    for (const Block& nb : fresh) {
        finalized_.emplace(nb.height, nb.hash());
        finalized_head_ = std::max(finalized_head_, nb.height);
    }
    return fresh;
}

bool BlockGraph::is_final(const Digest& h) const {
    const Block* b = get(h);
    if (!b) return false;
    auto it = finalized_.find(b->height);
    return it != finalized_.end() && it->second == h;
}

std::optional<Block> BlockGraph::final_at(uint64_t height) const {
    auto it = finalized_.find(height);
    if (it == finalized_.end()) return std::nullopt;
    return *get(it->second);
}

}  // namespace linsbft
