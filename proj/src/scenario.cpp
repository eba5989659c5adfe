#include "linsbft/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace linsbft {

const char* behavior_name(Behavior b) {
    switch (b) {
        case Behavior::Honest: return "honest";
        case Behavior::Crash: return "crash";
        case Behavior::Silent: return "silent";
        case Behavior::SelectiveSend: return "selective";
        case Behavior::Equivocate: return "equivocate";
        default: return "spam";
    }
}

Behavior behavior_from_name(const std::string& s) {
    if (s == "honest") return Behavior::Honest;
    if (s == "crash") return Behavior::Crash;
    if (s == "silent") return Behavior::Silent;
    if (s == "selective") return Behavior::SelectiveSend;
    if (s == "equivocate") return Behavior::Equivocate;
    if (s == "spam") return Behavior::FutureVoteSpam;
    throw std::invalid_argument("unknown fault kind: " + s);
}

uint32_t Scenario::universe() const {
    uint32_t u = n + standby;
    for (const JoinSpec& j : joins) u = std::max(u, j.node + 1);
    return u;
}

uint64_t Scenario::tick_budget() const {
    if (max_ticks) return max_ticks;
    return gst + target * (dtf() + 126 * delta) + 1000 * delta;
}

void Scenario::validate() const {
    if (n < 4 * f + 1)
        throw std::invalid_argument("need n >= 4f+1 validators");
    if (n == 0) throw std::invalid_argument("n must be positive");
    if (delta == 0) throw std::invalid_argument("delta must be positive");
    if (target < 3) throw std::invalid_argument("target must be at least 3");
    if (!stakes.empty() && stakes.size() != n)
        throw std::invalid_argument("stakes must list exactly n values");
    for (uint64_t s : stakes)
        if (s == 0) throw std::invalid_argument("stakes must be positive");
    if (fault_mode != "scripted" && fault_mode != "random")
        throw std::invalid_argument("fault_mode must be scripted or random");
    if (fault_mode == "random" && random_kinds.empty())
        throw std::invalid_argument("random fault mode needs random_kinds");
    for (const std::string& k : random_kinds) behavior_from_name(k);
    for (const FaultEntry& fe : faults)
        if (fe.node >= universe())
            throw std::invalid_argument("fault entry names an unknown node");
    for (const JoinSpec& j : joins)
        if (j.node < n)
            throw std::invalid_argument("joining node id must be outside the initial set");
    for (const LeaveSpec& l : leaves)
        if (l.node >= n)
            throw std::invalid_argument("leaving node must be in the initial set");
    if ((!joins.empty() || !leaves.empty()) && epoch_length == 0)
        throw std::invalid_argument("membership changes need epoch_length > 0");
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

uint64_t to_u64(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad number for " + what + ": " + s);
    }
}

// "k:v k:v ..." token line
std::vector<std::pair<std::string, std::string>> tokens(const std::string& s) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& tok : split(s, ' ')) {
        auto c = tok.find(':');
        if (c == std::string::npos)
            throw std::invalid_argument("expected key:value token, got " + tok);
        out.emplace_back(tok.substr(0, c), tok.substr(c + 1));
    }
    return out;
}

}  // namespace

Scenario Scenario::parse(const std::string& text) {
    Scenario sc;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        line = line.substr(start);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("expected key=value: " + line);
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);

        if (key == "name") sc.name = val;
        else if (key == "n") sc.n = uint32_t(to_u64(val, key));
        else if (key == "f") sc.f = uint32_t(to_u64(val, key));
        else if (key == "standby") sc.standby = uint32_t(to_u64(val, key));
        else if (key == "delta") sc.delta = to_u64(val, key);
        else if (key == "delta_t_f") sc.delta_t_f = to_u64(val, key);
        else if (key == "state_period") sc.state_period = to_u64(val, key);
        else if (key == "gst") sc.gst = to_u64(val, key);
        else if (key == "pre_gst_drop_pct") sc.pre_gst_drop_pct = uint32_t(to_u64(val, key));
        else if (key == "pre_gst_max_delay") sc.pre_gst_max_delay = to_u64(val, key);
        else if (key == "max_jitter") sc.max_jitter = to_u64(val, key);
        else if (key == "seed") sc.seed = to_u64(val, key);
        else if (key == "target") sc.target = to_u64(val, key);
        else if (key == "max_ticks") sc.max_ticks = to_u64(val, key);
        else if (key == "epoch_length") sc.epoch_length = to_u64(val, key);
        else if (key == "block_txs") sc.block_txs = uint32_t(to_u64(val, key));
        else if (key == "coinbase") sc.coinbase = to_u64(val, key);
        else if (key == "all_to_all") sc.all_to_all = (val == "1" || val == "true");
        else if (key == "no_locks") sc.no_locks = (val == "1" || val == "true");
        else if (key == "fault_mode") sc.fault_mode = val;
        else if (key == "random_kinds") sc.random_kinds = split(val, ',');
        else if (key == "stakes") {
            sc.stakes.clear();
            for (const std::string& s : split(val, ',')) sc.stakes.push_back(to_u64(s, key));
        } else if (key == "fault") {
            FaultEntry fe;
            for (auto& [k, v] : tokens(val)) {
                if (k == "node") fe.node = uint32_t(to_u64(v, k));
                else if (k == "kind") fe.behavior = behavior_from_name(v);
                else if (k == "from") fe.from_height = to_u64(v, k);
                else if (k == "until") fe.until_height = to_u64(v, k);
                else throw std::invalid_argument("unknown fault field: " + k);
            }
            sc.faults.push_back(fe);
        } else if (key == "netdrop") {
            NetDrop nd;
            for (auto& [k, v] : tokens(val)) {
                if (k == "src") nd.src = int32_t(to_u64(v, k));
                else if (k == "dst") nd.dst = int32_t(to_u64(v, k));
                else if (k == "tag") nd.tag = int32_t(to_u64(v, k));
                else if (k == "from_tick") nd.from_tick = to_u64(v, k);
                else if (k == "until_tick") nd.until_tick = to_u64(v, k);
                else if (k == "count") nd.max_count = uint32_t(to_u64(v, k));
                else throw std::invalid_argument("unknown netdrop field: " + k);
            }
            sc.netdrops.push_back(nd);
        } else if (key == "jointx") {
            JoinSpec j;
            for (auto& [k, v] : tokens(val)) {
                if (k == "node") j.node = uint32_t(to_u64(v, k));
                else if (k == "deposit") j.deposit = to_u64(v, k);
                else if (k == "height") j.height = to_u64(v, k);
                else throw std::invalid_argument("unknown jointx field: " + k);
            }
            sc.joins.push_back(j);
        } else if (key == "leavetx") {
            LeaveSpec l;
            for (auto& [k, v] : tokens(val)) {
                if (k == "node") l.node = uint32_t(to_u64(v, k));
                else if (k == "height") l.height = to_u64(v, k);
                else throw std::invalid_argument("unknown leavetx field: " + k);
            }
            sc.leaves.push_back(l);
        } else {
            throw std::invalid_argument("unknown scenario key: " + key);
        }
    }
    sc.validate();
    return sc;
}

Scenario Scenario::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string Scenario::to_text() const {
    std::ostringstream o;
    o << "name=" << name << "\n";
    o << "n=" << n << "\n";
    o << "f=" << f << "\n";
    if (standby) o << "standby=" << standby << "\n";
    o << "delta=" << delta << "\n";
    if (delta_t_f) o << "delta_t_f=" << delta_t_f << "\n";
    if (state_period) o << "state_period=" << state_period << "\n";
    o << "gst=" << gst << "\n";
    if (pre_gst_drop_pct != 10) o << "pre_gst_drop_pct=" << pre_gst_drop_pct << "\n";
    if (pre_gst_max_delay) o << "pre_gst_max_delay=" << pre_gst_max_delay << "\n";
    if (max_jitter) o << "max_jitter=" << max_jitter << "\n";
    o << "seed=" << seed << "\n";
    o << "target=" << target << "\n";
    if (max_ticks) o << "max_ticks=" << max_ticks << "\n";
    if (epoch_length) o << "epoch_length=" << epoch_length << "\n";
    if (block_txs != 2) o << "block_txs=" << block_txs << "\n";
    if (coinbase != 10) o << "coinbase=" << coinbase << "\n";
    if (!stakes.empty()) {
        o << "stakes=";
        for (size_t i = 0; i < stakes.size(); ++i)
            o << (i ? "," : "") << stakes[i];
        o << "\n";
    }
    if (all_to_all) o << "all_to_all=1\n";
    if (no_locks) o << "no_locks=1\n";
    if (fault_mode != "scripted") o << "fault_mode=" << fault_mode << "\n";
    if (!random_kinds.empty()) {
        o << "random_kinds=";
        for (size_t i = 0; i < random_kinds.size(); ++i)
            o << (i ? "," : "") << random_kinds[i];
        o << "\n";
    }
    for (const FaultEntry& fe : faults) {
        o << "fault=node:" << fe.node << " kind:" << behavior_name(fe.behavior);
        if (fe.from_height) o << " from:" << fe.from_height;
        if (fe.until_height != UINT64_MAX) o << " until:" << fe.until_height;
        o << "\n";
    }
    for (const NetDrop& nd : netdrops) {
        o << "netdrop=";
        bool first = true;
        auto emit = [&](const std::string& k, uint64_t v) {
            if (!first) o << " ";
            o << k << ":" << v;
            first = false;
        };
        if (nd.src >= 0) emit("src", uint64_t(nd.src));
        if (nd.dst >= 0) emit("dst", uint64_t(nd.dst));
        if (nd.tag >= 0) emit("tag", uint64_t(nd.tag));
        if (nd.from_tick) emit("from_tick", nd.from_tick);
        if (nd.until_tick != UINT64_MAX) emit("until_tick", nd.until_tick);
        if (nd.max_count != UINT32_MAX) emit("count", nd.max_count);
        o << "\n";
    }
    for (const JoinSpec& j : joins)
        o << "jointx=node:" << j.node << " deposit:" << j.deposit
          << " height:" << j.height << "\n";
    for (const LeaveSpec& l : leaves)
        o << "leavetx=node:" << l.node << " height:" << l.height << "\n";
    return o.str();
}

}  // namespace linsbft
