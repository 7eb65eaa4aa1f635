#include "occ/coder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <queue>

namespace occ {

namespace {

constexpr std::uint32_t kMaxCodeLength = 63;

// Total order shared by encoder and decoder so ties never desynchronize.
bool rank_before(Symbol id_a, double p_a, Symbol id_b, double p_b) {
    if (p_a != p_b) return p_a > p_b;
    return id_a < id_b;
}

void check_support(const ProbMap& dist) {
    if (dist.empty()) throw Error("code table over empty support");
    for (const auto& [id, p] : dist) {
        (void)id;
        if (!(p > 0.0)) throw Error("zero or negative probability in code table support");
    }
}

}  // namespace

std::uint32_t shannon_length(double p) {
    int exp = 0;
    std::frexp(p, &exp);  // p = m * 2^exp with m in [0.5, 1)
    int len = 1 - exp;    // = ceil(-log2 p), exact (m == 0.5 gives the integer case)
    if (len < 0) len = 0;
    if (static_cast<std::uint32_t>(len) > kMaxCodeLength) {
        throw Error("probability too small for a 63-bit codeword");
    }
    return static_cast<std::uint32_t>(len);
}

bool CodeTable::contains(Symbol id) const {
    auto it = std::lower_bound(id_index_.begin(), id_index_.end(), id,
                               [](const auto& e, Symbol s) { return e.first < s; });
    return it != id_index_.end() && it->first == id;
}

const CodeTable::Entry& CodeTable::entry(Symbol id) const {
    auto it = std::lower_bound(id_index_.begin(), id_index_.end(), id,
                               [](const auto& e, Symbol s) { return e.first < s; });
    if (it == id_index_.end() || it->first != id) throw Error("symbol not in code table");
    return entries_[it->second];
}

namespace {

void build_id_index(const std::vector<CodeTable::Entry>& entries,
                    std::vector<std::pair<Symbol, std::uint32_t>>& out) {
    out.resize(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out[i] = {entries[i].id, static_cast<std::uint32_t>(i)};
    }
    std::sort(out.begin(), out.end());
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].first == out[i - 1].first) throw Error("duplicate symbol in code table support");
    }
}

// Canonical codeword assignment over entries already sorted by (length, id).
// The running code overflowing a length is exactly a Kraft violation.
void assign_canonical(std::vector<CodeTable::Entry>& entries) {
    std::uint64_t code = 0;
    std::uint32_t prev_len = entries.front().code.length;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        std::uint32_t len = entries[i].code.length;
        if (i > 0) {
            if (len == 0) throw Error("zero-length codeword in multi-symbol table");
            code = (code + 1) << (len - prev_len);
            if (code >> len) throw Error("code lengths violate the Kraft inequality");
        }
        entries[i].code.bits = code;
        prev_len = len;
    }
}

}  // namespace

CodeTable build_one_to_one(const ProbMap& dist) {
    check_support(dist);
    CodeTable t;
    t.kind_ = CodeKind::OneToOne;
    t.entries_.reserve(dist.size());
    for (const auto& [id, p] : dist) t.entries_.push_back({id, p, {}});
    std::sort(t.entries_.begin(), t.entries_.end(), [](const auto& a, const auto& b) {
        return rank_before(a.id, a.prob, b.id, b.prob);
    });
    for (std::size_t i = 0; i < t.entries_.size(); ++i) {
        std::uint64_t rank = i + 1;
        std::uint32_t len = static_cast<std::uint32_t>(std::bit_width(rank)) - 1;
        t.entries_[i].code = {rank - (std::uint64_t{1} << len), len};
    }
    build_id_index(t.entries_, t.id_index_);
    return t;
}

struct CodeTable::Detail {
    static CodeTable finish_prefix_table(const ProbMap& dist, CodeKind kind,
                                         const std::vector<std::uint32_t>& lengths) {
        CodeTable t;
        t.kind_ = kind;
        t.entries_.reserve(dist.size());
        for (std::size_t i = 0; i < dist.size(); ++i) {
            t.entries_.push_back({dist[i].first, dist[i].second, {0, lengths[i]}});
        }
        std::sort(t.entries_.begin(), t.entries_.end(), [](const auto& a, const auto& b) {
            if (a.code.length != b.code.length) return a.code.length < b.code.length;
            return a.id < b.id;
        });
        assign_canonical(t.entries_);
        build_id_index(t.entries_, t.id_index_);

        const std::uint32_t max_len = t.entries_.back().code.length;
        t.first_code_.assign(max_len + 1, 0);
        t.first_index_.assign(max_len + 1, 0);
        t.count_.assign(max_len + 1, 0);
        for (std::size_t i = 0; i < t.entries_.size(); ++i) {
            std::uint32_t len = t.entries_[i].code.length;
            if (t.count_[len] == 0) {
                t.first_code_[len] = t.entries_[i].code.bits;
                t.first_index_[len] = static_cast<std::uint32_t>(i);
            }
            ++t.count_[len];
        }
        return t;
    }
};

CodeTable build_shannon(const ProbMap& dist) {
    check_support(dist);
    double sum = 0.0;
    for (const auto& [id, p] : dist) {
        (void)id;
        sum += p;
    }
    if (sum > 1.0 + 1e-9) throw Error("shannon table probabilities exceed 1");
    std::vector<std::uint32_t> lengths(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) lengths[i] = shannon_length(dist[i].second);
    return CodeTable::Detail::finish_prefix_table(dist, CodeKind::Shannon, lengths);
}

CodeTable build_huffman(const ProbMap& dist) {
    check_support(dist);
    const std::size_t n = dist.size();
    std::vector<std::uint32_t> lengths(n, 0);
    if (n > 1) {
        // Heap merge; ties broken by node creation index so both ends agree.
        struct Node {
            double weight;
            std::uint64_t tie;
            int left = -1, right = -1;
        };
        std::vector<Node> nodes;
        nodes.reserve(2 * n);
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return rank_before(dist[a].first, dist[a].second, dist[b].first, dist[b].second);
        });
        std::vector<std::size_t> leaf_of(n);  // dist index -> node index
        for (std::size_t i = 0; i < n; ++i) {
            leaf_of[order[i]] = nodes.size();
            nodes.push_back({dist[order[i]].second, nodes.size(), -1, -1});
        }
        auto cmp = [&nodes](int a, int b) {
            if (nodes[a].weight != nodes[b].weight) return nodes[a].weight > nodes[b].weight;
            return nodes[a].tie > nodes[b].tie;
        };
        std::priority_queue<int, std::vector<int>, decltype(cmp)> heap(cmp);
        for (std::size_t i = 0; i < n; ++i) heap.push(static_cast<int>(i));
        while (heap.size() > 1) {
            int a = heap.top(); heap.pop();
            int b = heap.top(); heap.pop();
            nodes.push_back({nodes[a].weight + nodes[b].weight, nodes.size(), a, b});
            heap.push(static_cast<int>(nodes.size() - 1));
        }
        std::vector<std::pair<int, std::uint32_t>> stack{{heap.top(), 0}};
        std::vector<std::uint32_t> depth(nodes.size(), 0);
        while (!stack.empty()) {
            auto [idx, d] = stack.back();
            stack.pop_back();
            depth[static_cast<std::size_t>(idx)] = d;
            if (nodes[static_cast<std::size_t>(idx)].left >= 0) {
                stack.push_back({nodes[static_cast<std::size_t>(idx)].left, d + 1});
                stack.push_back({nodes[static_cast<std::size_t>(idx)].right, d + 1});
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            lengths[i] = depth[leaf_of[i]];
            if (lengths[i] > kMaxCodeLength) throw Error("huffman codeword exceeds 63 bits");
        }
    }
    return CodeTable::Detail::finish_prefix_table(dist, CodeKind::Huffman, lengths);
}

BitString encode_symbol(const CodeTable& table, Symbol id) {
    const auto& e = table.entry(id);
    BitString out;
    out.append_bits(e.code.bits, e.code.length);
    return out;
}

Symbol decode_symbol(const CodeTable& table, BitReader& in) {
    if (table.kind_ == CodeKind::OneToOne) {
        throw Error("one-to-one tables need decode_one_to_one with a message length");
    }
    if (table.entries_.size() == 1 && table.entries_[0].code.length == 0) {
        return table.entries_[0].id;
    }
    std::uint64_t code = 0;
    std::uint32_t len = 0;
    const std::uint32_t max_len = table.entries_.back().code.length;
    while (true) {
        code = (code << 1) | (in.read_bit() ? 1u : 0u);
        ++len;
        if (len > max_len) throw IntegrityError("invalid prefix codeword");
        if (table.count_[len] > 0 && code >= table.first_code_[len] &&
            code - table.first_code_[len] < table.count_[len]) {
            return table.entries_[table.first_index_[len] + (code - table.first_code_[len])].id;
        }
    }
}

Symbol decode_one_to_one(const CodeTable& table, BitReader& in, std::uint32_t length) {
    if (length > kMaxCodeLength) throw IntegrityError("one-to-one message length out of range");
    std::uint64_t value = in.read_bits(length);
    std::uint64_t rank = (std::uint64_t{1} << length) + value;
    if (rank > table.entries_.size()) throw IntegrityError("one-to-one rank out of range");
    return table.entries_[rank - 1].id;
}

}  // namespace occ
