#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "occ/bitio.hpp"
#include "occ/errors.hpp"

namespace occ {

using Symbol = std::uint32_t;

// Probabilities over an arbitrary finite support (prediction-set members,
// possibly plus an outage symbol). Caller order does not matter; table
// construction applies a total order so both ends build identical tables.
using ProbMap = std::vector<std::pair<Symbol, double>>;

enum class CodeKind { OneToOne, Shannon, Huffman };

// Codeword value held in the low `length` bits, transmitted MSB-first.
struct Codeword {
    std::uint64_t bits = 0;
    std::uint32_t length = 0;

    bool operator==(const Codeword&) const = default;
};

class CodeTable {
public:
    struct Entry {
        Symbol id;
        double prob;
        Codeword code;
    };

    CodeKind kind() const { return kind_; }
    std::size_t size() const { return entries_.size(); }

    // Entries in canonical order: rank order for one-to-one tables,
    // (length asc, id asc) for prefix-free tables.
    const std::vector<Entry>& entries() const { return entries_; }

    bool contains(Symbol id) const;
    const Entry& entry(Symbol id) const;  // throws Error when absent (caller bug)

private:
    struct Detail;  // construction helpers, defined in coder.cpp

    friend CodeTable build_one_to_one(const ProbMap& dist);
    friend CodeTable build_shannon(const ProbMap& dist);
    friend CodeTable build_huffman(const ProbMap& dist);
    friend Symbol decode_symbol(const CodeTable& table, BitReader& in);
    friend Symbol decode_one_to_one(const CodeTable& table, BitReader& in, std::uint32_t length);

    CodeKind kind_ = CodeKind::OneToOne;
    std::vector<Entry> entries_;                                // canonical order
    std::vector<std::pair<Symbol, std::uint32_t>> id_index_;    // id -> canonical index, sorted by id
    // Canonical-decode acceleration for prefix-free kinds, indexed by length.
    std::vector<std::uint64_t> first_code_;
    std::vector<std::uint32_t> first_index_;
    std::vector<std::uint32_t> count_;
};

// Rank code over {epsilon, 0, 1, 00, 01, 10, 11, 000, ...}: symbols ordered by
// (prob desc, id asc); the 1-based rank i gets the i-th enumeration string, of
// length floor(log2 i). Not prefix-free; decoding needs the message length.
CodeTable build_one_to_one(const ProbMap& dist);

// Prefix-free code with length(x) = ceil(-log2 p(x)), assigned canonically
// (sort by length then id, lexicographically increasing codewords).
CodeTable build_shannon(const ProbMap& dist);

// Canonical Huffman alternative: optimal average length, but only the Shannon
// table keeps the per-symbol length < -log2 p + 1 guarantee.
CodeTable build_huffman(const ProbMap& dist);

BitString encode_symbol(const CodeTable& table, Symbol id);

// Prefix-free decode; consumes exactly one codeword.
Symbol decode_symbol(const CodeTable& table, BitReader& in);

// One-to-one decode with the externally framed message length.
Symbol decode_one_to_one(const CodeTable& table, BitReader& in, std::uint32_t length);

// ceil(-log2 p) computed from the float exponent; exact for every finite p > 0.
std::uint32_t shannon_length(double p);

}  // namespace occ
