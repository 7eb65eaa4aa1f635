#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "occ/benchmarks.hpp"
#include "occ/bitio.hpp"
#include "occ/coder.hpp"
#include "occ/errors.hpp"

using namespace occ;

namespace {

ProbMap random_dist(SplitMix64& rng, std::size_t min_size = 1, std::size_t max_size = 64) {
    std::size_t n = min_size + rng.next_below(max_size - min_size + 1);
    ProbMap dist;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = rng.next_unit() + 1e-6;
        if (rng.next_below(4) == 0) w *= 1e-6;  // occasional tiny mass
        dist.emplace_back(static_cast<Symbol>(i), w);
        sum += w;
    }
    for (auto& [id, p] : dist) p /= sum;
    return dist;
}

// Exact Kraft sum: with L = max length, sum of 2^(L - len_i) must be <= 2^L.
bool kraft_holds(const CodeTable& table) {
    std::uint32_t lmax = 0;
    for (const auto& e : table.entries()) lmax = std::max(lmax, e.code.length);
    REQUIRE(lmax < 64);
    unsigned __int128 sum = 0;
    for (const auto& e : table.entries()) sum += (unsigned __int128)1 << (lmax - e.code.length);
    return sum <= (unsigned __int128)1 << lmax;
}

bool is_prefix(const Codeword& a, const Codeword& b) {
    if (a.length > b.length) return false;
    return (b.bits >> (b.length - a.length)) == a.bits;
}

}  // namespace

TEST_CASE("shannon_length is exactly ceil(-log2 p)") {
    CHECK(shannon_length(1.0) == 0);
    CHECK(shannon_length(0.5) == 1);
    CHECK(shannon_length(0.25) == 2);
    CHECK(shannon_length(0.2) == 3);
    CHECK(shannon_length(0.6) == 1);
    CHECK(shannon_length(0.3) == 2);

    SplitMix64 rng(7);
    for (int i = 0; i < 20000; ++i) {
        double p = std::exp2(-40.0 * rng.next_unit());
        std::uint32_t len = shannon_length(p);
        // 2^-len <= p, and len < -log2 p + 1  <=>  p < 2^-(len-1).
        CHECK(std::exp2(-static_cast<double>(len)) <= p);
        if (len > 0) CHECK(p < std::exp2(-(static_cast<double>(len) - 1.0)));
    }
}

TEST_CASE("one-to-one code enumerates {eps,0,1,00,...} in rank order") {
    // Ranks ordered by probability descending, id ascending on ties.
    ProbMap dist = {{10, 0.05}, {3, 0.4}, {7, 0.3}, {1, 0.15}, {5, 0.1}};
    CodeTable table = build_one_to_one(dist);
    REQUIRE(table.size() == 5);
    const auto& e = table.entries();
    CHECK(e[0].id == 3);
    CHECK(e[1].id == 7);
    CHECK(e[2].id == 1);
    CHECK(e[3].id == 5);
    CHECK(e[4].id == 10);
    // Rank i (1-based) gets length floor(log2 i).
    CHECK(e[0].code == Codeword{0, 0});
    CHECK(e[1].code == Codeword{0, 1});
    CHECK(e[2].code == Codeword{1, 1});
    CHECK(e[3].code == Codeword{0, 2});
    CHECK(e[4].code == Codeword{1, 2});
}

TEST_CASE("one-to-one lengths follow floor(log2 rank) at scale") {
    ProbMap dist;
    for (Symbol i = 0; i < 300; ++i) dist.emplace_back(i, (300.0 - i));
    CodeTable table = build_one_to_one(dist);
    for (std::size_t i = 0; i < table.entries().size(); ++i) {
        auto rank = static_cast<double>(i + 1);
        CHECK(table.entries()[i].code.length ==
              static_cast<std::uint32_t>(std::floor(std::log2(rank))));
    }
}

TEST_CASE("one-to-one ties break to the lower id") {
    ProbMap dist = {{7, 0.5}, {3, 0.5}};
    CodeTable table = build_one_to_one(dist);
    CHECK(table.entries()[0].id == 3);
    CHECK(table.entries()[0].code.length == 0);  // empty string
    CHECK(table.entries()[1].id == 7);
    CHECK(table.entries()[1].code == Codeword{0, 1});
}

TEST_CASE("two-symbol one-to-one example: {a:0.625, b:0.375}") {
    ProbMap dist = {{0, 0.625}, {1, 0.375}};
    CodeTable table = build_one_to_one(dist);
    CHECK(encode_symbol(table, 0).size() == 0);
    BitString b = encode_symbol(table, 1);
    CHECK(b.to_string() == "0");
}

TEST_CASE("one-to-one roundtrip with external length framing") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        ProbMap dist = random_dist(rng);
        CodeTable table = build_one_to_one(dist);
        for (const auto& e : table.entries()) {
            BitString bits = encode_symbol(table, e.id);
            BitReader reader(bits);
            Symbol got = decode_one_to_one(table, reader, static_cast<std::uint32_t>(bits.size()));
            CHECK(got == e.id);
            CHECK(reader.remaining() == 0);
        }
    }
}

TEST_CASE("shannon lengths equal ceil(-log2 p) and the code is prefix-free") {
    SplitMix64 rng(13);
    for (int trial = 0; trial < 500; ++trial) {
        ProbMap dist = random_dist(rng);
        CodeTable table = build_shannon(dist);
        for (const auto& e : table.entries()) {
            CHECK(e.code.length == shannon_length(e.prob));
        }
        for (std::size_t i = 0; i < table.size(); ++i) {
            for (std::size_t j = i + 1; j < table.size(); ++j) {
                CHECK_FALSE(is_prefix(table.entries()[i].code, table.entries()[j].code));
                CHECK_FALSE(is_prefix(table.entries()[j].code, table.entries()[i].code));
            }
        }
    }
}

TEST_CASE("shannon satisfies Kraft exactly on 10^4 random tables") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 10000; ++trial) {
        CodeTable table = build_shannon(random_dist(rng));
        CHECK(kraft_holds(table));
    }
}

TEST_CASE("canonical shannon on uniform-4 gives 00,01,10,11") {
    ProbMap dist = {{0, 0.25}, {1, 0.25}, {2, 0.25}, {3, 0.25}};
    CodeTable table = build_shannon(dist);
    CHECK(encode_symbol(table, 0).to_string() == "00");
    CHECK(encode_symbol(table, 1).to_string() == "01");
    CHECK(encode_symbol(table, 2).to_string() == "10");
    CHECK(encode_symbol(table, 3).to_string() == "11");
}

TEST_CASE("prefix decode roundtrips concatenated messages") {
    SplitMix64 rng(19);
    for (int trial = 0; trial < 200; ++trial) {
        ProbMap dist = random_dist(rng, 2, 40);
        CodeTable shannon = build_shannon(dist);
        CodeTable huffman = build_huffman(dist);
        for (const CodeTable* table : {&shannon, &huffman}) {
            std::vector<Symbol> sent;
            BitString stream;
            for (int k = 0; k < 64; ++k) {
                Symbol id = table->entries()[rng.next_below(table->size())].id;
                sent.push_back(id);
                stream.append(encode_symbol(*table, id));
            }
            BitReader reader(stream);
            for (Symbol id : sent) CHECK(decode_symbol(*table, reader) == id);
            CHECK(reader.remaining() == 0);
        }
    }
}

TEST_CASE("huffman is optimal: average length <= shannon, Kraft holds") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        ProbMap dist = random_dist(rng, 2, 40);
        CodeTable shannon = build_shannon(dist);
        CodeTable huffman = build_huffman(dist);
        CHECK(kraft_holds(huffman));
        double avg_s = 0.0, avg_h = 0.0;
        for (const auto& e : shannon.entries()) avg_s += e.prob * e.code.length;
        for (const auto& e : huffman.entries()) avg_h += e.prob * e.code.length;
        CHECK(avg_h <= avg_s + 1e-12);
    }
}

TEST_CASE("table construction is deterministic") {
    SplitMix64 rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        ProbMap dist = random_dist(rng);
        for (auto build : {build_shannon, build_huffman, build_one_to_one}) {
            CodeTable a = build(dist);
            ProbMap reversed(dist.rbegin(), dist.rend());  // caller order is irrelevant
            CodeTable b = build(reversed);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a.entries()[i].id == b.entries()[i].id);
                CHECK(a.entries()[i].code == b.entries()[i].code);
            }
        }
    }
}

TEST_CASE("degenerate single-symbol tables") {
    ProbMap dist = {{4, 1.0}};
    CodeTable one = build_one_to_one(dist);
    CHECK(one.entries()[0].code.length == 0);
    CodeTable sh = build_shannon(dist);
    CHECK(sh.entries()[0].code.length == 0);
    // Zero-length prefix codeword decodes without consuming bits.
    BitReader reader(nullptr, 0);
    CHECK(decode_symbol(sh, reader) == 4);
}

TEST_CASE("coder error paths") {
    ProbMap dist = {{0, 0.5}, {1, 0.5}};
    CodeTable table = build_shannon(dist);
    CHECK_THROWS_AS((void)table.entry(9), Error);
    CHECK_FALSE(table.contains(9));
    BitReader empty(nullptr, 0);
    CHECK_THROWS_AS((void)decode_symbol(table, empty), IntegrityError);
    CHECK_THROWS_AS(build_shannon(ProbMap{}), Error);
    CHECK_THROWS_AS(build_shannon(ProbMap{{0, 0.0}}), Error);
    CHECK_THROWS_AS(build_shannon(ProbMap{{0, 0.5}, {0, 0.5}}), Error);
}
