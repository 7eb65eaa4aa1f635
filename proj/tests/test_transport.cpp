#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "occ/benchmarks.hpp"
#include "occ/errors.hpp"
#include "occ/transport.hpp"

using namespace occ;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/occ_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

BitString bits_of(const std::string& s) {
    BitString b;
    for (char ch : s) b.push_back(ch == '1');
    return b;
}

ContainerHeader header_for(Mode mode) {
    CodecConfig config = testing::basic_config(mode, 0.2, testing::text_spec(2, 256));
    return make_header(config);
}

// Rewrites one byte and repairs the trailing CRC so only the targeted
// validation fires.
std::vector<std::uint8_t> patched(std::vector<std::uint8_t> bytes, std::size_t offset,
                                  std::uint8_t value) {
    bytes[offset] = value;
    std::uint32_t crc = crc32(bytes.data(), bytes.size() - 4);
    for (int i = 0; i < 4; ++i) {
        bytes[bytes.size() - 4 + static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(crc >> (24 - 8 * i));
    }
    return bytes;
}

}  // namespace

TEST_CASE("crc32 reference vector") {
    const char* s = "123456789";
    CHECK(crc32(reinterpret_cast<const std::uint8_t*>(s), 9) == 0xCBF43926u);
    CHECK(crc32(nullptr, 0) == 0x00000000u);
}

TEST_CASE("varint roundtrip and edge cases") {
    for (std::uint64_t v : {0ull, 1ull, 127ull, 128ull, 300ull, 16383ull, 16384ull,
                            0xFFFFFFFFull, 0xFFFFFFFFFFFFFFFFull}) {
        std::vector<std::uint8_t> buf;
        append_varint(buf, v);
        std::size_t pos = 0;
        CHECK(read_varint(buf, pos) == v);
        CHECK(pos == buf.size());
    }
    CHECK([] {
        std::vector<std::uint8_t> buf;
        append_varint(buf, 127);
        return buf.size();
    }() == 1);

    std::vector<std::uint8_t> overlong(10, 0x80);  // never terminates within 64 bits
    std::size_t pos = 0;
    CHECK_THROWS_AS((void)read_varint(overlong, pos), IntegrityError);
    std::vector<std::uint8_t> cut = {0x80, 0x80};  // continuation bit set at the end
    pos = 0;
    CHECK_THROWS_AS((void)read_varint(cut, pos), IntegrityError);
}

TEST_CASE("sync container roundtrip with absent, empty, and long slots") {
    std::vector<SlotMessage> slots = {
        {true, bits_of("0")},
        {false, {}},
        {true, {}},  // present with zero bits is distinct from absent
        {true, bits_of("110")},
        {false, {}},
        {true, bits_of("10101010101")},
    };
    auto bytes = write_container(header_for(Mode::Sync), slots);
    Container c = read_container(bytes);
    CHECK(c.header.version == kContainerVersion);
    CHECK(c.header.mode == Mode::Sync);
    CHECK(c.header.T == slots.size());
    CHECK(c.header.payload_bits == 15);  // 1 + 0 + 0 + 3 + 0 + 11
    REQUIRE(c.slots.size() == slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) CHECK(c.slots[i] == slots[i]);
    CHECK(c.header.alpha == 0.2);
    CHECK(c.header.gamma1 == 0.2);  // defaulted to alpha
    CHECK(c.header.alphabet_size == 256);
}

TEST_CASE("async container roundtrip concatenates the stream") {
    std::vector<SlotMessage> slots = {
        {true, bits_of("0")},
        {true, bits_of("110")},
        {true, {}},
        {true, bits_of("10")},
    };
    auto bytes = write_container(header_for(Mode::Async), slots);
    Container c = read_container(bytes);
    CHECK(c.header.mode == Mode::Async);
    CHECK(c.header.T == 4);
    CHECK(c.stream == bits_of("011010"));
    CHECK(c.slots.empty());

    std::vector<SlotMessage> with_absent = {{true, bits_of("0")}, {false, {}}};
    CHECK_THROWS_AS(write_container(header_for(Mode::Async), with_absent), Error);
}

TEST_CASE("empty run (T = 0) still roundtrips") {
    for (Mode mode : {Mode::Sync, Mode::Async}) {
        auto bytes = write_container(header_for(mode), {});
        Container c = read_container(bytes);
        CHECK(c.header.T == 0);
        CHECK(c.header.payload_bits == 0);
        CHECK(c.slots.empty());
        CHECK(c.stream.empty());
    }
}

TEST_CASE("container encoding is injective over slot sequences") {
    std::vector<std::vector<SlotMessage>> cases = {
        {},
        {{false, {}}},
        {{true, {}}},
        {{true, bits_of("0")}},
        {{true, bits_of("1")}},
        {{true, bits_of("00")}},
        {{true, bits_of("0")}, {false, {}}},
        {{false, {}}, {true, bits_of("0")}},
        {{true, {}}, {true, {}}},
    };
    std::set<std::vector<std::uint8_t>> images;
    for (const auto& slots : cases) {
        images.insert(write_container(header_for(Mode::Sync), slots));
    }
    CHECK(images.size() == cases.size());
}

TEST_CASE("corruption detection") {
    std::vector<SlotMessage> slots = {{true, bits_of("1101")}, {false, {}}};
    auto bytes = write_container(header_for(Mode::Sync), slots);

    SUBCASE("bit flip anywhere fails the checksum") {
        for (std::size_t i = 0; i < bytes.size(); i += 7) {
            auto bad = bytes;
            bad[i] ^= 0x40;
            CHECK_THROWS_AS((void)read_container(bad), IntegrityError);
        }
    }
    SUBCASE("truncation at every prefix is rejected") {
        for (std::size_t keep = 0; keep < bytes.size(); ++keep) {
            std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + keep);
            CHECK_THROWS_AS((void)read_container(cut), IntegrityError);
        }
    }
    SUBCASE("bad magic") {
        auto bad = patched(bytes, 0, 'X');
        CHECK_THROWS_AS((void)read_container(bad), IntegrityError);
    }
    SUBCASE("unsupported version") {
        auto bad = patched(bytes, 5, 99);  // version low byte
        CHECK_THROWS_AS((void)read_container(bad), IntegrityError);
    }
    SUBCASE("bad mode byte") {
        auto bad = patched(bytes, 6, 7);
        CHECK_THROWS_AS((void)read_container(bad), IntegrityError);
    }
    SUBCASE("bad backend byte") {
        auto bad = patched(bytes, 7, 9);
        CHECK_THROWS_AS((void)read_container(bad), IntegrityError);
    }
    SUBCASE("payload bit accounting mismatch") {
        // payload_bits is the u64 at offset 60 (4+2+1+1+8*4+8+4+8 = 60).
        auto bad = patched(bytes, 67, bytes[67] ^ 1);
        CHECK_THROWS_AS((void)read_container(bad), IntegrityError);
    }
    SUBCASE("bad slot present byte") {
        auto bad = patched(bytes, 68, 2);  // first slot's present flag
        CHECK_THROWS_AS((void)read_container(bad), IntegrityError);
    }
}

TEST_CASE("sync slot count must match T") {
    std::vector<SlotMessage> slots = {{true, bits_of("1")}, {true, bits_of("0")}};
    auto bytes = write_container(header_for(Mode::Sync), slots);
    // T lives at offset 52; drop it to 1 so a trailing slot remains.
    auto bad = patched(bytes, 59, 1);
    CHECK_THROWS_AS((void)read_container(bad), IntegrityError);
}

TEST_CASE("async body length must match payload_bits") {
    std::vector<SlotMessage> slots = {{true, bits_of("10110")}};
    auto bytes = write_container(header_for(Mode::Async), slots);
    auto bad = patched(bytes, 67, bytes[67] + 8);  // claim one more body byte
    CHECK_THROWS_AS((void)read_container(bad), IntegrityError);
}

TEST_CASE("make_header copies the codec configuration") {
    CodecConfig config = testing::basic_config(Mode::Async, 0.15, testing::text_spec(3, 64), 0.01, 0.4);
    config.conformal.gamma1 = 0.3;
    config.coder_backend = CoderBackend::Huffman;
    ContainerHeader h = make_header(config);
    CHECK(h.mode == Mode::Async);
    CHECK(h.coder_backend == CoderBackend::Huffman);
    CHECK(h.alpha == 0.15);
    CHECK(h.gamma1 == 0.3);
    CHECK(h.eta1 == 0.01);
    CHECK(h.beta == 0.4);
    CHECK(h.alphabet_size == 64);
    CHECK(h.predictor_hash == config.predictor.hash());
}

TEST_CASE("full pipeline: encode, persist, reload, decode") {
    auto seq = testing::to_symbols(testing::english_like(600, 101));
    for (Mode mode : {Mode::Sync, Mode::Async}) {
        CodecConfig config = testing::basic_config(mode, 0.2, testing::text_spec(2, 256), 0.01);
        StreamEncoder enc(config);
        std::vector<SlotMessage> messages;
        std::vector<Symbol> recon;
        for (Symbol x : seq) {
            StepOutcome out = enc.encode_step(x);
            messages.push_back(out.message);
            recon.push_back(out.reconstructed);
        }
        TempFile f(std::string("pipeline_") + to_string(mode) + ".occ");
        save_container(f.path, write_container(make_header(config), messages));
        Container c = read_container(load_container(f.path));
        REQUIRE(c.header.T == seq.size());

        StreamDecoder dec(config);
        std::vector<Symbol> decoded;
        if (mode == Mode::Sync) {
            for (const auto& slot : c.slots) decoded.push_back(dec.decode_slot(slot).reconstructed);
        } else {
            BitReader reader(c.stream);
            for (std::uint64_t i = 0; i < c.header.T; ++i) {
                decoded.push_back(dec.decode_next(reader).reconstructed);
            }
            CHECK(reader.remaining() == 0);
        }
        CHECK(decoded == recon);
    }
}

TEST_CASE("file errors surface as IoError") {
    CHECK_THROWS_AS((void)load_container("/tmp/occ_missing_container.occ"), IoError);
    CHECK_THROWS_AS(save_container("/nonexistent-dir/x.occ", {1, 2, 3}), IoError);
}
