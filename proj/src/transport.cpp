#include "occ/transport.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace occ {

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteCursor {
public:
    ByteCursor(const std::vector<std::uint8_t>& bytes, std::size_t limit)
        : bytes_(bytes), limit_(limit) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = (std::uint16_t(bytes_[pos_]) << 8) | bytes_[pos_ + 1];
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_ + i];
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | bytes_[pos_ + i];
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    const std::uint8_t* raw(std::size_t n) {
        need(n);
        const std::uint8_t* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return limit_ - pos_; }

    std::size_t pos_ = 0;

private:
    void need(std::size_t n) const {
        if (pos_ + n > limit_) throw IntegrityError("container truncated");
    }
    const std::vector<std::uint8_t>& bytes_;
    std::size_t limit_;
};

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t n) {
    static const auto table = make_crc_table();
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

void append_varint(std::vector<std::uint8_t>& out, std::uint64_t value) {
    while (value >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(value) | 0x80);
        value >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(value));
}

std::uint64_t read_varint(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    std::uint64_t value = 0;
    for (int shift = 0; shift < 64; shift += 7) {
        if (pos >= bytes.size()) throw IntegrityError("container truncated inside a varint");
        std::uint8_t b = bytes[pos++];
        value |= std::uint64_t(b & 0x7F) << shift;
        if (!(b & 0x80)) return value;
    }
    throw IntegrityError("varint longer than 64 bits");
}

ContainerHeader make_header(const CodecConfig& config) {
    ContainerHeader h;
    h.mode = config.mode;
    h.coder_backend = config.coder_backend;
    h.alpha = config.conformal.alpha;
    h.gamma1 = config.conformal.resolved_gamma1();
    h.eta1 = config.conformal.eta1;
    h.beta = config.conformal.beta;
    h.predictor_hash = config.predictor.hash();
    h.alphabet_size = config.predictor.alphabet_size;
    return h;
}

std::vector<std::uint8_t> write_container(ContainerHeader header,
                                          const std::vector<SlotMessage>& messages) {
    header.T = messages.size();
    header.payload_bits = 0;
    for (const auto& m : messages) header.payload_bits += m.payload.size();

    std::vector<std::uint8_t> out;
    out.insert(out.end(), std::begin(kContainerMagic), std::end(kContainerMagic));
    put_u16(out, header.version);
    out.push_back(static_cast<std::uint8_t>(header.mode));
    out.push_back(static_cast<std::uint8_t>(header.coder_backend));
    put_f64(out, header.alpha);
    put_f64(out, header.gamma1);
    put_f64(out, header.eta1);
    put_f64(out, header.beta);
    put_u64(out, header.predictor_hash);
    put_u32(out, header.alphabet_size);
    put_u64(out, header.T);
    put_u64(out, header.payload_bits);

    if (header.mode == Mode::Sync) {
        for (const auto& m : messages) {
            if (!m.present && m.payload.size() != 0) {
                throw Error("absent slot with a non-empty payload");
            }
            out.push_back(m.present ? 1 : 0);
            if (m.present) {
                append_varint(out, m.payload.size());
                const auto& bytes = m.payload.bytes();
                out.insert(out.end(), bytes.begin(), bytes.end());
            }
        }
    } else {
        BitString stream;
        for (const auto& m : messages) {
            if (!m.present) throw Error("async containers cannot hold absent slots");
            stream.append(m.payload);
        }
        const auto& bytes = stream.bytes();
        out.insert(out.end(), bytes.begin(), bytes.end());
    }

    put_u32(out, crc32(out.data(), out.size()));
    return out;
}

Container read_container(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < sizeof(kContainerMagic) + 4) throw IntegrityError("container truncated");
    if (std::memcmp(bytes.data(), kContainerMagic, sizeof(kContainerMagic)) != 0) {
        throw IntegrityError("bad container magic");
    }
    std::size_t body_end = bytes.size() - 4;
    std::uint32_t stored_crc = 0;
    for (int i = 0; i < 4; ++i) stored_crc = (stored_crc << 8) | bytes[body_end + i];
    if (crc32(bytes.data(), body_end) != stored_crc) {
        throw IntegrityError("container checksum mismatch");
    }

    ByteCursor in(bytes, body_end);
    in.raw(sizeof(kContainerMagic));

    Container c;
    c.header.version = in.u16();
    if (c.header.version != kContainerVersion) {
        throw IntegrityError("unsupported container version " + std::to_string(c.header.version));
    }
    std::uint8_t mode_byte = in.u8();
    if (mode_byte > 1) throw IntegrityError("bad mode byte");
    c.header.mode = static_cast<Mode>(mode_byte);
    std::uint8_t backend_byte = in.u8();
    if (backend_byte > 1) throw IntegrityError("bad coder backend byte");
    c.header.coder_backend = static_cast<CoderBackend>(backend_byte);
    c.header.alpha = in.f64();
    c.header.gamma1 = in.f64();
    c.header.eta1 = in.f64();
    c.header.beta = in.f64();
    c.header.predictor_hash = in.u64();
    c.header.alphabet_size = in.u32();
    c.header.T = in.u64();
    c.header.payload_bits = in.u64();

    if (c.header.mode == Mode::Sync) {
        std::uint64_t total_bits = 0;
        c.slots.reserve(c.header.T);
        for (std::uint64_t i = 0; i < c.header.T; ++i) {
            std::uint8_t present = in.u8();
            if (present > 1) throw IntegrityError("bad slot present byte");
            SlotMessage m;
            m.present = present == 1;
            if (m.present) {
                std::uint64_t nbits = read_varint(bytes, in.pos_);
                // The varint reader sees the raw buffer; re-check the cursor
                // limit and cap nbits before any (nbits + 7) / 8 arithmetic.
                if (in.pos_ > body_end) throw IntegrityError("container truncated");
                if (nbits > 8 * static_cast<std::uint64_t>(body_end) ||
                    in.remaining() < (nbits + 7) / 8) {
                    throw IntegrityError("container truncated");
                }
                std::size_t nbytes = static_cast<std::size_t>((nbits + 7) / 8);
                const std::uint8_t* p = in.raw(nbytes);
                m.payload =
                    BitString::from_bytes(std::vector<std::uint8_t>(p, p + nbytes), nbits);
                total_bits += nbits;
            }
            c.slots.push_back(std::move(m));
        }
        if (in.remaining() != 0) throw IntegrityError("trailing bytes after sync body");
        if (total_bits != c.header.payload_bits) {
            throw IntegrityError("payload bit accounting mismatch");
        }
    } else {
        if (c.header.payload_bits > 8 * static_cast<std::uint64_t>(in.remaining())) {
            throw IntegrityError("async body length mismatch");
        }
        std::size_t nbytes = static_cast<std::size_t>((c.header.payload_bits + 7) / 8);
        if (in.remaining() != nbytes) throw IntegrityError("async body length mismatch");
        const std::uint8_t* p = in.raw(nbytes);
        c.stream = BitString::from_bytes(std::vector<std::uint8_t>(p, p + nbytes),
                                         c.header.payload_bits);
    }
    return c;
}

void save_container(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write container: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out.good()) throw IoError("write failed: " + path);
}

std::vector<std::uint8_t> load_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open container: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace occ
