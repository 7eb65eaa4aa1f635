#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "occ/bitio.hpp"
#include "occ/codec.hpp"
#include "occ/errors.hpp"

namespace occ {

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::uint8_t kContainerMagic[4] = {'O', 'C', 'C', 'F'};

// All multi-byte header fields are big-endian; doubles travel as their IEEE
// bit patterns. Layout: magic, version, mode, coder_backend, alpha, gamma1,
// eta1, beta, predictor_hash, alphabet_size, T, payload_bits, body, crc32.
struct ContainerHeader {
    std::uint16_t version = kContainerVersion;
    Mode mode = Mode::Sync;
    CoderBackend coder_backend = CoderBackend::Shannon;
    double alpha = 0.0;
    double gamma1 = 0.0;
    double eta1 = 0.0;
    double beta = 0.0;
    std::uint64_t predictor_hash = 0;
    std::uint32_t alphabet_size = 0;
    std::uint64_t T = 0;
    std::uint64_t payload_bits = 0;  // sum of slot payload lengths
};

struct Container {
    ContainerHeader header;
    std::vector<SlotMessage> slots;  // sync body
    BitString stream;                // async body
};

// Header template from a codec config; T and payload_bits are filled in by
// write_container.
ContainerHeader make_header(const CodecConfig& config);

// Sync body: per-slot {present byte, varint bit length, payload}. Async body:
// the concatenated payloads as one bitstream (every message must be present).
std::vector<std::uint8_t> write_container(ContainerHeader header,
                                          const std::vector<SlotMessage>& messages);

Container read_container(const std::vector<std::uint8_t>& bytes);

void save_container(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> load_container(const std::string& path);

// CRC-32 (reflected polynomial 0xEDB88320, init and final xor 0xFFFFFFFF).
std::uint32_t crc32(const std::uint8_t* data, std::size_t n);

// Unsigned LEB128.
void append_varint(std::vector<std::uint8_t>& out, std::uint64_t value);
std::uint64_t read_varint(const std::vector<std::uint8_t>& bytes, std::size_t& pos);

}  // namespace occ
