#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "occ/benchmarks.hpp"
#include "occ/codec.hpp"
#include "occ/predictor.hpp"

namespace occ::testing {

// English-like filler with word-frequency skew, enough structure for a
// context model to beat 8 bits/byte by a wide margin.
inline std::vector<std::uint8_t> english_like(std::size_t n, std::uint64_t seed) {
    static const char* kWords[] = {
        "the",  "of",      "and",    "to",     "in",     "is",      "that",    "channel",
        "rate", "bound",   "stream", "symbol", "online", "quantile", "set",    "coverage",
        "loss", "encoder", "decoder", "signal", "noise",  "model",   "update", "threshold"};
    static const double kCum[] = {0.12, 0.22, 0.31, 0.39, 0.46, 0.52, 0.57, 0.61,
                                  0.65, 0.69, 0.72, 0.75, 0.78, 0.81, 0.84, 0.86,
                                  0.88, 0.90, 0.92, 0.94, 0.96, 0.975, 0.99, 1.0};
    SplitMix64 rng(seed);
    std::vector<std::uint8_t> out;
    out.reserve(n + 16);
    std::size_t since_period = 0;
    while (out.size() < n) {
        double u = rng.next_unit();
        std::size_t w = 0;
        while (kCum[w] < u) ++w;
        for (const char* p = kWords[w]; *p; ++p) out.push_back(static_cast<std::uint8_t>(*p));
        ++since_period;
        if (since_period >= 8 + rng.next_below(6)) {
            out.push_back('.');
            out.push_back(' ');
            since_period = 0;
        } else {
            out.push_back(' ');
        }
    }
    out.resize(n);
    return out;
}

// Machine-log texture: fixed-shape hex records, highly predictable per column.
inline std::vector<std::uint8_t> hex_records(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    static const char kHex[] = "0123456789abcdef";
    std::vector<std::uint8_t> out;
    out.reserve(n + 32);
    while (out.size() < n) {
        out.push_back('0');
        out.push_back('x');
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(kHex[rng.next_below(16)]));
        out.push_back(',');
        out.push_back('0');
        out.push_back('x');
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(kHex[rng.next_below(4)]));
        out.push_back('\n');
    }
    out.resize(n);
    return out;
}

// First half English-like, second half hex records: a mid-stream source shift.
inline std::vector<std::uint8_t> shifted_corpus(std::size_t n, std::uint64_t seed) {
    auto a = english_like(n / 2, seed);
    auto b = hex_records(n - n / 2, seed + 1);
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline std::vector<std::uint8_t> uniform_bytes(std::size_t n, std::uint32_t alphabet,
                                               std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng.next_below(alphabet));
    return out;
}

inline std::vector<Symbol> to_symbols(const std::vector<std::uint8_t>& bytes,
                                      std::uint32_t alphabet = 256) {
    std::vector<Symbol> out(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) out[i] = bytes[i] % alphabet;
    return out;
}

inline PredictorSpec text_spec(std::uint32_t order = 2, std::uint32_t alphabet = 256) {
    PredictorSpec spec;
    spec.kind = PredictorKind::ContextModel;
    spec.alphabet_size = alphabet;
    spec.order = order;
    spec.smoothing = 0.5;
    return spec;
}

inline PredictorSpec uniform_spec(std::uint32_t alphabet) {
    PredictorSpec spec;
    spec.kind = PredictorKind::Uniform;
    spec.alphabet_size = alphabet;
    return spec;
}

inline CodecConfig basic_config(Mode mode, double alpha, const PredictorSpec& spec,
                                double eta1 = 0.001, double beta = 0.0) {
    CodecConfig config;
    config.mode = mode;
    config.conformal.alpha = alpha;
    config.conformal.eta1 = eta1;
    config.conformal.beta = beta;
    config.predictor = spec;
    return config;
}

}  // namespace occ::testing
