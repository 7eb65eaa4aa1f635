#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "occ/codec.hpp"

namespace occ {

// SplitMix64 (Steele, Lea, Flood 2014): state advances by the golden-gamma
// constant, output is the mixed state. Fixed here as the library's common
// randomness so encoder and decoder draws agree bit-for-bit.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return n ? next() % n : 0; }

private:
    std::uint64_t state_;
};

struct DropoutConfig {
    double alpha = 0.1;
    std::uint64_t seed = 1;
};

// Dropout-LLMZip: lossless coding under the full predictive distribution,
// except each step is independently dropped with probability alpha using the
// shared seed. No conformal machinery; no per-sequence guarantee.
std::vector<StepOutcome> dropout_llmzip_run(const std::vector<Symbol>& sequence,
                                            const PredictorSpec& predictor,
                                            const DropoutConfig& config, Mode mode,
                                            CoderBackend backend = CoderBackend::Shannon);

struct BccConfig {
    double alpha = 0.1;
    PredictorSpec predictor;
    CoderBackend coder_backend = CoderBackend::Shannon;
    std::uint32_t grid_size = 512;  // evenly spaced candidates over [0, 1]
    bool anytime = false;           // enforce distortion(T') <= alpha + slack/T' at every prefix
    double anytime_slack_c = 0.0;
};

struct BccResult {
    double gamma_star = 0.0;
    double rate = 0.0;        // B_T at gamma_star
    double distortion = 0.0;  // end-of-sequence
    bool feasible = false;
};

// Hindsight baseline: largest constant gamma on the grid whose simulated
// distortion meets the requirement. Candidates are scanned in descending
// order; the first feasible one is the grid argmax.
BccResult bcc_search(const std::vector<Symbol>& sequence, const BccConfig& config, Mode mode);

// Eq. (13) right-hand side over a grid of epsilon values, evaluated on a
// finished OCC trace. Every epsilon must lie in (0, 1).
std::vector<std::pair<double, double>> epsilon_sweep(const std::vector<StepOutcome>& trace,
                                                     const std::vector<double>& grid);

// Value of the Eq. (13) bound at a single epsilon.
double epsilon_bound_value(const std::vector<StepOutcome>& trace, double epsilon);

double epsilon_sweep_argmin(const std::vector<std::pair<double, double>>& sweep);

struct BenchmarkRow {
    std::string scheme;
    Mode mode = Mode::Sync;
    double alpha = 0.0;
    double B_T = 0.0;
    double distortion = 0.0;
    double bound = 0.0;
    std::uint64_t T = 0;
    std::uint64_t seed = 0;
};

// CSV columns: scheme,mode,alpha,B_T,distortion,bound,T,seed.
void write_benchmark_csv(const std::string& path, const std::vector<BenchmarkRow>& rows);

}  // namespace occ
