#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "occ/coder.hpp"
#include "occ/errors.hpp"

namespace occ {

// Probability vector over the alphabet for the next symbol. Every emitted
// distribution sums to 1 within 1e-9, entries are positive (floored at 1e-12
// before normalization so code lengths stay finite).
struct PredictiveDistribution {
    std::vector<double> probs;

    std::size_t alphabet_size() const { return probs.size(); }
    bool valid(double tol = 1e-9) const;
};

// Minimum probability fed into code-length computation.
inline constexpr double kProbFloor = 1e-12;

// Clamps entries to kProbFloor and renormalizes in place.
void floor_and_normalize(std::vector<double>& probs);

enum class PredictorKind { ContextModel, Replay, Uniform };

struct PredictorSpec {
    PredictorKind kind = PredictorKind::ContextModel;
    std::uint32_t alphabet_size = 256;
    std::uint32_t order = 3;        // context model: context depth k
    double smoothing = 0.5;         // context model: KT constant (1.0 = Laplace)
    std::string source_path;        // replay: distribution file

    void validate() const;
    // Canonical description; for replay specs it includes a hash of the file
    // content, so mismatched distribution files are caught at decode time.
    std::string canonical_string() const;
    std::uint64_t hash() const;
};

// Autoregressive next-symbol predictor. Fed exclusively with reconstructed
// symbols; two instances with the same spec fed the same sequence emit
// bit-identical distributions at every step.
class Predictor {
public:
    explicit Predictor(std::uint32_t alphabet_size) : alphabet_size_(alphabet_size) {}
    virtual ~Predictor() = default;

    Predictor(const Predictor&) = delete;
    Predictor& operator=(const Predictor&) = delete;

    virtual PredictiveDistribution predict() const = 0;
    virtual void feed(Symbol sym) = 0;

    std::uint32_t alphabet_size() const { return alphabet_size_; }

protected:
    void check_symbol(Symbol sym) const {
        if (sym >= alphabet_size_) throw Error("symbol outside alphabet");
    }

private:
    std::uint32_t alphabet_size_;
};

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec);

// Replay file helpers (format: "occ-replay-v1 <alphabet_size> <rows>" header
// line, then one space-separated distribution per line).
void write_replay_file(const std::string& path, std::uint32_t alphabet_size,
                       const std::vector<std::vector<double>>& rows);

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace occ
