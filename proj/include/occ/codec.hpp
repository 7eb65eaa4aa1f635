#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "occ/bitio.hpp"
#include "occ/coder.hpp"
#include "occ/conformal.hpp"
#include "occ/errors.hpp"
#include "occ/predictor.hpp"

namespace occ {

enum class Mode : std::uint8_t { Sync = 0, Async = 1 };
enum class CoderBackend : std::uint8_t { Shannon = 0, Huffman = 1 };

std::string to_string(Mode mode);
std::string to_string(CoderBackend backend);
Mode mode_from_string(const std::string& s);
CoderBackend backend_from_string(const std::string& s);

struct CodecConfig {
    Mode mode = Mode::Sync;
    ConformalConfig conformal;
    PredictorSpec predictor;
    CoderBackend coder_backend = CoderBackend::Shannon;

    void validate() const;
};

// One channel slot: absent (sync outage signaling) or a possibly empty
// payload. Absent and present-with-zero-bits are distinct.
struct SlotMessage {
    bool present = false;
    BitString payload;

    bool operator==(const SlotMessage& other) const {
        return present == other.present && payload == other.payload;
    }
};

struct StepOutcome {
    std::uint64_t t = 0;
    SlotMessage message;
    Symbol reconstructed = 0;
    bool covered = false;
    std::uint64_t bits = 0;
    bool outage = false;  // reconstructed != true symbol
    // Trace extras.
    double gamma = 0.0;      // gamma_t in force at this step
    double threshold = 0.0;  // quantile used by the set
    std::uint64_t set_size = 0;
    double truncated_true_prob = 0.0;  // mu-bar_t(X_t), covered steps only
};

struct RunMetrics {
    std::uint64_t T = 0;
    std::uint64_t total_bits = 0;
    double B_T = 0.0;
    std::uint64_t outages = 0;
    double distortion = 0.0;
    std::uint64_t miscoverages = 0;
    double bound = 0.0;  // (1 + eta1) / (eta1 * T^(1-beta))
};

// Eq. (8): renormalize over set members. Set must be non-empty.
ProbMap truncate(const PredictiveDistribution& dist, const PredictionSet& set);

// Eq. (10)-(11): scale members by (1 - alpha), give the outage symbol e mass
// alpha. e's id is one past the alphabet.
ProbMap augment(const ProbMap& truncated, double alpha, Symbol e_symbol);

// Eq. (9): argmax outside the set, ties to the lowest id. Set must not cover
// the whole alphabet.
Symbol outage_reconstruction(const PredictiveDistribution& dist, const PredictionSet& set);

// State shared verbatim by encoder and decoder so both sides execute the
// identical arithmetic at every step.
class CodecCore {
public:
    explicit CodecCore(const CodecConfig& config, bool freeze_gamma = false);

    struct StepPlan {
        PredictiveDistribution dist;
        PredictionSet set;
        double gamma = 0.0;
    };

    StepPlan begin_step() const;
    void finish_step(const StepPlan& plan, Symbol score_symbol, bool covered,
                     Symbol reconstructed);

    const CodecConfig& config() const { return config_; }
    std::uint32_t alphabet_size() const { return config_.predictor.alphabet_size; }
    Symbol e_symbol() const { return alphabet_size(); }
    const ConformalTracker& tracker() const { return tracker_; }
    std::uint64_t t() const { return tracker_.t(); }
    PredictiveDistribution peek_prediction() const { return predictor_->predict(); }

private:
    CodecConfig config_;
    std::unique_ptr<Predictor> predictor_;
    ConformalTracker tracker_;
};

class StreamEncoder {
public:
    explicit StreamEncoder(const CodecConfig& config, bool freeze_gamma = false);

    StepOutcome encode_step(Symbol x);

    const CodecCore& core() const { return core_; }
    std::uint64_t total_bits() const { return total_bits_; }

private:
    CodecCore core_;
    std::uint64_t total_bits_ = 0;
};

class StreamDecoder {
public:
    explicit StreamDecoder(const CodecConfig& config, bool freeze_gamma = false);

    // Sync mode: one slot per step.
    StepOutcome decode_slot(const SlotMessage& msg);
    // Async mode: reads one codeword from the shared bitstream.
    StepOutcome decode_next(BitReader& reader);

    const CodecCore& core() const { return core_; }

private:
    StepOutcome finish(const CodecCore::StepPlan& plan, bool covered, Symbol reconstructed,
                       std::uint64_t bits, SlotMessage msg, double truncated_true_prob);

    CodecCore core_;
};

// Encoder-only simulation of a whole sequence.
std::vector<StepOutcome> run_occ(const std::vector<Symbol>& sequence, const CodecConfig& config,
                                 bool freeze_gamma = false);

RunMetrics run_metrics(const std::vector<StepOutcome>& trace, const ConformalConfig& conformal);

struct AnytimeCheck {
    bool theorem1_ok = true;      // distortion(T') <= alpha + bound(T') for all prefixes
    bool lemma1_ok = true;        // |miscoverage(T')/T' - alpha| <= bound(T')
    bool outage_leq_miss = true;  // Eq. (12) at every prefix
    double worst_theorem1_margin = 0.0;  // max over prefixes of distortion - (alpha + bound)
    double worst_lemma1_margin = 0.0;
};

AnytimeCheck check_anytime(const std::vector<StepOutcome>& trace,
                           const ConformalConfig& conformal);

// Trace CSV: t,gamma,threshold,set_size,covered.
void write_trace_csv(const std::string& path, const std::vector<StepOutcome>& trace);

}  // namespace occ
