#include "occ/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace occ {

std::string to_string(Mode mode) { return mode == Mode::Sync ? "sync" : "async"; }

std::string to_string(CoderBackend backend) {
    return backend == CoderBackend::Shannon ? "shannon" : "huffman";
}

Mode mode_from_string(const std::string& s) {
    if (s == "sync") return Mode::Sync;
    if (s == "async") return Mode::Async;
    throw ConfigError("unknown mode: " + s);
}

CoderBackend backend_from_string(const std::string& s) {
    if (s == "shannon") return CoderBackend::Shannon;
    if (s == "huffman") return CoderBackend::Huffman;
    throw ConfigError("unknown coder backend: " + s);
}

void CodecConfig::validate() const {
    conformal.validate();
    predictor.validate();
    if (mode == Mode::Async && !(conformal.alpha > 0.0 && conformal.alpha < 1.0)) {
        throw ConfigError("async mode requires alpha in (0, 1): the outage symbol carries mass alpha");
    }
}

ProbMap truncate(const PredictiveDistribution& dist, const PredictionSet& set) {
    if (set.empty()) throw Error("truncate over an empty prediction set");
    double mass = 0.0;
    for (Symbol x : set.members) mass += dist.probs[x];
    ProbMap out;
    out.reserve(set.members.size());
    for (Symbol x : set.members) out.push_back({x, dist.probs[x] / mass});
    return out;
}

ProbMap augment(const ProbMap& truncated, double alpha, Symbol e_symbol) {
    ProbMap out;
    out.reserve(truncated.size() + 1);
    for (const auto& [x, p] : truncated) out.push_back({x, p * (1.0 - alpha)});
    out.push_back({e_symbol, alpha});
    return out;
}

Symbol outage_reconstruction(const PredictiveDistribution& dist, const PredictionSet& set) {
    const auto n = static_cast<Symbol>(dist.probs.size());
    if (set.full(n)) throw Error("outage with a full prediction set");
    bool found = false;
    Symbol best = 0;
    double best_p = 0.0;
    auto member = set.members.begin();
    for (Symbol x = 0; x < n; ++x) {
        if (member != set.members.end() && *member == x) {
            ++member;
            continue;
        }
        if (!found || dist.probs[x] > best_p) {
            found = true;
            best = x;
            best_p = dist.probs[x];
        }
    }
    return best;
}

CodecCore::CodecCore(const CodecConfig& config, bool freeze_gamma)
    : config_(config),
      predictor_(make_predictor(config.predictor)),
      tracker_(config.conformal, freeze_gamma) {
    config_.validate();
}

CodecCore::StepPlan CodecCore::begin_step() const {
    StepPlan plan;
    plan.gamma = tracker_.gamma();
    plan.dist = predictor_->predict();
    plan.set = tracker_.make_set(plan.dist);
    return plan;
}

void CodecCore::finish_step(const StepPlan& plan, Symbol score_symbol, bool covered,
                            Symbol reconstructed) {
    tracker_.update(plan.dist, score_symbol, covered);
    predictor_->feed(reconstructed);
}

StreamEncoder::StreamEncoder(const CodecConfig& config, bool freeze_gamma)
    : core_(config, freeze_gamma) {}

StepOutcome StreamEncoder::encode_step(Symbol x) {
    if (x >= core_.alphabet_size()) throw Error("symbol outside alphabet");
    auto plan = core_.begin_step();

    StepOutcome out;
    out.t = core_.t();
    out.gamma = plan.gamma;
    out.threshold = plan.set.threshold;
    out.set_size = plan.set.size();
    out.covered = plan.set.contains(x);

    const Mode mode = core_.config().mode;
    const double alpha = core_.config().conformal.alpha;

    if (mode == Mode::Sync) {
        if (out.covered) {
            ProbMap truncated = truncate(plan.dist, plan.set);
            CodeTable table = build_one_to_one(truncated);
            out.message = {true, encode_symbol(table, x)};
            out.reconstructed = x;
            for (const auto& [sym, p] : truncated) {
                if (sym == x) out.truncated_true_prob = p;
            }
        } else {
            out.message = {false, {}};
            out.reconstructed = outage_reconstruction(plan.dist, plan.set);
        }
    } else {
        if (plan.set.empty()) {
            // Degenerate augmented distribution {e: 1}: zero bits on the wire.
            out.covered = false;
            out.message = {true, {}};
            out.reconstructed = outage_reconstruction(plan.dist, plan.set);
        } else {
            ProbMap truncated = truncate(plan.dist, plan.set);
            ProbMap augmented = augment(truncated, alpha, core_.e_symbol());
            CodeTable table = core_.config().coder_backend == CoderBackend::Shannon
                                  ? build_shannon(augmented)
                                  : build_huffman(augmented);
            if (out.covered) {
                out.message = {true, encode_symbol(table, x)};
                out.reconstructed = x;
                for (const auto& [sym, p] : truncated) {
                    if (sym == x) out.truncated_true_prob = p;
                }
            } else {
                out.message = {true, encode_symbol(table, core_.e_symbol())};
                out.reconstructed = outage_reconstruction(plan.dist, plan.set);
            }
        }
    }

    out.bits = out.message.payload.size();
    out.outage = out.reconstructed != x;
    total_bits_ += out.bits;

    Symbol score_symbol = out.covered ? x : out.reconstructed;
    core_.finish_step(plan, score_symbol, out.covered, out.reconstructed);
    return out;
}

StreamDecoder::StreamDecoder(const CodecConfig& config, bool freeze_gamma)
    : core_(config, freeze_gamma) {}

StepOutcome StreamDecoder::finish(const CodecCore::StepPlan& plan, bool covered,
                                  Symbol reconstructed, std::uint64_t bits, SlotMessage msg,
                                  double truncated_true_prob) {
    StepOutcome out;
    out.t = core_.t();
    out.gamma = plan.gamma;
    out.threshold = plan.set.threshold;
    out.set_size = plan.set.size();
    out.covered = covered;
    out.reconstructed = reconstructed;
    out.bits = bits;
    out.message = std::move(msg);
    out.outage = !covered;  // not observable exactly; true outages need X_t
    out.truncated_true_prob = truncated_true_prob;
    Symbol score_symbol = reconstructed;  // on covered steps this is X_t
    core_.finish_step(plan, score_symbol, covered, reconstructed);
    return out;
}

StepOutcome StreamDecoder::decode_slot(const SlotMessage& msg) {
    if (core_.config().mode != Mode::Sync) throw Error("decode_slot is sync-only");
    auto plan = core_.begin_step();
    const std::uint64_t step = core_.t();

    if (!msg.present) {
        Symbol rec = outage_reconstruction(plan.dist, plan.set);
        return finish(plan, false, rec, 0, msg, 0.0);
    }
    if (plan.set.empty()) {
        throw IntegrityError("desync at step " + std::to_string(step) +
                             ": message present but the prediction set is empty");
    }
    ProbMap truncated = truncate(plan.dist, plan.set);
    CodeTable table = build_one_to_one(truncated);
    BitReader reader(msg.payload);
    Symbol x;
    try {
        x = decode_one_to_one(table, reader, msg.payload.size());
    } catch (const IntegrityError& e) {
        throw IntegrityError("desync at step " + std::to_string(step) + ": " + e.what());
    }
    double tp = 0.0;
    for (const auto& [sym, p] : truncated) {
        if (sym == x) tp = p;
    }
    return finish(plan, true, x, msg.payload.size(), msg, tp);
}

StepOutcome StreamDecoder::decode_next(BitReader& reader) {
    if (core_.config().mode != Mode::Async) throw Error("decode_next is async-only");
    auto plan = core_.begin_step();
    const std::uint64_t step = core_.t();

    if (plan.set.empty()) {
        Symbol rec = outage_reconstruction(plan.dist, plan.set);
        return finish(plan, false, rec, 0, {true, {}}, 0.0);
    }
    ProbMap truncated = truncate(plan.dist, plan.set);
    ProbMap augmented = augment(truncated, core_.config().conformal.alpha, core_.e_symbol());
    CodeTable table = core_.config().coder_backend == CoderBackend::Shannon
                          ? build_shannon(augmented)
                          : build_huffman(augmented);
    std::uint64_t start = reader.position();
    Symbol sym;
    try {
        sym = decode_symbol(table, reader);
    } catch (const IntegrityError& e) {
        throw IntegrityError("desync at step " + std::to_string(step) + ": " + e.what());
    }
    std::uint64_t bits = reader.position() - start;
    SlotMessage msg{true, encode_symbol(table, sym)};
    if (sym == core_.e_symbol()) {
        Symbol rec = outage_reconstruction(plan.dist, plan.set);
        return finish(plan, false, rec, bits, std::move(msg), 0.0);
    }
    double tp = 0.0;
    for (const auto& [s, p] : truncated) {
        if (s == sym) tp = p;
    }
    return finish(plan, true, sym, bits, std::move(msg), tp);
}

std::vector<StepOutcome> run_occ(const std::vector<Symbol>& sequence, const CodecConfig& config,
                                 bool freeze_gamma) {
    StreamEncoder enc(config, freeze_gamma);
    std::vector<StepOutcome> trace;
    trace.reserve(sequence.size());
    for (Symbol x : sequence) trace.push_back(enc.encode_step(x));
    return trace;
}

RunMetrics run_metrics(const std::vector<StepOutcome>& trace, const ConformalConfig& conformal) {
    if (trace.empty()) throw Error("run_metrics needs a non-empty trace");
    RunMetrics m;
    m.T = trace.size();
    for (const auto& step : trace) {
        m.total_bits += step.bits;
        m.outages += step.outage ? 1 : 0;
        m.miscoverages += step.covered ? 0 : 1;
    }
    m.B_T = static_cast<double>(m.total_bits) / static_cast<double>(m.T);
    m.distortion = static_cast<double>(m.outages) / static_cast<double>(m.T);
    m.bound = coverage_bound(conformal, m.T);
    return m;
}

AnytimeCheck check_anytime(const std::vector<StepOutcome>& trace,
                           const ConformalConfig& conformal) {
    AnytimeCheck c;
    c.worst_theorem1_margin = -std::numeric_limits<double>::infinity();
    c.worst_lemma1_margin = -std::numeric_limits<double>::infinity();
    std::uint64_t outages = 0;
    std::uint64_t misses = 0;
    std::uint64_t T = 0;
    for (const auto& step : trace) {
        ++T;
        outages += step.outage ? 1 : 0;
        misses += step.covered ? 0 : 1;
        double bound = coverage_bound(conformal, T);
        double distortion = static_cast<double>(outages) / static_cast<double>(T);
        double miss_rate = static_cast<double>(misses) / static_cast<double>(T);
        double th_margin = distortion - (conformal.alpha + bound);
        double lm_margin = std::fabs(miss_rate - conformal.alpha) - bound;
        if (th_margin > 0.0) c.theorem1_ok = false;
        if (lm_margin > 0.0) c.lemma1_ok = false;
        if (outages > misses) c.outage_leq_miss = false;
        c.worst_theorem1_margin = std::max(c.worst_theorem1_margin, th_margin);
        c.worst_lemma1_margin = std::max(c.worst_lemma1_margin, lm_margin);
    }
    return c;
}

void write_trace_csv(const std::string& path, const std::vector<StepOutcome>& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace file: " + path);
    out << "t,gamma,threshold,set_size,covered\n";
    char buf[512];
    for (const auto& step : trace) {
        int n = std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g,%llu,%d\n",
                              static_cast<unsigned long long>(step.t), step.gamma, step.threshold,
                              static_cast<unsigned long long>(step.set_size),
                              step.covered ? 1 : 0);
        out.write(buf, n);
    }
    if (!out.good()) throw IoError("write failed: " + path);
}

}  // namespace occ
