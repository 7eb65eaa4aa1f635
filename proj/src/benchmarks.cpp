#include "occ/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace occ {

namespace {

Symbol full_argmax(const PredictiveDistribution& dist) {
    Symbol best = 0;
    for (Symbol x = 1; x < dist.probs.size(); ++x) {
        if (dist.probs[x] > dist.probs[best]) best = x;
    }
    return best;
}

ProbMap full_support(const PredictiveDistribution& dist) {
    ProbMap out;
    out.reserve(dist.probs.size());
    for (Symbol x = 0; x < dist.probs.size(); ++x) out.push_back({x, dist.probs[x]});
    return out;
}

CodeTable dropout_async_table(const PredictiveDistribution& dist, double alpha, Symbol e_symbol,
                              CoderBackend backend) {
    ProbMap support;
    if (alpha >= 1.0) {
        support.push_back({e_symbol, 1.0});
    } else if (alpha <= 0.0) {
        support = full_support(dist);
    } else {
        support = augment(full_support(dist), alpha, e_symbol);
    }
    return backend == CoderBackend::Shannon ? build_shannon(support) : build_huffman(support);
}

}  // namespace

std::vector<StepOutcome> dropout_llmzip_run(const std::vector<Symbol>& sequence,
                                            const PredictorSpec& predictor,
                                            const DropoutConfig& config, Mode mode,
                                            CoderBackend backend) {
    if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
        throw ConfigError("dropout alpha must lie in [0, 1]");
    }
    auto pred = make_predictor(predictor);
    const Symbol e_symbol = predictor.alphabet_size;
    SplitMix64 rng(config.seed);
    std::vector<StepOutcome> trace;
    trace.reserve(sequence.size());

    std::uint64_t t = 1;
    for (Symbol x : sequence) {
        if (x >= predictor.alphabet_size) throw Error("symbol outside alphabet");
        PredictiveDistribution dist = pred->predict();
        bool dropped = rng.next_unit() < config.alpha;

        StepOutcome out;
        out.t = t++;
        out.set_size = predictor.alphabet_size;
        out.covered = !dropped;
        if (mode == Mode::Sync) {
            if (dropped) {
                out.message = {false, {}};
                out.reconstructed = full_argmax(dist);
            } else {
                CodeTable table = build_one_to_one(full_support(dist));
                out.message = {true, encode_symbol(table, x)};
                out.reconstructed = x;
                out.truncated_true_prob = dist.probs[x];
            }
        } else {
            CodeTable table = dropout_async_table(dist, config.alpha, e_symbol, backend);
            if (dropped) {
                out.message = {true, table.contains(e_symbol) ? encode_symbol(table, e_symbol)
                                                              : BitString{}};
                out.reconstructed = full_argmax(dist);
            } else {
                out.message = {true, encode_symbol(table, x)};
                out.reconstructed = x;
                out.truncated_true_prob = dist.probs[x];
            }
        }
        out.bits = out.message.payload.size();
        out.outage = out.reconstructed != x;
        pred->feed(out.reconstructed);
        trace.push_back(std::move(out));
    }
    return trace;
}

BccResult bcc_search(const std::vector<Symbol>& sequence, const BccConfig& config, Mode mode) {
    if (config.grid_size < 2) throw ConfigError("bcc grid needs at least 2 points");
    if (sequence.empty()) throw ConfigError("bcc needs a non-empty sequence");

    BccResult result;
    for (std::uint32_t i = config.grid_size; i-- > 0;) {
        double gamma = static_cast<double>(i) / (config.grid_size - 1);
        CodecConfig cc;
        cc.mode = mode;
        cc.conformal.alpha = config.alpha;
        cc.conformal.gamma1 = gamma;
        cc.conformal.eta1 = 1.0;  // unused: gamma is frozen
        cc.conformal.beta = 0.0;
        cc.predictor = config.predictor;
        cc.coder_backend = config.coder_backend;

        std::vector<StepOutcome> trace = run_occ(sequence, cc, /*freeze_gamma=*/true);

        bool feasible = true;
        std::uint64_t outages = 0;
        std::uint64_t total_bits = 0;
        std::uint64_t T = 0;
        for (const auto& step : trace) {
            ++T;
            outages += step.outage ? 1 : 0;
            total_bits += step.bits;
            if (config.anytime) {
                double limit = config.alpha + config.anytime_slack_c / static_cast<double>(T);
                if (static_cast<double>(outages) / static_cast<double>(T) > limit) {
                    feasible = false;
                    break;
                }
            }
        }
        double distortion = static_cast<double>(outages) / static_cast<double>(sequence.size());
        if (!config.anytime) feasible = distortion <= config.alpha;

        if (feasible) {
            result.gamma_star = gamma;
            result.rate = static_cast<double>(total_bits) / static_cast<double>(sequence.size());
            result.distortion = distortion;
            result.feasible = true;
            return result;
        }
    }
    result.feasible = false;  // unreachable with gamma = 0 on the grid, kept for safety
    return result;
}

double epsilon_bound_value(const std::vector<StepOutcome>& trace, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    if (trace.empty()) throw ConfigError("epsilon sweep needs a non-empty trace");
    double log_cov = 0.0;
    std::uint64_t n_cov = 0;
    std::uint64_t n_out = 0;
    for (const auto& step : trace) {
        if (step.covered) {
            log_cov += std::log2(step.truncated_true_prob);
            ++n_cov;
        } else {
            ++n_out;
        }
    }
    double T = static_cast<double>(trace.size());
    double total = log_cov + static_cast<double>(n_cov) * std::log2(1.0 - epsilon) +
                   static_cast<double>(n_out) * std::log2(epsilon);
    return 1.0 - total / T;
}

std::vector<std::pair<double, double>> epsilon_sweep(const std::vector<StepOutcome>& trace,
                                                     const std::vector<double>& grid) {
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (double eps : grid) out.push_back({eps, epsilon_bound_value(trace, eps)});
    return out;
}

double epsilon_sweep_argmin(const std::vector<std::pair<double, double>>& sweep) {
    if (sweep.empty()) throw ConfigError("empty sweep");
    double best_eps = sweep.front().first;
    double best_val = sweep.front().second;
    for (const auto& [eps, val] : sweep) {
        if (val < best_val) {
            best_val = val;
            best_eps = eps;
        }
    }
    return best_eps;
}

void write_benchmark_csv(const std::string& path, const std::vector<BenchmarkRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write benchmark csv: " + path);
    out << "scheme,mode,alpha,B_T,distortion,bound,T,seed\n";
    char buf[512];
    for (const auto& r : rows) {
        int n = std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,%.17g,%llu,%llu\n",
                              r.scheme.c_str(), to_string(r.mode).c_str(), r.alpha, r.B_T,
                              r.distortion, r.bound, static_cast<unsigned long long>(r.T),
                              static_cast<unsigned long long>(r.seed));
        out.write(buf, n);
    }
    if (!out.good()) throw IoError("write failed: " + path);
}

}  // namespace occ
