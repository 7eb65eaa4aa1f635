#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "occ/benchmarks.hpp"
#include "occ/codec.hpp"
#include "occ/coder.hpp"
#include "occ/conformal.hpp"
#include "occ/errors.hpp"
#include "occ/predictor.hpp"
#include "occ/transport.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace occ;

namespace {

struct CommonOpts {
    std::string mode = "sync";
    double alpha = 0.1;
    double eta1 = 0.001;
    double beta = 0.0;
    double gamma1 = -1.0;  // negative: default to alpha
    std::string predictor = "context";
    std::uint32_t order = 3;
    std::string replay_file;
    std::string coder = "shannon";
    std::uint32_t alphabet = 256;
    std::string config_path;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool with_mode) {
    if (with_mode) cmd->add_option("--mode", o.mode, "sync or async");
    cmd->add_option("--alpha", o.alpha, "target outage rate");
    cmd->add_option("--eta1", o.eta1, "base conformal step size");
    cmd->add_option("--beta", o.beta, "step size decay exponent in [0,1)");
    cmd->add_option("--gamma1", o.gamma1, "initial quantile level (negative: use alpha)");
    cmd->add_option("--predictor", o.predictor, "context, uniform, or replay");
    cmd->add_option("--order", o.order, "context model order");
    cmd->add_option("--replay-file", o.replay_file, "distribution file for the replay predictor");
    cmd->add_option("--coder", o.coder, "async backend: shannon or huffman");
    cmd->add_option("--alphabet", o.alphabet, "alphabet size (input bytes are taken mod this)");
    cmd->add_option("--config", o.config_path, "JSON config file; its values override flags");
}

PredictorSpec make_predictor_spec(const CommonOpts& o) {
    PredictorSpec spec;
    spec.alphabet_size = o.alphabet;
    if (o.predictor == "context") {
        spec.kind = PredictorKind::ContextModel;
        spec.order = o.order;
    } else if (o.predictor == "uniform") {
        spec.kind = PredictorKind::Uniform;
    } else if (o.predictor == "replay") {
        spec.kind = PredictorKind::Replay;
        spec.source_path = o.replay_file;
    } else {
        throw ConfigError("unknown predictor kind: " + o.predictor);
    }
    spec.validate();
    return spec;
}

CodecConfig make_codec_config(const CommonOpts& o) {
    CodecConfig c;
    c.mode = mode_from_string(o.mode);
    c.conformal.alpha = o.alpha;
    if (o.gamma1 >= 0.0) c.conformal.gamma1 = o.gamma1;
    c.conformal.eta1 = o.eta1;
    c.conformal.beta = o.beta;
    c.predictor = make_predictor_spec(o);
    c.coder_backend = backend_from_string(o.coder);
    c.validate();
    return c;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// JSON config overrides already-parsed flag values. Unknown keys are errors.
void apply_json_config(CommonOpts& o, json& j) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    auto take = [&j](const char* key) -> std::optional<json> {
        auto it = j.find(key);
        if (it == j.end()) return std::nullopt;
        json v = *it;
        j.erase(it);
        return v;
    };
    if (auto v = take("mode")) o.mode = v->get<std::string>();
    if (auto v = take("alpha")) o.alpha = v->get<double>();
    if (auto v = take("eta1")) o.eta1 = v->get<double>();
    if (auto v = take("beta")) o.beta = v->get<double>();
    if (auto v = take("gamma1")) o.gamma1 = v->get<double>();
    if (auto v = take("predictor")) o.predictor = v->get<std::string>();
    if (auto v = take("order")) o.order = v->get<std::uint32_t>();
    if (auto v = take("replay_file")) o.replay_file = v->get<std::string>();
    if (auto v = take("coder")) o.coder = v->get<std::string>();
    if (auto v = take("alphabet")) o.alphabet = v->get<std::uint32_t>();
}

json load_json_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    return j;
}

void reject_leftover_keys(const json& j) {
    if (j.is_object() && !j.empty()) {
        throw ConfigError("unknown config key: " + j.begin().key());
    }
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

std::vector<Symbol> bytes_to_symbols(const std::vector<std::uint8_t>& bytes,
                                     std::uint32_t alphabet) {
    std::vector<Symbol> out;
    out.reserve(bytes.size());
    for (std::uint8_t b : bytes) out.push_back(static_cast<Symbol>(b) % alphabet);
    return out;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write JSON file: " + path);
    out << j.dump(2) << '\n';
    if (!out.good()) throw IoError("write failed: " + path);
}

json metrics_json(const RunMetrics& m, const CodecConfig& config) {
    json j;
    j["mode"] = to_string(config.mode);
    j["alpha"] = config.conformal.alpha;
    j["gamma1"] = config.conformal.resolved_gamma1();
    j["eta1"] = config.conformal.eta1;
    j["beta"] = config.conformal.beta;
    j["alphabet_size"] = config.predictor.alphabet_size;
    j["predictor_hash"] = config.predictor.hash();
    j["T"] = m.T;
    j["total_bits"] = m.total_bits;
    j["B_T"] = m.B_T;
    j["outages"] = m.outages;
    j["distortion"] = m.distortion;
    j["miscoverages"] = m.miscoverages;
    j["coverage_bound"] = m.bound;
    j["distortion_bound"] = config.conformal.alpha + m.bound;
    j["raw_bits_per_symbol"] =
        static_cast<std::uint32_t>(std::ceil(std::log2(config.predictor.alphabet_size)));
    return j;
}

struct EncodeArgs {
    std::string input;
    std::string out;
    std::string metrics;
    std::string trace;
    CommonOpts opts;
};

int run_encode(const EncodeArgs& a) {
    CommonOpts o = a.opts;
    if (!o.config_path.empty()) {
        json j = load_json_config(o.config_path);
        apply_json_config(o, j);
        reject_leftover_keys(j);
    }
    CodecConfig config = make_codec_config(o);
    std::vector<Symbol> symbols = bytes_to_symbols(read_file_bytes(a.input), o.alphabet);
    if (symbols.empty()) throw ConfigError("input is empty: " + a.input);

    StreamEncoder enc(config);
    std::vector<StepOutcome> trace;
    std::vector<SlotMessage> messages;
    trace.reserve(symbols.size());
    messages.reserve(symbols.size());
    for (Symbol x : symbols) {
        trace.push_back(enc.encode_step(x));
        messages.push_back(trace.back().message);
    }

    std::vector<std::uint8_t> bytes = write_container(make_header(config), messages);
    save_container(a.out, bytes);

    RunMetrics m = run_metrics(trace, config.conformal);
    json j = metrics_json(m, config);
    j["container_bytes"] = bytes.size();
    j["wire_overhead_bits"] = bytes.size() * 8 - m.total_bits;
    std::cout << j.dump(2) << '\n';
    if (!a.metrics.empty()) write_json(a.metrics, j);
    if (!a.trace.empty()) write_trace_csv(a.trace, trace);
    return 0;
}

struct DecodeArgs {
    std::string input;
    std::string out;
    std::string metrics;
    std::string original;
    CommonOpts opts;
};

int run_decode(const DecodeArgs& a) {
    CommonOpts o = a.opts;
    if (!o.config_path.empty()) {
        json j = load_json_config(o.config_path);
        apply_json_config(o, j);
        reject_leftover_keys(j);
    }
    Container c = read_container(load_container(a.input));

    o.alphabet = c.header.alphabet_size;
    PredictorSpec spec = make_predictor_spec(o);
    if (spec.hash() != c.header.predictor_hash) {
        throw IntegrityError("predictor spec does not match the container header hash");
    }

    CodecConfig config;
    config.mode = c.header.mode;
    config.coder_backend = c.header.coder_backend;
    config.conformal.alpha = c.header.alpha;
    config.conformal.gamma1 = c.header.gamma1;
    config.conformal.eta1 = c.header.eta1;
    config.conformal.beta = c.header.beta;
    config.predictor = spec;
    config.validate();

    StreamDecoder dec(config);
    std::vector<StepOutcome> trace;
    trace.reserve(c.header.T);
    if (config.mode == Mode::Sync) {
        for (const auto& slot : c.slots) trace.push_back(dec.decode_slot(slot));
    } else {
        BitReader reader(c.stream);
        for (std::uint64_t i = 0; i < c.header.T; ++i) trace.push_back(dec.decode_next(reader));
        if (reader.remaining() != 0) {
            throw IntegrityError("trailing bits after the last async codeword");
        }
    }

    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw IoError("cannot write reconstruction: " + a.out);
    for (const auto& step : trace) out.put(static_cast<char>(step.reconstructed & 0xFF));
    if (!out.good()) throw IoError("write failed: " + a.out);

    json j;
    j["T"] = c.header.T;
    j["payload_bits"] = c.header.payload_bits;
    j["mode"] = to_string(config.mode);
    j["alpha"] = c.header.alpha;
    if (!a.original.empty()) {
        std::vector<Symbol> original =
            bytes_to_symbols(read_file_bytes(a.original), c.header.alphabet_size);
        if (original.size() != trace.size()) {
            throw ConfigError("original length does not match the container");
        }
        std::uint64_t wrong = 0;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            if (trace[i].reconstructed != original[i]) ++wrong;
        }
        j["distortion"] = static_cast<double>(wrong) / static_cast<double>(trace.size());
    }
    std::cout << j.dump(2) << '\n';
    if (!a.metrics.empty()) write_json(a.metrics, j);
    return 0;
}

struct SweepArgs {
    std::vector<std::string> corpora;
    std::string schemes = "occ";
    std::string modes = "sync";
    std::string alphas = "0.1";
    std::string seeds = "1";
    std::uint64_t T = 3500;
    std::uint32_t bcc_grid = 512;
    std::string out_dir;
    CommonOpts opts;
};

std::vector<Symbol> draw_sequence(const std::vector<std::vector<std::uint8_t>>& corpora,
                                  std::uint64_t T, std::uint64_t seed, std::uint32_t alphabet) {
    SplitMix64 rng(seed);
    std::vector<Symbol> seq;
    seq.reserve(T);
    std::uint64_t k = corpora.size();
    for (std::uint64_t i = 0; i < k; ++i) {
        std::uint64_t part = T / k + (i < T % k ? 1 : 0);
        const auto& corpus = corpora[i];
        if (corpus.empty()) throw ConfigError("empty corpus");
        std::uint64_t start = rng.next_below(corpus.size());
        for (std::uint64_t j = 0; j < part; ++j) {
            seq.push_back(static_cast<Symbol>(corpus[(start + j) % corpus.size()]) % alphabet);
        }
    }
    return seq;
}

void write_timeplot_csv(const std::string& path, const std::vector<StepOutcome>& trace,
                        const ConformalConfig& conformal) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write timeplot csv: " + path);
    out << "t,outage_rate,miss_rate,distortion_bound\n";
    std::uint64_t outages = 0;
    std::uint64_t misses = 0;
    std::uint64_t t = 0;
    char buf[256];
    for (const auto& step : trace) {
        ++t;
        outages += step.outage ? 1 : 0;
        misses += step.covered ? 0 : 1;
        int n = std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g,%.17g\n",
                              static_cast<unsigned long long>(t),
                              static_cast<double>(outages) / static_cast<double>(t),
                              static_cast<double>(misses) / static_cast<double>(t),
                              conformal.alpha + coverage_bound(conformal, t));
        out.write(buf, n);
    }
    if (!out.good()) throw IoError("write failed: " + path);
}

int run_sweep(const SweepArgs& a) {
    CommonOpts base = a.opts;
    if (!base.config_path.empty()) {
        json j = load_json_config(base.config_path);
        apply_json_config(base, j);
        reject_leftover_keys(j);
    }
    if (a.corpora.empty()) throw ConfigError("at least one --corpus is required");
    if (a.out_dir.empty()) throw ConfigError("--out directory is required");
    fs::create_directories(a.out_dir);

    std::vector<std::vector<std::uint8_t>> corpora;
    for (const auto& path : a.corpora) corpora.push_back(read_file_bytes(path));

    std::vector<std::string> schemes = split_list(a.schemes);
    std::vector<std::string> modes = split_list(a.modes);
    std::vector<double> alphas;
    for (const auto& s : split_list(a.alphas)) alphas.push_back(std::stod(s));
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_list(a.seeds)) seeds.push_back(std::stoull(s));
    if (schemes.empty() || modes.empty() || alphas.empty() || seeds.empty()) {
        throw ConfigError("schemes, modes, alphas, and seeds must be non-empty");
    }

    std::vector<BenchmarkRow> rows;
    for (std::uint64_t seed : seeds) {
        std::vector<Symbol> seq = draw_sequence(corpora, a.T, seed, base.alphabet);
        for (double alpha : alphas) {
            for (const auto& mode_name : modes) {
                Mode mode = mode_from_string(mode_name);
                if (mode == Mode::Async && !(alpha > 0.0 && alpha < 1.0)) continue;
                CommonOpts o = base;
                o.mode = mode_name;
                o.alpha = alpha;
                CodecConfig config = make_codec_config(o);
                for (const auto& scheme : schemes) {
                    BenchmarkRow row;
                    row.mode = mode;
                    row.alpha = alpha;
                    row.T = seq.size();
                    row.seed = seed;
                    std::vector<StepOutcome> trace;
                    if (scheme == "occ") {
                        trace = run_occ(seq, config);
                        RunMetrics m = run_metrics(trace, config.conformal);
                        row.scheme = "occ";
                        row.B_T = m.B_T;
                        row.distortion = m.distortion;
                    } else if (scheme == "dropout") {
                        DropoutConfig dc{alpha, seed};
                        trace = dropout_llmzip_run(seq, config.predictor, dc, mode,
                                                   config.coder_backend);
                        RunMetrics m = run_metrics(trace, config.conformal);
                        row.scheme = "dropout";
                        row.B_T = m.B_T;
                        row.distortion = m.distortion;
                    } else if (scheme == "bcc") {
                        BccConfig bc;
                        bc.alpha = alpha;
                        bc.predictor = config.predictor;
                        bc.coder_backend = config.coder_backend;
                        bc.grid_size = a.bcc_grid;
                        BccResult r = bcc_search(seq, bc, mode);
                        row.scheme = "bcc";
                        row.B_T = r.rate;
                        row.distortion = r.distortion;
                        CodecConfig frozen = config;
                        frozen.conformal.gamma1 = r.gamma_star;
                        trace = run_occ(seq, frozen, /*freeze_gamma=*/true);
                    } else {
                        throw ConfigError("unknown scheme: " + scheme);
                    }
                    row.bound = alpha + coverage_bound(config.conformal, row.T);
                    rows.push_back(row);

                    std::ostringstream name;
                    name << "trace_" << row.scheme << "_" << mode_name << "_a" << alpha << "_s"
                         << seed << ".csv";
                    write_timeplot_csv((fs::path(a.out_dir) / name.str()).string(), trace,
                                       config.conformal);
                }
            }
        }
    }

    std::string summary = (fs::path(a.out_dir) / "summary.csv").string();
    write_benchmark_csv(summary, rows);
    std::cout << "wrote " << rows.size() << " rows to " << summary << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occ: online conformal compression"};
    app.require_subcommand(1);

    EncodeArgs enc;
    auto* cmd_encode = app.add_subcommand("encode", "compress a file");
    cmd_encode->add_option("input", enc.input, "input file")->required();
    cmd_encode->add_option("--out", enc.out, "container output path")->required();
    cmd_encode->add_option("--metrics", enc.metrics, "metrics JSON output path");
    cmd_encode->add_option("--trace", enc.trace, "per-step trace CSV output path");
    add_common_flags(cmd_encode, enc.opts, true);

    DecodeArgs dec;
    auto* cmd_decode = app.add_subcommand("decode", "reconstruct from a container");
    cmd_decode->add_option("input", dec.input, "container file")->required();
    cmd_decode->add_option("--out", dec.out, "reconstruction output path")->required();
    cmd_decode->add_option("--metrics", dec.metrics, "metrics JSON output path");
    cmd_decode->add_option("--original", dec.original, "original file for a distortion audit");
    add_common_flags(cmd_decode, dec.opts, false);

    SweepArgs sw;
    auto* cmd_sweep = app.add_subcommand("sweep", "run benchmark grids");
    cmd_sweep->add_option("--corpus", sw.corpora, "corpus file (repeat for shift scenarios)")
        ->required();
    cmd_sweep->add_option("--scheme", sw.schemes, "comma list: occ,dropout,bcc");
    cmd_sweep->add_option("--alphas", sw.alphas, "comma list of alpha values");
    cmd_sweep->add_option("--modes", sw.modes, "comma list: sync,async");
    cmd_sweep->add_option("--seed", sw.seeds, "comma list of sequence seeds");
    cmd_sweep->add_option("-T,--length", sw.T, "symbols per sequence");
    cmd_sweep->add_option("--bcc-grid", sw.bcc_grid, "BCC gamma grid size");
    cmd_sweep->add_option("--out", sw.out_dir, "output directory")->required();
    add_common_flags(cmd_sweep, sw.opts, false);

    try {
        app.parse(argc, argv);
        if (*cmd_encode) return run_encode(enc);
        if (*cmd_decode) return run_decode(dec);
        if (*cmd_sweep) return run_sweep(sw);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const StreamEndError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
