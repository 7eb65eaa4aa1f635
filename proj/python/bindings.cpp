#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "occ/benchmarks.hpp"
#include "occ/codec.hpp"
#include "occ/conformal.hpp"
#include "occ/errors.hpp"
#include "occ/predictor.hpp"
#include "occ/transport.hpp"

namespace py = pybind11;
using namespace occ;

namespace {

CodecConfig build_config(const std::string& mode, double alpha, double eta1, double beta,
                         std::optional<double> gamma1, const std::string& predictor,
                         std::uint32_t order, const std::string& replay_file,
                         const std::string& coder, std::uint32_t alphabet) {
    CodecConfig c;
    c.mode = mode_from_string(mode);
    c.conformal.alpha = alpha;
    c.conformal.eta1 = eta1;
    c.conformal.beta = beta;
    if (gamma1) c.conformal.gamma1 = *gamma1;
    c.predictor.alphabet_size = alphabet;
    if (predictor == "context") {
        c.predictor.kind = PredictorKind::ContextModel;
        c.predictor.order = order;
    } else if (predictor == "uniform") {
        c.predictor.kind = PredictorKind::Uniform;
    } else if (predictor == "replay") {
        c.predictor.kind = PredictorKind::Replay;
        c.predictor.source_path = replay_file;
    } else {
        throw ConfigError("unknown predictor kind: " + predictor);
    }
    c.coder_backend = backend_from_string(coder);
    c.validate();
    return c;
}

std::vector<Symbol> to_symbols(const py::bytes& data, std::uint32_t alphabet) {
    std::string view = data;
    std::vector<Symbol> out;
    out.reserve(view.size());
    for (unsigned char b : view) out.push_back(static_cast<Symbol>(b) % alphabet);
    return out;
}

py::dict metrics_dict(const RunMetrics& m, double alpha) {
    py::dict d;
    d["T"] = m.T;
    d["total_bits"] = m.total_bits;
    d["B_T"] = m.B_T;
    d["outages"] = m.outages;
    d["distortion"] = m.distortion;
    d["miscoverages"] = m.miscoverages;
    d["coverage_bound"] = m.bound;
    d["distortion_bound"] = alpha + m.bound;
    return d;
}

py::tuple py_encode(const py::bytes& data, const std::string& mode, double alpha, double eta1,
                    double beta, std::optional<double> gamma1, const std::string& predictor,
                    std::uint32_t order, const std::string& replay_file, const std::string& coder,
                    std::uint32_t alphabet) {
    CodecConfig config = build_config(mode, alpha, eta1, beta, gamma1, predictor, order,
                                      replay_file, coder, alphabet);
    std::vector<Symbol> symbols = to_symbols(data, alphabet);
    if (symbols.empty()) throw ConfigError("input is empty");

    StreamEncoder enc(config);
    std::vector<StepOutcome> trace;
    std::vector<SlotMessage> messages;
    trace.reserve(symbols.size());
    for (Symbol x : symbols) {
        trace.push_back(enc.encode_step(x));
        messages.push_back(trace.back().message);
    }
    std::vector<std::uint8_t> bytes = write_container(make_header(config), messages);
    RunMetrics m = run_metrics(trace, config.conformal);
    return py::make_tuple(
        py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
        metrics_dict(m, alpha));
}

py::tuple py_decode(const py::bytes& container, const std::string& predictor, std::uint32_t order,
                    const std::string& replay_file) {
    std::string view = container;
    std::vector<std::uint8_t> bytes(view.begin(), view.end());
    Container c = read_container(bytes);

    CodecConfig config;
    config.mode = c.header.mode;
    config.coder_backend = c.header.coder_backend;
    config.conformal.alpha = c.header.alpha;
    config.conformal.gamma1 = c.header.gamma1;
    config.conformal.eta1 = c.header.eta1;
    config.conformal.beta = c.header.beta;
    config.predictor.alphabet_size = c.header.alphabet_size;
    if (predictor == "context") {
        config.predictor.kind = PredictorKind::ContextModel;
        config.predictor.order = order;
    } else if (predictor == "uniform") {
        config.predictor.kind = PredictorKind::Uniform;
    } else if (predictor == "replay") {
        config.predictor.kind = PredictorKind::Replay;
        config.predictor.source_path = replay_file;
    } else {
        throw ConfigError("unknown predictor kind: " + predictor);
    }
    config.validate();
    if (config.predictor.hash() != c.header.predictor_hash) {
        throw IntegrityError("predictor spec does not match the container header hash");
    }

    StreamDecoder dec(config);
    std::string recon;
    recon.reserve(c.header.T);
    if (config.mode == Mode::Sync) {
        for (const auto& slot : c.slots) {
            recon.push_back(static_cast<char>(dec.decode_slot(slot).reconstructed & 0xFF));
        }
    } else {
        BitReader reader(c.stream);
        for (std::uint64_t i = 0; i < c.header.T; ++i) {
            recon.push_back(static_cast<char>(dec.decode_next(reader).reconstructed & 0xFF));
        }
        if (reader.remaining() != 0) {
            throw IntegrityError("trailing bits after the last async codeword");
        }
    }
    py::dict info;
    info["T"] = c.header.T;
    info["payload_bits"] = c.header.payload_bits;
    info["mode"] = to_string(c.header.mode);
    info["alpha"] = c.header.alpha;
    return py::make_tuple(py::bytes(recon), info);
}

py::list py_run_trace(const py::bytes& data, const std::string& mode, double alpha, double eta1,
                      double beta, std::optional<double> gamma1, const std::string& predictor,
                      std::uint32_t order, const std::string& replay_file,
                      const std::string& coder, std::uint32_t alphabet) {
    CodecConfig config = build_config(mode, alpha, eta1, beta, gamma1, predictor, order,
                                      replay_file, coder, alphabet);
    std::vector<Symbol> symbols = to_symbols(data, alphabet);
    py::list rows;
    for (const auto& step : run_occ(symbols, config)) {
        py::dict d;
        d["t"] = step.t;
        d["covered"] = step.covered;
        d["outage"] = step.outage;
        d["bits"] = step.bits;
        d["gamma"] = step.gamma;
        d["threshold"] = step.threshold;
        d["set_size"] = step.set_size;
        d["reconstructed"] = step.reconstructed;
        rows.append(d);
    }
    return rows;
}

double py_coverage_bound(double eta1, double beta, std::uint64_t T) {
    ConformalConfig c;
    c.alpha = 0.5;
    c.eta1 = eta1;
    c.beta = beta;
    c.validate();
    return coverage_bound(c, T);
}

}  // namespace

PYBIND11_MODULE(_occ, m) {
    m.doc() = "Online conformal compression core";

    py::register_exception<ConfigError>(m, "OccConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "OccIoError", PyExc_IOError);
    py::register_exception<IntegrityError>(m, "OccIntegrityError", PyExc_RuntimeError);

    m.def("encode", &py_encode, py::arg("data"), py::arg("mode") = "sync",
          py::arg("alpha") = 0.1, py::arg("eta1") = 0.001, py::arg("beta") = 0.0,
          py::arg("gamma1") = std::nullopt, py::arg("predictor") = "context",
          py::arg("order") = 3, py::arg("replay_file") = "", py::arg("coder") = "shannon",
          py::arg("alphabet") = 256,
          "Compress bytes; returns (container_bytes, metrics_dict).");
    m.def("decode", &py_decode, py::arg("container"), py::arg("predictor") = "context",
          py::arg("order") = 3, py::arg("replay_file") = "",
          "Reconstruct from a container; returns (reconstruction_bytes, info_dict).");
    m.def("run_trace", &py_run_trace, py::arg("data"), py::arg("mode") = "sync",
          py::arg("alpha") = 0.1, py::arg("eta1") = 0.001, py::arg("beta") = 0.0,
          py::arg("gamma1") = std::nullopt, py::arg("predictor") = "context",
          py::arg("order") = 3, py::arg("replay_file") = "", py::arg("coder") = "shannon",
          py::arg("alphabet") = 256, "Encoder-side per-step trace as a list of dicts.");
    m.def("coverage_bound", &py_coverage_bound, py::arg("eta1"), py::arg("beta"), py::arg("T"),
          "Lemma 1 deviation bound (1 + eta1) / (eta1 * T^(1 - beta)).");
}
