#include "occ/predictor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace occ {

bool PredictiveDistribution::valid(double tol) const {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) return false;
        sum += p;
    }
    return std::fabs(sum - 1.0) <= tol;
}

void floor_and_normalize(std::vector<double>& probs) {
    double sum = 0.0;
    for (double& p : probs) {
        if (p < kProbFloor) p = kProbFloor;
        sum += p;
    }
    for (double& p : probs) p /= sum;
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed) {
    const auto* bytes = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

void PredictorSpec::validate() const {
    if (alphabet_size < 2) throw ConfigError("alphabet_size must be at least 2");
    if (kind == PredictorKind::ContextModel) {
        if (!(smoothing > 0.0)) throw ConfigError("smoothing constant must be positive");
        // Contexts are keyed exactly as base-|X| integers; cap the key range.
        long double span = 1.0L;
        for (std::uint32_t i = 0; i < order; ++i) span *= alphabet_size;
        if (span > 9.2e18L) throw ConfigError("alphabet_size^order too large for context keys");
    }
    if (kind == PredictorKind::Replay && source_path.empty()) {
        throw ConfigError("replay predictor needs a source file");
    }
}

std::string PredictorSpec::canonical_string() const {
    std::ostringstream os;
    switch (kind) {
        case PredictorKind::Uniform:
            os << "uniform/alphabet=" << alphabet_size;
            break;
        case PredictorKind::ContextModel:
            os << "context_model/order=" << order << "/smoothing=" << smoothing
               << "/alphabet=" << alphabet_size;
            break;
        case PredictorKind::Replay: {
            std::ifstream in(source_path, std::ios::binary);
            if (!in) throw IoError("cannot open replay file: " + source_path);
            std::ostringstream content;
            content << in.rdbuf();
            std::string body = content.str();
            os << "replay/alphabet=" << alphabet_size
               << "/content=" << fnv1a64(body.data(), body.size());
            break;
        }
    }
    return os.str();
}

std::uint64_t PredictorSpec::hash() const {
    std::string s = canonical_string();
    return fnv1a64(s.data(), s.size());
}

namespace {

class UniformPredictor final : public Predictor {
public:
    explicit UniformPredictor(std::uint32_t alphabet_size) : Predictor(alphabet_size) {}

    PredictiveDistribution predict() const override {
        PredictiveDistribution d;
        d.probs.assign(alphabet_size(), 1.0 / alphabet_size());
        return d;
    }

    void feed(Symbol sym) override { check_symbol(sym); }
};

// Order-k adaptive context model: KT estimates at each order 0..k, blended
// back to lower orders with weight n/(n+1) per context so unseen contexts
// defer entirely to shorter ones.
class ContextModelPredictor final : public Predictor {
public:
    ContextModelPredictor(std::uint32_t alphabet_size, std::uint32_t order, double smoothing)
        : Predictor(alphabet_size),
          order_(order),
          smoothing_(smoothing),
          counts0_(alphabet_size, 0),
          maps_(order) {}

    PredictiveDistribution predict() const override {
        const std::uint32_t a = alphabet_size();
        PredictiveDistribution d;
        d.probs.assign(a, 0.0);
        // Order 0 KT estimate.
        {
            double denom = static_cast<double>(total0_) + smoothing_ * a;
            for (std::uint32_t x = 0; x < a; ++x) {
                d.probs[x] = (counts0_[x] + smoothing_) / denom;
            }
        }
        for (std::uint32_t j = 1; j <= order_ && j <= history_.size(); ++j) {
            const Node* node = find_node(j);
            if (node == nullptr || node->total == 0) continue;
            double w = static_cast<double>(node->total) / (node->total + 1.0);
            double denom = static_cast<double>(node->total) + smoothing_ * a;
            double unseen = w * (smoothing_ / denom);
            double keep = 1.0 - w;
            for (std::uint32_t x = 0; x < a; ++x) {
                d.probs[x] = keep * d.probs[x] + unseen;
            }
            for (const auto& [sym, c] : node->counts) {
                d.probs[sym] += w * (static_cast<double>(c) / denom);
            }
        }
        floor_and_normalize(d.probs);
        return d;
    }

    void feed(Symbol sym) override {
        check_symbol(sym);
        counts0_[sym] += 1;
        total0_ += 1;
        for (std::uint32_t j = 1; j <= order_ && j <= history_.size(); ++j) {
            Node& node = maps_[j - 1][context_key(j)];
            auto it = std::lower_bound(
                node.counts.begin(), node.counts.end(), sym,
                [](const auto& e, Symbol s) { return e.first < s; });
            if (it != node.counts.end() && it->first == sym) {
                it->second += 1;
            } else {
                node.counts.insert(it, {sym, 1});
            }
            node.total += 1;
        }
        history_.push_back(sym);
        if (history_.size() > order_) history_.erase(history_.begin());
    }

private:
    struct Node {
        std::uint64_t total = 0;
        std::vector<std::pair<Symbol, std::uint32_t>> counts;  // sorted by symbol
    };

    // Last j fed symbols packed as a base-|alphabet| integer.
    std::uint64_t context_key(std::uint32_t j) const {
        std::uint64_t key = 0;
        for (std::size_t i = history_.size() - j; i < history_.size(); ++i) {
            key = key * alphabet_size() + history_[i];
        }
        return key;
    }

    const Node* find_node(std::uint32_t j) const {
        const auto& m = maps_[j - 1];
        auto it = m.find(context_key(j));
        return it == m.end() ? nullptr : &it->second;
    }

    std::uint32_t order_;
    double smoothing_;
    std::vector<std::uint64_t> counts0_;
    std::uint64_t total0_ = 0;
    std::vector<std::unordered_map<std::uint64_t, Node>> maps_;  // maps_[j-1]: order-j contexts
    std::vector<Symbol> history_;                                // last `order_` symbols
};

class ReplayPredictor final : public Predictor {
public:
    ReplayPredictor(std::uint32_t alphabet_size, const std::string& path)
        : Predictor(alphabet_size) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open replay file: " + path);
        std::string tag;
        std::uint32_t file_alphabet = 0;
        std::uint64_t rows = 0;
        in >> tag >> file_alphabet >> rows;
        if (!in || tag != "occ-replay-v1") {
            throw IntegrityError("bad replay file header (want occ-replay-v1): " + path);
        }
        if (file_alphabet != alphabet_size) {
            throw ConfigError("replay file alphabet does not match predictor spec");
        }
        rows_.reserve(rows);
        std::string line;
        std::getline(in, line);  // rest of header line
        for (std::uint64_t r = 0; r < rows; ++r) {
            if (!std::getline(in, line)) throw IntegrityError("replay file truncated: " + path);
            std::vector<double> row = parse_row(line, alphabet_size, r);
            PredictiveDistribution d{row};
            if (!d.valid()) {
                throw IntegrityError("replay row " + std::to_string(r + 1) +
                                     " is not a probability distribution");
            }
            floor_and_normalize(row);
            rows_.push_back(std::move(row));
        }
    }

    PredictiveDistribution predict() const override {
        if (cursor_ >= rows_.size()) {
            throw StreamEndError("replay predictor exhausted after " +
                                 std::to_string(rows_.size()) + " steps");
        }
        return PredictiveDistribution{rows_[cursor_]};
    }

    // Pure playback: fed symbols only advance the cursor.
    void feed(Symbol sym) override {
        check_symbol(sym);
        ++cursor_;
    }

private:
    static std::vector<double> parse_row(const std::string& line, std::uint32_t alphabet,
                                         std::uint64_t row) {
        std::vector<double> out;
        out.reserve(alphabet);
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
            if (p >= end) break;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) {
                throw IntegrityError("replay row " + std::to_string(row + 1) + " is unparsable");
            }
            out.push_back(v);
            p = next;
        }
        if (out.size() != alphabet) {
            throw IntegrityError("replay row " + std::to_string(row + 1) +
                                 " has wrong entry count");
        }
        return out;
    }

    std::vector<std::vector<double>> rows_;
    std::size_t cursor_ = 0;
};

}  // namespace

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case PredictorKind::Uniform:
            return std::make_unique<UniformPredictor>(spec.alphabet_size);
        case PredictorKind::ContextModel:
            return std::make_unique<ContextModelPredictor>(spec.alphabet_size, spec.order,
                                                           spec.smoothing);
        case PredictorKind::Replay:
            return std::make_unique<ReplayPredictor>(spec.alphabet_size, spec.source_path);
    }
    throw ConfigError("unknown predictor kind");
}

void write_replay_file(const std::string& path, std::uint32_t alphabet_size,
                       const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write replay file: " + path);
    out << "occ-replay-v1 " << alphabet_size << ' ' << rows.size() << '\n';
    char buf[64];
    for (const auto& row : rows) {
        if (row.size() != alphabet_size) throw ConfigError("replay row has wrong entry count");
        for (std::size_t i = 0; i < row.size(); ++i) {
            auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), row[i],
                                           std::chars_format::general, 17);
            if (ec != std::errc()) throw Error("to_chars failed");
            if (i) out << ' ';
            out.write(buf, end - buf);
        }
        out << '\n';
    }
    if (!out.good()) throw IoError("write failed: " + path);
}

}  // namespace occ
