#include "occ/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace occ {

void ConformalConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (!(eta1 > 0.0)) throw ConfigError("eta1 must be positive");
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
    double g1 = resolved_gamma1();
    if (!(g1 >= 0.0 && g1 <= 1.0)) throw ConfigError("gamma1 must lie in [0, 1]");
}

double eta_at(const ConformalConfig& config, std::uint64_t t) {
    if (config.beta == 0.0) return config.eta1;
    return config.eta1 * std::pow(static_cast<double>(t), -config.beta);
}

double coverage_bound(const ConformalConfig& config, std::uint64_t T) {
    double denom = config.beta == 0.0
                       ? static_cast<double>(T)
                       : std::pow(static_cast<double>(T), 1.0 - config.beta);
    return (1.0 + config.eta1) / (config.eta1 * denom);
}

double ScoreMultiset::kth_largest(std::size_t k) const {
    return tree_.find_by_order(tree_.size() - k)->first;
}

std::vector<double> ScoreMultiset::sorted_ascending() const {
    std::vector<double> out;
    out.reserve(tree_.size());
    for (const auto& [score, tag] : tree_) out.push_back(score);
    return out;
}

bool ScoreMultiset::operator==(const ScoreMultiset& other) const {
    if (tree_.size() != other.tree_.size()) return false;
    auto a = tree_.begin();
    auto b = other.tree_.begin();
    for (; a != tree_.end(); ++a, ++b) {
        if (a->first != b->first) return false;
    }
    return true;
}

double empty_set_threshold() { return std::numeric_limits<double>::infinity(); }

double empirical_quantile(const ScoreMultiset& scores, double level) {
    if (scores.empty()) return kFullSetThreshold;
    if (level <= 0.0) return empty_set_threshold();
    if (level >= 1.0) return kFullSetThreshold;
    auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(scores.size())));
    if (k < 1) k = 1;
    if (k > scores.size()) k = scores.size();
    return scores.kth_largest(k);
}

bool PredictionSet::contains(Symbol x) const {
    return std::binary_search(members.begin(), members.end(), x);
}

PredictionSet build_set(const PredictiveDistribution& dist, double threshold) {
    PredictionSet set;
    set.threshold = threshold;
    const auto n = static_cast<Symbol>(dist.probs.size());
    for (Symbol x = 0; x < n; ++x) {
        if (dist.probs[x] >= threshold) set.members.push_back(x);
    }
    return set;
}

ConformalTracker::ConformalTracker(const ConformalConfig& config, bool freeze_gamma)
    : config_(config), freeze_gamma_(freeze_gamma), gamma_(config.resolved_gamma1()) {
    config_.validate();
}

void ConformalTracker::update(const PredictiveDistribution& dist, Symbol score_symbol,
                              bool covered) {
    double err = covered ? 0.0 : 1.0;
    if (!freeze_gamma_) gamma_ -= eta_at(config_, t_) * (err - config_.alpha);
    scores_.insert(dist.probs.at(score_symbol));
    if (!covered) ++miscoverages_;
    ++t_;
}

bool ConformalTracker::state_equals(const ConformalTracker& other) const {
    return gamma_ == other.gamma_ && t_ == other.t_ && miscoverages_ == other.miscoverages_ &&
           scores_ == other.scores_;
}

}  // namespace occ
