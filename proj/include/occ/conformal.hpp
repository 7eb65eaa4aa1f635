#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <ext/pb_ds/assoc_container.hpp>
#include <ext/pb_ds/tree_policy.hpp>

#include "occ/errors.hpp"
#include "occ/predictor.hpp"

namespace occ {

struct ConformalConfig {
    double alpha = 0.1;
    std::optional<double> gamma1;  // defaults to alpha when unset
    double eta1 = 0.001;
    double beta = 0.0;

    void validate() const;
    double resolved_gamma1() const { return gamma1 ? *gamma1 : alpha; }
};

// Learning rate schedule eta_t = eta1 * t^{-beta}.
double eta_at(const ConformalConfig& config, std::uint64_t t);

// Lemma 1 deviation bound (1 + eta1) / (eta1 * T^{1-beta}).
double coverage_bound(const ConformalConfig& config, std::uint64_t T);

// Ordered multiset of past scores with O(log n) insert and order-statistic
// selection.
class ScoreMultiset {
public:
    void insert(double score) { tree_.insert({score, counter_++}); }
    std::size_t size() const { return tree_.size(); }
    bool empty() const { return tree_.empty(); }

    // 1-based; k in [1, size].
    double kth_largest(std::size_t k) const;

    std::vector<double> sorted_ascending() const;
    bool operator==(const ScoreMultiset& other) const;

private:
    using Tree = __gnu_pbds::tree<std::pair<double, std::uint64_t>, __gnu_pbds::null_type,
                                  std::less<std::pair<double, std::uint64_t>>,
                                  __gnu_pbds::rb_tree_tag,
                                  __gnu_pbds::tree_order_statistics_node_update>;
    Tree tree_;
    std::uint64_t counter_ = 0;
};

// Threshold sentinels: 0.0 admits the whole alphabet (all probabilities are
// nonnegative), +infinity admits nothing.
inline constexpr double kFullSetThreshold = 0.0;
double empty_set_threshold();

// Eq. (5) with out-of-range saturation: empty scores or level >= 1 give the
// full-set sentinel, level <= 0 gives the empty-set sentinel, otherwise the
// ceil(level * n)-th largest stored score.
double empirical_quantile(const ScoreMultiset& scores, double level);

struct PredictionSet {
    std::vector<Symbol> members;  // ascending
    double threshold = 0.0;

    bool contains(Symbol x) const;
    bool empty() const { return members.empty(); }
    bool full(std::uint32_t alphabet_size) const { return members.size() == alphabet_size; }
    std::size_t size() const { return members.size(); }
};

// Eq. (4): membership by probs[x] >= threshold.
PredictionSet build_set(const PredictiveDistribution& dist, double threshold);

// Quantile level, score history, and the Eq. (6) update in one state machine.
// freeze_gamma pins gamma_t to gamma1 (the BCC baseline) while the score
// history still grows per Eq. (5).
class ConformalTracker {
public:
    explicit ConformalTracker(const ConformalConfig& config, bool freeze_gamma = false);

    double gamma() const { return gamma_; }
    std::uint64_t t() const { return t_; }
    std::uint64_t miscoverages() const { return miscoverages_; }
    const ScoreMultiset& scores() const { return scores_; }
    const ConformalConfig& config() const { return config_; }

    double threshold() const { return empirical_quantile(scores_, 1.0 - gamma_); }
    PredictionSet make_set(const PredictiveDistribution& dist) const {
        return build_set(dist, threshold());
    }

    // Eq. (6) with err = !covered, then appends probs[score_symbol] to the
    // score history. gamma is never clamped.
    void update(const PredictiveDistribution& dist, Symbol score_symbol, bool covered);

    bool state_equals(const ConformalTracker& other) const;

private:
    ConformalConfig config_;
    bool freeze_gamma_;
    double gamma_;
    ScoreMultiset scores_;
    std::uint64_t t_ = 1;
    std::uint64_t miscoverages_ = 0;
};

}  // namespace occ
