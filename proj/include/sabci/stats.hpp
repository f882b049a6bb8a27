#ifndef SABCI_STATS_HPP
#define SABCI_STATS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sabci/dsp.hpp"
#include "sabci/matrix.hpp"
#include "sabci/protocol.hpp"

namespace sabci::stats {

enum class Condition { target, non_target };

const char* to_string(Condition c);

struct ERPAverage {
    Matrix mean; // C x T, microvolts
    std::size_t n_epochs = 0;
    Condition condition = Condition::target;
    std::size_t onset_index = 0;
    double sample_rate_hz = 0.0;
};

// Pointwise mean over epochs of one condition.
ERPAverage grand_average(std::span<const dsp::Epoch> epochs, Condition condition);

struct P300Score {
    double window_lo_ms = 250.0;
    double window_hi_ms = 500.0;
    std::vector<double> per_channel_mean_uv;
    std::vector<double> peak_latency_ms; // earliest argmax within the window
};

P300Score p300_score(const ERPAverage& erp, double window_lo_ms = 250.0,
                     double window_hi_ms = 500.0);

struct RankTestResult {
    double statistic = 0.0; // rank sum of the first sample (midranks)
    double p_value = 1.0;   // two-sided
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    bool exact = false;
};

// Wilcoxon rank-sum with midrank tie handling. Exact p by enumeration for
// n1+n2 <= 12, normal approximation with continuity correction otherwise.
RankTestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

// P(A < B) + P(A = B)/2 over independent draws; auc(a,b) + auc(b,a) == 1.
double auc(std::span<const double> a, std::span<const double> b);

struct SeparabilityResult {
    double auc = 0.5; // probability a target feature exceeds a non-target feature
    RankTestResult rank_test;
    std::vector<double> target_features;
    std::vector<double> nontarget_features;
};

// Window-mean features per epoch (channels averaged, or one channel when
// channel >= 0), scored with AUC and the rank-sum test.
SeparabilityResult separability(std::span<const dsp::Epoch> target_epochs,
                                std::span<const dsp::Epoch> nontarget_epochs,
                                double window_lo_ms = 250.0, double window_hi_ms = 500.0,
                                int channel = -1);

struct TableRow {
    std::string group;
    int targets = 0;
    int hits = 0;
    int false_alarms = 0;
    double ar_percent = 0.0;
    std::optional<double> art_ms;
    std::optional<double> sigma_ms;
};

enum class GroupBy { direction, timbre };

// Aggregates per-trial scores into rows shaped like the behavioral result
// tables: one row per direction or per stimulus type.
std::vector<TableRow> psychophysics_table(std::span<const protocol::TrialPlan> trials,
                                          std::span<const protocol::ResponseLog> logs,
                                          GroupBy group_by,
                                          const protocol::ResponseWindow& window = {});

} // namespace sabci::stats

#endif
