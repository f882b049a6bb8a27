#include "sabci/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "sabci/error.hpp"
#include "sabci/numeric.hpp"

namespace sabci::stats {

namespace {

// Sample indices covered by a post-stimulus window in milliseconds,
// inclusive on both ends.
std::pair<std::size_t, std::size_t> window_indices(std::size_t onset_index, std::size_t total,
                                                   double sample_rate_hz, double lo_ms,
                                                   double hi_ms) {
    if (!(lo_ms >= 0.0) || !(hi_ms > lo_ms))
        fail(ErrorKind::invalid_argument, "window must satisfy 0 <= lo < hi");
    const auto lo =
        onset_index + static_cast<std::size_t>(std::llround(lo_ms / 1000.0 * sample_rate_hz));
    const auto hi =
        onset_index + static_cast<std::size_t>(std::llround(hi_ms / 1000.0 * sample_rate_hz));
    if (hi >= total)
        fail(ErrorKind::invalid_argument, "window extends past the epoch's post-stimulus range");
    return {lo, hi};
}

double epoch_window_feature(const dsp::Epoch& epoch, double lo_ms, double hi_ms, int channel) {
    const auto [lo, hi] = window_indices(epoch.onset_index, epoch.samples.samples(),
                                         epoch.sample_rate_hz, lo_ms, hi_ms);
    double acc = 0.0;
    std::size_t count = 0;
    const std::size_t c_begin = channel >= 0 ? static_cast<std::size_t>(channel) : 0;
    const std::size_t c_end =
        channel >= 0 ? static_cast<std::size_t>(channel) + 1 : epoch.samples.channels();
    if (c_end > epoch.samples.channels())
        fail(ErrorKind::invalid_argument, "channel index out of range");
    for (std::size_t c = c_begin; c < c_end; ++c) {
        const auto row = epoch.samples.row(c);
        for (std::size_t t = lo; t <= hi; ++t) {
            acc += row[t];
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

// Distribution of the scaled rank sum over all n1-subsets, by subset-sum
// counting. Midranks are halves, so doubling makes them integers.
struct ExactRankSum {
    std::vector<std::vector<double>> count; // count[k][s], s = doubled rank sum
    double total_combinations = 0.0;

    ExactRankSum(const std::vector<double>& ranks, std::size_t n1) {
        std::vector<long long> scaled;
        long long sum_all = 0;
        for (double r : ranks) {
            scaled.push_back(std::llround(2.0 * r));
            sum_all += scaled.back();
        }
        count.assign(n1 + 1, std::vector<double>(sum_all + 1, 0.0));
        count[0][0] = 1.0;
        for (long long value : scaled) {
            for (std::size_t k = std::min(n1, count.size() - 1); k >= 1; --k) {
                auto& row = count[k];
                const auto& prev = count[k - 1];
                for (long long s = sum_all; s >= value; --s)
                    if (prev[s - value] > 0.0) row[s] += prev[s - value];
                if (k == 1) break;
            }
        }
        for (double c : count[n1]) total_combinations += c;
    }

    double prob_le(long long s) const {
        double acc = 0.0;
        const auto& row = count.back();
        for (long long v = 0; v <= s && v < static_cast<long long>(row.size()); ++v)
            acc += row[v];
        return acc / total_combinations;
    }

    double prob_ge(long long s) const {
        double acc = 0.0;
        const auto& row = count.back();
        for (long long v = std::max<long long>(s, 0); v < static_cast<long long>(row.size()); ++v)
            acc += row[v];
        return acc / total_combinations;
    }
};

} // namespace

const char* to_string(Condition c) {
    return c == Condition::target ? "target" : "non_target";
}

ERPAverage grand_average(std::span<const dsp::Epoch> epochs, Condition condition) {
    if (epochs.empty())
        fail(ErrorKind::invalid_argument, "grand average needs at least one epoch");

    const Matrix& first = epochs.front().samples;
    ERPAverage erp;
    erp.mean = Matrix(first.channels(), first.samples());
    erp.n_epochs = epochs.size();
    erp.condition = condition;
    erp.onset_index = epochs.front().onset_index;
    erp.sample_rate_hz = epochs.front().sample_rate_hz;

    for (const dsp::Epoch& epoch : epochs) {
        if (!epoch.samples.same_shape(first) || epoch.onset_index != erp.onset_index)
            fail(ErrorKind::invalid_argument, "epoch shapes differ");
        erp.mean += epoch.samples;
    }
    erp.mean *= 1.0 / static_cast<double>(epochs.size());
    return erp;
}

P300Score p300_score(const ERPAverage& erp, double window_lo_ms, double window_hi_ms) {
    const auto [lo, hi] = window_indices(erp.onset_index, erp.mean.samples(),
                                         erp.sample_rate_hz, window_lo_ms, window_hi_ms);
    P300Score score;
    score.window_lo_ms = window_lo_ms;
    score.window_hi_ms = window_hi_ms;
    for (std::size_t c = 0; c < erp.mean.channels(); ++c) {
        const auto row = erp.mean.row(c);
        double acc = 0.0;
        std::size_t best = lo;
        for (std::size_t t = lo; t <= hi; ++t) {
            acc += row[t];
            if (row[t] > row[best]) best = t; // strict: earliest index wins ties
        }
        score.per_channel_mean_uv.push_back(acc / static_cast<double>(hi - lo + 1));
        score.peak_latency_ms.push_back(
            static_cast<double>(best - erp.onset_index) * 1000.0 / erp.sample_rate_hz);
    }
    return score;
}

RankTestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        fail(ErrorKind::invalid_argument, "rank-sum test needs nonempty samples");

    const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
    std::vector<double> combined(a.begin(), a.end());
    combined.insert(combined.end(), b.begin(), b.end());
    const std::vector<double> ranks = numeric::midranks(combined);

    double w = 0.0;
    for (std::size_t i = 0; i < n1; ++i) w += ranks[i];

    RankTestResult result;
    result.statistic = w;
    result.n1 = n1;
    result.n2 = n2;

    if (n <= 12) {
        result.exact = true;
        const ExactRankSum dist(ranks, n1);
        const long long w2 = std::llround(2.0 * w);
        const double p = 2.0 * std::min(dist.prob_le(w2), dist.prob_ge(w2));
        result.p_value = std::min(1.0, p);
        return result;
    }

    // normal approximation with tie-corrected variance and continuity correction
    std::map<double, std::size_t> tie_counts;
    for (double v : combined) ++tie_counts[v];
    double tie_term = 0.0;
    for (const auto& [value, t] : tie_counts) {
        (void)value;
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double nd = static_cast<double>(n);
    const double mu = static_cast<double>(n1) * (nd + 1.0) / 2.0;
    const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                       ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (var <= 0.0) {
        result.p_value = 1.0; // every observation tied
        return result;
    }
    const double diff = w - mu;
    const double correction = diff > 0.0 ? -0.5 : (diff < 0.0 ? 0.5 : 0.0);
    const double z = (diff + correction) / std::sqrt(var);
    result.p_value = std::min(1.0, 2.0 * numeric::normal_cdf(-std::abs(z)));
    return result;
}

double auc(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        fail(ErrorKind::invalid_argument, "AUC needs nonempty samples");
    std::vector<double> combined(a.begin(), a.end());
    combined.insert(combined.end(), b.begin(), b.end());
    const std::vector<double> ranks = numeric::midranks(combined);
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w += ranks[i];
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double u_a = w - n1 * (n1 + 1.0) / 2.0; // pairs with a > b, ties half
    return 1.0 - u_a / (n1 * n2);
}

SeparabilityResult separability(std::span<const dsp::Epoch> target_epochs,
                                std::span<const dsp::Epoch> nontarget_epochs,
                                double window_lo_ms, double window_hi_ms, int channel) {
    if (target_epochs.size() < 2 || nontarget_epochs.size() < 2)
        fail(ErrorKind::invalid_argument, "separability needs at least 2 epochs per condition");

    SeparabilityResult result;
    for (const dsp::Epoch& e : target_epochs)
        result.target_features.push_back(
            epoch_window_feature(e, window_lo_ms, window_hi_ms, channel));
    for (const dsp::Epoch& e : nontarget_epochs)
        result.nontarget_features.push_back(
            epoch_window_feature(e, window_lo_ms, window_hi_ms, channel));

    // P(target feature > non-target feature)
    result.auc = auc(result.nontarget_features, result.target_features);
    result.rank_test = wilcoxon_rank_sum(result.target_features, result.nontarget_features);
    return result;
}

std::vector<TableRow> psychophysics_table(std::span<const protocol::TrialPlan> trials,
                                          std::span<const protocol::ResponseLog> logs,
                                          GroupBy group_by,
                                          const protocol::ResponseWindow& window) {
    if (trials.size() != logs.size())
        fail(ErrorKind::invalid_argument, "one response log per trial required");

    struct GroupStats {
        int targets = 0, hits = 0, false_alarms = 0;
        std::vector<double> latencies;
    };
    std::map<std::string, GroupStats> groups;
    std::vector<std::string> order; // first-seen order of group labels

    auto label_for = [&](const protocol::TrialPlan& trial) {
        if (group_by == GroupBy::timbre) return std::string(protocol::to_string(trial.timbre));
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", trial.target_key.direction_deg);
        return std::string(buf);
    };

    for (std::size_t i = 0; i < trials.size(); ++i) {
        const protocol::ScoreResult score = protocol::score_responses(trials[i], logs[i], window);
        const std::string label = label_for(trials[i]);
        if (groups.find(label) == groups.end()) order.push_back(label);
        GroupStats& g = groups[label];
        g.targets += score.targets;
        g.hits += score.hits;
        g.false_alarms += score.false_alarms;
        g.latencies.insert(g.latencies.end(), score.hit_latencies_ms.begin(),
                           score.hit_latencies_ms.end());
    }

    std::vector<TableRow> rows;
    for (const std::string& label : order) {
        const GroupStats& g = groups[label];
        if (g.targets == 0) continue; // empty group: omitted
        TableRow row;
        row.group = label;
        row.targets = g.targets;
        row.hits = g.hits;
        row.false_alarms = g.false_alarms;
        row.ar_percent = 100.0 * g.hits / static_cast<double>(g.targets);
        if (!g.latencies.empty()) {
            row.art_ms = numeric::mean(g.latencies);
            row.sigma_ms = numeric::population_stdev(g.latencies);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace sabci::stats
