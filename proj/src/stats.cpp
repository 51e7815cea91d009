#include "bcas/stats.hpp"

#include "bcas/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace bcas {

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials < 1) {
        throw DomainError("wilson_interval: trials must be >= 1");
    }
    if (successes > trials) {
        throw DomainError("wilson_interval: successes must be <= trials");
    }
    if (!(z > 0.0)) {
        throw DomainError("wilson_interval: z must be > 0");
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;

    WilsonInterval out;
    out.low = successes == 0 ? 0.0 : std::max(0.0, center - half);
    out.high = successes == trials ? 1.0 : std::min(1.0, center + half);
    return out;
}

PairedInterval newcombe_paired_interval(const std::vector<bool>& baseline,
                                        const std::vector<bool>& variant, double z) {
    if (baseline.size() != variant.size()) {
        throw DomainError("newcombe_paired_interval: paired vectors differ in length");
    }
    if (baseline.empty()) {
        throw DomainError("newcombe_paired_interval: need at least one pair");
    }

    std::uint64_t e = 0, f = 0, g = 0, h = 0;   // 2x2 paired table
    for (std::size_t i = 0; i < baseline.size(); ++i) {
        if (baseline[i] && variant[i]) ++e;
        else if (!baseline[i] && variant[i]) ++f;
        else if (baseline[i] && !variant[i]) ++g;
        else ++h;
    }
    const std::uint64_t n = baseline.size();
    const std::uint64_t k_base = e + g;
    const std::uint64_t k_var = e + f;
    const double nn = static_cast<double>(n);
    const double p_base = static_cast<double>(k_base) / nn;
    const double p_var = static_cast<double>(k_var) / nn;
    const double point = p_var - p_base;

    const WilsonInterval w_base = wilson_interval(k_base, n, z);
    const WilsonInterval w_var = wilson_interval(k_var, n, z);

    double phi = 0.0;
    const double marginals = static_cast<double>(k_base) * static_cast<double>(n - k_base) *
                             static_cast<double>(k_var) * static_cast<double>(n - k_var);
    if (marginals > 0.0) {
        phi = (static_cast<double>(e) * static_cast<double>(h) -
               static_cast<double>(f) * static_cast<double>(g)) /
              std::sqrt(marginals);
    }

    const double dl_var = p_var - w_var.low;
    const double du_base = w_base.high - p_base;
    const double du_var = w_var.high - p_var;
    const double dl_base = p_base - w_base.low;

    PairedInterval out;
    out.point = point;
    out.low = point - std::sqrt(std::max(
                          0.0, dl_var * dl_var - 2.0 * phi * dl_var * du_base + du_base * du_base));
    out.high = point + std::sqrt(std::max(
                           0.0, du_var * du_var - 2.0 * phi * du_var * dl_base + dl_base * dl_base));
    out.low = std::max(-1.0, out.low);
    out.high = std::min(1.0, out.high);
    return out;
}

RunSummary aggregate(std::span<const QuestionRecord> records) {
    RunSummary summary;
    double searches = 0.0;
    double tokens_out = 0.0;
    for (const QuestionRecord& record : records) {
        if (summary.config_id.empty()) {
            summary.config_id = record.config_id;
        } else if (summary.config_id != record.config_id) {
            throw DomainError("aggregate: records span multiple configs (" + summary.config_id +
                              " vs " + record.config_id + ")");
        }
        if (record.graded()) {
            ++summary.n_graded;
            if (record.verdict->correct) {
                ++summary.n_correct;
            }
        } else {
            ++summary.n_ungraded;
        }
        searches += static_cast<double>(record.searches_used);
        tokens_out += static_cast<double>(record.tokens_out);
        summary.total_cost += record.cost;
    }
    if (summary.n_graded == 0) {
        throw NoGradedSamples("aggregate: no graded records");
    }
    summary.accuracy_pct =
        100.0 * static_cast<double>(summary.n_correct) / static_cast<double>(summary.n_graded);
    const WilsonInterval wilson = wilson_interval(summary.n_correct, summary.n_graded, kZ95);
    summary.wilson_low_pct = 100.0 * wilson.low;
    summary.wilson_high_pct = 100.0 * wilson.high;
    if (!records.empty()) {
        summary.mean_searches = searches / static_cast<double>(records.size());
        summary.mean_tokens_out = tokens_out / static_cast<double>(records.size());
    }
    return summary;
}

AblationDelta ablation_delta(std::span<const QuestionRecord> baseline,
                             std::span<const QuestionRecord> variant, double z) {
    const auto digest_of = [](std::span<const QuestionRecord> records, const char* side) {
        std::string digest;
        for (const QuestionRecord& record : records) {
            if (digest.empty()) {
                digest = record.dataset_digest;
            } else if (digest != record.dataset_digest) {
                throw SampleSetMismatch(std::string("ablation_delta: mixed dataset digests in ") +
                                        side + " run");
            }
        }
        return digest;
    };
    const std::string base_digest = digest_of(baseline, "baseline");
    const std::string var_digest = digest_of(variant, "variant");
    if (base_digest != var_digest) {
        throw SampleSetMismatch("ablation_delta: dataset digests differ (" + base_digest + " vs " +
                                var_digest + ")");
    }

    std::map<std::string, bool> base_verdicts;
    for (const QuestionRecord& record : baseline) {
        if (record.graded()) {
            base_verdicts.emplace(record.sample_id, record.verdict->correct);
        }
    }
    std::vector<bool> base_vec;
    std::vector<bool> var_vec;
    std::map<std::string, bool> var_verdicts;
    for (const QuestionRecord& record : variant) {
        if (record.graded()) {
            var_verdicts.emplace(record.sample_id, record.verdict->correct);
        }
    }
    for (const auto& [sample_id, correct] : base_verdicts) {
        const auto it = var_verdicts.find(sample_id);
        if (it == var_verdicts.end()) {
            continue;   // ungraded on one side drops the pair
        }
        base_vec.push_back(correct);
        var_vec.push_back(it->second);
    }
    if (base_vec.empty()) {
        throw NoGradedSamples("ablation_delta: no samples graded in both runs");
    }

    AblationDelta delta;
    delta.baseline_config = baseline.empty() ? "" : baseline.front().config_id;
    delta.variant_config = variant.empty() ? "" : variant.front().config_id;
    delta.n_pairs = base_vec.size();
    const PairedInterval interval = newcombe_paired_interval(base_vec, var_vec, z);
    delta.delta_pp = 100.0 * interval.point;
    delta.low_pp = 100.0 * interval.low;
    delta.high_pp = 100.0 * interval.high;
    return delta;
}

std::string format_signed_pp(double pp) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.2f", pp);
    return buf;
}

// ---------------------------------------------------------------------------
// Tables

namespace {

std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

std::string pad(const std::string& text, std::size_t width) {
    if (text.size() >= width) {
        return text;
    }
    return text + std::string(width - text.size(), ' ');
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        widths.resize(std::max(widths.size(), row.size()), 0);
        for (std::size_t i = 0; i < row.size(); ++i) {
            widths[i] = std::max(widths[i], row[i].size());
        }
    }
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += pad(row[i], widths[i]);
            if (i + 1 < row.size()) {
                out += "  ";
            }
        }
        out += '\n';
    }
    return out;
}

} // namespace

std::string summary_table(std::span<const RunSummary> summaries) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"config", "n", "correct", "ungraded", "accuracy%", "wilson_low%",
                    "wilson_high%", "mean_searches", "mean_tokens_out", "total_cost"});
    for (const RunSummary& s : summaries) {
        rows.push_back({s.config_id, std::to_string(s.n_graded), std::to_string(s.n_correct),
                        std::to_string(s.n_ungraded), fixed(s.accuracy_pct, 2),
                        fixed(s.wilson_low_pct, 2), fixed(s.wilson_high_pct, 2),
                        fixed(s.mean_searches, 2), fixed(s.mean_tokens_out, 1),
                        fixed(s.total_cost, 6)});
    }
    return render_table(rows);
}

std::string summary_csv(std::span<const RunSummary> summaries) {
    std::string out = "config_id,n_graded,n_correct,n_ungraded,accuracy_pct,wilson_low_pct,"
                      "wilson_high_pct,mean_searches,mean_tokens_out,total_cost\n";
    for (const RunSummary& s : summaries) {
        out += s.config_id + ',' + std::to_string(s.n_graded) + ',' + std::to_string(s.n_correct) +
               ',' + std::to_string(s.n_ungraded) + ',' + fixed(s.accuracy_pct, 4) + ',' +
               fixed(s.wilson_low_pct, 4) + ',' + fixed(s.wilson_high_pct, 4) + ',' +
               fixed(s.mean_searches, 4) + ',' + fixed(s.mean_tokens_out, 4) + ',' +
               fixed(s.total_cost, 8) + '\n';
    }
    return out;
}

std::string delta_table(std::span<const AblationDelta> deltas) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"baseline", "variant", "pairs", "delta_pp", "ci_low_pp", "ci_high_pp"});
    for (const AblationDelta& d : deltas) {
        rows.push_back({d.baseline_config, d.variant_config, std::to_string(d.n_pairs),
                        format_signed_pp(d.delta_pp), format_signed_pp(d.low_pp),
                        format_signed_pp(d.high_pp)});
    }
    return render_table(rows);
}

std::string delta_csv(std::span<const AblationDelta> deltas) {
    std::string out = "baseline_config,variant_config,n_pairs,delta_pp,ci_low_pp,ci_high_pp\n";
    for (const AblationDelta& d : deltas) {
        out += d.baseline_config + ',' + d.variant_config + ',' + std::to_string(d.n_pairs) + ',' +
               format_signed_pp(d.delta_pp) + ',' + format_signed_pp(d.low_pp) + ',' +
               format_signed_pp(d.high_pp) + '\n';
    }
    return out;
}

} // namespace bcas
