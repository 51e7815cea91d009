#pragma once

#include "bcas/telemetry.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bcas {

/// Two-sided 95% normal quantile, double precision.
inline constexpr double kZ95 = 1.959963985;

struct WilsonInterval {
    double low = 0.0;
    double high = 1.0;
};

/// Wilson score interval for k successes in n trials. Exact 0/1 bounds at
/// k=0 and k=n. Throws DomainError outside 0 <= k <= n, n >= 1, z > 0.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z);

struct PairedInterval {
    double low = 0.0;
    double high = 0.0;
    double point = 0.0;   // variant accuracy - baseline accuracy
};

/// Confidence interval on the accuracy difference of two runs over the same
/// samples: Wilson intervals per arm combined square-and-add, with the
/// paired-correlation correction phi = (eh - fg) / sqrt of the marginal
/// product (0 when any marginal is empty), per Newcombe's 1998 paired
/// score method. Throws DomainError on length mismatch or empty input.
PairedInterval newcombe_paired_interval(const std::vector<bool>& baseline,
                                        const std::vector<bool>& variant, double z);

struct RunSummary {
    std::string config_id;
    std::uint64_t n_graded = 0;
    std::uint64_t n_correct = 0;
    std::uint64_t n_ungraded = 0;
    double accuracy_pct = 0.0;
    double wilson_low_pct = 0.0;
    double wilson_high_pct = 0.0;
    double mean_searches = 0.0;
    double mean_tokens_out = 0.0;
    double total_cost = 0.0;
};

/// Accuracy with Wilson bounds over graded records only; resource means over
/// every record. All records must belong to one config. Throws
/// NoGradedSamples when nothing was graded.
RunSummary aggregate(std::span<const QuestionRecord> records);

struct AblationDelta {
    std::string baseline_config;
    std::string variant_config;
    std::uint64_t n_pairs = 0;
    double delta_pp = 0.0;   // percentage points, variant - baseline
    double low_pp = 0.0;
    double high_pp = 0.0;
};

/// Paired delta between two runs over the same sample set (dataset digests
/// must match; SampleSetMismatch otherwise). Pairs are the samples graded in
/// both runs.
AblationDelta ablation_delta(std::span<const QuestionRecord> baseline,
                             std::span<const QuestionRecord> variant, double z = kZ95);

/// "+9.29" / "-3.10" / "+0.00"
std::string format_signed_pp(double pp);

std::string summary_table(std::span<const RunSummary> summaries);
std::string summary_csv(std::span<const RunSummary> summaries);
std::string delta_table(std::span<const AblationDelta> deltas);
std::string delta_csv(std::span<const AblationDelta> deltas);

} // namespace bcas
