#pragma once

#include <cstdint>
#include <span>

#include "htlcsim/model.hpp"

namespace htlcsim {

/// Across-batch summary of one output measure. Undefined measures (e.g. mean
/// payment time when no batch held a success) carry n_batches == 0 and NaN
/// moments.
struct MeasureStats {
    double mean = 0;
    double variance = 0;
    double ci95_low = 0;
    double ci95_high = 0;
    std::uint32_t n_batches = 0;
};

enum class Outcome : std::uint8_t {
    success,
    fail_no_route,
    fail_unbalanced,
    fail_uncooperative,
    fail_timeout,
    unknown,
};
inline constexpr std::size_t kOutcomeCount = 6;

const char* to_string(Outcome o);

/// Maps a finalized record to exactly one outcome category. Throws
/// std::invalid_argument on a pending record.
Outcome classify(const Payment& record);

struct SimStatistics {
    MeasureStats p_success;
    MeasureStats p_fail_no_route;
    MeasureStats p_fail_unbalanced;
    MeasureStats p_fail_uncooperative;
    MeasureStats p_fail_timeout;
    MeasureStats p_unknown;
    MeasureStats payment_time_ms;  // successful payments only
    MeasureStats attempts;         // all finalized payments
    MeasureStats route_length;     // successful payments only
};

/// Batch means over records ordered by start time: the records are split
/// into warmup_batches + n_batches contiguous equal-count batches, the
/// warmup batches are dropped, each measure is computed per batch, and the
/// across-batch mean, sample variance and Student-t 95% confidence interval
/// are reported. Probability intervals are clamped to [0, 1].
/// Throws std::invalid_argument if fewer records than batches.
SimStatistics batch_means(std::span<const Payment> records, std::uint32_t n_batches,
                          std::uint32_t warmup_batches);

/// Two-sided 95% Student-t critical value for df degrees of freedom.
double student_t_975(std::uint32_t df);

}  // namespace htlcsim
